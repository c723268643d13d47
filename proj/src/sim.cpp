#include "corm/sim.hpp"
#include "corm/errors.hpp"
#include "corm/integrability.hpp"
#include "corm/tails.hpp"

#include <algorithm>
#include <cmath>

namespace corm::sim {

std::vector<double> ferguson_klass_jumps(const DirectingMeasure& directing,
                                         double base_mass,
                                         const Truncation& trunc,
                                         rng::Stream& stream) {
    if (!(base_mass > 0.0)) throw NonPositiveParameter("base mass must be positive");
    if (!(trunc.eps > 0.0)) throw NonPositiveParameter("truncation eps must be positive");

    std::vector<double> jumps;
    double arrival = 0.0;
    for (;;) {
        arrival += stream.exponential();
        const double z = directing.inverse_tail(arrival / base_mass);
        if (!(z >= trunc.eps)) break;
        if (jumps.size() >= trunc.max_atoms) {
            if (trunc.strict_eps)
                throw TruncationBudgetExceeded(
                    "atom budget exhausted before reaching eps = " +
                    std::to_string(trunc.eps));
            break;
        }
        jumps.push_back(z);
    }
    return jumps;
}

namespace {

void require_well_posed(const CormSpec& spec, const quad::QuadConfig& cfg) {
    const auto verdict = integrability::check_corm(spec, {cfg});
    if (verdict.multivariate != integrability::Overall::WellPosed)
        throw IllPosedSpec(std::string("specification is ") +
                           integrability::to_string(verdict.multivariate) +
                           "; pass force to simulate anyway");
}

// One draw; atoms are streamed to the sink as
//   (location, jump, scores[0..d-1]).
template <typename Sink>
void stream_draw(const CormSpec& spec, const Truncation& trunc,
                 rng::Stream& stream, Sink&& sink) {
    const std::vector<double> jumps =
        ferguson_klass_jumps(spec.directing, spec.base.total_mass, trunc, stream);
    std::vector<double> scores(spec.d);
    for (double z : jumps) {
        for (int j = 0; j < spec.d; ++j)
            scores[j] = spec.score.marginals[j].sampler(stream);
        const double loc =
            stream.uniform(spec.base.window_lo, spec.base.window_hi);
        sink(loc, z, scores);
    }
}

} // namespace

CormDraw sample_corm(const CormSpec& spec, const Truncation& trunc,
                     std::uint64_t seed, bool force,
                     const quad::QuadConfig& cfg) {
    for (const auto& m : spec.score.marginals)
        if (!m.sampler)
            throw Error("marginal " + m.label + " has no sampler");
    if (!force) require_well_posed(spec, cfg);

    CormDraw draw;
    draw.d = spec.d;
    draw.truncation = trunc;
    draw.seed = seed;

    rng::Stream stream(seed);
    stream_draw(spec, trunc, stream,
                [&draw](double loc, double z, const std::vector<double>& scores) {
                    Atom a;
                    a.location = loc;
                    a.jump = z;
                    a.scores = scores;
                    a.weights.resize(scores.size());
                    for (std::size_t j = 0; j < scores.size(); ++j)
                        a.weights[j] = z * scores[j];
                    draw.atoms.push_back(std::move(a));
                });
    return draw;
}

SimReport validate_tails(const CormSpec& spec, std::span<const double> thresholds,
                         int replications, std::uint64_t seed, int component_j,
                         const Truncation& trunc, const quad::QuadConfig& cfg,
                         bool force) {
    if (thresholds.empty()) throw Error("validate_tails needs thresholds");
    if (replications < 2) throw Error("validate_tails needs >= 2 replications");
    if (component_j < 0 || component_j >= spec.d)
        throw Error("component index out of range");
    for (const auto& m : spec.score.marginals)
        if (!m.sampler) throw Error("marginal " + m.label + " has no sampler");
    if (!force) require_well_posed(spec, cfg);

    const MarginalScore& score = spec.score.marginals[component_j];
    const double q99 = score.quantile(0.99);

    SimReport report;
    report.component = component_j;
    report.replications = replications;
    report.seed = seed;

    const std::size_t n_thr = thresholds.size();
    std::vector<double> sum(n_thr, 0.0), sum_sq(n_thr, 0.0);
    std::vector<long> counts(n_thr);

    for (int rep = 0; rep < replications; ++rep) {
        rng::Stream stream(
            rng::derive_stream_seed(seed, static_cast<std::uint64_t>(rep)));
        std::fill(counts.begin(), counts.end(), 0L);
        stream_draw(spec, trunc, stream,
                    [&](double, double z, const std::vector<double>& scores) {
                        const double w = z * scores[component_j];
                        for (std::size_t t = 0; t < n_thr; ++t)
                            if (w > thresholds[t]) ++counts[t];
                    });
        for (std::size_t t = 0; t < n_thr; ++t) {
            sum[t] += counts[t];
            sum_sq[t] += static_cast<double>(counts[t]) * counts[t];
        }
    }

    for (std::size_t t = 0; t < n_thr; ++t) {
        ThresholdRow row;
        row.y = thresholds[t];
        row.mean_count = sum[t] / replications;
        row.theoretical =
            spec.base.total_mass *
            tails::marginal_tail(score, spec.directing, thresholds[t], cfg);
        const double var =
            (sum_sq[t] - replications * row.mean_count * row.mean_count) /
            (replications - 1);
        row.std_error = std::sqrt(std::max(var, 0.0) / replications);
        const double dev = std::abs(row.mean_count - row.theoretical);
        row.standardized = row.std_error > 0.0
                               ? dev / row.std_error
                               : (dev == 0.0 ? 0.0
                                             : std::numeric_limits<double>::infinity());
        row.truncation_ok = thresholds[t] >= 10.0 * trunc.eps * q99;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace corm::sim
