#include "corm/integrability.hpp"
#include "corm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace corm::integrability {

const char* to_string(Overall v) {
    switch (v) {
        case Overall::WellPosed: return "well_posed";
        case Overall::IllPosed: return "ill_posed";
        default: return "inconclusive";
    }
}

const char* to_string(LimitStatus v) {
    switch (v) {
        case LimitStatus::Holds: return "holds";
        case LimitStatus::Fails: return "fails";
        default: return "inconclusive";
    }
}

const char* to_string(ClosedFormVerdict v) {
    switch (v) {
        case ClosedFormVerdict::WellPosed: return "well_posed";
        case ClosedFormVerdict::IllPosed: return "ill_posed";
        default: return "boundary";
    }
}

quad::IntegralResult check_tail_mass(const MarginalScore& score,
                                     const DirectingMeasure& directing,
                                     const BaseMeasure& base,
                                     const quad::QuadConfig& cfg) {
    const double mass = base.total_mass;
    auto f = [&score, &directing, mass](double z) {
        const double sv = score.survival(1.0 / z);
        if (sv == 0.0) return 0.0;
        return mass * sv * directing.density(z);
    };
    quad::Domain dom{0.0, 1.0, true, false};
    return quad::integrate(f, dom, cfg);
}

quad::IntegralResult check_small_weight_mean(const MarginalScore& score,
                                             const DirectingMeasure& directing,
                                             const BaseMeasure& base,
                                             const quad::QuadConfig& cfg) {
    const double mass = base.total_mass;
    auto f = [&score, &directing, mass](double z) {
        const double c = score.cdf(1.0 / z);
        if (c == 0.0) return 0.0;
        return mass * c * z * directing.density(z);
    };
    return quad::integrate(f, quad::Domain::from_one(), cfg);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SlopeFit {
    double slope = 0.0;
    double residual = 0.0;
    int n = 0;
};

// log-log slope over the deepest positive samples (xs already log-spaced by
// factors of 2; index carries the abscissa).
SlopeFit fit_tail_slope(const std::vector<double>& values, int max_points) {
    std::vector<double> xs, ys;
    const int n = static_cast<int>(values.size());
    for (int i = n - 1; i >= 0 && static_cast<int>(xs.size()) < max_points; --i) {
        if (values[i] > 0.0 && std::isfinite(values[i])) {
            xs.push_back(i * std::log(2.0));
            ys.push_back(std::log(values[i]));
        } else {
            break; // contiguous positive tail only
        }
    }
    SlopeFit fit;
    fit.n = static_cast<int>(xs.size());
    if (fit.n < 4) return fit;
    double mx = 0, my = 0;
    for (int i = 0; i < fit.n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= fit.n; my /= fit.n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < fit.n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    double ss = 0;
    for (int i = 0; i < fit.n; ++i) {
        const double r = ys[i] - my - fit.slope * (xs[i] - mx);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / fit.n);
    return fit;
}

} // namespace

LimitProbe check_density_tail_limit(const MarginalScore& score) {
    LimitProbe probe;
    // Samples of h(1/z)/z^2 along z = 2^-k, i.e. h(2^k) * 4^k.
    for (int k = 0; k <= 40; ++k) {
        const double h = score.density(std::ldexp(1.0, k));
        probe.samples.push_back(h * std::ldexp(1.0, 2 * k));
    }
    const std::size_t n = probe.samples.size();
    for (double v : probe.samples) {
        if (!std::isfinite(v)) {
            probe.status = LimitStatus::Fails;
            probe.limit_estimate = kInf;
            return probe;
        }
    }
    if (probe.samples[n - 1] < 1e-15 && probe.samples[n - 2] < 1e-15 &&
        probe.samples[n - 3] < 1e-15) {
        probe.status = LimitStatus::Holds;
        probe.limit_estimate = 0.0;
        return probe;
    }
    const SlopeFit fit = fit_tail_slope(probe.samples, 8);
    if (fit.n < 4 || fit.residual > 0.5) {
        probe.status = LimitStatus::Inconclusive;
        probe.limit_estimate = probe.samples[n - 1];
        return probe;
    }
    // slope w.r.t. log(1/z): positive means the ratio diverges as z -> 0.
    if (fit.slope > 0.02) {
        probe.status = LimitStatus::Fails;
        probe.limit_estimate = kInf;
    } else if (fit.slope < -0.02) {
        probe.status = LimitStatus::Holds;
        probe.limit_estimate = 0.0;
    } else {
        const double level =
            (probe.samples[n - 1] + probe.samples[n - 2] + probe.samples[n - 3]) / 3.0;
        probe.limit_estimate = level;
        if (level < 0.9)
            probe.status = LimitStatus::Holds;
        else if (level > 1.1)
            probe.status = LimitStatus::Fails;
        else
            probe.status = LimitStatus::Inconclusive;
    }
    return probe;
}

LimitProbe check_density_origin_limit(const MarginalScore& score) {
    LimitProbe probe;
    for (int k = 0; k <= 45; ++k)
        probe.samples.push_back(score.density(std::ldexp(1.0, -k)));
    const std::size_t n = probe.samples.size();
    for (double v : probe.samples) {
        if (!std::isfinite(v)) {
            probe.status = LimitStatus::Fails;
            probe.limit_estimate = kInf;
            return probe;
        }
    }
    if (probe.samples[n - 1] == 0.0 && probe.samples[n - 2] == 0.0) {
        probe.status = LimitStatus::Holds;
        probe.limit_estimate = 0.0;
        return probe;
    }
    const SlopeFit fit = fit_tail_slope(probe.samples, 8);
    if (fit.n < 4 || fit.residual > 0.5) {
        probe.status = LimitStatus::Inconclusive;
        probe.limit_estimate = probe.samples[n - 1];
        return probe;
    }
    // slope w.r.t. log(1/eps): positive means h grows as eps -> 0.
    if (fit.slope > 0.02) {
        probe.status = LimitStatus::Fails;
        probe.limit_estimate = kInf;
    } else {
        probe.status = LimitStatus::Holds;
        probe.limit_estimate = fit.slope < -0.02 ? 0.0 : probe.samples[n - 1];
    }
    return probe;
}

ClosedFormVerdict stable_closed_form_verdict(ScoreFamily family, double alpha,
                                             double sigma) {
    if (family != ScoreFamily::Gamma && family != ScoreFamily::Beta &&
        family != ScoreFamily::Exponential)
        throw UnsupportedFamily("closed-form verdict covers gamma, beta and "
                                "exponential scores only");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw InvalidIndex("closed-form verdict needs sigma in (0,1)");
    if (!(alpha > 0.0))
        throw NonPositiveParameter("closed-form verdict needs alpha > 0");
    const double s = alpha + sigma;
    if (std::abs(s - 1.0) < 1e-12) return ClosedFormVerdict::Boundary;
    return s < 1.0 ? ClosedFormVerdict::IllPosed : ClosedFormVerdict::WellPosed;
}

namespace {

bool is_stable(const DirectingMeasure& d) {
    return d.family == DirectingFamily::SigmaStable ||
           d.family == DirectingFamily::SigmaStableNormalized;
}

Overall combine(const quad::IntegralResult& a, const quad::IntegralResult& b) {
    if (a.divergent() || b.divergent()) return Overall::IllPosed;
    if (a.convergent() && b.convergent()) return Overall::WellPosed;
    return Overall::Inconclusive;
}

} // namespace

MarginalVerdict check_marginal(int j, const MarginalScore& score,
                               const DirectingMeasure& directing,
                               const BaseMeasure& base,
                               const quad::QuadConfig& cfg) {
    MarginalVerdict v;
    v.j = j;
    v.tail_mass = check_tail_mass(score, directing, base, cfg);
    v.small_weight_mean = check_small_weight_mean(score, directing, base, cfg);
    v.density_tail_limit = check_density_tail_limit(score);
    v.density_origin_limit = check_density_origin_limit(score);
    v.overall = combine(v.tail_mass, v.small_weight_mean);
    if (is_stable(directing) && score.family != ScoreFamily::Custom) {
        const double alpha = score.family == ScoreFamily::Exponential ? 1.0 : score.a;
        v.closed_form = stable_closed_form_verdict(score.family, alpha,
                                                   directing.sigma);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Direct d-variate check
// ---------------------------------------------------------------------------

namespace {

// Monotone piecewise-linear table of a survival function Q(r) = P(R > r) on
// a log-spaced grid, plus its running integral G(x) = int_0^x Q.
class SurvivalTable {
public:
    SurvivalTable(std::vector<double> r, std::vector<double> q)
        : r_(std::move(r)), q_(std::move(q)) {
        g_.assign(r_.size(), 0.0);
        g_.front() = r_.front() * q_.front(); // Q ~ Q(r_min) below the grid
        for (std::size_t i = 1; i < r_.size(); ++i)
            g_[i] = g_[i - 1] + 0.5 * (q_[i] + q_[i - 1]) * (r_[i] - r_[i - 1]);
    }

    double survival(double r) const {
        if (r <= r_.front()) return q_.front();
        if (r >= r_.back()) return 0.0;
        const std::size_t i = locate(r);
        const double w = (r - r_[i]) / (r_[i + 1] - r_[i]);
        return q_[i] + w * (q_[i + 1] - q_[i]);
    }

    double integral(double x) const { // G(x) = int_0^x Q(u) du
        if (x <= 0.0) return 0.0;
        if (x <= r_.front()) return x * q_.front();
        if (x >= r_.back()) return g_.back();
        const std::size_t i = locate(x);
        const double qa = q_[i];
        const double qb = survival(x);
        return g_[i] + 0.5 * (qa + qb) * (x - r_[i]);
    }

private:
    std::size_t locate(double x) const {
        const auto it = std::upper_bound(r_.begin(), r_.end(), x);
        return static_cast<std::size_t>(it - r_.begin()) - 1;
    }

    std::vector<double> r_, q_, g_;
};

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> g(n);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(la + (lb - la) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

// Upper range of the norm grid: smallest power-of-two radius where every
// marginal's survival is negligible.
double norm_grid_radius(const std::vector<MarginalScore>& marginals) {
    double r = 2.0;
    for (;;) {
        double worst = 0.0;
        for (const auto& m : marginals)
            worst = std::max(worst, m.survival(r / std::sqrt(2.0 * marginals.size())));
        if (worst < 1e-14 || r > 1e12) break;
        r *= 2.0;
    }
    return r;
}

// Survival of the euclidean norm of the scores, built coordinate by
// coordinate: F_k(r) = int h(m) F_{k-1}(sqrt(r^2 - m^2)) dm, evaluated in
// polar form to keep the integrand smooth.
SurvivalTable build_norm_survival(const std::vector<MarginalScore>& marginals,
                                  const quad::QuadConfig& cfg) {
    const int n_grid = 1600;
    const double r_max = norm_grid_radius(marginals);
    const std::vector<double> grid = log_spaced(1e-8, r_max, n_grid);

    quad::QuadConfig icfg = cfg;
    icfg.rel_tol = std::max(cfg.rel_tol, 1e-7);
    icfg.abs_tol = 1e-13;

    const int d = static_cast<int>(marginals.size());
    // Level 1: the last coordinate alone.
    std::vector<double> q(n_grid);
    for (int i = 0; i < n_grid; ++i) q[i] = marginals[d - 1].survival(grid[i]);
    auto table = std::make_unique<SurvivalTable>(grid, q);

    for (int level = 2; level <= d; ++level) {
        const MarginalScore& m = marginals[d - level];
        std::vector<double> qk(n_grid);
        for (int i = 0; i < n_grid; ++i) {
            const double r = grid[i];
            auto integrand = [&m, &table, r](double theta) {
                const double h = m.density(r * std::sin(theta));
                if (h == 0.0) return 0.0;
                const double f_prev = 1.0 - table->survival(r * std::cos(theta));
                return h * f_prev * r * std::cos(theta);
            };
            const auto res =
                quad::integrate(integrand, quad::Domain::open(0.0, M_PI / 2.0), icfg);
            const double cdf_val = std::clamp(res.value, 0.0, 1.0);
            qk[i] = 1.0 - cdf_val;
        }
        table = std::make_unique<SurvivalTable>(grid, qk);
    }
    return std::move(*table);
}

SurvivalTable build_marginal_survival(const MarginalScore& m) {
    const int n_grid = 1600;
    double r_max = 2.0;
    while (m.survival(r_max) > 1e-14 && r_max < 1e12) r_max *= 2.0;
    const std::vector<double> grid = log_spaced(1e-8, r_max, n_grid);
    std::vector<double> q(n_grid);
    for (int i = 0; i < n_grid; ++i) q[i] = m.survival(grid[i]);
    return SurvivalTable(grid, q);
}

// int_0^inf E[min(1, z R)] rho*(dz) * mass, with E[min(1, zR)] = z G(1/z).
quad::IntegralResult min_weight_expectation_integral(
    const SurvivalTable& table, const DirectingMeasure& directing, double mass,
    const quad::QuadConfig& cfg) {
    auto f = [&table, &directing, mass](double z) {
        const double g = z * table.integral(1.0 / z);
        if (g == 0.0) return 0.0;
        return mass * std::min(g, 1.0) * directing.density(z);
    };
    return quad::integrate(f, quad::Domain::positive_axis(), cfg);
}

} // namespace

double marginal_min_weight_integral(const MarginalScore& score,
                                    const DirectingMeasure& directing,
                                    const BaseMeasure& base,
                                    const quad::QuadConfig& cfg) {
    const SurvivalTable table = build_marginal_survival(score);
    const auto r =
        min_weight_expectation_integral(table, directing, base.total_mass, cfg);
    if (!r.convergent())
        throw IntegrabilityFailure("marginal min-weight integral did not converge");
    return r.value;
}

DirectCheck direct_multivariate_check(const CormSpec& spec,
                                      const quad::QuadConfig& cfg,
                                      double slack) {
    if (spec.d > 3)
        throw Error("direct multivariate check supports d <= 3");

    quad::QuadConfig dcfg = cfg;
    dcfg.rel_tol = std::max(cfg.rel_tol, 1e-5);
    dcfg.abs_tol = std::max(cfg.abs_tol, 1e-10);

    DirectCheck out;
    out.slack = slack;

    const SurvivalTable norm_table = build_norm_survival(spec.score.marginals, dcfg);
    out.integral = min_weight_expectation_integral(norm_table, spec.directing,
                                                   spec.base.total_mass, dcfg);

    double sum = 0.0;
    for (const auto& m : spec.score.marginals) {
        const double mi =
            marginal_min_weight_integral(m, spec.directing, spec.base, dcfg);
        out.marginal_min_integrals.push_back(mi);
        sum += mi;
    }
    out.bound = std::sqrt(static_cast<double>(spec.d)) * sum;
    out.within_bound =
        out.integral.convergent() && out.integral.value <= out.bound * (1.0 + slack);
    return out;
}

CormVerdict check_corm(const CormSpec& spec, const CheckOptions& options) {
    CormVerdict out;
    bool all_well = true, any_ill = false;
    for (int j = 0; j < spec.d; ++j) {
        out.marginals.push_back(check_marginal(j, spec.score.marginals[j],
                                               spec.directing, spec.base,
                                               options.quad));
        const Overall o = out.marginals.back().overall;
        all_well = all_well && o == Overall::WellPosed;
        any_ill = any_ill || o == Overall::IllPosed;
    }
    // A single ill-posed marginal already breaks the vector: the d-variate
    // integral dominates each marginal one.
    out.multivariate = all_well ? Overall::WellPosed
                                : (any_ill ? Overall::IllPosed : Overall::Inconclusive);
    if (options.direct_check && spec.d <= 3 && out.multivariate == Overall::WellPosed)
        out.direct = direct_multivariate_check(spec, options.quad, options.bound_slack);
    return out;
}

} // namespace corm::integrability
