#include "corm/tails.hpp"
#include "corm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace corm::tails {

namespace {

// Score expectations run over the score support; beta scores stop at 1.
quad::Domain score_domain(const MarginalScore& score) {
    return std::isfinite(score.support_hi)
               ? quad::Domain::open(0.0, score.support_hi)
               : quad::Domain::positive_axis();
}

} // namespace

MarginalIntensity::MarginalIntensity(MarginalScore score,
                                     DirectingMeasure directing,
                                     quad::QuadConfig cfg)
    : score_(std::move(score)), directing_(std::move(directing)), cfg_(cfg) {}

quad::IntegralResult MarginalIntensity::density_result(double s) const {
    if (!(s > 0.0)) throw Error("marginal density needs s > 0");
    // int z^-1 h(s/z) rho*(dz) after u = 1/z, which trades the reciprocal
    // argument for a plain product: int h(s u) rho*(1/u) u^-1 du.
    auto f = [this, s](double u) {
        const double h = score_.density(s * u);
        if (h == 0.0) return 0.0;
        return h * directing_.density(1.0 / u) / u;
    };
    return quad::integrate(f, quad::Domain::positive_axis(), cfg_);
}

quad::IntegralResult MarginalIntensity::tail_result(double y) const {
    if (!(y > 0.0)) throw Error("marginal tail needs y > 0");
    auto f = [this, y](double s) {
        const double h = score_.density(s);
        if (h == 0.0) return 0.0;
        return h * directing_.tail(y / s);
    };
    return quad::integrate(f, score_domain(score_), cfg_);
}

double MarginalIntensity::density(double s) const {
    const auto r = density_result(s);
    if (!r.convergent())
        throw IntegrabilityFailure("marginal density quadrature is " +
                                   std::string(quad::to_string(r.verdict)) +
                                   " at s = " + std::to_string(s));
    return r.value;
}

double MarginalIntensity::tail(double y) const {
    const auto r = tail_result(y);
    if (!r.convergent())
        throw IntegrabilityFailure("marginal tail quadrature is " +
                                   std::string(quad::to_string(r.verdict)) +
                                   " at y = " + std::to_string(y));
    return r.value;
}

double marginal_density(const MarginalScore& score,
                        const DirectingMeasure& directing, double s,
                        const quad::QuadConfig& cfg) {
    return MarginalIntensity(score, directing, cfg).density(s);
}

double marginal_tail(const MarginalScore& score,
                     const DirectingMeasure& directing, double y,
                     const quad::QuadConfig& cfg) {
    return MarginalIntensity(score, directing, cfg).tail(y);
}

std::vector<double> log_grid(const TailGrid& grid) {
    if (grid.n < 2 || !(grid.y_min > 0.0) || !(grid.y_min < grid.y_max))
        throw DegenerateGrid("tail grid needs n >= 2 and 0 < y_min < y_max");
    std::vector<double> ys(grid.n);
    const double la = std::log(grid.y_min), lb = std::log(grid.y_max);
    for (int i = 0; i < grid.n; ++i)
        ys[i] = std::exp(la + (lb - la) * i / (grid.n - 1));
    return ys;
}

RvDiagnostic estimate_rv_index(const std::function<double(double)>& tail_fn,
                               const std::vector<double>& y_grid,
                               int fit_points, double ratio_band) {
    if (static_cast<int>(y_grid.size()) < std::max(fit_points, 5))
        throw DegenerateGrid("index estimate needs at least fit_points grid points");
    std::vector<double> ys = y_grid;
    std::sort(ys.begin(), ys.end());
    if (!(ys.front() > 0.0) || ys.back() / ys.front() < 1e3)
        throw DegenerateGrid("index estimate needs >= 3 decades toward 0");

    RvDiagnostic diag;

    // Least-squares slope of log U against log y on the smallest points.
    std::vector<double> lx, ly;
    for (int i = 0; i < fit_points; ++i) {
        const double u = tail_fn(ys[i]);
        if (!(u > 0.0) || !std::isfinite(u))
            throw NonPositiveSamples("tail must be positive on the fit window");
        lx.push_back(std::log(ys[i]));
        ly.push_back(std::log(u));
    }
    double mx = 0, my = 0;
    for (int i = 0; i < fit_points; ++i) { mx += lx[i]; my += ly[i]; }
    mx /= fit_points;
    my /= fit_points;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < fit_points; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    diag.index_hat = -slope;
    double ss = 0;
    for (int i = 0; i < fit_points; ++i) {
        const double r = ly[i] - my - slope * (lx[i] - mx);
        ss += r * r;
    }
    diag.slope_residual = std::sqrt(ss / fit_points);

    // Slowly-varying ratio test, l(t) = U(1/t) t^-sigma_hat, at the largest t.
    bool ratios_ok = true;
    for (double a : {2.0, 5.0}) {
        for (int i = 0; i < 5; ++i) {
            const double t = 1.0 / ys[i];
            const double lt = tail_fn(1.0 / t) * std::pow(t, -diag.index_hat);
            const double lat =
                tail_fn(1.0 / (a * t)) * std::pow(a * t, -diag.index_hat);
            if (!(lt > 0.0) || !std::isfinite(lat)) {
                ratios_ok = false;
                continue;
            }
            const double ratio = lat / lt;
            diag.ratio_table.push_back({a, t, ratio});
            if (std::abs(ratio - 1.0) > ratio_band) ratios_ok = false;
        }
    }
    diag.regularly_varying =
        ratios_ok && diag.index_hat > -0.05 && diag.index_hat < 1.05;
    return diag;
}

IndexTransferReport verify_index_transfer(const MarginalScore& score,
                                          const DirectingMeasure& directing,
                                          const TailGrid& grid,
                                          const quad::QuadConfig& cfg) {
    if (!directing.rv_index.has_value())
        throw Error("index transfer check needs a regularly varying directing "
                    "measure");
    IndexTransferReport rep;
    rep.sigma_expected = *directing.rv_index;

    MarginalIntensity mi(score, directing, cfg);
    const std::vector<double> ys = log_grid(grid);

    // Cache tail values on the grid; the diagnostic may probe off-grid points
    // (ratio test), which fall through to fresh quadrature.
    std::vector<double> cached(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) cached[i] = mi.tail(ys[i]);
    auto tail_fn = [&](double y) {
        for (std::size_t i = 0; i < ys.size(); ++i)
            if (ys[i] == y) return cached[i];
        return mi.tail(y);
    };

    rep.diagnostic = estimate_rv_index(tail_fn, ys);
    rep.index_match =
        std::abs(rep.diagnostic.index_hat - rep.sigma_expected) <= rep.index_tol;

    // Slowly-varying factor: U_j / U* averaged over the smallest grid points.
    double acc = 0.0;
    int n = 0;
    for (int i = 0; i < 10 && i < static_cast<int>(ys.size()); ++i) {
        acc += cached[i] / directing.tail(ys[i]);
        ++n;
    }
    rep.factor_estimate = acc / n;

    if (directing.family == DirectingFamily::SigmaStable ||
        directing.family == DirectingFamily::SigmaStableNormalized)
        rep.factor_expected = fractional_moment(score, directing.sigma, cfg);
    return rep;
}

} // namespace corm::tails
