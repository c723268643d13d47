#include "corm/expcorm.hpp"
#include "corm/errors.hpp"
#include "corm/rng.hpp"
#include "corm/special.hpp"

#include <algorithm>
#include <cmath>

namespace corm::expcorm {

namespace {

double component_sum(std::span<const double> s) {
    if (s.empty()) throw Error("intensity needs at least one component");
    double acc = 0.0;
    for (double v : s) {
        if (!(v > 0.0)) throw Error("intensity components must be positive");
        acc += v;
    }
    return acc;
}

quad::QuadConfig tighten(const quad::QuadConfig& cfg, double rel) {
    quad::QuadConfig t = cfg;
    t.rel_tol = std::min(cfg.rel_tol, rel);
    t.abs_tol = std::min(cfg.abs_tol, 1e-14);
    return t;
}

// int z^-d e^(-S/z) rho*(dz) after u = 1/z: int u^(d-2) e^(-S u) rho*(1/u) du.
double mixture_integral(const DirectingMeasure& directing, double total, int d,
                        const quad::QuadConfig& cfg) {
    auto f = [&directing, total, d](double u) {
        const double e = std::exp(-total * u);
        if (e == 0.0) return 0.0;
        const double r = directing.density(1.0 / u);
        if (r == 0.0) return 0.0;
        return std::pow(u, d - 2) * e * r;
    };
    const auto res = quad::integrate(f, quad::Domain::positive_axis(), cfg);
    if (!res.convergent())
        throw IntegrabilityFailure("exponential-score intensity quadrature is " +
                                   std::string(quad::to_string(res.verdict)) +
                                   " at sum = " + std::to_string(total));
    return res.value;
}

} // namespace

double f_exp(const DirectingMeasure& directing, double s,
             const quad::QuadConfig& cfg) {
    if (!(s > 0.0)) throw Error("f_exp needs s > 0");
    return mixture_integral(directing, s, 1, cfg);
}

double intensity_direct(const DirectingMeasure& directing,
                        std::span<const double> s, const quad::QuadConfig& cfg) {
    const double total = component_sum(s);
    return mixture_integral(directing, total, static_cast<int>(s.size()), cfg);
}

bool has_analytic_derivatives(const DirectingMeasure& directing) {
    switch (directing.family) {
        case DirectingFamily::SigmaStable:
        case DirectingFamily::SigmaStableNormalized:
        case DirectingFamily::FiniteExponential:
            return true;
        default:
            return false;
    }
}

double analytic_derivative(const DirectingMeasure& directing, double s, int m) {
    if (!(s > 0.0)) throw Error("analytic_derivative needs s > 0");
    if (m < 0) throw Error("analytic_derivative needs m >= 0");
    switch (directing.family) {
        case DirectingFamily::SigmaStable:
        case DirectingFamily::SigmaStableNormalized: {
            // f(s) = c s^-(1+sigma), so f^(m)(s) = c (-1)^m (1+sigma)...(m+sigma) s^-(1+sigma+m).
            const double sigma = directing.sigma;
            double c = sigma * std::tgamma(1.0 + sigma);
            if (directing.family == DirectingFamily::SigmaStableNormalized)
                c /= std::tgamma(1.0 - sigma);
            double rising = 1.0;
            for (int i = 1; i <= m; ++i) rising *= sigma + i;
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return sign * c * rising * std::pow(s, -(1.0 + sigma + m));
        }
        case DirectingFamily::FiniteExponential: {
            // f(s) = 2 K_0(2 sqrt(s)); induction with K_m'(x) = -K_{m+1} + (m/x) K_m
            // gives f^(m)(s) = (-1)^m 2 s^(-m/2) K_m(2 sqrt(s)).
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            return sign * 2.0 * std::pow(s, -0.5 * m) *
                   special::bessel_k(m, 2.0 * std::sqrt(s));
        }
        default:
            throw UnsupportedFamily("no analytic derivatives for " + directing.label);
    }
}

double intensity_via_derivative(const DirectingMeasure& directing,
                                std::span<const double> s,
                                const quad::QuadConfig& cfg,
                                double fd_target_rel) {
    const double total = component_sum(s);
    const int m = static_cast<int>(s.size()) - 1;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;

    if (has_analytic_derivatives(directing))
        return sign * analytic_derivative(directing, total, m);

    if (m > 6)
        throw Error("finite-difference path supports d <= 7");
    const quad::QuadConfig tight = tighten(cfg, 1e-12);
    auto f = [&directing, &tight](double x) { return f_exp(directing, x, tight); };
    return sign * quad::derivative(f, total, m, fd_target_rel);
}

ExpCormIntensity::ExpCormIntensity(DirectingMeasure directing, int d,
                                   quad::QuadConfig cfg)
    : directing_(std::move(directing)), d_(d), cfg_(cfg) {
    if (d < 1) throw Error("dimension must be at least 1");
}

DerivativeReport verify_derivative_representation(
    const DirectingMeasure& directing, const std::vector<int>& d_list,
    int points_per_d, std::uint64_t seed, double tol,
    const quad::QuadConfig& cfg) {
    if (points_per_d < 1) throw Error("need at least one point per dimension");
    DerivativeReport rep;
    rep.tol = tol;

    const quad::QuadConfig tight = tighten(cfg, 1e-10);
    for (int d : d_list) {
        if (d < 1) throw Error("dimensions must be >= 1");
        rng::Stream stream(rng::derive_stream_seed(seed, static_cast<std::uint64_t>(d)));
        for (int p = 0; p < points_per_d; ++p) {
            DerivativePoint pt;
            pt.d = d;
            pt.s.resize(d);
            for (double& v : pt.s) v = stream.uniform(0.2, 2.0);
            pt.direct_val = intensity_direct(directing, pt.s, tight);
            pt.deriv_val = intensity_via_derivative(directing, pt.s, tight,
                                                    std::min(0.3 * tol, 5e-5));
            pt.rel_dev = std::abs(pt.direct_val - pt.deriv_val) /
                         std::abs(pt.direct_val);
            rep.max_rel_dev = std::max(rep.max_rel_dev, pt.rel_dev);
            rep.points.push_back(std::move(pt));
        }
    }
    rep.pass = rep.max_rel_dev <= tol;
    return rep;
}

} // namespace corm::expcorm
