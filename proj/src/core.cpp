#include "corm/core.hpp"
#include "corm/errors.hpp"
#include "corm/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace corm {

namespace {

double lbeta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw NonPositiveParameter(std::string(what) + " must be positive and finite");
}

} // namespace

// ---------------------------------------------------------------------------
// MarginalScore factories
// ---------------------------------------------------------------------------

MarginalScore MarginalScore::gamma(double shape, double rate) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    MarginalScore m;
    m.family = ScoreFamily::Gamma;
    m.a = shape;
    m.b = rate;
    m.label = "gamma(" + std::to_string(shape) + "," + std::to_string(rate) + ")";
    const double log_norm = shape * std::log(rate) - std::lgamma(shape);
    m.density = [shape, rate, log_norm](double s) {
        if (s <= 0.0) return 0.0;
        return std::exp(log_norm + (shape - 1.0) * std::log(s) - rate * s);
    };
    m.cdf = [shape, rate](double s) {
        if (s <= 0.0) return 0.0;
        return boost::math::gamma_p(shape, rate * s);
    };
    m.survival = [shape, rate](double s) {
        if (s <= 0.0) return 1.0;
        return boost::math::gamma_q(shape, rate * s);
    };
    m.sampler = [shape, rate](rng::Stream& st) { return st.gamma(shape, rate); };
    m.moment = [shape, rate](double sigma) {
        return std::exp(std::lgamma(shape + sigma) - std::lgamma(shape) -
                        sigma * std::log(rate));
    };
    return m;
}

MarginalScore MarginalScore::beta(double alpha, double beta) {
    require_positive(alpha, "beta alpha");
    require_positive(beta, "beta beta");
    MarginalScore m;
    m.family = ScoreFamily::Beta;
    m.a = alpha;
    m.b = beta;
    m.support_hi = 1.0;
    m.label = "beta(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
    const double log_norm = -lbeta(alpha, beta);
    m.density = [alpha, beta, log_norm](double s) {
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return std::exp(log_norm + (alpha - 1.0) * std::log(s) +
                        (beta - 1.0) * std::log1p(-s));
    };
    m.cdf = [alpha, beta](double s) {
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return 1.0;
        return boost::math::ibeta(alpha, beta, s);
    };
    m.survival = [alpha, beta](double s) {
        if (s <= 0.0) return 1.0;
        if (s >= 1.0) return 0.0;
        return boost::math::ibetac(alpha, beta, s);
    };
    m.sampler = [alpha, beta](rng::Stream& st) { return st.beta(alpha, beta); };
    m.moment = [alpha, beta](double sigma) {
        return std::exp(std::lgamma(alpha + sigma) + std::lgamma(alpha + beta) -
                        std::lgamma(alpha) - std::lgamma(alpha + beta + sigma));
    };
    return m;
}

MarginalScore MarginalScore::exponential() {
    MarginalScore m;
    m.family = ScoreFamily::Exponential;
    m.a = 1.0;
    m.b = 1.0;
    m.label = "exponential(1)";
    m.density = [](double s) { return s <= 0.0 ? 0.0 : std::exp(-s); };
    m.cdf = [](double s) { return s <= 0.0 ? 0.0 : -std::expm1(-s); };
    m.survival = [](double s) { return s <= 0.0 ? 1.0 : std::exp(-s); };
    m.sampler = [](rng::Stream& st) { return st.exponential(); };
    m.moment = [](double sigma) { return std::tgamma(1.0 + sigma); };
    return m;
}

MarginalScore MarginalScore::custom(std::function<double(double)> density,
                                    std::function<double(double)> cdf,
                                    std::function<double(rng::Stream&)> sampler,
                                    double support_hi, std::string label) {
    if (!density || !cdf)
        throw Error("custom marginal needs density and cdf");
    MarginalScore m;
    m.family = ScoreFamily::Custom;
    m.support_hi = support_hi;
    m.density = std::move(density);
    m.cdf = cdf;
    m.survival = [cdf](double s) { return 1.0 - cdf(s); };
    m.sampler = std::move(sampler);
    m.label = std::move(label);
    return m;
}

double MarginalScore::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw Error("quantile: p must be in (0,1)");
    double hi = std::isfinite(support_hi) ? support_hi : 1.0;
    while (!std::isfinite(support_hi) && cdf(hi) < p) {
        hi *= 2.0;
        if (hi > 1e300) throw Error("quantile: support probe overflow");
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// ScoreModel
// ---------------------------------------------------------------------------

double ScoreModel::joint_density(std::span<const double> s) const {
    if (static_cast<int>(s.size()) != d)
        throw Error("joint_density: dimension mismatch");
    double prod = 1.0;
    for (int j = 0; j < d; ++j) prod *= marginals[j].density(s[j]);
    return prod;
}

bool ScoreModel::all_exponential() const {
    for (const auto& m : marginals)
        if (m.family != ScoreFamily::Exponential) return false;
    return d > 0;
}

ScoreModel build_score_model(std::vector<MarginalScore> marginals,
                             const quad::QuadConfig& cfg) {
    if (marginals.empty())
        throw Error("score model needs at least one marginal");

    quad::QuadConfig vcfg = cfg;
    vcfg.rel_tol = std::max(cfg.rel_tol, 1e-9);
    for (const auto& m : marginals) {
        if (!m.density || !m.cdf)
            throw Error("marginal is missing density or cdf");

        quad::Domain dom = std::isfinite(m.support_hi)
                               ? quad::Domain::open(0.0, m.support_hi)
                               : quad::Domain::positive_axis();
        const auto norm = quad::integrate(m.density, dom, vcfg);
        if (!norm.convergent() || std::abs(norm.value - 1.0) > 1e-6)
            throw IntegrabilityFailure("score density for " + m.label +
                                       " does not integrate to 1");

        if (m.cdf(0.0) != 0.0)
            throw Error("score cdf for " + m.label + " must vanish at 0");
        const double far =
            std::isfinite(m.support_hi) ? m.support_hi : 1e12;
        if (std::abs(m.cdf(far) - 1.0) > 1e-9)
            throw Error("score cdf for " + m.label + " must reach 1");
        double prev = 0.0;
        for (double s = 0.0; s <= 8.0; s += 0.25) { // nondecreasing spot check
            const double c = m.cdf(s);
            if (c + 1e-12 < prev)
                throw Error("score cdf for " + m.label + " is decreasing");
            prev = c;
        }
    }

    ScoreModel model;
    model.d = static_cast<int>(marginals.size());
    model.marginals = std::move(marginals);
    return model;
}

double fractional_moment(const MarginalScore& m, double sigma,
                         const quad::QuadConfig& cfg) {
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw InvalidIndex("fractional moment: sigma must be in [0,1)");
    if (sigma == 0.0) return 1.0;
    if (m.moment) return m.moment(sigma);

    quad::Domain dom = std::isfinite(m.support_hi)
                           ? quad::Domain::open(0.0, m.support_hi)
                           : quad::Domain::positive_axis();
    const auto r = quad::integrate(
        [&m, sigma](double s) { return std::pow(s, sigma) * m.density(s); }, dom,
        cfg);
    if (!r.convergent())
        throw NonConvergentMoment("fractional moment quadrature did not settle for " +
                                  m.label);
    return r.value;
}

// ---------------------------------------------------------------------------
// DirectingMeasure
// ---------------------------------------------------------------------------

DirectingMeasure build_directing_measure(DirectingFamily family, double sigma,
                                         const quad::QuadConfig& cfg) {
    DirectingMeasure m;
    m.family = family;
    switch (family) {
        case DirectingFamily::SigmaStable: {
            if (!(sigma > 0.0 && sigma < 1.0))
                throw InvalidIndex("sigma-stable index must be in (0,1)");
            m.sigma = sigma;
            m.label = "sigma_stable(" + std::to_string(sigma) + ")";
            m.density = [sigma](double z) {
                return z <= 0.0 ? 0.0 : sigma * std::pow(z, -1.0 - sigma);
            };
            m.tail = [sigma](double y) {
                return y <= 0.0 ? std::numeric_limits<double>::infinity()
                                : std::pow(y, -sigma);
            };
            m.inverse_tail = [sigma](double t) { return std::pow(t, -1.0 / sigma); };
            m.rv_index = sigma;
            m.slowly_varying = [](double) { return 1.0; };
            break;
        }
        case DirectingFamily::SigmaStableNormalized: {
            if (!(sigma > 0.0 && sigma < 1.0))
                throw InvalidIndex("sigma-stable index must be in (0,1)");
            m.sigma = sigma;
            m.label = "sigma_stable_normalized(" + std::to_string(sigma) + ")";
            const double norm = 1.0 / std::tgamma(1.0 - sigma);
            m.density = [sigma, norm](double z) {
                return z <= 0.0 ? 0.0 : norm * sigma * std::pow(z, -1.0 - sigma);
            };
            m.tail = [sigma, norm](double y) {
                return y <= 0.0 ? std::numeric_limits<double>::infinity()
                                : norm * std::pow(y, -sigma);
            };
            m.inverse_tail = [sigma, norm](double t) {
                return std::pow(t / norm, -1.0 / sigma);
            };
            m.rv_index = sigma;
            m.slowly_varying = [norm](double) { return norm; };
            break;
        }
        case DirectingFamily::GammaProcess: {
            m.label = "gamma_process";
            m.density = [](double z) {
                return z <= 0.0 ? 0.0 : std::exp(-z) / z;
            };
            m.tail = [](double y) {
                return y <= 0.0 ? std::numeric_limits<double>::infinity()
                                : special::expint_e1(y);
            };
            m.inverse_tail = [](double t) { return special::expint_e1_inverse(t); };
            m.rv_index = 0.0;
            m.slowly_varying = [](double u) {
                return u <= 0.0 ? 0.0 : special::expint_e1(1.0 / u);
            };
            break;
        }
        case DirectingFamily::FiniteExponential: {
            m.label = "finite_exponential";
            m.density = [](double z) { return z <= 0.0 ? 0.0 : std::exp(-z); };
            m.tail = [](double y) { return y <= 0.0 ? 1.0 : std::exp(-y); };
            m.inverse_tail = [](double t) { return t >= 1.0 ? 0.0 : -std::log(t); };
            m.rv_index = std::nullopt;
            break;
        }
        case DirectingFamily::Custom:
            throw UnsupportedFamily(
                "assemble custom directing measures directly and call "
                "validate_directing_measure");
    }
    validate_directing_measure(m, cfg);
    return m;
}

void validate_directing_measure(const DirectingMeasure& m,
                                const quad::QuadConfig& cfg) {
    if (!m.density || !m.tail || !m.inverse_tail)
        throw Error("directing measure is missing callables");

    // Levy integrability: int min(1,z) rho*(dz) must be finite.
    const auto r = quad::integrate(
        [&m](double z) { return std::min(1.0, z) * m.density(z); },
        quad::Domain::positive_axis(), cfg);
    if (!r.convergent())
        throw IntegrabilityFailure("directing measure " + m.label +
                                   " violates the Levy integrability condition (" +
                                   std::string(quad::to_string(r.verdict)) + ")");

    // Inverse tail must invert the tail on a test grid.
    for (double y = 1e-6; y <= 16.0; y *= 4.0) {
        const double t = m.tail(y);
        if (!(t > 0.0) || !std::isfinite(t)) continue;
        const double back = m.tail(m.inverse_tail(t));
        if (std::abs(back - t) > 1e-6 * t)
            throw Error("inverse tail of " + m.label +
                        " fails the round-trip identity at y = " + std::to_string(y));
    }
}

// ---------------------------------------------------------------------------
// CormSpec
// ---------------------------------------------------------------------------

CormSpec make_corm_spec(ScoreModel score, DirectingMeasure directing,
                        BaseMeasure base) {
    require_positive(base.total_mass, "base total mass");
    if (!(base.window_lo < base.window_hi))
        throw Error("base window must be a nonempty interval");
    if (score.d < 1) throw Error("dimension must be at least 1");
    CormSpec spec;
    spec.d = score.d;
    spec.score = std::move(score);
    spec.directing = std::move(directing);
    spec.base = base;
    return spec;
}

} // namespace corm
