#pragma once

#include "corm/quad.hpp"
#include "corm/rng.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corm {

// ---------------------------------------------------------------------------
// Score distributions
// ---------------------------------------------------------------------------

enum class ScoreFamily { Gamma, Beta, Exponential, Custom };

// One marginal of the d-variate score distribution. All callables are pure;
// samplers draw from an explicit stream. Immutable after construction.
struct MarginalScore {
    ScoreFamily family = ScoreFamily::Custom;
    double a = 0.0; // Gamma: shape, Beta: alpha
    double b = 0.0; // Gamma: rate,  Beta: beta
    double support_hi = std::numeric_limits<double>::infinity();

    std::function<double(double)> density;  // h_j
    std::function<double(double)> cdf;      // H_j
    std::function<double(double)> survival; // 1 - H_j
    std::function<double(rng::Stream&)> sampler;
    // sigma -> E[S^sigma]; closed form when available, else empty and the
    // free function fractional_moment falls back to quadrature.
    std::function<double(double)> moment;

    std::string label;

    static MarginalScore gamma(double shape, double rate);
    static MarginalScore beta(double alpha, double beta);
    static MarginalScore exponential(); // rate 1

    // Custom densities get numerical treatment only (no closed-form verdicts
    // or moments). The sampler may be empty; simulation then rejects the
    // model.
    static MarginalScore custom(std::function<double(double)> density,
                                std::function<double(double)> cdf,
                                std::function<double(rng::Stream&)> sampler = {},
                                double support_hi = std::numeric_limits<double>::infinity(),
                                std::string label = "custom");

    // p-quantile by bisection on the CDF.
    double quantile(double p) const;
};

struct ScoreModel {
    enum class Coupling { IndependentProduct };

    int d = 0;
    std::vector<MarginalScore> marginals;
    Coupling coupling = Coupling::IndependentProduct;

    // Product of the marginal densities.
    double joint_density(std::span<const double> s) const;
    bool all_exponential() const;
};

// Wires and validates a score model: positive parameters upstream, marginal
// densities normalized to 1 over the support (within quadrature tolerance),
// CDF endpoints correct.
ScoreModel build_score_model(std::vector<MarginalScore> marginals,
                             const quad::QuadConfig& cfg = {});

// E[S^sigma], sigma in [0,1). Closed form for the named families, quadrature
// for custom ones (NonConvergentMoment when the quadrature does not settle).
double fractional_moment(const MarginalScore& m, double sigma,
                         const quad::QuadConfig& cfg = {});

// ---------------------------------------------------------------------------
// Directing Levy measures
// ---------------------------------------------------------------------------

enum class DirectingFamily {
    SigmaStable,           // density sigma / z^(1+sigma)
    SigmaStableNormalized, // density sigma / (Gamma(1-sigma) z^(1+sigma))
    GammaProcess,          // density z^-1 e^-z
    FiniteExponential,     // density e^-z
    Custom,
};

struct DirectingMeasure {
    DirectingFamily family = DirectingFamily::Custom;
    double sigma = 0.0; // stable families only

    std::function<double(double)> density;      // rho*(z)
    std::function<double(double)> tail;         // U*(y) = int_y^inf rho*
    std::function<double(double)> inverse_tail; // generalized inverse of U*
    std::optional<double> rv_index;             // regular-variation index
    std::function<double(double)> slowly_varying; // L(u), may be empty

    std::string label;
};

// Builds one of the four named families and verifies at construction that
// int min(1,z) rho*(dz) is finite (IntegrabilityFailure otherwise) and that
// the inverse tail inverts the tail on a test grid. sigma must lie in (0,1)
// for the stable families (InvalidIndex).
DirectingMeasure build_directing_measure(DirectingFamily family, double sigma = 0.0,
                                         const quad::QuadConfig& cfg = {});

// Same validation for a caller-assembled measure.
void validate_directing_measure(const DirectingMeasure& m,
                                const quad::QuadConfig& cfg = {});

// ---------------------------------------------------------------------------
// Base measure and the full specification
// ---------------------------------------------------------------------------

// Homogeneous base: total mass alpha(X) on a bounded window [lo, hi];
// locations are uniform on the window.
struct BaseMeasure {
    double total_mass = 1.0;
    double window_lo = 0.0;
    double window_hi = 1.0;
};

struct CormSpec {
    ScoreModel score;
    DirectingMeasure directing;
    BaseMeasure base;
    int d = 0;
};

CormSpec make_corm_spec(ScoreModel score, DirectingMeasure directing,
                        BaseMeasure base);

} // namespace corm
