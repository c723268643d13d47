#pragma once

#include "corm/core.hpp"
#include "corm/quad.hpp"

#include <optional>
#include <vector>

namespace corm::integrability {

enum class Overall { WellPosed, IllPosed, Inconclusive };
enum class LimitStatus { Holds, Fails, Inconclusive };
enum class ClosedFormVerdict { WellPosed, IllPosed, Boundary };

const char* to_string(Overall v);
const char* to_string(LimitStatus v);
const char* to_string(ClosedFormVerdict v);

// Numerical probe of a one-sided limit, with the sampled sequence kept as
// evidence.
struct LimitProbe {
    LimitStatus status = LimitStatus::Inconclusive;
    double limit_estimate = 0.0; // +inf when diverging
    std::vector<double> samples;
};

// Verdict for one marginal of the vector; the marginal passes iff both
// integral checks converge:
//   tail_mass:         int_(0,1) P(S_j >= 1/z) rho*(dz) * alpha(X)
//                      (expected number of weights above 1),
//   small_weight_mean: int_[1,inf) P(S_j <= 1/z) z rho*(dz) * alpha(X)
//                      (mean directing mass below the random threshold 1/S_j).
struct MarginalVerdict {
    int j = 0;
    quad::IntegralResult tail_mass;
    quad::IntegralResult small_weight_mean;
    // Sufficient conditions on the score density alone; when both hold the
    // marginal is well posed under every directing measure.
    LimitProbe density_tail_limit;   // lim_{z->0} h_j(1/z)/z^2, holds when < 1
    LimitProbe density_origin_limit; // lim_{e->0} h_j(e), holds when bounded
    Overall overall = Overall::Inconclusive;
    // Closed-form verdict for gamma/beta/exponential scores paired with a
    // sigma-stable directing measure: ill-posed iff alpha + sigma < 1.
    std::optional<ClosedFormVerdict> closed_form;
};

quad::IntegralResult check_tail_mass(const MarginalScore& score,
                                     const DirectingMeasure& directing,
                                     const BaseMeasure& base,
                                     const quad::QuadConfig& cfg = {});

quad::IntegralResult check_small_weight_mean(const MarginalScore& score,
                                             const DirectingMeasure& directing,
                                             const BaseMeasure& base,
                                             const quad::QuadConfig& cfg = {});

LimitProbe check_density_tail_limit(const MarginalScore& score);
LimitProbe check_density_origin_limit(const MarginalScore& score);

// alpha is the gamma/beta shape of the marginal (1 for exponential), sigma
// the stable index.
ClosedFormVerdict stable_closed_form_verdict(ScoreFamily family, double alpha,
                                             double sigma);

MarginalVerdict check_marginal(int j, const MarginalScore& score,
                               const DirectingMeasure& directing,
                               const BaseMeasure& base,
                               const quad::QuadConfig& cfg = {});

// Direct evaluation of the d-variate integrability integral
//   int min(1, |s|) nu_d(ds, X)
// by nested quadrature (d <= 3), together with the sqrt(d) *
// sum-of-marginals bound it must respect.
struct DirectCheck {
    quad::IntegralResult integral;
    std::vector<double> marginal_min_integrals; // int min(1,s) nu_j(ds, X)
    double bound = 0.0;                         // sqrt(d) * sum of the above
    bool within_bound = false;
    double slack = 0.01;
};

DirectCheck direct_multivariate_check(const CormSpec& spec,
                                      const quad::QuadConfig& cfg = {},
                                      double slack = 0.01);

// int min(1,s) nu_j(ds, X) for one marginal.
double marginal_min_weight_integral(const MarginalScore& score,
                                    const DirectingMeasure& directing,
                                    const BaseMeasure& base,
                                    const quad::QuadConfig& cfg = {});

struct CheckOptions {
    quad::QuadConfig quad{};
    bool direct_check = false; // run the nested d-variate probe (d <= 3)
    double bound_slack = 0.01;
};

// Full verdict: every marginal, plus the vector-level reduction (all
// marginals well posed implies the d-variate condition holds).
struct CormVerdict {
    std::vector<MarginalVerdict> marginals;
    Overall multivariate = Overall::Inconclusive;
    std::optional<DirectCheck> direct;
};

CormVerdict check_corm(const CormSpec& spec, const CheckOptions& options = {});

} // namespace corm::integrability
