#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace corm::quad {

enum class Verdict { Convergent, Divergent, Inconclusive };

const char* to_string(Verdict v);

struct QuadConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    // Fast-path divergence trigger on the running truncated integral.
    double divergence_threshold = 1e12;
    // Dyadic refinement ladder toward open/infinite endpoints: rung k covers
    // distances (eps0*2^-(k+1), eps0*2^-k] from a finite endpoint, resp.
    // (m0*2^(k-1), m0*2^k] toward infinity, for k up to max_rungs.
    int max_rungs = 60;
    // Endpoint exponent fits: n log-spaced samples starting at coarse_scale.
    int exponent_points = 12;
    double exponent_coarse_scale = 1.0 / 65536.0; // 2^-16
    // Work limit of the adaptive Gauss-Kronrod kernel per rung.
    int max_intervals = 512;
};

// Truncation evidence collected at the endpoint that decided (or failed to
// decide) the verdict.
struct LadderEvidence {
    std::vector<double> partial_sums; // truncated integrals, outermost first
    double endpoint = std::numeric_limits<double>::quiet_NaN();
    double exponent = std::numeric_limits<double>::quiet_NaN();
    bool unbounded_growth = false;
};

struct IntegralResult {
    double value = 0.0; // meaningful only when Convergent
    double error_estimate = std::numeric_limits<double>::infinity();
    Verdict verdict = Verdict::Inconclusive;
    LadderEvidence evidence;

    bool convergent() const { return verdict == Verdict::Convergent; }
    bool divergent() const { return verdict == Verdict::Divergent; }
};

// Integration interval. `singular` flags request the dyadic ladder toward
// that endpoint (mandatory for infinite ones, automatic below).
struct Domain {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_singular = true;
    bool hi_singular = true;

    static Domain unit() { return {0.0, 1.0, true, true}; }
    static Domain positive_axis() {
        return {0.0, std::numeric_limits<double>::infinity(), true, true};
    }
    static Domain upper(double a) { // [a, inf), a regular
        return {a, std::numeric_limits<double>::infinity(), false, true};
    }
    static Domain from_one() { return upper(1.0); }
    static Domain open(double a, double b) { return {a, b, true, true}; }
};

using Fn = std::function<double(double)>;

// Divergence-aware integration. Verdicts:
//  - Convergent: |value - integral| <= max(abs_tol, rel_tol*|value|) for
//    integrands with algebraic or exponential endpoint behaviour;
//  - Divergent: the truncation ladder grows without bound AND the local
//    exponent at the offending endpoint is consistent (<= -1 at a finite
//    endpoint, >= -1 at infinity);
//  - Inconclusive: the ladder was exhausted or the two signals disagree.
// Throws EvaluationFailure if the integrand returns NaN at a quadrature node.
IntegralResult integrate(const Fn& f, const Domain& dom, const QuadConfig& cfg = {});

struct ExponentWindow {
    int n_points = 12;
    double coarse_scale = 1.0 / 65536.0;
};

// Least-squares slope of log f against log distance-to-endpoint (finite
// endpoint, approached from above or below) or log z (infinite endpoint).
// Throws NonPositiveSamples when the window contains nonpositive or
// non-finite values.
double estimate_endpoint_exponent(const Fn& f, double endpoint,
                                  bool from_above = true,
                                  const ExponentWindow& w = {});

// Richardson-extrapolated central differences (Ridders' scheme), order <= 6.
// Returns the m-th derivative at s; err_out (optional) receives the absolute
// error estimate. Throws NoisePlateau when the extrapolation cannot reach
// target_rel, StepUnderflow when no usable step exists.
double derivative(const Fn& f, double s, int order, double target_rel = 1e-6,
                  double* err_out = nullptr);

} // namespace corm::quad
