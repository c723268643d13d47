#pragma once

#include "corm/core.hpp"
#include "corm/quad.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace corm::expcorm {

// Machinery for vectors with iid standard-exponential scores, where the
// d-variate intensity collapses to a function of the coordinate sum:
//   rho_d(s) = int z^-d exp(-(s_1+...+s_d)/z) rho*(dz)
//            = (-1)^(d-1) f^(d-1)(s_1+...+s_d),   f(s) = int z^-1 e^(-s/z) rho*(dz).

// f(s) by quadrature (u = 1/z substitution).
double f_exp(const DirectingMeasure& directing, double s,
             const quad::QuadConfig& cfg = {});

// The displayed integral, evaluated directly.
double intensity_direct(const DirectingMeasure& directing,
                        std::span<const double> s,
                        const quad::QuadConfig& cfg = {});

// Closed-form f^(m) registry: power law for the stable families, Bessel-K
// recurrences for the finite-exponential one.
bool has_analytic_derivatives(const DirectingMeasure& directing);
double analytic_derivative(const DirectingMeasure& directing, double s, int m);

// (-1)^(d-1) f^(d-1) at the coordinate sum; analytic registry when
// available, Richardson finite differences otherwise (d <= 7 on that path).
double intensity_via_derivative(const DirectingMeasure& directing,
                                std::span<const double> s,
                                const quad::QuadConfig& cfg = {},
                                double fd_target_rel = 5e-5);

// Bundled evaluator mirroring the structure above.
class ExpCormIntensity {
public:
    ExpCormIntensity(DirectingMeasure directing, int d,
                     quad::QuadConfig cfg = {});

    int dimension() const { return d_; }
    const DirectingMeasure& directing() const { return directing_; }

    double f(double s) const { return f_exp(directing_, s, cfg_); }
    double direct(std::span<const double> s) const {
        return intensity_direct(directing_, s, cfg_);
    }
    double via_derivative(std::span<const double> s) const {
        return intensity_via_derivative(directing_, s, cfg_);
    }

private:
    DirectingMeasure directing_;
    int d_;
    quad::QuadConfig cfg_;
};

// Cross-validation of the two routes on random positive points.
struct DerivativePoint {
    int d = 0;
    std::vector<double> s;
    double direct_val = 0.0;
    double deriv_val = 0.0;
    double rel_dev = 0.0;
};

struct DerivativeReport {
    std::vector<DerivativePoint> points;
    double max_rel_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
};

DerivativeReport verify_derivative_representation(
    const DirectingMeasure& directing, const std::vector<int>& d_list,
    int points_per_d, std::uint64_t seed, double tol,
    const quad::QuadConfig& cfg = {});

} // namespace corm::expcorm
