#pragma once

#include "corm/core.hpp"
#include "corm/quad.hpp"

#include <vector>

namespace corm::tails {

// Marginal Levy density and tail integral of one component, both defined by
// the mixture identity nu_j(A, X) = E[nu*(A / S_j, X)]:
//   density(s) = int z^-1 h_j(s/z) rho*(dz)
//   tail(y)    = E[U*(y / S_j)]
// Evaluations are quadratures; a divergent density (possible for ill-posed
// pairs) throws IntegrabilityFailure rather than returning a number.
class MarginalIntensity {
public:
    MarginalIntensity(MarginalScore score, DirectingMeasure directing,
                      quad::QuadConfig cfg = {});

    double density(double s) const;
    double tail(double y) const;

    quad::IntegralResult density_result(double s) const;
    quad::IntegralResult tail_result(double y) const;

private:
    MarginalScore score_;
    DirectingMeasure directing_;
    quad::QuadConfig cfg_;
};

double marginal_density(const MarginalScore& score,
                        const DirectingMeasure& directing, double s,
                        const quad::QuadConfig& cfg = {});

double marginal_tail(const MarginalScore& score,
                     const DirectingMeasure& directing, double y,
                     const quad::QuadConfig& cfg = {});

// Regular-variation diagnostic of a tail integral probed as y -> 0 (the
// regime where infinite-activity tails blow up and the index shows).
struct RvDiagnostic {
    double index_hat = 0.0;     // sigma estimate, -slope of log U vs log y
    double slope_residual = 0.0;
    struct RatioEntry {
        double a, t, ratio; // l(a t) / l(t) for l(t) = U(1/t) t^-index
    };
    std::vector<RatioEntry> ratio_table;
    bool regularly_varying = false;
};

struct TailGrid {
    double y_min = 1e-6;
    double y_max = 1e-1;
    int n = 50;
};

std::vector<double> log_grid(const TailGrid& grid);

// Fits the index on the `fit_points` smallest grid points and runs the
// slowly-varying ratio test at a in {2, 5}; the verdict is positive when all
// ratios lie within 1 +- ratio_band. Throws DegenerateGrid when the grid is
// too small or spans fewer than three decades.
RvDiagnostic estimate_rv_index(const std::function<double(double)>& tail_fn,
                               const std::vector<double>& y_grid,
                               int fit_points = 20, double ratio_band = 0.05);

// Index-transfer check: a regularly varying directing measure makes every
// marginal tail regularly varying with the same index, and for stable
// measures the slowly-varying factor is E[S^sigma].
struct IndexTransferReport {
    RvDiagnostic diagnostic;
    double sigma_expected = 0.0;
    double factor_estimate = 0.0;  // mean of U_j / U* over the smallest y
    double factor_expected = 0.0;  // E[S^sigma] (stable directing families)
    bool index_match = false;      // |index_hat - sigma| <= index_tol
    double index_tol = 0.02;
};

IndexTransferReport verify_index_transfer(const MarginalScore& score,
                                          const DirectingMeasure& directing,
                                          const TailGrid& grid = {},
                                          const quad::QuadConfig& cfg = {});

} // namespace corm::tails
