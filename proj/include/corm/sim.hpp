#pragma once

#include "corm/core.hpp"
#include "corm/quad.hpp"
#include "corm/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace corm::sim {

// Series truncation policy: stop at the first jump below eps or after
// max_atoms, whichever comes first. strict_eps instead demands that eps is
// reached and throws TruncationBudgetExceeded when the atom budget runs out.
struct Truncation {
    double eps = 1e-8;
    std::size_t max_atoms = 100000;
    bool strict_eps = false;
};

struct Atom {
    double location = 0.0;            // uniform on the base window
    double jump = 0.0;                // directing jump z_i, decreasing in i
    std::vector<double> scores;       // m_i
    std::vector<double> weights;      // s_{j,i} = z_i * m_{j,i}
};

struct CormDraw {
    int d = 0;
    std::vector<Atom> atoms;
    Truncation truncation;
    std::uint64_t seed = 0;
};

// Inversion-series jumps z_i = U*^-1(Gamma_i / alpha(X)) for unit-rate
// Poisson arrivals Gamma_1 < Gamma_2 < ...; strictly decreasing. May be
// empty for finite-activity measures.
std::vector<double> ferguson_klass_jumps(const DirectingMeasure& directing,
                                         double base_mass,
                                         const Truncation& trunc,
                                         rng::Stream& stream);

// Full draw: shared directing jumps, iid score vectors, uniform locations.
// Refuses ill-posed or inconclusive specifications unless force is set
// (IllPosedSpec).
CormDraw sample_corm(const CormSpec& spec, const Truncation& trunc,
                     std::uint64_t seed, bool force = false,
                     const quad::QuadConfig& cfg = {});

// Empirical check of the marginal tail integral: across replications the
// count of component-j weights above y has mean alpha(X) * U_j(y).
struct ThresholdRow {
    double y = 0.0;
    double mean_count = 0.0;
    double theoretical = 0.0; // alpha(X) * U_j(y)
    double std_error = 0.0;   // sample sd of the counts / sqrt(replications)
    double standardized = 0.0;
    bool truncation_ok = true; // y >= 10 * eps * q99(score_j)
};

struct SimReport {
    int component = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<ThresholdRow> rows;
};

SimReport validate_tails(const CormSpec& spec, std::span<const double> thresholds,
                         int replications, std::uint64_t seed,
                         int component_j = 0, const Truncation& trunc = {},
                         const quad::QuadConfig& cfg = {}, bool force = false);

} // namespace corm::sim
