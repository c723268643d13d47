#pragma once

#include <cstdint>
#include <random>

namespace corm::rng {

// splitmix64 step; used to spread seeds and derive independent streams.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic per-index stream seed from a master seed. Streams derived
// from distinct indices are statistically independent, so replications can
// run in any order.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index);

// Seeded random stream. The raw generator is mt19937_64 (whose output
// sequence the standard pins down exactly); all variate transforms are local
// to this class so draws are reproducible across platforms and standard
// libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed);

    double uniform();                       // (0,1)
    double uniform(double a, double b);     // (a,b)
    double exponential();                   // rate 1
    double normal();                        // standard normal
    double gamma(double shape, double rate);
    double beta(double a, double b);

private:
    std::mt19937_64 eng_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace corm::rng
