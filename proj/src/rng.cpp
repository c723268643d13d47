#include "corm/rng.hpp"
#include "corm/errors.hpp"

#include <cmath>

namespace corm::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= (index + 0x9E3779B97F4A7C15ULL) * 0xD1342543DE82EF95ULL;
    std::uint64_t b = splitmix64(s);
    std::uint64_t c = a ^ b;
    return splitmix64(c);
}

Stream::Stream(std::uint64_t seed) : eng_(seed) {}

double Stream::uniform() {
    // 53-bit mantissa draw in (0,1); zero is rejected so logs stay finite.
    for (;;) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

double Stream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Stream::exponential() { return -std::log(uniform()); }

double Stream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Marsaglia polar method.
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            const double m = std::sqrt(-2.0 * std::log(s) / s);
            cached_normal_ = v * m;
            has_cached_normal_ = true;
            return u * m;
        }
    }
}

double Stream::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw NonPositiveParameter("gamma sampler: shape and rate must be positive");

    // Marsaglia-Tsang; the shape < 1 case goes through shape + 1 with a
    // uniform power boost.
    double boost_factor = 1.0;
    double a = shape;
    if (a < 1.0) {
        boost_factor = std::pow(uniform(), 1.0 / a);
        a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x ||
            std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            const double r = d * v * boost_factor / rate;
            if (r > 0.0) return r; // underflow to 0 is possible for tiny shapes; retry
        }
    }
}

double Stream::beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    double r = x / (x + y);
    if (r <= 0.0) r = std::numeric_limits<double>::min();
    if (r >= 1.0) r = 1.0 - 1e-16;
    return r;
}

} // namespace corm::rng
