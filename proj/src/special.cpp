#include "corm/special.hpp"
#include "corm/errors.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <limits>

namespace corm::special {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;

// Ascending-series path (Abramowitz & Stegun 9.6.10/9.6.11 for n = 0, 1).
// Cancellation grows like exp(2x), so this is only used below the seam.
double k0_series(double x) {
    const double q = 0.25 * x * x;
    const double lg = std::log(0.5 * x);

    double i0 = 1.0, i0_term = 1.0;
    double sum = 0.0, term = 1.0, harmonic = 0.0;
    for (int k = 1; k < 200; ++k) {
        i0_term *= q / (static_cast<double>(k) * k);
        i0 += i0_term;
        harmonic += 1.0 / k;
        term *= q / (static_cast<double>(k) * k);
        sum += term * harmonic;
        if (i0_term < 1e-18 * i0 && term * harmonic < 1e-18 * (std::abs(sum) + 1.0))
            break;
    }
    return -(lg + kEulerGamma) * i0 + sum;
}

double k1_series(double x) {
    const double q = 0.25 * x * x;
    const double lg = std::log(0.5 * x);

    double i1 = 0.5 * x, i1_term = 0.5 * x;
    for (int k = 1; k < 200; ++k) {
        i1_term *= q / (static_cast<double>(k) * (k + 1));
        i1 += i1_term;
        if (i1_term < 1e-18 * i1) break;
    }

    // sum over k of (psi(k+1) + psi(k+2)) q^k / (k! (k+1)!)
    double psi_a = -kEulerGamma;        // psi(1)
    double psi_b = 1.0 - kEulerGamma;   // psi(2)
    double term = 1.0;                  // q^k / (k!(k+1)!) at k = 0
    double sum = psi_a + psi_b;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        psi_a += 1.0 / k;
        psi_b += 1.0 / (k + 1);
        const double add = term * (psi_a + psi_b);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 1.0 / x + lg * i1 - 0.25 * x * sum;
}

// Asymptotic expansion K_n(x) ~ sqrt(pi/2x) e^-x sum a_k(n)/x^k, truncated at
// the smallest term. Relative error ~ exp(-2x) near the seam.
double kn_asymptotic(int n, double x) {
    const double mu = 4.0 * n * n;
    double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
    for (int k = 1; k < 60; ++k) {
        term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * x * k);
        if (std::abs(term) >= prev) break; // series started diverging
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-18 * std::abs(sum)) break;
    }
    return std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) * sum;
}

// Seam between the series and the asymptotic expansion. Both sides are
// accurate to ~1e-9 relative here; lowering it to the textbook x ~ 2 would
// cost four digits on the asymptotic side.
constexpr double kSeam = 9.0;

} // namespace

double bessel_k(int n, double x) {
    if (n < 0) n = -n; // K_{-n} = K_n
    if (!(x > 0.0))
        throw EvaluationFailure("bessel_k: argument must be positive");

    double k0, k1;
    if (x <= kSeam) {
        k0 = k0_series(x);
        k1 = k1_series(x);
    } else {
        k0 = kn_asymptotic(0, x);
        k1 = kn_asymptotic(1, x);
    }
    if (n == 0) return k0;
    if (n == 1) return k1;

    // Upward recurrence is stable for K (values grow with the order).
    double km = k0, k = k1;
    for (int m = 1; m < n; ++m) {
        const double kp = km + (2.0 * m / x) * k;
        km = k;
        k = kp;
        if (std::isinf(k)) break;
    }
    return k;
}

double expint_e1(double x) {
    if (!(x > 0.0))
        throw EvaluationFailure("expint_e1: argument must be positive");
    return boost::math::expint(1, x);
}

double expint_e1_inverse(double t) {
    if (!(t > 0.0))
        throw EvaluationFailure("expint_e1_inverse: argument must be positive");
    // E1 maps (0, inf) onto (0, inf), decreasing. Representable range of the
    // result is roughly [1e-300, 740].
    const double y_min = 1e-300, y_max = 740.0;
    if (t >= boost::math::expint(1, y_min)) return y_min;
    if (t <= boost::math::expint(1, y_max)) return y_max;

    // Bisection on log(y), then a few Newton polishing steps.
    double lo = std::log(y_min), hi = std::log(y_max);
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (boost::math::expint(1, std::exp(mid)) > t)
            lo = mid; // E1 too big -> y too small
        else
            hi = mid;
    }
    double y = std::exp(0.5 * (lo + hi));
    for (int i = 0; i < 4; ++i) {
        const double f = boost::math::expint(1, y) - t;
        const double df = -std::exp(-y) / y;
        const double step = f / df;
        if (!std::isfinite(step)) break;
        double y_next = y - step;
        if (y_next <= 0.0) y_next = 0.5 * y;
        y = y_next;
    }
    return y;
}

} // namespace corm::special
