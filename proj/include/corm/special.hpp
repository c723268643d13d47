#pragma once

namespace corm::special {

// Modified Bessel function of the second kind, integer order n >= 0, x > 0.
// Ascending series for small arguments, asymptotic expansion for large ones,
// upward recurrence in the order.
double bessel_k(int n, double x);

// Exponential integral E1(x), x > 0.
double expint_e1(double x);

// Inverse of E1 on (0, inf): returns y with E1(y) = t. Clamped to the
// representable range for extreme t.
double expint_e1_inverse(double t);

} // namespace corm::special
