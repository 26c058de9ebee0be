#pragma once

// Scalar special functions used throughout the library. Everything that can
// underflow is also offered in log space.

namespace moesmn {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double log_normal_pdf(double x);
double normal_pdf(double x);
double normal_cdf(double x);
double log_normal_cdf(double x);

/// phi(x)/Phi(x), evaluated as exp(log phi(x) - log Phi(x)). Finite for every
/// finite x; for x -> -inf it behaves like -x. Where the value underflows
/// (x > ~38.6) the smallest positive subnormal is returned.
double stable_normal_hazard(double x);
double log_normal_hazard(double x);

/// log(exp(a) - exp(b)) for a >= b; returns -inf when a == b.
double log_diff_exp(double a, double b);
double log_sum_exp(double a, double b);

/// Unnormalized upper incomplete gamma  Gamma(a, x) = int_x^inf t^(a-1) e^-t dt.
double upper_incomplete_gamma(double a, double x);
/// Unnormalized lower incomplete gamma  gamma(a, x) = int_0^x t^(a-1) e^-t dt.
double lower_incomplete_gamma(double a, double x);
/// log( x^(-a) * gamma(a, x) ); tends to -log(a) as x -> 0.
double log_scaled_lower_gamma(double a, double x);

}  // namespace moesmn
