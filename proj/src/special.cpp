#include "moesmn/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "moesmn/error.hpp"

namespace moesmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Continued fraction for the normal Mills ratio, returns 1/R(t) for t > 0:
// t + 1/(t + 2/(t + 3/(t + ...))). Modified Lentz.
double inverse_mills_ratio(double t) {
  constexpr double tiny = 1e-300;
  double f = t;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = t + k * d;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = t + k / c;
    if (std::fabs(c) < tiny) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

}  // namespace

double log_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  if (x < -10.0) return std::exp(log_normal_cdf(x));
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  if (x == -kInf) return -kInf;
  if (x == kInf) return 0.0;
  if (x < -10.0) return log_normal_pdf(x) - std::log(inverse_mills_ratio(-x));
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  return std::log(0.5 * std::erfc(-x * kInvSqrt2));
}

double log_normal_hazard(double x) {
  if (x < -10.0) return std::log(inverse_mills_ratio(-x));
  return log_normal_pdf(x) - log_normal_cdf(x);
}

double stable_normal_hazard(double x) {
  if (x < -10.0) return inverse_mills_ratio(-x);
  // beyond x ~ 38.6 the true value is below the smallest subnormal
  return std::max(std::exp(log_normal_hazard(x)), std::numeric_limits<double>::denorm_min());
}

double log_diff_exp(double a, double b) {
  if (b == -kInf) return a;
  if (b > a) throw DomainError("log_diff_exp: b > a");
  return a + std::log(-std::expm1(b - a));
}

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

double upper_incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("upper_incomplete_gamma: need a > 0, x >= 0");
  if (x == kInf) return 0.0;
  return boost::math::tgamma(a, x);
}

double lower_incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("lower_incomplete_gamma: need a > 0, x >= 0");
  if (x == kInf) return boost::math::tgamma(a);
  return boost::math::tgamma_lower(a, x);
}

double log_scaled_lower_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("log_scaled_lower_gamma: need a > 0, x >= 0");
  if (x == kInf) return -kInf;
  if (x < 1.0) {
    // x^-a gamma(a,x) = e^-x * sum_k x^k / (a (a+1) ... (a+k))
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
      term *= x / (a + k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return -x + std::log(sum);
  }
  return boost::math::lgamma(a) + std::log(boost::math::gamma_p(a, x)) - a * std::log(x);
}

}  // namespace moesmn
