#pragma once

// Reference computations for the tests. Nothing here calls the library's
// closed forms: densities come from erfc, mixing-law expectations from
// numerical integration over U.

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "moesmn/smn.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Phi(b) - Phi(a) without cancellation in either tail.
inline double Phi_diff(double a, double b) {
  if (a > 0.0) return 0.5 * std::erfc(a / std::sqrt(2.0)) - 0.5 * std::erfc(b / std::sqrt(2.0));
  return 0.5 * std::erfc(-b / std::sqrt(2.0)) - 0.5 * std::erfc(-a / std::sqrt(2.0));
}

// x * phi(x) with the limit 0 at +-inf.
inline double xphi(double x) { return std::isfinite(x) ? x * phi(x) : 0.0; }

template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double t) { return f(a + t); }, tol);
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

// E g(U) under the family's mixing law.
template <class G>
double mixing_expectation(G g, const moesmn::SmnFamily& fam) {
  using moesmn::FamilyKind;
  const double nu = fam.nu();
  switch (fam.kind()) {
    case FamilyKind::Normal:
      return g(1.0);
    case FamilyKind::ContaminatedNormal:
      return nu * g(fam.gamma()) + (1.0 - nu) * g(1.0);
    case FamilyKind::Slash:
      return integrate([&](double u) { return nu * std::pow(u, nu - 1.0) * g(u); }, 0.0, 1.0);
    case FamilyKind::StudentT: {
      const double k = 0.5 * nu;
      auto dens = [&](double u) {
        if (u <= 0.0) return 0.0;
        return std::exp(k * std::log(k) + (k - 1.0) * std::log(u) - k * u - std::lgamma(k)) * g(u);
      };
      return integrate(dens, 0.0, 1.0) + integrate(dens, 1.0, kInf);
    }
  }
  return 0.0;
}

inline double pdf(double y, double mu, double sigma2, const moesmn::SmnFamily& fam) {
  const double z = (y - mu) / std::sqrt(sigma2);
  return mixing_expectation([&](double u) { return std::sqrt(u) * phi(z * std::sqrt(u)); }, fam) / std::sqrt(sigma2);
}

inline double cdf(double x, const moesmn::SmnFamily& fam) {
  return mixing_expectation([&](double u) { return Phi(x * std::sqrt(u)); }, fam);
}

struct Moments {
  double prob = 0.0;
  double u = 0.0;
  double uy = 0.0;
  double uy2 = 0.0;
};

// E(U^a Y^b | c1 <= Y <= c2) for a, b in {0,1,2}: Y | U=u is normal with
// variance sigma2/u, so the y-integral is a truncated-normal moment and only
// the u-integral is numerical.
inline Moments censored_moments(double c1, double c2, double mu, double sigma2, const moesmn::SmnFamily& fam) {
  auto parts = [&](double u) {
    const double s = std::sqrt(sigma2 / u);
    const double a = (c1 - mu) / s;
    const double b = (c2 - mu) / s;
    const double p = Phi_diff(a, b);
    const double d = (std::isfinite(a) ? phi(a) : 0.0) - (std::isfinite(b) ? phi(b) : 0.0);
    const double m1 = mu * p + s * d;
    const double m2 = mu * mu * p + 2.0 * mu * s * d + s * s * (p + xphi(a) - xphi(b));
    return std::array<double, 3>{p, m1, m2};
  };
  Moments m;
  m.prob = mixing_expectation([&](double u) { return parts(u)[0]; }, fam);
  m.u = mixing_expectation([&](double u) { return u * parts(u)[0]; }, fam) / m.prob;
  m.uy = mixing_expectation([&](double u) { return u * parts(u)[1]; }, fam) / m.prob;
  m.uy2 = mixing_expectation([&](double u) { return u * parts(u)[2]; }, fam) / m.prob;
  return m;
}

}  // namespace oracle
