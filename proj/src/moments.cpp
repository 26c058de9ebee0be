#include "moesmn/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "moesmn/error.hpp"
#include "moesmn/special.hpp"

namespace moesmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogFloor = std::log(kIntervalProbFloor);

void require_t_order(double r, const SmnFamily& fam) {
  if (fam.kind() == FamilyKind::StudentT && !(fam.nu() + 2.0 * r > 0.0))
    throw DomainError("E_phi/E_Phi: Student-t requires nu + 2r > 0");
  if (fam.kind() == FamilyKind::Slash && !(fam.nu() + r > 0.0))
    throw DomainError("E_phi/E_Phi: slash requires nu + r > 0");
}

// exp(a - b) * t, with t * 0 = 0 even when t is infinite.
double weighted_ratio(double t, double log_num, double log_den) {
  if (log_num == -kInf) return 0.0;
  return t * std::exp(log_num - log_den);
}

}  // namespace

double log_e_phi(double r, double h, const SmnFamily& fam) {
  require_t_order(r, fam);
  if (std::isinf(h)) return -kInf;
  switch (fam.kind()) {
    case FamilyKind::Normal: return log_normal_pdf(h);
    case FamilyKind::StudentT: {
      const double nu = fam.nu();
      const double a = 0.5 * nu + r;
      return std::lgamma(a) - std::lgamma(0.5 * nu) - kLogSqrt2Pi + 0.5 * nu * std::log(0.5 * nu) +
             a * std::log(2.0 / (h * h + nu));
    }
    case FamilyKind::Slash: {
      const double nu = fam.nu();
      return std::log(nu) - kLogSqrt2Pi + log_scaled_lower_gamma(nu + r, 0.5 * h * h);
    }
    case FamilyKind::ContaminatedNormal: {
      const double nu = fam.nu();
      const double g = fam.gamma();
      return log_sum_exp(r * std::log(g) + std::log(nu) + log_normal_pdf(h * std::sqrt(g)),
                         std::log1p(-nu) + log_normal_pdf(h));
    }
  }
  return -kInf;
}

double log_e_Phi(double r, double h, const SmnFamily& fam) {
  require_t_order(r, fam);
  if (h == -kInf) return -kInf;
  if (h == kInf) return std::log(mixing_moment(r, fam));
  switch (fam.kind()) {
    case FamilyKind::Normal: return log_normal_cdf(h);
    case FamilyKind::StudentT: {
      const double nu = fam.nu();
      return std::lgamma(0.5 * nu + r) - std::lgamma(0.5 * nu) + r * std::log(2.0 / nu) +
             pvii_log_cdf(h, nu + 2.0 * r + 1.0, nu);
    }
    case FamilyKind::Slash: {
      const double nu = fam.nu();
      return std::log(nu / (nu + r)) + smn_log_cdf(h, SmnFamily::slash(nu + r));
    }
    case FamilyKind::ContaminatedNormal: {
      const double nu = fam.nu();
      const double g = fam.gamma();
      return log_sum_exp(r * std::log(g) + std::log(nu) + log_normal_cdf(h * std::sqrt(g)),
                         std::log1p(-nu) + log_normal_cdf(h));
    }
  }
  return -kInf;
}

double e_phi(double r, double h, const SmnFamily& fam) { return std::exp(log_e_phi(r, h, fam)); }
double e_Phi(double r, double h, const SmnFamily& fam) { return std::exp(log_e_Phi(r, h, fam)); }

double mixing_moment(double r, const SmnFamily& fam) {
  require_t_order(r, fam);
  switch (fam.kind()) {
    case FamilyKind::Normal: return 1.0;
    case FamilyKind::StudentT: {
      const double nu = fam.nu();
      return std::exp(std::lgamma(0.5 * nu + r) - std::lgamma(0.5 * nu) + r * std::log(2.0 / nu));
    }
    case FamilyKind::Slash: return fam.nu() / (fam.nu() + r);
    case FamilyKind::ContaminatedNormal:
      return fam.nu() * std::pow(fam.gamma(), r) + (1.0 - fam.nu());
  }
  return 1.0;
}

double u_hat_uncensored(double y, const LocationScale& loc, const SmnFamily& fam) {
  const double z = (y - loc.mu) / loc.sigma();
  const double delta = z * z;
  switch (fam.kind()) {
    case FamilyKind::Normal: return 1.0;
    case FamilyKind::StudentT: return (fam.nu() + 1.0) / (fam.nu() + delta);
    case FamilyKind::Slash: {
      // (2/delta) gamma(nu+3/2, delta/2) / gamma(nu+1/2, delta/2)
      const double a = fam.nu() + 0.5;
      const double x = 0.5 * delta;
      return std::exp(log_scaled_lower_gamma(a + 1.0, x) - log_scaled_lower_gamma(a, x));
    }
    case FamilyKind::ContaminatedNormal: {
      // Numerator and denominator scaled by exp(-(1-gamma) delta / 2).
      const double nu = fam.nu();
      const double g = fam.gamma();
      const double good = (1.0 - nu) * std::exp(-0.5 * (1.0 - g) * delta);
      return (good + nu * std::pow(g, 1.5)) / (good + nu * std::sqrt(g));
    }
  }
  return 1.0;
}

MomentTriple uncensored_moments(double y, const LocationScale& loc, const SmnFamily& fam) {
  const double u = u_hat_uncensored(y, loc, fam);
  return {u, y * u, y * y * u};
}

MomentTriple censored_moments(double c1, double c2, const LocationScale& loc, const SmnFamily& fam) {
  if (!(c1 < c2)) throw DomainError("censored_moments: need c1 < c2");
  const double sigma = loc.sigma();
  const double mu = loc.mu;
  double t1 = (c1 - mu) / sigma;
  double t2 = (c2 - mu) / sigma;

  double u = 0.0;
  double ut = 0.0;   // E(U T | t1 <= T <= t2)
  double ut2 = 0.0;  // E(U T^2 | t1 <= T <= t2)
  if (t1 == -kInf && t2 == kInf) {
    u = mixing_moment(1.0, fam);
    ut = 0.0;
    ut2 = 1.0;
  } else {
    double sign = 1.0;
    if (t1 + t2 > 0.0) {
      const double a = -t2;
      t2 = -t1;
      t1 = a;
      sign = -1.0;
    }
    const double log_p = smn_log_interval_prob(t1, t2, fam);
    if (!(log_p >= kLogFloor)) throw DegenerateIntervalError("censoring interval has probability below 1e-300");

    if (fam.kind() == FamilyKind::Normal) {
      u = 1.0;
    } else {
      const double hi = log_e_Phi(1.0, t2, fam);
      const double lo = log_e_Phi(1.0, t1, fam);
      u = hi > lo ? std::exp(log_diff_exp(hi, lo) - log_p) : 0.0;
    }
    const double phi1 = log_e_phi(0.5, t1, fam);
    const double phi2 = log_e_phi(0.5, t2, fam);
    ut = sign * (weighted_ratio(1.0, phi1, log_p) - weighted_ratio(1.0, phi2, log_p));
    ut2 = 1.0 + weighted_ratio(t1, phi1, log_p) - weighted_ratio(t2, phi2, log_p);
  }
  return {u, mu * u + sigma * ut, mu * mu * u + 2.0 * mu * sigma * ut + loc.sigma2 * ut2};
}

namespace {

// Integrals over [c1, c2] of y^b phi(y; mu, s^2) for b = 0, 1, 2, truncated to mu +- 40 s.
struct YIntegrals {
  double i0 = 0.0, i1 = 0.0, i2 = 0.0;
};

YIntegrals y_integrals(double c1, double c2, double mu, double s) {
  using boost::math::quadrature::gauss_kronrod;
  const double lo = std::max(c1, mu - 40.0 * s);
  const double hi = std::min(c2, mu + 40.0 * s);
  YIntegrals out;
  if (!(lo < hi)) return out;
  auto dens = [&](double y) {
    const double z = (y - mu) / s;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) / s;
  };
  // Split at mu so the peak never sits in the interior of a single panel.
  auto integrate = [&](auto f) {
    double total = 0.0;
    if (lo < mu && mu < hi) {
      total += gauss_kronrod<double, 61>::integrate(f, lo, mu, 20, 1e-14);
      total += gauss_kronrod<double, 61>::integrate(f, mu, hi, 20, 1e-14);
    } else {
      total = gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-14);
    }
    return total;
  };
  out.i0 = integrate([&](double y) { return dens(y); });
  out.i1 = integrate([&](double y) { return y * dens(y); });
  out.i2 = integrate([&](double y) { return y * y * dens(y); });
  return out;
}

}  // namespace

MomentTriple quadrature_oracle_moments(double c1, double c2, const LocationScale& loc,
                                       const SmnFamily& fam) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(c1 < c2)) throw DomainError("quadrature_oracle_moments: need c1 < c2");
  const double sigma = loc.sigma();
  const double mu = loc.mu;

  // Accumulates P, E(U 1), E(U Y 1), E(U Y^2 1) as integrals against the mixing law.
  double p = 0.0, eu = 0.0, euy = 0.0, euy2 = 0.0;
  auto add_atom = [&](double u, double weight) {
    const YIntegrals yi = y_integrals(c1, c2, mu, sigma / std::sqrt(u));
    p += weight * yi.i0;
    eu += weight * u * yi.i0;
    euy += weight * u * yi.i1;
    euy2 += weight * u * yi.i2;
  };

  switch (fam.kind()) {
    case FamilyKind::Normal: add_atom(1.0, 1.0); break;
    case FamilyKind::ContaminatedNormal:
      add_atom(fam.gamma(), fam.nu());
      add_atom(1.0, 1.0 - fam.nu());
      break;
    case FamilyKind::StudentT:
    case FamilyKind::Slash: {
      const double nu = fam.nu();
      std::function<double(double)> h;
      double u_lo = 0.0, u_hi = 1.0;
      if (fam.kind() == FamilyKind::StudentT) {
        const double log_norm = 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu);
        h = [=](double u) { return std::exp(log_norm + (0.5 * nu - 1.0) * std::log(u) - 0.5 * nu * u); };
        u_hi = kInf;
      } else {
        h = [=](double u) { return nu * std::pow(u, nu - 1.0); };
      }
      auto integrand = [&](double u, int which) {
        if (!(u > 0.0) || std::isinf(u)) return 0.0;
        const YIntegrals yi = y_integrals(c1, c2, mu, sigma / std::sqrt(u));
        const double w = h(u);
        switch (which) {
          case 0: return w * yi.i0;
          case 1: return w * u * yi.i0;
          case 2: return w * u * yi.i1;
          default: return w * u * yi.i2;
        }
      };
      // The mixing density of the t law is concentrated near 1; split there.
      auto outer = [&](int which) {
        auto f = [&](double u) { return integrand(u, which); };
        if (u_hi == kInf) {
          return gauss_kronrod<double, 61>::integrate(f, u_lo, 1.0, 15, 1e-12) +
                 gauss_kronrod<double, 61>::integrate(f, 1.0, u_hi, 15, 1e-12);
        }
        return gauss_kronrod<double, 61>::integrate(f, u_lo, u_hi, 15, 1e-12);
      };
      p = outer(0);
      eu = outer(1);
      euy = outer(2);
      euy2 = outer(3);
      break;
    }
  }
  if (!(p >= kIntervalProbFloor)) throw DegenerateIntervalError("oracle: interval probability below 1e-300");
  return {eu / p, euy / p, euy2 / p};
}

}  // namespace moesmn
