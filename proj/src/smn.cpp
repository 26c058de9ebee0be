#include "moesmn/smn.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "moesmn/error.hpp"
#include "moesmn/special.hpp"

namespace moesmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_nu(double nu, const char* what) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError(std::string(what) + ": nu must be > 0");
}

void require_unit_interval(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1)");
}

// Student-t log cdf; for x > 0 uses the complement to keep the upper tail.
double student_t_log_cdf(double x, double df) {
  if (x == -kInf) return -kInf;
  if (x == kInf) return 0.0;
  const boost::math::students_t dist(df);
  if (x <= 0.0) return std::log(boost::math::cdf(dist, x));
  return std::log1p(-boost::math::cdf(dist, -x));
}

// Slash cdf for h <= 0:  Phi(h) - h/(2 sqrt(2 pi)) * x^-(nu+1/2) gamma(nu+1/2, x), x = h^2/2.
double slash_log_cdf_lower(double h, double nu) {
  if (h == -kInf) return -kInf;
  if (h == 0.0) return std::log(0.5);
  const double x = 0.5 * h * h;
  const double tail = std::log(-h) - std::log(2.0) - kLogSqrt2Pi + log_scaled_lower_gamma(nu + 0.5, x);
  return log_sum_exp(log_normal_cdf(h), tail);
}

}  // namespace

SmnFamily SmnFamily::normal() { return SmnFamily(FamilyKind::Normal, 0.0, 0.0); }

SmnFamily SmnFamily::student_t(double nu) {
  require_positive_nu(nu, "StudentT");
  return SmnFamily(FamilyKind::StudentT, nu, 0.0);
}

SmnFamily SmnFamily::slash(double nu) {
  require_positive_nu(nu, "Slash");
  return SmnFamily(FamilyKind::Slash, nu, 0.0);
}

SmnFamily SmnFamily::contaminated_normal(double nu, double gamma) {
  require_unit_interval(nu, "ContaminatedNormal nu");
  require_unit_interval(gamma, "ContaminatedNormal gamma");
  return SmnFamily(FamilyKind::ContaminatedNormal, nu, gamma);
}

SmnFamily SmnFamily::make(FamilyKind kind, double nu, double gamma) {
  switch (kind) {
    case FamilyKind::Normal: return normal();
    case FamilyKind::StudentT: return student_t(nu);
    case FamilyKind::Slash: return slash(nu);
    case FamilyKind::ContaminatedNormal: return contaminated_normal(nu, gamma);
  }
  throw DomainError("unknown family kind");
}

int SmnFamily::shape_parameter_count() const noexcept {
  switch (kind_) {
    case FamilyKind::Normal: return 0;
    case FamilyKind::StudentT:
    case FamilyKind::Slash: return 1;
    case FamilyKind::ContaminatedNormal: return 2;
  }
  return 0;
}

std::string_view SmnFamily::tag() const noexcept { return family_tag(kind_); }

SmnFamily SmnFamily::with_nu(double nu) const { return make(kind_, nu, gamma_); }

SmnFamily SmnFamily::with_gamma(double gamma) const {
  if (kind_ != FamilyKind::ContaminatedNormal) throw UsageError("with_gamma on a non-CN family");
  return contaminated_normal(nu_, gamma);
}

std::string_view family_tag(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::Normal: return "n";
    case FamilyKind::StudentT: return "t";
    case FamilyKind::Slash: return "sl";
    case FamilyKind::ContaminatedNormal: return "cn";
  }
  return "?";
}

std::optional<FamilyKind> parse_family_kind(std::string_view tag) noexcept {
  if (tag == "n" || tag == "normal") return FamilyKind::Normal;
  if (tag == "t" || tag == "student") return FamilyKind::StudentT;
  if (tag == "sl" || tag == "slash") return FamilyKind::Slash;
  if (tag == "cn" || tag == "contaminated") return FamilyKind::ContaminatedNormal;
  return std::nullopt;
}

double LocationScale::sigma() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be > 0");
  return std::sqrt(sigma2);
}

double smn_std_log_pdf(double z, const SmnFamily& fam) {
  if (std::isinf(z)) return -kInf;
  switch (fam.kind()) {
    case FamilyKind::Normal: return log_normal_pdf(z);
    case FamilyKind::StudentT: {
      const double nu = fam.nu();
      return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) -
             0.5 * (nu + 1.0) * std::log1p(z * z / nu);
    }
    case FamilyKind::Slash: {
      // nu / sqrt(2 pi) * x^-(nu+1/2) gamma(nu+1/2, x), x = z^2/2
      const double nu = fam.nu();
      return std::log(nu) - kLogSqrt2Pi + log_scaled_lower_gamma(nu + 0.5, 0.5 * z * z);
    }
    case FamilyKind::ContaminatedNormal: {
      const double nu = fam.nu();
      const double g = fam.gamma();
      return log_sum_exp(std::log(nu) + 0.5 * std::log(g) + log_normal_pdf(z * std::sqrt(g)),
                         std::log1p(-nu) + log_normal_pdf(z));
    }
  }
  return -kInf;
}

double smn_log_pdf(double y, const LocationScale& loc, const SmnFamily& fam) {
  const double sigma = loc.sigma();
  return smn_std_log_pdf((y - loc.mu) / sigma, fam) - std::log(sigma);
}

double smn_pdf(double y, const LocationScale& loc, const SmnFamily& fam) {
  return std::exp(smn_log_pdf(y, loc, fam));
}

double smn_log_cdf(double x, const SmnFamily& fam) {
  if (std::isnan(x)) return x;
  switch (fam.kind()) {
    case FamilyKind::Normal: return log_normal_cdf(x);
    case FamilyKind::StudentT: return student_t_log_cdf(x, fam.nu());
    case FamilyKind::Slash:
      if (x <= 0.0) return slash_log_cdf_lower(x, fam.nu());
      return std::log1p(-std::exp(slash_log_cdf_lower(-x, fam.nu())));
    case FamilyKind::ContaminatedNormal: {
      const double nu = fam.nu();
      return log_sum_exp(std::log(nu) + log_normal_cdf(x * std::sqrt(fam.gamma())),
                         std::log1p(-nu) + log_normal_cdf(x));
    }
  }
  return -kInf;
}

double smn_cdf(double x, const SmnFamily& fam) { return std::exp(smn_log_cdf(x, fam)); }

double smn_log_interval_prob(double t1, double t2, const SmnFamily& fam) {
  if (!(t1 < t2)) return -kInf;
  if (t1 == -kInf) return smn_log_cdf(t2, fam);
  if (t2 == kInf) return smn_log_cdf(-t1, fam);
  // All families are symmetric; keep the interval in the lower half so the
  // subtraction happens between small, accurately represented numbers.
  if (t1 + t2 > 0.0) {
    const double a = -t2;
    t2 = -t1;
    t1 = a;
  }
  const double hi = smn_log_cdf(t2, fam);
  const double lo = smn_log_cdf(t1, fam);
  if (!(hi > lo)) return -kInf;
  return log_diff_exp(hi, lo);
}

double pvii_log_cdf(double x, double a, double delta) {
  if (!(a > 1.0) || !(delta > 0.0)) throw DomainError("pvii_cdf: need a > 1, delta > 0");
  const double df = a - 1.0;
  return student_t_log_cdf(x * std::sqrt(df / delta), df);
}

double pvii_cdf(double x, double a, double delta) { return std::exp(pvii_log_cdf(x, a, delta)); }

double sample_mixing(const SmnFamily& fam, std::mt19937_64& rng) {
  switch (fam.kind()) {
    case FamilyKind::Normal: return 1.0;
    case FamilyKind::StudentT: {
      std::gamma_distribution<double> g(0.5 * fam.nu(), 2.0 / fam.nu());
      double u = 0.0;
      while (!(u > 0.0)) u = g(rng);
      return u;
    }
    case FamilyKind::Slash: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double v = 0.0;
      while (!(v > 0.0)) v = unif(rng);
      return std::pow(v, 1.0 / fam.nu());
    }
    case FamilyKind::ContaminatedNormal: {
      std::bernoulli_distribution bad(fam.nu());
      return bad(rng) ? fam.gamma() : 1.0;
    }
  }
  return 1.0;
}

std::vector<double> smn_sample(std::size_t n, const LocationScale& loc, const SmnFamily& fam,
                               std::mt19937_64& rng) {
  const double sigma = loc.sigma();
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sample_mixing(fam, rng);
    out.push_back(loc.mu + sigma * stdnorm(rng) / std::sqrt(u));
  }
  return out;
}

}  // namespace moesmn
