#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace moesmn {

enum class FamilyKind { Normal, StudentT, Slash, ContaminatedNormal };

/// A member of the scale-mixture-of-normals class, identified by the law of
/// the mixing variable U:
///   Normal             U = 1
///   StudentT(nu)       U ~ Gamma(nu/2, rate nu/2)
///   Slash(nu)          U ~ Beta(nu, 1)
///   CN(nu, gamma)      U = gamma with probability nu, 1 otherwise
class SmnFamily {
 public:
  static SmnFamily normal();
  static SmnFamily student_t(double nu);
  static SmnFamily slash(double nu);
  static SmnFamily contaminated_normal(double nu, double gamma);
  /// Builds a family of the given kind; `gamma` is ignored unless kind is CN.
  static SmnFamily make(FamilyKind kind, double nu = 0.0, double gamma = 0.0);

  FamilyKind kind() const noexcept { return kind_; }
  double nu() const noexcept { return nu_; }
  double gamma() const noexcept { return gamma_; }

  /// Number of free shape parameters (0 for N, 1 for T/SL, 2 for CN).
  int shape_parameter_count() const noexcept;
  /// Short tag used by the CLI and report files: n, t, sl, cn.
  std::string_view tag() const noexcept;

  SmnFamily with_nu(double nu) const;
  SmnFamily with_gamma(double gamma) const;

  friend bool operator==(const SmnFamily&, const SmnFamily&) = default;

 private:
  SmnFamily(FamilyKind kind, double nu, double gamma) : kind_(kind), nu_(nu), gamma_(gamma) {}
  FamilyKind kind_ = FamilyKind::Normal;
  double nu_ = 0.0;
  double gamma_ = 0.0;
};

std::string_view family_tag(FamilyKind kind) noexcept;
std::optional<FamilyKind> parse_family_kind(std::string_view tag) noexcept;

struct LocationScale {
  double mu = 0.0;
  double sigma2 = 1.0;
  double sigma() const;
};

/// Density of SMN(mu, sigma2, family) at y.
double smn_pdf(double y, const LocationScale& loc, const SmnFamily& fam);
double smn_log_pdf(double y, const LocationScale& loc, const SmnFamily& fam);

/// Standard (mu = 0, sigma2 = 1) density and cdf, plus their logs.
double smn_std_log_pdf(double z, const SmnFamily& fam);
double smn_cdf(double x, const SmnFamily& fam);
double smn_log_cdf(double x, const SmnFamily& fam);

/// log(F(t2) - F(t1)) for standardized bounds t1 < t2 (either may be infinite).
/// Returns -inf when the difference underflows.
double smn_log_interval_prob(double t1, double t2, const SmnFamily& fam);

/// Cdf of the Pearson type VII law with density proportional to
/// (1 + x^2/delta)^(-a/2), a > 1, delta > 0. Equals the Student-t cdf with
/// a-1 degrees of freedom evaluated at x * sqrt((a-1)/delta).
double pvii_cdf(double x, double a, double delta);
double pvii_log_cdf(double x, double a, double delta);

/// One draw of the mixing variable U.
double sample_mixing(const SmnFamily& fam, std::mt19937_64& rng);

/// n draws of mu + U^(-1/2) V with V ~ N(0, sigma2).
std::vector<double> smn_sample(std::size_t n, const LocationScale& loc, const SmnFamily& fam,
                               std::mt19937_64& rng);

}  // namespace moesmn
