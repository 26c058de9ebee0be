#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "moesmn/model.hpp"
#include "moesmn/smn.hpp"

namespace moesmn {

/// Label given to appended outlier rows.
inline constexpr int kOutlierLabel = -1;

enum class MixingKind { Normal, StudentT, Slash, ContaminatedNormal, LaplaceViaExp, BirnbaumSaunders, Gig };

/// Law of the mixing variable U in y = mu + U^(-1/2) V.
struct MixingLaw {
  MixingKind kind = MixingKind::Normal;
  double a = 0.0;  // nu, lambda, alpha or kappa
  double b = 0.0;  // gamma, BS scale or chi
  double c = 0.0;  // psi

  static MixingLaw normal() { return {}; }
  static MixingLaw smn(const SmnFamily& fam);
  /// U^(-1) ~ Exponential(rate lambda).
  static MixingLaw laplace_via_exp(double lambda) { return {MixingKind::LaplaceViaExp, lambda, 0.0, 0.0}; }
  static MixingLaw birnbaum_saunders(double alpha, double scale = 1.0) {
    return {MixingKind::BirnbaumSaunders, alpha, scale, 0.0};
  }
  static MixingLaw gig(double kappa, double chi, double psi) { return {MixingKind::Gig, kappa, chi, psi}; }

  void validate() const;
  double sample(std::mt19937_64& rng) const;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct GeneratorSpec {
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> sigma2;
  Eigen::MatrixXd tau;  // (G-1) x q, reference-component softmax
  std::vector<MixingLaw> mixing;
  /// Ranges of x1..x_{p-1}; the intercept is implicit.
  std::vector<UniformRange> x_ranges;
  /// Ranges of r1..r_{q-1}. Ignored when `gating_uses_x` is set.
  std::vector<UniformRange> r_ranges;
  bool gating_uses_x = false;

  int components() const noexcept { return static_cast<int>(beta.size()); }
  void validate() const;
};

struct SimulatedSample {
  Dataset data;             // all records exact
  std::vector<int> labels;  // generating component, or kOutlierLabel
};

SimulatedSample generate_moe_data(const GeneratorSpec& spec, std::size_t n, std::mt19937_64& rng);

struct CensoredResponse {
  double w = 0.0;
  bool censored = false;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// floor(n p) + 1 records (none when p = 0) drawn without replacement get the
/// non-informative window [max(y-U1, y+U2-c), min(y+U2, y-U1+c)], U1,U2 ~ U(0,c).
std::vector<CensoredResponse> apply_interval_censoring(const std::vector<double>& y, double p, double c,
                                                       std::mt19937_64& rng);

enum class TailSide { Left, Right };

/// Values beyond the empirical (type 7) p or 1-p quantile are censored at it.
std::vector<CensoredResponse> apply_tail_censoring(const std::vector<double>& y, double p, TailSide side);

/// Writes the censoring pattern into the response fields of `data`.
void set_responses(Dataset& data, const std::vector<CensoredResponse>& responses);

std::vector<double> responses_of(const Dataset& data);

/// Appends floor(n c_prob) exact rows with y = -2 and x1.. ~ U(-1,1); r copies
/// x when the dimensions agree, otherwise r1.. ~ U(-1,1) as well.
void inject_outliers(SimulatedSample& sample, double c_prob, std::mt19937_64& rng);

/// One draw from GIG(kappa, chi, psi), density proportional to
/// x^(kappa-1) exp(-(chi/x + psi x)/2).
double sample_gig(double kappa, double chi, double psi, std::mt19937_64& rng);

/// Independent stream seed for replication `index` of a study.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

}  // namespace moesmn
