#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "moesmn/smn.hpp"

namespace moesmn {

/// One response record. `w` is meaningful only when `censored` is false;
/// otherwise the response is known to lie in [c1, c2] (c1 = -inf for left,
/// c2 = +inf for right censoring). `x` and `r` carry a leading 1.
struct CensoredObservation {
  double w = 0.0;
  bool censored = false;
  double c1 = 0.0;
  double c2 = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd r;

  static CensoredObservation exact(double w, Eigen::VectorXd x, Eigen::VectorXd r);
  static CensoredObservation interval(double c1, double c2, Eigen::VectorXd x, Eigen::VectorXd r);

  /// Throws DomainError if the record is inconsistent.
  void validate() const;
  /// Representative response used for initialization: w, the midpoint of a
  /// finite interval, or the finite bound of a half-infinite one.
  double imputed_response() const;
};

using Dataset = std::vector<CensoredObservation>;

/// Full parameter set of a G-component mixture of experts. Gating uses a
/// reference-component softmax: component G has an implicit zero coefficient
/// vector, so `tau` holds G-1 rows of length q.
struct MixtureParams {
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> sigma2;
  std::vector<SmnFamily> family;
  Eigen::MatrixXd tau;

  int components() const noexcept { return static_cast<int>(beta.size()); }
  Eigen::Index expert_dim() const noexcept { return beta.empty() ? 0 : beta.front().size(); }
  Eigen::Index gating_dim() const noexcept { return tau.cols(); }

  LocationScale location(int j, const Eigen::VectorXd& x) const { return {x.dot(beta[j]), sigma2[j]}; }
  void validate() const;
};

/// Softmax gating probabilities pi_j(r; tau), j = 1..G.
Eigen::VectorXd gating_probs(const Eigen::VectorXd& r, const Eigen::MatrixXd& tau);
Eigen::VectorXd log_gating_probs(const Eigen::VectorXd& r, const Eigen::MatrixXd& tau);

/// log f_SMN(w) for an exact record, log(F(t2) - F(t1)) for a censored one,
/// under component j alone (no gating weight).
double log_component_term(const CensoredObservation& obs, const MixtureParams& theta, int j);

/// Contribution of one record to the observed log-likelihood.
double observation_loglik(const CensoredObservation& obs, const MixtureParams& theta, std::size_t index = 0);

/// Observed-data log-likelihood, accumulated in log space.
double observed_loglik(const Dataset& data, const MixtureParams& theta);

/// Posterior membership probabilities z_hat_i.
Eigen::VectorXd responsibilities(const CensoredObservation& obs, const MixtureParams& theta,
                                 std::size_t index = 0);

/// Posterior probability that the record is a "bad point" of CN component j.
double cn_bad_point_prob(const CensoredObservation& obs, int j, const MixtureParams& theta);

/// Free parameters: G p + G + (G-1) q + shape parameters (once if tied).
int free_parameter_count(const MixtureParams& theta, bool tie_nu);

/// Component order used for reporting: ascending intercept, ties by sigma2.
std::vector<int> canonical_order(const MixtureParams& theta);

/// Reorders components so that new component j is old component order[j];
/// tau is re-expressed against the new reference component.
MixtureParams permute_components(const MixtureParams& theta, const std::vector<int>& order);

}  // namespace moesmn
