#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "moesmn/model.hpp"

namespace moesmn {

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = 2m - 2 loglik, BIC = m ln(n) - 2 loglik.
InformationCriteria aic_bic(double loglik, double m, double n);

/// Misclassification rate under the best one-to-one relabeling of `predicted`.
double mcr(const std::vector<int>& truth, const std::vector<int>& predicted);

struct PairIndices {
  double ri = 0.0;
  double ari = 0.0;
  double jci = 0.0;
};

/// Rand, adjusted Rand (Hubert-Arabie) and Jaccard indices from the
/// contingency table of two partitions.
PairIndices rand_indices(const std::vector<int>& a, const std::vector<int>& b);

/// A design point for evaluating the mixture regression mean.
struct DesignPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd r;
};

/// sum_j pi_j(r; tau) x' beta_j
double regression_mean(const MixtureParams& theta, const Eigen::VectorXd& x, const Eigen::VectorXd& r);

/// Mean squared difference of the regression mean under two parameter sets.
double regression_mean_mse(const MixtureParams& estimate, const MixtureParams& truth,
                           const std::vector<DesignPoint>& designs);

/// Removes the entries of both vectors where `truth` equals `sentinel`.
std::pair<std::vector<int>, std::vector<int>> drop_sentinel(const std::vector<int>& truth,
                                                            const std::vector<int>& predicted,
                                                            int sentinel);

}  // namespace moesmn
