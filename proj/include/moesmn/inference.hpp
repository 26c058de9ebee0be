#pragma once

#include <vector>

#include <Eigen/Dense>

#include "moesmn/estep.hpp"
#include "moesmn/model.hpp"

namespace moesmn {

/// Standard errors from the empirical information matrix. Shape parameters
/// (nu, gamma) are treated as fixed and get no entry.
struct SeTable {
  Eigen::MatrixXd tau;                // (G-1) x q
  std::vector<Eigen::VectorXd> beta;  // G vectors of length p
  std::vector<double> sigma2;         // G
  bool pseudo_inverse = false;        // information matrix was (near) singular
  double condition_number = 0.0;
};

/// Length of the score vector: (G-1) q + G p + G.
Eigen::Index score_dimension(const MixtureParams& theta);

/// Expected complete-data score of record i, ordered (tau_1..tau_{G-1},
/// beta_1..beta_G, sigma2_1..sigma2_G). `cache` must be computed at theta.
Eigen::VectorXd score_vector(const CensoredObservation& obs, const MixtureParams& theta,
                             const EStepCache& cache, Eigen::Index i);

/// Sum over records of s_i s_i^T.
Eigen::MatrixXd empirical_information(const Dataset& data, const MixtureParams& theta);

SeTable information_se(const Dataset& data, const MixtureParams& theta);

}  // namespace moesmn
