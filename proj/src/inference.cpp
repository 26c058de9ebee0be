#include "moesmn/inference.hpp"

#include <cmath>
#include <limits>

namespace moesmn {

Eigen::Index score_dimension(const MixtureParams& theta) {
  const Eigen::Index g = theta.components();
  return (g - 1) * theta.gating_dim() + g * theta.expert_dim() + g;
}

Eigen::VectorXd score_vector(const CensoredObservation& obs, const MixtureParams& theta,
                             const EStepCache& cache, Eigen::Index i) {
  const int g = theta.components();
  const Eigen::Index p = theta.expert_dim();
  const Eigen::Index q = theta.gating_dim();
  Eigen::VectorXd s(score_dimension(theta));
  const Eigen::VectorXd pi = gating_probs(obs.r, theta.tau);

  Eigen::Index off = 0;
  for (int j = 0; j < g - 1; ++j, off += q) s.segment(off, q) = (cache.z(i, j) - pi(j)) * obs.r;
  for (int j = 0; j < g; ++j, off += p) {
    const double mu = obs.x.dot(theta.beta[j]);
    s.segment(off, p) = cache.z(i, j) / theta.sigma2[j] * (cache.uy(i, j) - cache.u(i, j) * mu) * obs.x;
  }
  for (int j = 0; j < g; ++j, ++off) {
    const double mu = obs.x.dot(theta.beta[j]);
    const double s2 = theta.sigma2[j];
    s(off) = -cache.z(i, j) / (2.0 * s2 * s2) *
             (s2 - cache.uy2(i, j) - cache.u(i, j) * mu * mu + 2.0 * cache.uy(i, j) * mu);
  }
  return s;
}

Eigen::MatrixXd empirical_information(const Dataset& data, const MixtureParams& theta) {
  const EStepCache cache = e_step(data, theta);
  const Eigen::Index d = score_dimension(theta);
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd s = score_vector(data[i], theta, cache, static_cast<Eigen::Index>(i));
    info.selfadjointView<Eigen::Lower>().rankUpdate(s);
  }
  return info.selfadjointView<Eigen::Lower>();
}

SeTable information_se(const Dataset& data, const MixtureParams& theta) {
  const Eigen::MatrixXd info = empirical_information(data, theta);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();

  SeTable out;
  out.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  out.pseudo_inverse = !(out.condition_number <= 1e12);
  Eigen::VectorXd inv(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    inv(k) = lambda(k) > lmax * 1e-12 ? 1.0 / lambda(k) : 0.0;
  const Eigen::MatrixXd cov = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const int g = theta.components();
  const Eigen::Index p = theta.expert_dim();
  const Eigen::Index q = theta.gating_dim();
  Eigen::Index off = 0;
  out.tau.resize(g - 1, q);
  for (int j = 0; j < g - 1; ++j, off += q) out.tau.row(j) = se.segment(off, q).transpose();
  for (int j = 0; j < g; ++j, off += p) out.beta.push_back(se.segment(off, p));
  for (int j = 0; j < g; ++j, ++off) out.sigma2.push_back(se(off));
  return out;
}

}  // namespace moesmn
