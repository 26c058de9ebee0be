#include "moesmn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "moesmn/error.hpp"
#include "moesmn/special.hpp"

namespace moesmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

CensoredObservation CensoredObservation::exact(double w, Eigen::VectorXd x, Eigen::VectorXd r) {
  CensoredObservation o;
  o.w = w;
  o.censored = false;
  o.c1 = w;
  o.c2 = w;
  o.x = std::move(x);
  o.r = std::move(r);
  return o;
}

CensoredObservation CensoredObservation::interval(double c1, double c2, Eigen::VectorXd x, Eigen::VectorXd r) {
  CensoredObservation o;
  o.w = std::numeric_limits<double>::quiet_NaN();
  o.censored = true;
  o.c1 = c1;
  o.c2 = c2;
  o.x = std::move(x);
  o.r = std::move(r);
  return o;
}

void CensoredObservation::validate() const {
  if (censored) {
    if (std::isnan(c1) || std::isnan(c2) || !(c1 < c2))
      throw DomainError("censored record needs c1 < c2");
    if (c1 == -kInf && c2 == kInf) throw DomainError("censored record needs at least one finite bound");
  } else if (!std::isfinite(w)) {
    throw DomainError("exact record needs a finite response");
  }
  if (x.size() == 0 || r.size() == 0) throw DomainError("record has empty covariate vector");
}

double CensoredObservation::imputed_response() const {
  if (!censored) return w;
  if (std::isfinite(c1) && std::isfinite(c2)) return 0.5 * (c1 + c2);
  return std::isfinite(c1) ? c1 : c2;
}

void MixtureParams::validate() const {
  const auto g = beta.size();
  if (g == 0) throw DomainError("mixture needs at least one component");
  if (sigma2.size() != g || family.size() != g) throw DomainError("inconsistent component counts");
  if (tau.rows() != static_cast<Eigen::Index>(g) - 1) throw DomainError("tau must have G-1 rows");
  for (std::size_t j = 0; j < g; ++j) {
    if (beta[j].size() != beta.front().size()) throw DomainError("beta vectors differ in length");
    if (!(sigma2[j] > 0.0) || !std::isfinite(sigma2[j])) throw DomainError("sigma2 must be > 0");
  }
}

Eigen::VectorXd log_gating_probs(const Eigen::VectorXd& r, const Eigen::MatrixXd& tau) {
  if (tau.rows() > 0 && tau.cols() != r.size()) throw DomainError("gating: dimension mismatch between tau and r");
  const Eigen::Index g = tau.rows() + 1;
  Eigen::VectorXd logits(g);
  if (tau.rows() > 0) logits.head(g - 1) = tau * r;
  logits(g - 1) = 0.0;
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd gating_probs(const Eigen::VectorXd& r, const Eigen::MatrixXd& tau) {
  return log_gating_probs(r, tau).array().exp();
}

double log_component_term(const CensoredObservation& obs, const MixtureParams& theta, int j) {
  const LocationScale loc = theta.location(j, obs.x);
  if (!obs.censored) return smn_log_pdf(obs.w, loc, theta.family[j]);
  const double sigma = loc.sigma();
  return smn_log_interval_prob((obs.c1 - loc.mu) / sigma, (obs.c2 - loc.mu) / sigma, theta.family[j]);
}

namespace {

Eigen::VectorXd joint_log_terms(const CensoredObservation& obs, const MixtureParams& theta) {
  Eigen::VectorXd terms = log_gating_probs(obs.r, theta.tau);
  for (int j = 0; j < theta.components(); ++j) terms(j) += log_component_term(obs, theta, j);
  return terms;
}

double log_sum(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (mx == -kInf) return -kInf;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

double observation_loglik(const CensoredObservation& obs, const MixtureParams& theta, std::size_t index) {
  const double ll = log_sum(joint_log_terms(obs, theta));
  if (!std::isfinite(ll)) throw NumericalSupportError(index, "zero likelihood under every component");
  return ll;
}

double observed_loglik(const Dataset& data, const MixtureParams& theta) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += observation_loglik(data[i], theta, i);
  return total;
}

Eigen::VectorXd responsibilities(const CensoredObservation& obs, const MixtureParams& theta, std::size_t index) {
  const Eigen::VectorXd terms = joint_log_terms(obs, theta);
  const double lse = log_sum(terms);
  if (!std::isfinite(lse)) throw NumericalSupportError(index, "responsibilities undefined: zero likelihood");
  Eigen::VectorXd z = (terms.array() - lse).exp();
  return z / z.sum();
}

double cn_bad_point_prob(const CensoredObservation& obs, int j, const MixtureParams& theta) {
  const SmnFamily& fam = theta.family[j];
  if (fam.kind() != FamilyKind::ContaminatedNormal)
    throw UsageError("cn_bad_point_prob called on a non-CN component");
  const LocationScale loc = theta.location(j, obs.x);
  const double sigma = loc.sigma();
  const double nu = fam.nu();
  const double sg = std::sqrt(fam.gamma());
  double log_bad = 0.0;
  double log_all = 0.0;
  if (!obs.censored) {
    const double z = (obs.w - loc.mu) / sigma;
    log_bad = std::log(nu) + std::log(sg) + log_normal_pdf(z * sg);
    log_all = log_sum_exp(log_bad, std::log1p(-nu) + log_normal_pdf(z));
  } else {
    const double t1 = (obs.c1 - loc.mu) / sigma;
    const double t2 = (obs.c2 - loc.mu) / sigma;
    log_bad = std::log(nu) + smn_log_interval_prob(t1 * sg, t2 * sg, SmnFamily::normal());
    log_all = smn_log_interval_prob(t1, t2, fam);
  }
  if (log_all == -kInf) return nu;
  return std::clamp(std::exp(log_bad - log_all), 0.0, 1.0);
}

int free_parameter_count(const MixtureParams& theta, bool tie_nu) {
  const int g = theta.components();
  int m = g * static_cast<int>(theta.expert_dim()) + g + (g - 1) * static_cast<int>(theta.gating_dim());
  const int k = theta.family.front().shape_parameter_count();
  m += tie_nu ? k : g * k;
  return m;
}

std::vector<int> canonical_order(const MixtureParams& theta) {
  std::vector<int> order(theta.components());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (theta.beta[a](0) != theta.beta[b](0)) return theta.beta[a](0) < theta.beta[b](0);
    return theta.sigma2[a] < theta.sigma2[b];
  });
  return order;
}

MixtureParams permute_components(const MixtureParams& theta, const std::vector<int>& order) {
  const int g = theta.components();
  if (static_cast<int>(order.size()) != g) throw DomainError("permutation has wrong length");
  MixtureParams out;
  const Eigen::Index q = theta.tau.cols();
  // Full coefficient matrix with the implicit zero row for the reference component.
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(g, q);
  if (g > 1) full.topRows(g - 1) = theta.tau;
  const Eigen::RowVectorXd ref = full.row(order.back());
  out.tau.resize(g - 1, q);
  for (int j = 0; j < g; ++j) {
    out.beta.push_back(theta.beta[order[j]]);
    out.sigma2.push_back(theta.sigma2[order[j]]);
    out.family.push_back(theta.family[order[j]]);
    if (j < g - 1) out.tau.row(j) = full.row(order[j]) - ref;
  }
  return out;
}

}  // namespace moesmn
