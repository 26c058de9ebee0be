#include "moesmn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "moesmn/error.hpp"

namespace moesmn {

InformationCriteria aic_bic(double loglik, double m, double n) {
  if (!(n >= 1.0)) throw DomainError("aic_bic: n must be >= 1");
  return {2.0 * m - 2.0 * loglik, m * std::log(n) - 2.0 * loglik};
}

namespace {

// Relabels values to 0..k-1 in order of first appearance.
std::vector<int> compact(const std::vector<int>& v, int& k) {
  std::map<int, int> ids;
  std::vector<int> out;
  out.reserve(v.size());
  for (int x : v) {
    auto [it, inserted] = ids.emplace(x, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  k = static_cast<int>(ids.size());
  return out;
}

Eigen::MatrixXd contingency(const std::vector<int>& a, const std::vector<int>& b, int& ka, int& kb) {
  const std::vector<int> ca = compact(a, ka);
  const std::vector<int> cb = compact(b, kb);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ka, kb);
  for (std::size_t i = 0; i < ca.size(); ++i) table(ca[i], cb[i]) += 1.0;
  return table;
}

// Maximum-weight perfect matching on a square matrix (Hungarian algorithm,
// run on the negated weights).
double max_assignment(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) total += w(p[j] - 1, j - 1);
  return total;
}

double max_assignment_exhaustive(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w(i, perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double choose2(double m) { return 0.5 * m * (m - 1.0); }

}  // namespace

double mcr(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw DomainError("mcr: length mismatch");
  if (truth.empty()) return 0.0;
  int kt = 0, kp = 0;
  const Eigen::MatrixXd table = contingency(truth, predicted, kt, kp);
  const int k = std::max(kt, kp);
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(k, k);
  square.topLeftCorner(kt, kp) = table;
  const double agree = k <= 8 ? max_assignment_exhaustive(square) : max_assignment(square);
  return 1.0 - agree / static_cast<double>(truth.size());
}

PairIndices rand_indices(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DomainError("rand_indices: length mismatch");
  if (a.size() < 2) throw DomainError("rand_indices: need at least two items");
  int ka = 0, kb = 0;
  const Eigen::MatrixXd table = contingency(a, b, ka, kb);
  const double total = choose2(static_cast<double>(a.size()));
  double both = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i)
    for (Eigen::Index j = 0; j < table.cols(); ++j) both += choose2(table(i, j));
  double in_a = 0.0, in_b = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) in_a += choose2(table.row(i).sum());
  for (Eigen::Index j = 0; j < table.cols(); ++j) in_b += choose2(table.col(j).sum());

  PairIndices out;
  out.ri = (total + 2.0 * both - in_a - in_b) / total;
  const double expected = in_a * in_b / total;
  const double max_index = 0.5 * (in_a + in_b);
  if (max_index == expected) {
    out.ari = (both == in_a && both == in_b) ? 1.0 : 0.0;
  } else {
    out.ari = (both - expected) / (max_index - expected);
  }
  const double union_pairs = in_a + in_b - both;
  out.jci = union_pairs > 0.0 ? both / union_pairs : 1.0;
  return out;
}

double regression_mean(const MixtureParams& theta, const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
  const Eigen::VectorXd pi = gating_probs(r, theta.tau);
  double m = 0.0;
  for (int j = 0; j < theta.components(); ++j) m += pi(j) * x.dot(theta.beta[j]);
  return m;
}

double regression_mean_mse(const MixtureParams& estimate, const MixtureParams& truth,
                           const std::vector<DesignPoint>& designs) {
  if (designs.empty()) throw DomainError("regression_mean_mse: no design points");
  double acc = 0.0;
  for (const DesignPoint& d : designs) {
    const double diff = regression_mean(estimate, d.x, d.r) - regression_mean(truth, d.x, d.r);
    acc += diff * diff;
  }
  return acc / static_cast<double>(designs.size());
}

std::pair<std::vector<int>, std::vector<int>> drop_sentinel(const std::vector<int>& truth,
                                                            const std::vector<int>& predicted, int sentinel) {
  if (truth.size() != predicted.size()) throw DomainError("drop_sentinel: length mismatch");
  std::pair<std::vector<int>, std::vector<int>> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == sentinel) continue;
    out.first.push_back(truth[i]);
    out.second.push_back(predicted[i]);
  }
  return out;
}

}  // namespace moesmn
