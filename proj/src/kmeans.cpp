#include "moesmn/kmeans.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "moesmn/error.hpp"

namespace moesmn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t row_hash(const Eigen::MatrixXd& points, Eigen::Index i) {
  std::uint64_t h = 0x51ed270b27e6a1f3ULL;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    double v = points(i, c);
    if (v == 0.0) v = 0.0;  // fold -0 onto +0
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    h = splitmix64(h ^ bits);
  }
  return h;
}

// Uniform in (0, 1) from a 64-bit key.
double key_uniform(std::uint64_t key) {
  return (static_cast<double>(key >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::uint64_t content_hash(const Eigen::MatrixXd& points) {
  std::uint64_t h = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) h += splitmix64(row_hash(points, i));
  return h;
}

std::vector<int> random_partition(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
  if (k < 1) throw DomainError("random_partition: need k >= 1");
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  const std::uint64_t salt = splitmix64(seed);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    labels[static_cast<std::size_t>(i)] = static_cast<int>(splitmix64(row_hash(points, i) ^ salt) % static_cast<std::uint64_t>(k));
  return labels;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int trials, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1 || n < k) throw DomainError("kmeans: need 1 <= k <= n");
  std::vector<std::uint64_t> hashes(n);
  for (Eigen::Index i = 0; i < n; ++i) hashes[i] = row_hash(points, i);

  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::MatrixXd centroids(k, points.cols());
    Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, 1.0);
    for (int c = 0; c < k; ++c) {
      // Exponential race: argmin -log(U_i) / w_i picks row i with probability
      // proportional to w_i, independently of the row order.
      Eigen::Index pick = -1;
      double best_key = std::numeric_limits<double>::infinity();
      const std::uint64_t step = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial) * 1315423911ULL + c));
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(d2(i) > 0.0)) continue;
        const double key = -std::log(key_uniform(splitmix64(hashes[i] ^ step))) / d2(i);
        if (key < best_key || (key == best_key && hashes[i] < hashes[pick])) {
          best_key = key;
          pick = i;
        }
      }
      if (pick < 0) pick = 0;  // all remaining points coincide with centroids
      centroids.row(c) = points.row(pick);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (points.row(i) - centroids.row(c)).squaredNorm();
        d2(i) = c == 0 ? d : std::min(d2(i), d);
      }
    }

    std::vector<int> labels(n, -1);
    double wss = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      wss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (points.row(i) - centroids.row(c)).squaredNorm();
          if (d < dmin) {
            dmin = d;
            arg = c;
          }
        }
        wss += dmin;
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += points.row(i);
        counts(labels[i]) += 1.0;
      }
      for (int c = 0; c < k; ++c)
        if (counts(c) > 0) centroids.row(c) = sums.row(c) / counts(c);
    }
    if (wss < best.within_ss) {
      best.labels = labels;
      best.centroids = centroids;
      best.within_ss = wss;
    }
  }
  return best;
}

}  // namespace moesmn
