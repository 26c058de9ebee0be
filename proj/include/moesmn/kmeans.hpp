#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace moesmn {

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double within_ss = 0.0;
};

/// Lloyd's k-means on the rows of `points`. Seeding is D^2-weighted
/// (k-means++), but every random choice is keyed on the row contents and
/// `seed`, so the partition does not depend on row order. `trials` seedings
/// are run and the one with the smallest within-cluster sum of squares wins.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int trials = 10,
                    int max_iter = 100);

/// Uniform random partition into k labels, keyed on row contents and `seed`.
std::vector<int> random_partition(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

/// Order-independent 64-bit digest of a matrix's rows.
std::uint64_t content_hash(const Eigen::MatrixXd& points);

}  // namespace moesmn
