#pragma once

#include <Eigen/Dense>

#include "moesmn/model.hpp"
#include "moesmn/moments.hpp"

namespace moesmn {

/// Per-observation, per-component conditional expectations at the current
/// parameters. All matrices are n x G. `b` is only filled for CN components.
struct EStepCache {
  Eigen::MatrixXd z;
  Eigen::MatrixXd u;
  Eigen::MatrixXd uy;
  Eigen::MatrixXd uy2;
  Eigen::MatrixXd b;

  MomentTriple moments(Eigen::Index i, Eigen::Index j) const { return {u(i, j), uy(i, j), uy2(i, j)}; }
};

/// Exact records use (u, y u, y^2 u) with u = E(U | y); censored records use
/// the interval moments. A component under which a censored interval has
/// probability below the floor gets z ~ 0 and moments evaluated at the
/// nearest finite bound so every entry stays finite.
EStepCache e_step(const Dataset& data, const MixtureParams& theta);

}  // namespace moesmn
