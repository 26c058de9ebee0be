#include "moesmn/estep.hpp"

#include <cmath>

#include "moesmn/error.hpp"

namespace moesmn {

EStepCache e_step(const Dataset& data, const MixtureParams& theta) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const int g = theta.components();
  const double log_floor = std::log(kIntervalProbFloor);
  EStepCache cache;
  cache.z.resize(n, g);
  cache.u.resize(n, g);
  cache.uy.resize(n, g);
  cache.uy2.resize(n, g);
  cache.b = Eigen::MatrixXd::Zero(n, g);

  for (Eigen::Index i = 0; i < n; ++i) {
    const CensoredObservation& obs = data[i];
    Eigen::VectorXd terms = log_gating_probs(obs.r, theta.tau);
    Eigen::VectorXd comp(g);
    for (int j = 0; j < g; ++j) {
      comp(j) = log_component_term(obs, theta, j);
      terms(j) += comp(j);
    }
    const double mx = terms.maxCoeff();
    if (!std::isfinite(mx)) throw NumericalSupportError(static_cast<std::size_t>(i), "zero likelihood under every component");
    Eigen::VectorXd z = (terms.array() - mx).exp();
    cache.z.row(i) = z / z.sum();

    for (int j = 0; j < g; ++j) {
      const LocationScale loc = theta.location(j, obs.x);
      MomentTriple m;
      if (!obs.censored) {
        m = uncensored_moments(obs.w, loc, theta.family[j]);
      } else if (comp(j) >= log_floor) {
        m = censored_moments(obs.c1, obs.c2, loc, theta.family[j]);
      } else {
        m = uncensored_moments(obs.imputed_response(), loc, theta.family[j]);
      }
      cache.u(i, j) = m.u_hat;
      cache.uy(i, j) = m.uy_hat;
      cache.uy2(i, j) = m.uy2_hat;
      if (theta.family[j].kind() == FamilyKind::ContaminatedNormal)
        cache.b(i, j) = cn_bad_point_prob(obs, j, theta);
    }
  }
  return cache;
}

}  // namespace moesmn
