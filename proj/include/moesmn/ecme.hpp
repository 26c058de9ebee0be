#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moesmn/estep.hpp"
#include "moesmn/inference.hpp"
#include "moesmn/model.hpp"

namespace moesmn {

enum class InitStrategy { KMeansLS, UserSupplied };
enum class TauInit { Zero, MultinomialFit };
/// Columns clustered by k-means at initialization: the imputed response only,
/// or the response together with the expert covariates (each standardized).
enum class InitFeatures { Response, ResponseAndCovariates };
/// SingleMM takes the one minorize-maximize step per iteration; Newton
/// maximizes the gating part of the Q-function to convergence.
enum class GatingUpdate { SingleMM, Newton };

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitOptions {
  int max_iter = 1000;
  double tol = 1e-5;  // absolute change of the log-likelihood
  InitStrategy init_strategy = InitStrategy::KMeansLS;
  TauInit tau_init = TauInit::Zero;
  InitFeatures init_features = InitFeatures::Response;
  GatingUpdate gating_update = GatingUpdate::Newton;
  bool tie_nu = true;
  /// When false the family parameters stay at their initial values.
  bool estimate_shape = true;
  Bounds t_nu{2.01, 100.0};
  Bounds slash_nu{1.01, 50.0};
  Bounds cn_nu{0.01, 0.99};
  Bounds cn_gamma{0.01, 0.99};
  std::uint64_t seed = 0;
  /// Minimum sum of responsibilities per component; negative means 1e-6 n.
  double min_component_mass = -1.0;
  /// sigma2_j below this fraction of the response variance counts as a
  /// collapsed component (a spurious unbounded-likelihood solution).
  double collapse_ratio = 1e-10;
  /// Starting point for InitStrategy::UserSupplied.
  std::optional<MixtureParams> initial;
  /// Re-initializations after an emptied or singular component.
  int max_reinit = 3;
  bool compute_se = true;

  void validate() const;
};

struct FitReport {
  MixtureParams theta;
  std::vector<double> loglik_trace;
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  int free_parameters = 0;
  double aic = 0.0;
  double bic = 0.0;
  Eigen::MatrixXd responsibilities;  // n x G, at theta
  std::vector<int> labels;           // argmax of each row, 0-based
  std::optional<SeTable> se;
  bool shape_at_bound = false;
  int reinitializations = 0;
  std::vector<std::string> diagnostics;
};

/// k-means on the imputed responses, per-group least squares for beta and
/// sigma2, tau = 0 (or a multinomial-logistic fit to the groups) and
/// near-normal shape parameters. `attempt` > 0 is a re-initialization: attempt
/// 1 clusters on the other feature set, later attempts start from a random
/// partition keyed on the row contents.
MixtureParams initialize(const Dataset& data, int components, const SmnFamily& family,
                         const FitOptions& opts, int attempt = 0);

/// CM-step 1: weighted least squares for each beta_j, then sigma2_j.
void cm_step_regression(const EStepCache& cache, const Dataset& data, double min_component_mass,
                        MixtureParams& theta, double min_sigma2 = 0.0);

/// CM-step 2: one minorize-maximize step for the gating coefficients.
/// `gating_design` is the n x q matrix of r vectors.
Eigen::MatrixXd cm_step_gating(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau_old,
                               const Eigen::MatrixXd& gating_design);

/// Soft-label multinomial-logistic objective sum_i sum_j z_ij log pi_j(r_i).
double gating_objective(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau, const Eigen::MatrixXd& gating_design);

/// CM-step 2 solved to convergence: Newton-Raphson with step halving; a step
/// that fails to increase the objective is replaced by the MM step.
Eigen::MatrixXd cm_step_gating_newton(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau_old,
                                      const Eigen::MatrixXd& gating_design, int max_steps = 10,
                                      double tol = 1e-10);

/// CML-step: updates the family parameters by maximizing the observed
/// log-likelihood with beta, sigma2 and tau held fixed. For CN the contamination
/// proportion first takes its closed form from `cache.b`. Returns true when a
/// parameter ends on the boundary of its search box.
bool cml_step_shape(const Dataset& data, const EStepCache& cache, const FitOptions& opts,
                    MixtureParams& theta);

/// One full ECME iteration (E, CM1, CM2, CML).
MixtureParams ecme_iteration(const Dataset& data, const MixtureParams& theta, const FitOptions& opts,
                             bool* shape_at_bound = nullptr);

FitReport fit(const Dataset& data, int components, const SmnFamily& family, const FitOptions& opts = {});

Eigen::MatrixXd gating_design(const Dataset& data);

}  // namespace moesmn
