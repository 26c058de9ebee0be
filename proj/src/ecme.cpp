#include "moesmn/ecme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include <boost/math/tools/minima.hpp>

#include "moesmn/error.hpp"
#include "moesmn/kmeans.hpp"
#include "moesmn/metrics.hpp"
#include "moesmn/special.hpp"

namespace moesmn {

void FitOptions::validate() const {
  if (max_iter < 1) throw DomainError("FitOptions: max_iter must be >= 1");
  if (!(tol > 0.0)) throw DomainError("FitOptions: tol must be > 0");
  if (max_reinit < 0) throw DomainError("FitOptions: max_reinit must be >= 0");
  for (const Bounds* b : {&t_nu, &slash_nu, &cn_nu, &cn_gamma})
    if (!(b->lo > 0.0 && b->lo < b->hi)) throw DomainError("FitOptions: invalid shape bounds");
  if (cn_nu.hi >= 1.0 || cn_gamma.hi >= 1.0) throw DomainError("FitOptions: CN bounds must lie in (0,1)");
  if (init_strategy == InitStrategy::UserSupplied && !initial)
    throw DomainError("FitOptions: UserSupplied initialization needs a starting point");
}

Eigen::MatrixXd gating_design(const Dataset& data) {
  if (data.empty()) throw DomainError("gating_design: empty dataset");
  const Eigen::Index q = data.front().r.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), q);
  for (std::size_t i = 0; i < data.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data[i].r.transpose();
  return out;
}

namespace {

double resolve_min_mass(const FitOptions& opts, std::size_t n) {
  return opts.min_component_mass < 0.0 ? 1e-6 * static_cast<double>(n) : opts.min_component_mass;
}

double imputed_variance(const Dataset& data) {
  double mean = 0.0;
  for (const CensoredObservation& obs : data) mean += obs.imputed_response();
  mean /= static_cast<double>(data.size());
  double ss = 0.0;
  for (const CensoredObservation& obs : data) ss += (obs.imputed_response() - mean) * (obs.imputed_response() - mean);
  return ss / static_cast<double>(std::max<std::size_t>(data.size() - 1, 1));
}

// Eigen's LDLT::rcond() skips zero pivots, so check the pivots directly.
bool well_conditioned(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, double threshold) {
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double top = d.cwiseAbs().maxCoeff();
  return d.minCoeff() > threshold * top && ldlt.rcond() > threshold;
}

double clip(double v, const Bounds& b) { return std::clamp(v, b.lo, b.hi); }

SmnFamily starting_family(const SmnFamily& family, const FitOptions& opts) {
  if (!opts.estimate_shape) return family;
  switch (family.kind()) {
    case FamilyKind::Normal:
      return family;
    case FamilyKind::StudentT:
      return SmnFamily::student_t(clip(20.0, opts.t_nu));
    case FamilyKind::Slash:
      return SmnFamily::slash(clip(20.0, opts.slash_nu));
    case FamilyKind::ContaminatedNormal:
      return SmnFamily::contaminated_normal(clip(0.05, opts.cn_nu), clip(0.8, opts.cn_gamma));
  }
  return family;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int k) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) z(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return z;
}

}  // namespace

MixtureParams initialize(const Dataset& data, int components, const SmnFamily& family, const FitOptions& opts,
                         int attempt) {
  if (components < 1) throw DomainError("initialize: need at least one component");
  if (data.empty()) throw DomainError("initialize: empty dataset");
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index p = data.front().x.size();
  const Eigen::Index q = data.front().r.size();
  if (n < components * (p + 2))
    throw InitializationError("initialize: need at least G(p+2) observations");

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CensoredObservation& obs = data[static_cast<std::size_t>(i)];
    y(i) = obs.imputed_response();
    design.row(i) = obs.x.transpose();
  }
  // Attempt 0 uses the requested features, attempt 1 the other set, later
  // attempts random partitions. Re-running the same k-means would just
  // rebuild the partition that failed.
  InitFeatures kind = opts.init_features;
  if (attempt % 2 == 1)
    kind = kind == InitFeatures::Response ? InitFeatures::ResponseAndCovariates : InitFeatures::Response;
  const bool random_start = attempt >= 2;
  Eigen::MatrixXd features;
  if (kind == InitFeatures::Response) {
    features = y;
  } else {
    features.resize(n, p);
    features.col(0) = y;
    features.rightCols(p - 1) = design.rightCols(p - 1);
    for (Eigen::Index c = 0; c < p; ++c) {
      const double mean = features.col(c).mean();
      const double sd = std::sqrt((features.col(c).array() - mean).square().mean());
      features.col(c) = (features.col(c).array() - mean) / (sd > 0.0 ? sd : 1.0);
    }
  }
  const double var_y = (y.array() - y.mean()).square().sum() / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  const double sigma2_floor = std::max(1e-8 * var_y, 1e-12);

  constexpr int kRestarts = 10;
  for (int restart = 0; restart < kRestarts; ++restart) {
    const std::uint64_t seed = mix_seed(opts.seed, static_cast<std::uint64_t>(attempt) * kRestarts + restart);
    KMeansResult km;
    if (components == 1)
      km.labels.assign(static_cast<std::size_t>(n), 0);
    else if (random_start)
      km.labels = random_partition(features, components, seed);
    else
      km = kmeans(features, components, seed);
    MixtureParams theta;
    bool ok = true;
    for (int j = 0; j < components && ok; ++j) {
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i = 0; i < n; ++i)
        if (km.labels[static_cast<std::size_t>(i)] == j) rows.push_back(i);
      const Eigen::Index nj = static_cast<Eigen::Index>(rows.size());
      if (nj < p + 1) {
        ok = false;
        break;
      }
      Eigen::MatrixXd xg(nj, p);
      Eigen::VectorXd yg(nj);
      for (Eigen::Index k = 0; k < nj; ++k) {
        xg.row(k) = design.row(rows[static_cast<std::size_t>(k)]);
        yg(k) = y(rows[static_cast<std::size_t>(k)]);
      }
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xg);
      if (qr.rank() < p) {
        ok = false;
        break;
      }
      const Eigen::VectorXd b = qr.solve(yg);
      const double rss = (yg - xg * b).squaredNorm();
      theta.beta.push_back(b);
      theta.sigma2.push_back(std::max(rss / static_cast<double>(nj - p), sigma2_floor));
      theta.family.push_back(starting_family(family, opts));
    }
    if (!ok) continue;

    theta.tau = Eigen::MatrixXd::Zero(components - 1, q);
    if (opts.tau_init == TauInit::MultinomialFit && components > 1) {
      const Eigen::MatrixXd z = one_hot(km.labels, components);
      const Eigen::MatrixXd r = gating_design(data);
      for (int it = 0; it < 50; ++it) theta.tau = cm_step_gating(z, theta.tau, r);
    }
    theta.validate();
    return theta;
  }
  throw InitializationError("initialize: a k-means group had fewer than p+1 points after 10 restarts");
}

void cm_step_regression(const EStepCache& cache, const Dataset& data, double min_component_mass,
                        MixtureParams& theta, double min_sigma2) {
  const int g = theta.components();
  const Eigen::Index p = theta.expert_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  for (int j = 0; j < g; ++j) {
    const double nj = cache.z.col(j).sum();
    if (!(nj >= min_component_mass) || nj <= 0.0) throw EmptyComponentError(j, nj);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd& x = data[static_cast<std::size_t>(i)].x;
      const double zi = cache.z(i, j);
      if (zi == 0.0) continue;
      gram.selfadjointView<Eigen::Lower>().rankUpdate(x, zi * cache.u(i, j));
      rhs.noalias() += (zi * cache.uy(i, j)) * x;
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (!well_conditioned(ldlt, 1e-13)) throw SingularDesignError(j, "component " + std::to_string(j) + ": singular weighted Gram matrix");
    const Eigen::VectorXd b = ldlt.solve(rhs);

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double zi = cache.z(i, j);
      if (zi == 0.0) continue;
      const double m = data[static_cast<std::size_t>(i)].x.dot(b);
      acc += zi * (cache.uy2(i, j) - 2.0 * m * cache.uy(i, j) + m * m * cache.u(i, j));
    }
    const double s2 = acc / nj;
    if (!(s2 > min_sigma2) || !(s2 > 0.0) || !std::isfinite(s2))
      throw SingularDesignError(j, "component " + std::to_string(j) + ": variance collapsed");
    theta.beta[static_cast<std::size_t>(j)] = b;
    theta.sigma2[static_cast<std::size_t>(j)] = s2;
  }
}

Eigen::MatrixXd cm_step_gating(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau_old,
                               const Eigen::MatrixXd& gating_design) {
  const Eigen::Index n = gating_design.rows();
  const Eigen::Index q = gating_design.cols();
  const Eigen::Index rows = tau_old.rows();
  if (z.rows() != n || z.cols() != rows + 1 || tau_old.cols() != q)
    throw DomainError("cm_step_gating: dimension mismatch");
  Eigen::MatrixXd tau = tau_old;
  if (rows == 0) return tau;
  const Eigen::MatrixXd gram = gating_design.transpose() * gating_design;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (!well_conditioned(ldlt, 1e-13))
    throw SingularDesignError(-1, "cm_step_gating: singular gating Gram matrix");
  // Rows are updated one at a time with the probabilities refreshed in
  // between; each row's curvature is bounded by 1/4, so every step is a
  // genuine minorize-maximize step.
  for (Eigen::Index j = 0; j < rows; ++j) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd r = gating_design.row(i).transpose();
      const Eigen::VectorXd pi = gating_probs(r, tau);
      score.noalias() += (z(i, j) - pi(j)) * r;
    }
    tau.row(j) += 4.0 * ldlt.solve(score).transpose();
  }
  return tau;
}

double gating_objective(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau, const Eigen::MatrixXd& gating_design) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gating_design.rows(); ++i) {
    const Eigen::VectorXd lp = log_gating_probs(gating_design.row(i).transpose(), tau);
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      if (z(i, j) > 0.0) acc += z(i, j) * lp(j);
  }
  return acc;
}

Eigen::MatrixXd cm_step_gating_newton(const Eigen::MatrixXd& z, const Eigen::MatrixXd& tau_old,
                                      const Eigen::MatrixXd& gating_design, int max_steps, double tol) {
  const Eigen::Index n = gating_design.rows();
  const Eigen::Index q = gating_design.cols();
  const Eigen::Index rows = tau_old.rows();
  if (z.rows() != n || z.cols() != rows + 1 || tau_old.cols() != q)
    throw DomainError("cm_step_gating_newton: dimension mismatch");
  if (rows == 0) return tau_old;
  const Eigen::Index dim = rows * q;
  Eigen::MatrixXd tau = tau_old;
  double current = gating_objective(z, tau, gating_design);
  for (int step = 0; step < max_steps; ++step) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd r = gating_design.row(i).transpose();
      const Eigen::VectorXd pi = gating_probs(r, tau);
      const Eigen::MatrixXd rr = r * r.transpose();
      for (Eigen::Index j = 0; j < rows; ++j) {
        grad.segment(j * q, q) += (z(i, j) - pi(j)) * r;
        for (Eigen::Index k = 0; k < rows; ++k)
          hess.block(j * q, k * q, q, q) += (pi(j) * ((j == k ? 1.0 : 0.0) - pi(k))) * rr;
      }
    }
    Eigen::MatrixXd candidate;
    double value = -std::numeric_limits<double>::infinity();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (well_conditioned(ldlt, 1e-14)) {
      const Eigen::VectorXd delta = ldlt.solve(grad);
      for (double t = 1.0; t > 1e-4; t *= 0.5) {
        Eigen::MatrixXd trial = tau;
        for (Eigen::Index j = 0; j < rows; ++j) trial.row(j) += t * delta.segment(j * q, q).transpose();
        const double v = gating_objective(z, trial, gating_design);
        if (v >= current) {
          candidate = std::move(trial);
          value = v;
          break;
        }
      }
    }
    if (candidate.size() == 0) {
      candidate = cm_step_gating(z, tau, gating_design);
      value = gating_objective(z, candidate, gating_design);
      if (value < current) break;
    }
    const double gain = value - current;
    tau = std::move(candidate);
    current = value;
    if (gain < tol) break;
  }
  return tau;
}

namespace {

// Observed log-likelihood with beta, sigma2 and tau held fixed; only the
// family of one or all components changes between evaluations. Standardized
// residuals and bounds are computed once.
class ShapeObjective {
 public:
  ShapeObjective(const Dataset& data, MixtureParams theta) : theta_(std::move(theta)) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    const int g = theta_.components();
    log_pi_.resize(n, g);
    lo_.resize(n, g);
    hi_.resize(n, g);
    censored_.resize(static_cast<std::size_t>(n));
    log_sigma_.resize(g);
    for (int j = 0; j < g; ++j) log_sigma_(j) = 0.5 * std::log(theta_.sigma2[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const CensoredObservation& obs = data[static_cast<std::size_t>(i)];
      log_pi_.row(i) = log_gating_probs(obs.r, theta_.tau).transpose();
      censored_[static_cast<std::size_t>(i)] = obs.censored;
      for (int j = 0; j < g; ++j) {
        const LocationScale loc = theta_.location(j, obs.x);
        const double sigma = loc.sigma();
        if (obs.censored) {
          lo_(i, j) = (obs.c1 - loc.mu) / sigma;
          hi_(i, j) = (obs.c2 - loc.mu) / sigma;
        } else {
          lo_(i, j) = (obs.w - loc.mu) / sigma;
        }
      }
    }
    terms_.resize(n, g);
    for (int j = 0; j < g; ++j) fill_column(j, theta_.family[static_cast<std::size_t>(j)], terms_);
  }

  double current() const { return total(terms_); }

  /// Log-likelihood when the components in `which` all use `fam`.
  double evaluate(const std::vector<int>& which, const SmnFamily& fam) const {
    Eigen::MatrixXd trial = terms_;
    for (int j : which) fill_column(j, fam, trial);
    return total(trial);
  }

  void commit(const std::vector<int>& which, const SmnFamily& fam) {
    for (int j : which) {
      theta_.family[static_cast<std::size_t>(j)] = fam;
      fill_column(j, fam, terms_);
    }
  }

  const MixtureParams& theta() const { return theta_; }

 private:
  void fill_column(int j, const SmnFamily& fam, Eigen::MatrixXd& out) const {
    // Student-t densities share their normalizing constant.
    const bool is_t = fam.kind() == FamilyKind::StudentT;
    const double nu = fam.nu();
    const double t_const =
        is_t ? std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI) : 0.0;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      double term;
      if (censored_[static_cast<std::size_t>(i)]) {
        term = smn_log_interval_prob(lo_(i, j), hi_(i, j), fam);
      } else if (is_t) {
        const double z = lo_(i, j);
        term = t_const - 0.5 * (nu + 1.0) * std::log1p(z * z / nu) - log_sigma_(j);
      } else {
        term = smn_std_log_pdf(lo_(i, j), fam) - log_sigma_(j);
      }
      out(i, j) = log_pi_(i, j) + term;
    }
  }

  static double total(const Eigen::MatrixXd& t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      double acc = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < t.cols(); ++j) acc = log_sum_exp(acc, t(i, j));
      s += acc;
    }
    return std::isnan(s) ? -std::numeric_limits<double>::infinity() : s;
  }

  MixtureParams theta_;
  Eigen::MatrixXd log_pi_;
  Eigen::MatrixXd lo_;
  Eigen::MatrixXd hi_;
  std::vector<char> censored_;
  Eigen::VectorXd log_sigma_;
  Eigen::MatrixXd terms_;
};

struct SearchResult {
  double value;
  double loglik;
  bool at_bound;
};

// Maximizes f over [lo, hi] (on a log scale when `log_scale`), keeping the
// incumbent unless a candidate is at least as good. Brent first searches a
// window around the incumbent and widens to the full box when the optimum
// sits on the window edge.
template <class F>
SearchResult bounded_search(F f, double incumbent, double incumbent_ll, double lo, double hi, bool log_scale) {
  const auto to_s = [&](double x) { return log_scale ? std::log(x) : x; };
  const auto to_x = [&](double s) { return std::clamp(log_scale ? std::exp(s) : s, lo, hi); };
  const auto neg = [&](double s) {
    const double v = f(to_x(s));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };
  const double a = to_s(lo);
  const double b = to_s(hi);
  const double width = b - a;
  const double s0 = std::clamp(to_s(incumbent), a, b);
  const double half = 0.125 * width;
  double wa = std::max(a, s0 - half);
  double wb = std::min(b, s0 + half);
  auto [s_best, f_best] = boost::math::tools::brent_find_minima(neg, wa, wb, 20);
  const double edge = 1e-3 * (wb - wa);
  if ((s_best - wa < edge && wa > a) || (wb - s_best < edge && wb < b))
    std::tie(s_best, f_best) = boost::math::tools::brent_find_minima(neg, a, b, 20);

  SearchResult best{incumbent, incumbent_ll, false};
  const auto consider = [&](double x, double ll) {
    if (std::isfinite(ll) && ll > best.loglik) best = {x, ll, false};
  };
  consider(to_x(s_best), -f_best);
  // Brent never evaluates the endpoints themselves.
  if (s_best - a < 1e-3 * width) consider(lo, f(lo));
  if (b - s_best < 1e-3 * width) consider(hi, f(hi));
  const double s = to_s(best.value);
  best.at_bound = (s - a) < 1e-6 * width || (b - s) < 1e-6 * width;
  return best;
}

}  // namespace

bool cml_step_shape(const Dataset& data, const EStepCache& cache, const FitOptions& opts, MixtureParams& theta) {
  const int g = theta.components();
  std::vector<std::vector<int>> groups;
  const auto shaped = [&](int j) { return theta.family[static_cast<std::size_t>(j)].kind() != FamilyKind::Normal; };
  if (opts.tie_nu) {
    std::vector<int> all;
    for (int j = 0; j < g; ++j)
      if (shaped(j)) all.push_back(j);
    if (!all.empty()) groups.push_back(all);
  } else {
    for (int j = 0; j < g; ++j)
      if (shaped(j)) groups.push_back({j});
  }
  if (groups.empty()) return false;

  // CN proportion: closed form from the bad-point probabilities.
  for (const std::vector<int>& grp : groups) {
    const SmnFamily& f0 = theta.family[static_cast<std::size_t>(grp.front())];
    if (f0.kind() != FamilyKind::ContaminatedNormal) continue;
    double num = 0.0, den = 0.0;
    for (int j : grp) {
      num += cache.z.col(j).dot(cache.b.col(j));
      den += cache.z.col(j).sum();
    }
    const double nu = clip(den > 0.0 ? num / den : opts.cn_nu.lo, opts.cn_nu);
    for (int j : grp) theta.family[static_cast<std::size_t>(j)] = f0.with_nu(nu);
  }

  ShapeObjective objective(data, theta);
  bool at_bound = false;
  for (const std::vector<int>& grp : groups) {
    const SmnFamily f0 = objective.theta().family[static_cast<std::size_t>(grp.front())];
    const double ll0 = objective.current();
    SearchResult res{};
    SmnFamily chosen = f0;
    switch (f0.kind()) {
      case FamilyKind::StudentT:
      case FamilyKind::Slash: {
        const Bounds& box = f0.kind() == FamilyKind::StudentT ? opts.t_nu : opts.slash_nu;
        res = bounded_search([&](double nu) { return objective.evaluate(grp, f0.with_nu(nu)); }, f0.nu(), ll0,
                             box.lo, box.hi, true);
        chosen = f0.with_nu(res.value);
        break;
      }
      case FamilyKind::ContaminatedNormal: {
        res = bounded_search([&](double gm) { return objective.evaluate(grp, f0.with_gamma(gm)); }, f0.gamma(), ll0,
                             opts.cn_gamma.lo, opts.cn_gamma.hi, false);
        chosen = f0.with_gamma(res.value);
        const bool nu_edge = f0.nu() <= opts.cn_nu.lo || f0.nu() >= opts.cn_nu.hi;
        res.at_bound = res.at_bound || nu_edge;
        break;
      }
      case FamilyKind::Normal:
        continue;
    }
    objective.commit(grp, chosen);
    at_bound = at_bound || res.at_bound;
  }
  theta.family = objective.theta().family;
  return at_bound;
}

MixtureParams ecme_iteration(const Dataset& data, const MixtureParams& theta, const FitOptions& opts,
                             bool* shape_at_bound) {
  const EStepCache cache = e_step(data, theta);
  MixtureParams next = theta;
  cm_step_regression(cache, data, resolve_min_mass(opts, data.size()), next,
                     opts.collapse_ratio * imputed_variance(data));
  if (next.components() > 1) {
    const Eigen::MatrixXd r = gating_design(data);
    next.tau = opts.gating_update == GatingUpdate::Newton ? cm_step_gating_newton(cache.z, theta.tau, r)
                                                          : cm_step_gating(cache.z, theta.tau, r);
  }
  bool flag = false;
  if (opts.estimate_shape) flag = cml_step_shape(data, cache, opts, next);
  if (shape_at_bound) *shape_at_bound = flag;
  return next;
}

FitReport fit(const Dataset& data, int components, const SmnFamily& family, const FitOptions& opts) {
  opts.validate();
  if (data.empty()) throw DomainError("fit: empty dataset");
  for (const CensoredObservation& obs : data) obs.validate();
  const Eigen::Index p = data.front().x.size();
  const Eigen::Index q = data.front().r.size();
  for (const CensoredObservation& obs : data)
    if (obs.x.size() != p || obs.r.size() != q) throw DomainError("fit: inconsistent covariate dimensions");

  FitReport report;
  for (int attempt = 0;; ++attempt) {
    try {
      MixtureParams theta = (opts.init_strategy == InitStrategy::UserSupplied && attempt == 0)
                                ? *opts.initial
                                : initialize(data, components, family, opts, attempt);
      theta.validate();
      if (theta.components() != components) throw DomainError("fit: initial value has the wrong number of components");
      std::vector<double> trace{observed_loglik(data, theta)};
      bool converged = false;
      bool at_bound = false;
      int iter = 0;
      while (iter < opts.max_iter) {
        ++iter;
        theta = ecme_iteration(data, theta, opts, &at_bound);
        trace.push_back(observed_loglik(data, theta));
        if (std::abs(trace.back() - trace[trace.size() - 2]) < opts.tol) {
          converged = true;
          break;
        }
      }
      report.theta = std::move(theta);
      report.loglik_trace = std::move(trace);
      report.converged = converged;
      report.iterations = iter;
      report.shape_at_bound = at_bound;
      report.reinitializations = attempt;
      break;
    } catch (const EmptyComponentError& e) {
      report.diagnostics.emplace_back(e.what());
      if (attempt >= opts.max_reinit) throw FitError("fit: component emptied after re-initialization: " + std::string(e.what()));
    } catch (const SingularDesignError& e) {
      report.diagnostics.emplace_back(e.what());
      if (attempt >= opts.max_reinit) throw FitError("fit: singular design after re-initialization: " + std::string(e.what()));
    }
    if (opts.init_strategy == InitStrategy::UserSupplied && attempt == 0)
      report.diagnostics.emplace_back("user-supplied start failed; falling back to k-means initialization");
  }

  report.theta = permute_components(report.theta, canonical_order(report.theta));
  report.loglik = observed_loglik(data, report.theta);
  report.free_parameters = free_parameter_count(report.theta, opts.tie_nu);
  const InformationCriteria ic =
      aic_bic(report.loglik, static_cast<double>(report.free_parameters), static_cast<double>(data.size()));
  report.aic = ic.aic;
  report.bic = ic.bic;

  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  report.responsibilities.resize(n, components);
  report.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd zi = responsibilities(data[static_cast<std::size_t>(i)], report.theta,
                                                static_cast<std::size_t>(i));
    report.responsibilities.row(i) = zi.transpose();
    Eigen::Index best = 0;
    zi.maxCoeff(&best);
    report.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  if (report.shape_at_bound) report.diagnostics.emplace_back("a shape parameter ended on its search bound");

  if (opts.compute_se) {
    try {
      report.se = information_se(data, report.theta);
      if (report.se->pseudo_inverse)
        report.diagnostics.emplace_back("information matrix ill-conditioned; standard errors use a pseudo-inverse");
    } catch (const Error& e) {
      report.diagnostics.emplace_back(std::string("standard errors unavailable: ") + e.what());
    }
  }
  return report;
}

}  // namespace moesmn
