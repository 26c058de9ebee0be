#include "moesmn/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "moesmn/error.hpp"
#include "moesmn/metrics.hpp"

namespace moesmn {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  const Eigen::Index nr = static_cast<Eigen::Index>(r.size());
  const Eigen::Index nc = nr ? static_cast<Eigen::Index>(r.begin()->size()) : 0;
  Eigen::MatrixXd out(nr, nc);
  Eigen::Index i = 0;
  for (const auto& row : r) out.row(i++) = vec(row).transpose();
  return out;
}

}  // namespace

GeneratorSpec asymptotic_design(const SmnFamily& family) {
  GeneratorSpec s;
  s.beta = {vec({0, -1, -2, -3}), vec({-1, 1, 2, 3})};
  s.sigma2 = {1.0, 2.0};
  s.tau = rows({{0.7, 1, 2}});
  s.mixing = {MixingLaw::smn(family), MixingLaw::smn(family)};
  s.x_ranges = {{1, 5}, {-2, 2}, {1, 4}};
  s.r_ranges = {{-2, 1}, {-1, 1}};
  return s;
}

GeneratorSpec gselect_design() {
  GeneratorSpec s;
  s.beta = {vec({-4, 4}), vec({0, -2}), vec({0, 4})};
  s.sigma2 = {1.0, 1.0, 1.0};
  s.tau = rows({{0, 13}, {2, 9}});
  s.mixing = {MixingLaw::gig(-0.5, 1, 2), MixingLaw::gig(0.5, 1, 2), MixingLaw::gig(-0.5, 2, 1)};
  s.x_ranges = {{-2, 2}};
  s.gating_uses_x = true;
  return s;
}

GeneratorSpec heavytail_design(HeavyTailGenerator generator) {
  GeneratorSpec s;
  s.beta = {vec({-2, -1, -2, -3}), vec({0.5, 1, 2, 3}), vec({2, 1, 3, 5})};
  s.sigma2 = {1.0, 3.0, 5.0};
  s.tau = rows({{2, 10}, {0.7, 10}});
  if (generator == HeavyTailGenerator::Laplace)
    s.mixing = {MixingLaw::laplace_via_exp(0.5), MixingLaw::laplace_via_exp(0.5), MixingLaw::laplace_via_exp(0.5)};
  else
    s.mixing = {MixingLaw::birnbaum_saunders(3), MixingLaw::birnbaum_saunders(1), MixingLaw::birnbaum_saunders(2)};
  s.x_ranges = {{1, 5}, {0, 1}, {-2, -1}};
  s.r_ranges = {{-1, 1}};
  return s;
}

GeneratorSpec outlier_design(OutlierGenerator generator) {
  GeneratorSpec s;
  s.beta = {vec({0, 1}), vec({0, -1})};
  s.sigma2 = {0.01, 0.01};
  s.tau = rows({{0, 10}});
  switch (generator) {
    case OutlierGenerator::Gig:
      s.mixing = {MixingLaw::gig(-0.5, 1, 0.2), MixingLaw::gig(0.5, 1, 0.2)};
      break;
    case OutlierGenerator::Laplace:
      s.mixing = {MixingLaw::laplace_via_exp(0.5), MixingLaw::laplace_via_exp(0.5)};
      break;
    case OutlierGenerator::BirnbaumSaunders:
      s.mixing = {MixingLaw::birnbaum_saunders(0.5), MixingLaw::birnbaum_saunders(1)};
      break;
  }
  s.x_ranges = {{-1, 1}};
  s.gating_uses_x = true;
  return s;
}

MixtureParams true_params(const GeneratorSpec& spec, const SmnFamily& family) {
  MixtureParams th;
  th.beta = spec.beta;
  th.sigma2 = spec.sigma2;
  th.family.assign(spec.beta.size(), family);
  th.tau = spec.tau;
  return th;
}

std::vector<int> match_components(const MixtureParams& estimate, const MixtureParams& truth) {
  const int g = truth.components();
  if (estimate.components() != g) throw DomainError("match_components: component counts differ");
  std::vector<int> perm(static_cast<std::size_t>(g));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_d = std::numeric_limits<double>::infinity();
  do {
    double d = 0.0;
    for (int j = 0; j < g; ++j)
      d += (estimate.beta[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] -
            truth.beta[static_cast<std::size_t>(j)])
               .squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

SmnFamily family_for_fit(const std::string& tag) {
  const std::optional<FamilyKind> k = parse_family_kind(tag);
  if (!k) throw UsageError("unknown family '" + tag + "'");
  switch (*k) {
    case FamilyKind::Normal:
      return SmnFamily::normal();
    case FamilyKind::StudentT:
      return SmnFamily::student_t(20);
    case FamilyKind::Slash:
      return SmnFamily::slash(20);
    case FamilyKind::ContaminatedNormal:
      return SmnFamily::contaminated_normal(0.05, 0.8);
  }
  return SmnFamily::normal();
}

// Family used to generate asymptotic-study data: nu = 3, CN (0.3, 0.3).
SmnFamily generating_family(const std::string& tag) {
  const std::optional<FamilyKind> k = parse_family_kind(tag);
  if (!k) throw UsageError("unknown family '" + tag + "'");
  switch (*k) {
    case FamilyKind::Normal:
      return SmnFamily::normal();
    case FamilyKind::StudentT:
      return SmnFamily::student_t(3);
    case FamilyKind::Slash:
      return SmnFamily::slash(3);
    case FamilyKind::ContaminatedNormal:
      return SmnFamily::contaminated_normal(0.3, 0.3);
  }
  return SmnFamily::normal();
}

struct Cell {
  int n;
  double censoring;
  double outlier;
};

struct Task {
  std::size_t cell;
  int replication;
};

struct TaskOutput {
  std::vector<StudyRecord> records;
  int failures = 0;
};

class Runner {
 public:
  explicit Runner(const StudyConfig& c) : cfg_(c) {}

  TaskOutput run(const Cell& cell, std::size_t cell_index, int rep) const {
    TaskOutput out;
    std::mt19937_64 rng(replication_seed(replication_seed(cfg_.seed, cell_index), static_cast<std::uint64_t>(rep)));
    GeneratorSpec spec;
    MixtureParams truth;
    SimulatedSample sample;
    std::vector<DesignPoint> designs;
    const std::size_t n = static_cast<std::size_t>(cell.n);
    if (cfg_.scenario == "asymptotic") {
      spec = asymptotic_design(generating_family(cfg_.true_family));
      sample = generate_moe_data(spec, n, rng);
      set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), cell.censoring, TailSide::Right));
    } else if (cfg_.scenario == "gselect") {
      spec = gselect_design();
      sample = generate_moe_data(spec, n, rng);
      set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), cell.censoring, TailSide::Left));
    } else if (cfg_.scenario == "heavytail") {
      spec = heavytail_design(cfg_.generator == "bs" ? HeavyTailGenerator::BirnbaumSaunders : HeavyTailGenerator::Laplace);
      sample = generate_moe_data(spec, n, rng);
      set_responses(sample.data, apply_interval_censoring(responses_of(sample.data), cell.censoring, 1.0, rng));
    } else {
      const OutlierGenerator g = cfg_.generator == "bs"        ? OutlierGenerator::BirnbaumSaunders
                                 : cfg_.generator == "laplace" ? OutlierGenerator::Laplace
                                                               : OutlierGenerator::Gig;
      spec = outlier_design(g);
      sample = generate_moe_data(spec, n, rng);
      set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), cell.censoring, TailSide::Left));
      for (const CensoredObservation& obs : sample.data) designs.push_back({obs.x, obs.r});
      inject_outliers(sample, cell.outlier, rng);
    }
    truth = true_params(spec);

    FitOptions opts;
    opts.tie_nu = cfg_.tie_nu;
    opts.max_iter = cfg_.max_iter;
    opts.tol = cfg_.tol;
    opts.compute_se = false;
    opts.seed = replication_seed(cfg_.seed ^ 0x5DEECE66DULL, static_cast<std::uint64_t>(rep));

    for (const std::string& fam_tag : cfg_.families) {
      const SmnFamily fam = family_for_fit(fam_tag);
      const auto emit = [&](int g, const std::string& metric, double value) {
        out.records.push_back({"rep", cell.n, cell.censoring, cell.outlier, fam_tag, g, rep, metric, value});
      };
      if (cfg_.scenario == "gselect") {
        const int true_g = spec.components();
        int best_aic = 0, best_bic = 0;
        double min_aic = std::numeric_limits<double>::infinity(), min_bic = min_aic;
        for (int g = cfg_.gmin; g <= cfg_.gmax; ++g) {
          try {
            const FitReport r = fit(sample.data, g, fam, opts);
            emit(g, "loglik", r.loglik);
            emit(g, "m", r.free_parameters);
            emit(g, "aic", r.aic);
            emit(g, "bic", r.bic);
            emit(g, "converged", r.converged ? 1.0 : 0.0);
            if (r.aic < min_aic) min_aic = r.aic, best_aic = g;
            if (r.bic < min_bic) min_bic = r.bic, best_bic = g;
          } catch (const Error&) {
            emit(g, "failed", 1.0);
            ++out.failures;
          }
        }
        if (best_bic > 0) {
          emit(0, "selected_aic", best_aic);
          emit(0, "selected_bic", best_bic);
          emit(0, "correct_aic", best_aic == true_g ? 1.0 : 0.0);
          emit(0, "correct_bic", best_bic == true_g ? 1.0 : 0.0);
        }
        continue;
      }
      const int g = cfg_.components > 0 ? cfg_.components : spec.components();
      try {
        bool degenerate = false;
        FitReport r;
        try {
          r = fit(sample.data, g, fam, opts);
        } catch (const FitError&) {
          if (cfg_.scenario != "outliers") throw;
          // exact outliers make the likelihood unbounded; score the collapsed
          // estimate instead of dropping the replication
          FitOptions loose = opts;
          loose.collapse_ratio = 0.0;
          loose.max_reinit = 0;
          r = fit(sample.data, g, fam, loose);
          degenerate = true;
        }
        if (cfg_.scenario == "outliers") emit(g, "degenerate", degenerate ? 1.0 : 0.0);
        emit(g, "loglik", r.loglik);
        emit(g, "aic", r.aic);
        emit(g, "bic", r.bic);
        emit(g, "iterations", r.iterations);
        emit(g, "converged", r.converged ? 1.0 : 0.0);
        if (cfg_.scenario == "asymptotic" && g == truth.components()) {
          const MixtureParams est = permute_components(r.theta, match_components(r.theta, truth));
          for (int j = 0; j < g; ++j) {
            const std::string s = std::to_string(j + 1);
            const Eigen::VectorXd& b = est.beta[static_cast<std::size_t>(j)];
            for (Eigen::Index k = 0; k < b.size(); ++k)
              emit(g, "err.beta." + s + "." + std::to_string(k), b(k) - truth.beta[static_cast<std::size_t>(j)](k));
            emit(g, "err.sigma2." + s, est.sigma2[static_cast<std::size_t>(j)] - truth.sigma2[static_cast<std::size_t>(j)]);
          }
          for (Eigen::Index j = 0; j < est.tau.rows(); ++j)
            for (Eigen::Index k = 0; k < est.tau.cols(); ++k)
              emit(g, "err.tau." + std::to_string(j + 1) + "." + std::to_string(k), est.tau(j, k) - truth.tau(j, k));
        }
        if (cfg_.scenario == "outliers" && g == truth.components())
          emit(g, "mse", regression_mean_mse(r.theta, truth, designs));
        if (cfg_.scenario == "heavytail" || cfg_.scenario == "outliers") {
          const auto [t, p] = drop_sentinel(sample.labels, r.labels, kOutlierLabel);
          emit(g, "mcr", mcr(t, p));
          const PairIndices pi = rand_indices(t, p);
          emit(g, "ri", pi.ri);
          emit(g, "ari", pi.ari);
          emit(g, "jci", pi.jci);
        }
      } catch (const Error&) {
        emit(g, "failed", 1.0);
        ++out.failures;
      }
    }
    return out;
  }

 private:
  const StudyConfig& cfg_;
};

}  // namespace

StudyConfig StudyConfig::from_key_values(const KeyValues& kv) {
  StudyConfig c;
  c.scenario = kv.get("scenario");
  c.replications = static_cast<int>(kv.get_int_or("replications", c.replications));
  c.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", static_cast<long long>(c.seed)));
  if (c.scenario == "gselect" || c.scenario == "outliers") c.n = {500};
  if (c.scenario == "heavytail") c.components = 3;
  if (kv.contains("n")) {
    c.n.clear();
    for (double v : kv.get_doubles("n")) c.n.push_back(static_cast<int>(v));
  }
  if (kv.contains("censoring")) c.censoring = kv.get_doubles("censoring");
  if (kv.contains("families")) c.families = split_list(kv.get("families"));
  c.true_family = kv.get_or("true_family", c.true_family);
  c.generator = kv.get_or("generator", c.scenario == "heavytail" ? "laplace" : "gig");
  if (kv.contains("outliers")) c.outliers = kv.get_doubles("outliers");
  c.gmin = static_cast<int>(kv.get_int_or("gmin", c.gmin));
  c.gmax = static_cast<int>(kv.get_int_or("gmax", c.gmax));
  c.components = static_cast<int>(kv.get_int_or("components", c.components));
  const std::string tie = kv.get_or("tie_nu", "true");
  if (tie != "true" && tie != "false") throw UsageError("tie_nu must be true or false");
  c.tie_nu = tie == "true";
  c.max_iter = static_cast<int>(kv.get_int_or("max_iter", c.max_iter));
  c.tol = kv.get_double_or("tol", c.tol);
  c.threads = static_cast<int>(kv.get_int_or("threads", c.threads));
  c.validate();
  return c;
}

void StudyConfig::validate() const {
  if (scenario != "asymptotic" && scenario != "gselect" && scenario != "heavytail" && scenario != "outliers")
    throw UsageError("scenario must be asymptotic, gselect, heavytail or outliers");
  if (replications < 1) throw UsageError("replications must be >= 1");
  if (n.empty() || censoring.empty() || families.empty() || outliers.empty())
    throw UsageError("n, censoring, families and outliers must be nonempty");
  for (int v : n)
    if (v < 1) throw UsageError("n must be >= 1");
  for (double p : censoring)
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("censoring levels must lie in [0,1)");
  for (double p : outliers)
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("outlier levels must lie in [0,1)");
  for (const std::string& f : families)
    if (!parse_family_kind(f)) throw UsageError("unknown family '" + f + "'");
  if (!parse_family_kind(true_family)) throw UsageError("unknown true_family");
  if (scenario == "heavytail" && generator != "laplace" && generator != "bs")
    throw UsageError("heavytail generator must be laplace or bs");
  if (scenario == "outliers" && generator != "gig" && generator != "laplace" && generator != "bs")
    throw UsageError("outliers generator must be gig, laplace or bs");
  if (gmin < 1 || gmax < gmin) throw UsageError("need 1 <= gmin <= gmax");
  if (components < 0 || max_iter < 1 || !(tol > 0.0) || threads < 1) throw UsageError("invalid fit settings");
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  std::vector<Cell> cells;
  for (int n : config.n)
    for (double c : config.censoring)
      for (double o : (config.scenario == "outliers" ? config.outliers : std::vector<double>{0.0}))
        cells.push_back({n, c, o});
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int r = 0; r < config.replications; ++r) tasks.push_back({c, r});

  std::vector<TaskOutput> outputs(tasks.size());
  const Runner runner(config);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++)
      outputs[k] = runner.run(cells[tasks[k].cell], tasks[k].cell, tasks[k].replication);
  };
  const int nthreads = std::min<int>(config.threads, static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  StudyResult result;
  using Key = std::tuple<int, double, double, std::string, int, std::string>;
  std::map<Key, std::vector<double>> groups;
  std::map<std::tuple<int, double, double, std::string, int>, std::vector<int>> reps_seen;
  std::vector<Key> order;
  for (TaskOutput& o : outputs) {
    result.failures += o.failures;
    for (StudyRecord& rec : o.records) {
      const Key key{rec.n, rec.censoring, rec.outlier, rec.family, rec.components, rec.metric};
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(rec.value);
      auto& seen = reps_seen[{rec.n, rec.censoring, rec.outlier, rec.family, rec.components}];
      if (rec.metric != "failed" && (seen.empty() || seen.back() != rec.replication)) seen.push_back(rec.replication);
      result.records.push_back(std::move(rec));
    }
  }
  std::sort(order.begin(), order.end());
  std::tuple<int, double, double, std::string, int> last{-1, -1.0, -1.0, "", -1};
  for (const Key& key : order) {
    const auto& [n, cens, outl, fam, g, metric] = key;
    const std::tuple<int, double, double, std::string, int> head{n, cens, outl, fam, g};
    if (head != last) {
      last = head;
      const auto it = reps_seen.find(head);
      const double eff = it == reps_seen.end() ? 0.0 : static_cast<double>(it->second.size());
      result.records.push_back({"aggregate", n, cens, outl, fam, g, -1, "effective_replications", eff});
    }
    const std::vector<double>& v = groups[key];
    if (metric == "failed") {
      result.records.push_back({"aggregate", n, cens, outl, fam, g, -1, "failures", static_cast<double>(v.size())});
      continue;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (metric.rfind("err.", 0) == 0) {
      double mab = 0.0;
      for (double e : v) mab += std::abs(e);
      const std::string name = metric.substr(4);
      result.records.push_back({"aggregate", n, cens, outl, fam, g, -1, "bias." + name, mean});
      result.records.push_back({"aggregate", n, cens, outl, fam, g, -1, "mab." + name, mab / static_cast<double>(v.size())});
    } else {
      result.records.push_back({"aggregate", n, cens, outl, fam, g, -1, metric, mean});
    }
  }
  return result;
}

void write_study_csv(std::ostream& out, const StudyConfig& config, const StudyResult& result) {
  out << "kind,scenario,n,censoring,outlier,family,G,replication,metric,value\n";
  for (const StudyRecord& r : result.records) {
    out << r.kind << ',' << config.scenario << ',' << r.n << ',' << format_double(r.censoring) << ','
        << format_double(r.outlier) << ',' << r.family << ',' << r.components << ','
        << (r.replication >= 0 ? std::to_string(r.replication) : std::string()) << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
}

}  // namespace moesmn
