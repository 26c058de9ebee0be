// Command-line front end. Exit status: 0 success, 1 input or fit error,
// 2 fit finished without meeting the tolerance (report still written).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moesmn/ecme.hpp"
#include "moesmn/error.hpp"
#include "moesmn/io.hpp"
#include "moesmn/metrics.hpp"
#include "moesmn/simgen.hpp"
#include "moesmn/study.hpp"

namespace {

using namespace moesmn;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct FitFlags {
  std::string family = "n";
  bool tie_nu = true;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double tol = 1e-5;
  std::string gating = "newton";
  bool no_se = false;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--family", f.family, "Error family: n, t, sl or cn")
      ->check(CLI::IsMember({"n", "t", "sl", "cn"}))
      ->capture_default_str();
  cmd->add_flag("--tie-nu,!--untie-nu", f.tie_nu, "Share shape parameters across components")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for k-means initialization")->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "Maximum ECME iterations")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tol", f.tol, "Absolute log-likelihood tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--gating", f.gating, "Gating update: newton or mm (one minorize-maximize step)")
      ->check(CLI::IsMember({"newton", "mm"}))
      ->capture_default_str();
  cmd->add_flag("--no-se", f.no_se, "Skip standard errors");
}

FitOptions to_options(const FitFlags& f) {
  FitOptions o;
  o.tie_nu = f.tie_nu;
  o.seed = f.seed;
  o.max_iter = f.max_iter;
  o.tol = f.tol;
  o.gating_update = f.gating == "mm" ? GatingUpdate::SingleMM : GatingUpdate::Newton;
  o.compute_se = !f.no_se;
  return o;
}

SmnFamily start_family(const std::string& tag) {
  switch (*parse_family_kind(tag)) {
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

// Writes to `path`, or stdout for "" or "-".
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  write(out);
}

int cmd_fit(const std::string& data_path, int components, const FitFlags& flags, const std::string& out_path,
            const std::string& z_path, const std::string& labels_path) {
  const DatasetFile file = read_dataset_file(data_path);
  const FitReport report = fit(file.data, components, start_family(flags.family), to_options(flags));
  const KeyValues kv = fit_report_values(report, flags.family, flags.tie_nu);
  with_output(out_path, [&](std::ostream& os) { kv.write(os); });
  if (!z_path.empty())
    with_output(z_path, [&](std::ostream& os) { write_responsibilities(os, report.responsibilities); });
  if (!labels_path.empty())
    with_output(labels_path, [&](std::ostream& os) {
      os << "label\n";
      for (int l : report.labels) os << l + 1 << '\n';
    });
  if (!report.converged) {
    std::cerr << "fit did not converge within " << report.iterations << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_select(const std::string& data_path, int gmin, int gmax, const FitFlags& flags, const std::string& out_path) {
  if (gmin < 1 || gmax < gmin) throw UsageError("need 1 <= gmin <= gmax");
  const DatasetFile file = read_dataset_file(data_path);
  struct Row {
    int g;
    std::optional<FitReport> report;
    std::string error;
  };
  std::vector<Row> rows;
  int best_aic = -1, best_bic = -1;
  for (int g = gmin; g <= gmax; ++g) {
    Row row{g, std::nullopt, ""};
    try {
      FitOptions o = to_options(flags);
      o.compute_se = false;
      row.report = fit(file.data, g, start_family(flags.family), o);
    } catch (const Error& e) {
      row.error = e.what();
      std::cerr << "G=" << g << ": " << e.what() << '\n';
    }
    rows.push_back(std::move(row));
    const Row& r = rows.back();
    if (!r.report) continue;
    if (best_aic < 0 || r.report->aic < rows[static_cast<std::size_t>(best_aic)].report->aic)
      best_aic = static_cast<int>(rows.size()) - 1;
    if (best_bic < 0 || r.report->bic < rows[static_cast<std::size_t>(best_bic)].report->bic)
      best_bic = static_cast<int>(rows.size()) - 1;
  }
  if (best_bic < 0) throw FitError("every fit failed");
  with_output(out_path, [&](std::ostream& os) {
    os << "G,loglik,m,aic,bic,converged,selected\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& r = rows[k];
      os << r.g << ',';
      if (!r.report) {
        os << ",,,,failed,\n";
        continue;
      }
      std::string sel;
      if (static_cast<int>(k) == best_aic) sel = "aic";
      if (static_cast<int>(k) == best_bic) sel += sel.empty() ? "bic" : "+bic";
      os << format_double(r.report->loglik) << ',' << r.report->free_parameters << ',' << format_double(r.report->aic)
         << ',' << format_double(r.report->bic) << ',' << (r.report->converged ? "true" : "false") << ',' << sel
         << '\n';
    }
  });
  return kExitOk;
}

int cmd_mc(const std::string& config_path, int threads, const std::string& out_path) {
  StudyConfig cfg = StudyConfig::from_key_values(KeyValues::parse_file(config_path));
  if (threads > 0) cfg.threads = threads;
  const StudyResult result = run_study(cfg);
  if (result.failures > 0) std::cerr << result.failures << " fits failed; see the failures rows\n";
  with_output(out_path, [&](std::ostream& os) { write_study_csv(os, cfg, result); });
  return kExitOk;
}

int cmd_simulate(const std::string& scenario, const std::string& generator, const std::string& true_family, int n,
                 double censoring, double outliers, std::uint64_t seed, const std::string& out_path) {
  std::mt19937_64 rng(seed);
  SimulatedSample sample;
  if (scenario == "asymptotic") {
    const FamilyKind k = *parse_family_kind(true_family);
    const SmnFamily fam = k == FamilyKind::Normal               ? SmnFamily::normal()
                          : k == FamilyKind::ContaminatedNormal ? SmnFamily::contaminated_normal(0.3, 0.3)
                                                                : SmnFamily::make(k, 3.0);
    sample = generate_moe_data(asymptotic_design(fam), static_cast<std::size_t>(n), rng);
    set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), censoring, TailSide::Right));
  } else if (scenario == "gselect") {
    sample = generate_moe_data(gselect_design(), static_cast<std::size_t>(n), rng);
    set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), censoring, TailSide::Left));
  } else if (scenario == "heavytail") {
    const HeavyTailGenerator g = generator == "bs" ? HeavyTailGenerator::BirnbaumSaunders : HeavyTailGenerator::Laplace;
    sample = generate_moe_data(heavytail_design(g), static_cast<std::size_t>(n), rng);
    set_responses(sample.data, apply_interval_censoring(responses_of(sample.data), censoring, 1.0, rng));
  } else {
    const OutlierGenerator g = generator == "bs"        ? OutlierGenerator::BirnbaumSaunders
                               : generator == "laplace" ? OutlierGenerator::Laplace
                                                        : OutlierGenerator::Gig;
    sample = generate_moe_data(outlier_design(g), static_cast<std::size_t>(n), rng);
    set_responses(sample.data, apply_tail_censoring(responses_of(sample.data), censoring, TailSide::Left));
    inject_outliers(sample, outliers, rng);
  }
  with_output(out_path, [&](std::ostream& os) { write_dataset(os, sample.data, &sample.labels); });
  return kExitOk;
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> cols;
  {
    std::string cur;
    for (char c : header + ",") {
      if (c == ',') {
        while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
        cols.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  std::size_t col = cols.size();
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (cols[k] == "label") col = k;
  if (col == cols.size()) throw ParseError(1, path + ": no 'label' column");
  std::vector<int> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::size_t start = 0;
    for (std::size_t k = 0; k < col; ++k) start = line.find(',', start) + 1;
    if (start == 0 && col > 0) throw ParseError(lineno, path + ": too few fields");
    const std::size_t end = line.find(',', start);
    try {
      out.push_back(std::stoi(line.substr(start, end == std::string::npos ? std::string::npos : end - start)));
    } catch (const std::exception&) {
      throw ParseError(lineno, path + ": label is not an integer");
    }
  }
  return out;
}

int cmd_metrics(const std::string& truth_path, const std::string& pred_path, bool keep_outliers,
                const std::string& out_path) {
  std::vector<int> truth = read_labels(truth_path);
  std::vector<int> pred = read_labels(pred_path);
  if (!keep_outliers) std::tie(truth, pred) = drop_sentinel(truth, pred, kOutlierLabel);
  const PairIndices pi = rand_indices(truth, pred);
  KeyValues kv;
  kv.set("n", static_cast<long long>(truth.size()));
  kv.set("mcr", mcr(truth, pred));
  kv.set("ri", pi.ri);
  kv.set("ari", pi.ari);
  kv.set("jci", pi.jci);
  with_output(out_path, [&](std::ostream& os) { kv.write(os); });
  return kExitOk;
}

int cmd_import_mroz(const std::string& path, const std::string& out_path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  const DatasetFile file = import_mroz(in);
  with_output(out_path, [&](std::ostream& os) { write_dataset(os, file.data, &*file.labels); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixtures of linear experts for censored responses with scale-mixture-of-normal errors"};
  app.require_subcommand(1);

  std::string data_path, out_path, z_path, labels_path;
  int components = 2;
  FitFlags flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a mixture of experts by ECME");
  fit_cmd->add_option("data", data_path, "Dataset CSV")->required();
  fit_cmd->add_option("-G,--components", components, "Number of experts")->check(CLI::PositiveNumber)->capture_default_str();
  add_fit_flags(fit_cmd, flags);
  fit_cmd->add_option("-o,--out", out_path, "Report file (default stdout)");
  fit_cmd->add_option("--responsibilities", z_path, "Write posterior probabilities to this CSV");
  fit_cmd->add_option("--labels", labels_path, "Write hard labels (1-based) to this CSV");

  int gmin = 1, gmax = 4;
  auto* select_cmd = app.add_subcommand("select", "Fit G = gmin..gmax and rank by AIC and BIC");
  select_cmd->add_option("data", data_path, "Dataset CSV")->required();
  select_cmd->add_option("--gmin", gmin)->capture_default_str();
  select_cmd->add_option("--gmax", gmax)->capture_default_str();
  add_fit_flags(select_cmd, flags);
  select_cmd->add_option("-o,--out", out_path, "Table file (default stdout)");

  std::string config_path;
  int threads = 0;
  auto* mc_cmd = app.add_subcommand("mc", "Run a Monte-Carlo study from a key-value config");
  mc_cmd->add_option("config", config_path, "Study config")->required();
  mc_cmd->add_option("--threads", threads, "Worker threads (overrides the config)");
  mc_cmd->add_option("-o,--out", out_path, "Summary CSV (default stdout)");

  std::string scenario = "asymptotic", generator = "gig", true_family = "n";
  int n = 500;
  double censoring = 0.15, outliers = 0.0;
  std::uint64_t seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated dataset");
  sim_cmd->add_option("--scenario", scenario)
      ->check(CLI::IsMember({"asymptotic", "gselect", "heavytail", "outliers"}))
      ->capture_default_str();
  sim_cmd->add_option("--generator", generator, "heavytail: laplace|bs; outliers: gig|laplace|bs")
      ->check(CLI::IsMember({"gig", "laplace", "bs"}))
      ->capture_default_str();
  sim_cmd->add_option("--true-family", true_family, "asymptotic scenario family")
      ->check(CLI::IsMember({"n", "t", "sl", "cn"}))
      ->capture_default_str();
  sim_cmd->add_option("-n", n)->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--censoring", censoring)->check(CLI::Range(0.0, 0.999))->capture_default_str();
  sim_cmd->add_option("--outliers", outliers)->check(CLI::Range(0.0, 0.999))->capture_default_str();
  sim_cmd->add_option("--seed", seed)->capture_default_str();
  sim_cmd->add_option("-o,--out", out_path, "Dataset CSV (default stdout)");

  std::string truth_path, pred_path;
  bool keep_outliers = false;
  auto* metrics_cmd = app.add_subcommand("metrics", "Agreement between two labelings (MCR, RI, ARI, JCI)");
  metrics_cmd->add_option("truth", truth_path, "CSV with a label column")->required();
  metrics_cmd->add_option("predicted", pred_path, "CSV with a label column")->required();
  metrics_cmd->add_flag("--keep-outliers", keep_outliers, "Include rows labelled -1");
  metrics_cmd->add_option("-o,--out", out_path);

  std::string mroz_path;
  auto* mroz_cmd = app.add_subcommand("import-mroz", "Convert a Mroz-layout CSV to the dataset format");
  mroz_cmd->add_option("mroz", mroz_path, "Mroz CSV")->required();
  mroz_cmd->add_option("-o,--out", out_path, "Dataset CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(data_path, components, flags, out_path, z_path, labels_path);
    if (*select_cmd) return cmd_select(data_path, gmin, gmax, flags, out_path);
    if (*mc_cmd) return cmd_mc(config_path, threads, out_path);
    if (*sim_cmd) return cmd_simulate(scenario, generator, true_family, n, censoring, outliers, seed, out_path);
    if (*metrics_cmd) return cmd_metrics(truth_path, pred_path, keep_outliers, out_path);
    if (*mroz_cmd) return cmd_import_mroz(mroz_path, out_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
