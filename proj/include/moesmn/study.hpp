#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "moesmn/ecme.hpp"
#include "moesmn/io.hpp"
#include "moesmn/simgen.hpp"

namespace moesmn {

/// Two-expert design of the asymptotic study; `family` sets the mixing law.
GeneratorSpec asymptotic_design(const SmnFamily& family);
/// Three-expert GIG design of the model-selection study (sigma2 = 1).
GeneratorSpec gselect_design();

enum class HeavyTailGenerator { Laplace, BirnbaumSaunders };
/// Three-expert design with U^(-1) ~ Exp(0.5) or U ~ BS(alpha_j, 1).
GeneratorSpec heavytail_design(HeavyTailGenerator generator);

enum class OutlierGenerator { Gig, Laplace, BirnbaumSaunders };
/// Two-expert design of the outlier study (x = r, x1 ~ U(-1,1)).
GeneratorSpec outlier_design(OutlierGenerator generator);

MixtureParams true_params(const GeneratorSpec& spec, const SmnFamily& family = SmnFamily::normal());

/// Permutation `order` (estimate component order[j] matches true component j)
/// minimizing the summed squared distance between expert coefficients.
std::vector<int> match_components(const MixtureParams& estimate, const MixtureParams& truth);

/// Flat key-value study description (see README for the keys).
struct StudyConfig {
  std::string scenario = "asymptotic";
  int replications = 20;
  std::uint64_t seed = 1;
  std::vector<int> n{100};
  std::vector<double> censoring{0.15};
  std::vector<std::string> families{"n"};
  std::string true_family = "n";
  std::string generator;  // heavytail: laplace|bs; outliers: gig|laplace|bs
  std::vector<double> outliers{0.0};
  int gmin = 1;
  int gmax = 4;
  int components = 0;  // 0: scenario default
  bool tie_nu = true;
  int max_iter = 1000;
  double tol = 1e-5;
  int threads = 1;

  static StudyConfig from_key_values(const KeyValues& kv);
  void validate() const;
};

struct StudyRecord {
  std::string kind;  // "rep" or "aggregate"
  int n = 0;
  double censoring = 0.0;
  double outlier = 0.0;
  std::string family;
  int components = 0;
  int replication = -1;
  std::string metric;
  double value = 0.0;
};

struct StudyResult {
  std::vector<StudyRecord> records;
  int failures = 0;
};

/// Runs every (n, censoring, outlier, replication) cell. Replication seeds
/// derive from `config.seed` only, so results do not depend on `threads`.
StudyResult run_study(const StudyConfig& config);

void write_study_csv(std::ostream& out, const StudyConfig& config, const StudyResult& result);

}  // namespace moesmn
