#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moesmn/ecme.hpp"
#include "moesmn/model.hpp"

namespace moesmn {

/// CSV dataset: columns y, cens, c1, c2, x1..x{p-1}, r1..r{q-1} and an
/// optional integer `label`. Intercepts are implicit. Extended reals are
/// written as `-inf` / `inf`.
struct DatasetFile {
  Dataset data;
  std::optional<std::vector<int>> labels;
};

DatasetFile read_dataset(std::istream& in);
DatasetFile read_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data, const std::vector<int>* labels = nullptr);
void write_dataset_file(const std::string& path, const Dataset& data, const std::vector<int>* labels = nullptr);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Parses a double, accepting `inf`, `+inf` and `-inf`.
std::optional<double> parse_double(std::string_view text);

/// Ordered `key = value` text, one entry per line; `#` starts a comment.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, bool value);
  void set(const std::string& key, const std::vector<double>& values);

  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  void write(std::ostream& out) const;
  static KeyValues parse(std::istream& in);
  static KeyValues parse_file(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Flattens a fit into report keys (theta blocks, loglik, criteria, SEs).
KeyValues fit_report_values(const FitReport& report, const std::string& family_tag, bool tie_nu);

/// Writes the n x G responsibilities with a z1..zG header.
void write_responsibilities(std::ostream& out, const Eigen::MatrixXd& z);

/// Maps a Mroz-layout CSV (hours, educ, age, exper, expersq, unem, kidslt6,
/// city) to the dataset layout: y = hours/1000, zero hours left-censored at
/// 0, x = (educ, age, exper, expersq), r = (unem, kidslt6, age), label = city.
DatasetFile import_mroz(std::istream& in);

}  // namespace moesmn
