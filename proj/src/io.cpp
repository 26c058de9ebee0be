#include "moesmn/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <system_error>

#include "moesmn/error.hpp"

namespace moesmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

// Column index for name, or -1.
int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return static_cast<int>(k);
  return -1;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "+inf" || text == "Inf") return kInf;
  if (text == "-inf" || text == "-Inf") return -kInf;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return v;
}

DatasetFile read_dataset(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    for (std::string_view f : split_commas(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw ParseError(lineno, "missing header");
  const int cy = find_column(header, "y");
  const int ccens = find_column(header, "cens");
  const int c1 = find_column(header, "c1");
  const int c2 = find_column(header, "c2");
  if (cy < 0 || ccens < 0 || c1 < 0 || c2 < 0) throw ParseError(1, "header must contain y, cens, c1 and c2");
  std::vector<int> xcols, rcols;
  for (int k = 1;; ++k) {
    const int c = find_column(header, "x" + std::to_string(k));
    if (c < 0) break;
    xcols.push_back(c);
  }
  for (int k = 1;; ++k) {
    const int c = find_column(header, "r" + std::to_string(k));
    if (c < 0) break;
    rcols.push_back(c);
  }
  const int clabel = find_column(header, "label");

  DatasetFile out;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> f = split_commas(line);
    if (f.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    const auto number = [&](int col, const char* what) {
      const std::optional<double> v = parse_double(f[static_cast<std::size_t>(col)]);
      if (!v) throw ParseError(lineno, std::string("invalid ") + what + " '" + std::string(f[static_cast<std::size_t>(col)]) + "'");
      return *v;
    };
    const std::string_view cens = f[static_cast<std::size_t>(ccens)];
    if (cens != "0" && cens != "1") throw ParseError(lineno, "cens must be 0 or 1");
    Eigen::VectorXd x(static_cast<Eigen::Index>(xcols.size()) + 1), r(static_cast<Eigen::Index>(rcols.size()) + 1);
    x(0) = 1.0;
    r(0) = 1.0;
    for (std::size_t k = 0; k < xcols.size(); ++k) x(static_cast<Eigen::Index>(k) + 1) = number(xcols[k], "covariate");
    for (std::size_t k = 0; k < rcols.size(); ++k) r(static_cast<Eigen::Index>(k) + 1) = number(rcols[k], "gating covariate");
    for (Eigen::Index k = 0; k < x.size(); ++k)
      if (!std::isfinite(x(k))) throw ParseError(lineno, "covariates must be finite");
    for (Eigen::Index k = 0; k < r.size(); ++k)
      if (!std::isfinite(r(k))) throw ParseError(lineno, "covariates must be finite");
    CensoredObservation obs;
    if (cens == "1") {
      const double lo = number(c1, "c1");
      const double hi = number(c2, "c2");
      if (!(lo < hi)) throw ParseError(lineno, "censored row needs c1 < c2");
      obs = CensoredObservation::interval(lo, hi, std::move(x), std::move(r));
    } else {
      if (f[static_cast<std::size_t>(cy)].empty()) throw ParseError(lineno, "uncensored row needs y");
      const double y = number(cy, "y");
      if (!std::isfinite(y)) throw ParseError(lineno, "y must be finite");
      obs = CensoredObservation::exact(y, std::move(x), std::move(r));
    }
    if (clabel >= 0) {
      const std::string_view t = f[static_cast<std::size_t>(clabel)];
      int v = 0;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParseError(lineno, "label must be an integer");
      labels.push_back(v);
    }
    out.data.push_back(std::move(obs));
  }
  if (out.data.empty()) throw ParseError(lineno, "no data rows");
  if (clabel >= 0) out.labels = std::move(labels);
  return out;
}

DatasetFile read_dataset_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data, const std::vector<int>* labels) {
  if (labels && labels->size() != data.size()) throw DomainError("write_dataset: label count mismatch");
  const Eigen::Index p = data.empty() ? 1 : data.front().x.size();
  const Eigen::Index q = data.empty() ? 1 : data.front().r.size();
  out << "y,cens,c1,c2";
  for (Eigen::Index k = 1; k < p; ++k) out << ",x" << k;
  for (Eigen::Index k = 1; k < q; ++k) out << ",r" << k;
  if (labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CensoredObservation& obs = data[i];
    if (obs.censored)
      out << ',' << 1 << ',' << format_double(obs.c1) << ',' << format_double(obs.c2);
    else
      out << format_double(obs.w) << ",0,,";
    for (Eigen::Index k = 1; k < p; ++k) out << ',' << format_double(obs.x(k));
    for (Eigen::Index k = 1; k < q; ++k) out << ',' << format_double(obs.r(k));
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
}

void write_dataset_file(const std::string& path, const Dataset& data, const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  write_dataset(out, data, labels);
}

void KeyValues::set(const std::string& key, const std::string& value) {
  const auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_.emplace(key, entries_.size());
  entries_.emplace_back(key, value);
}

void KeyValues::set(const std::string& key, double value) { set(key, format_double(value)); }
void KeyValues::set(const std::string& key, long long value) { set(key, std::to_string(value)); }
void KeyValues::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void KeyValues::set(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ' ';
    s += format_double(values[k]);
  }
  set(key, s);
}

bool KeyValues::contains(const std::string& key) const { return index_.count(key) > 0; }

const std::string& KeyValues::get(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw UsageError("missing key '" + key + "'");
  return entries_[it->second].second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
  return contains(key) ? get(key) : fallback;
}

double KeyValues::get_double(const std::string& key) const {
  const std::optional<double> v = parse_double(get(key));
  if (!v) throw UsageError("key '" + key + "' is not a number");
  return *v;
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key) const {
  const std::string& s = get(key);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("key '" + key + "' is not an integer");
  return v;
}

long long KeyValues::get_int_or(const std::string& key, long long fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream ss(get(key));
  std::string tok;
  while (ss >> tok) {
    for (std::string_view part : split_commas(tok)) {
      if (part.empty()) continue;
      const std::optional<double> v = parse_double(part);
      if (!v) throw UsageError("key '" + key + "' holds a non-number");
      out.push_back(*v);
    }
  }
  return out;
}

void KeyValues::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

KeyValues KeyValues::parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    const std::size_t hash = s.find('#');
    if (hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
    const std::string_view key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    kv.set(std::string(key), std::string(trim(s.substr(eq + 1))));
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse(in);
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

KeyValues fit_report_values(const FitReport& report, const std::string& family_tag, bool tie_nu) {
  KeyValues kv;
  const MixtureParams& th = report.theta;
  kv.set("family", family_tag);
  kv.set("components", static_cast<long long>(th.components()));
  kv.set("tie_nu", tie_nu);
  kv.set("converged", report.converged);
  kv.set("iterations", static_cast<long long>(report.iterations));
  kv.set("loglik", report.loglik);
  kv.set("free_parameters", static_cast<long long>(report.free_parameters));
  kv.set("aic", report.aic);
  kv.set("bic", report.bic);
  kv.set("reinitializations", static_cast<long long>(report.reinitializations));
  kv.set("shape_at_bound", report.shape_at_bound);
  for (int j = 0; j < th.components(); ++j) {
    const std::string s = std::to_string(j + 1);
    const SmnFamily& f = th.family[static_cast<std::size_t>(j)];
    kv.set("beta." + s, to_std(th.beta[static_cast<std::size_t>(j)]));
    kv.set("sigma2." + s, th.sigma2[static_cast<std::size_t>(j)]);
    if (f.kind() != FamilyKind::Normal) kv.set("nu." + s, f.nu());
    if (f.kind() == FamilyKind::ContaminatedNormal) kv.set("gamma." + s, f.gamma());
  }
  for (Eigen::Index j = 0; j < th.tau.rows(); ++j)
    kv.set("tau." + std::to_string(j + 1), to_std(th.tau.row(j).transpose()));
  if (report.se) {
    const SeTable& se = *report.se;
    kv.set("se.pseudo_inverse", se.pseudo_inverse);
    kv.set("se.condition_number", se.condition_number);
    for (std::size_t j = 0; j < se.beta.size(); ++j) {
      kv.set("se.beta." + std::to_string(j + 1), to_std(se.beta[j]));
      kv.set("se.sigma2." + std::to_string(j + 1), se.sigma2[j]);
    }
    for (Eigen::Index j = 0; j < se.tau.rows(); ++j)
      kv.set("se.tau." + std::to_string(j + 1), to_std(se.tau.row(j).transpose()));
  }
  for (std::size_t k = 0; k < report.diagnostics.size(); ++k)
    kv.set("diagnostic." + std::to_string(k + 1), report.diagnostics[k]);
  return kv;
}

void write_responsibilities(std::ostream& out, const Eigen::MatrixXd& z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) out << (j ? ",z" : "z") << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) out << (j ? "," : "") << format_double(z(i, j));
    out << '\n';
  }
}

DatasetFile import_mroz(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    for (std::string_view f : split_commas(line)) {
      std::string name(f);
      if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = name.substr(1, name.size() - 2);
      header.push_back(name);
    }
    break;
  }
  const std::array<const char*, 7> needed{"hours", "educ", "age", "exper", "unem", "kidslt6", "city"};
  std::array<int, 7> col{};
  for (std::size_t k = 0; k < needed.size(); ++k) {
    col[k] = find_column(header, needed[k]);
    if (col[k] < 0) throw ParseError(1, std::string("Mroz file lacks column '") + needed[k] + "'");
  }
  const int cexpersq = find_column(header, "expersq");

  DatasetFile out;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> f = split_commas(line);
    if (f.size() != header.size()) throw ParseError(lineno, "field count differs from header");
    std::array<double, 7> v{};
    for (std::size_t k = 0; k < needed.size(); ++k) {
      const std::optional<double> d = parse_double(f[static_cast<std::size_t>(col[k])]);
      if (!d || !std::isfinite(*d)) throw ParseError(lineno, std::string("invalid ") + needed[k]);
      v[k] = *d;
    }
    double expersq = v[3] * v[3];
    if (cexpersq >= 0) {
      const std::optional<double> d = parse_double(f[static_cast<std::size_t>(cexpersq)]);
      if (!d) throw ParseError(lineno, "invalid expersq");
      expersq = *d;
    }
    Eigen::VectorXd x(5), r(4);
    x << 1.0, v[1], v[2], v[3], expersq;
    r << 1.0, v[4], v[5], v[2];
    if (v[0] <= 0.0)
      out.data.push_back(CensoredObservation::interval(-kInf, 0.0, std::move(x), std::move(r)));
    else
      out.data.push_back(CensoredObservation::exact(v[0] / 1000.0, std::move(x), std::move(r)));
    labels.push_back(static_cast<int>(v[6]));
  }
  if (out.data.empty()) throw ParseError(lineno, "no data rows");
  out.labels = std::move(labels);
  return out;
}

}  // namespace moesmn
