#include "moesmn/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "moesmn/error.hpp"

namespace moesmn {

MixingLaw MixingLaw::smn(const SmnFamily& fam) {
  switch (fam.kind()) {
    case FamilyKind::Normal:
      return normal();
    case FamilyKind::StudentT:
      return {MixingKind::StudentT, fam.nu(), 0.0, 0.0};
    case FamilyKind::Slash:
      return {MixingKind::Slash, fam.nu(), 0.0, 0.0};
    case FamilyKind::ContaminatedNormal:
      return {MixingKind::ContaminatedNormal, fam.nu(), fam.gamma(), 0.0};
  }
  return normal();
}

void MixingLaw::validate() const {
  switch (kind) {
    case MixingKind::Normal:
      return;
    case MixingKind::StudentT:
    case MixingKind::Slash:
    case MixingKind::ContaminatedNormal:
      (void)SmnFamily::make(static_cast<FamilyKind>(static_cast<int>(kind)), a, b);
      return;
    case MixingKind::LaplaceViaExp:
      if (!(a > 0.0)) throw DomainError("MixingLaw: exponential rate must be > 0");
      return;
    case MixingKind::BirnbaumSaunders:
      if (!(a > 0.0 && b > 0.0)) throw DomainError("MixingLaw: Birnbaum-Saunders parameters must be > 0");
      return;
    case MixingKind::Gig:
      if (!(b > 0.0 && c > 0.0) || !std::isfinite(a)) throw DomainError("MixingLaw: GIG needs chi > 0 and psi > 0");
      return;
  }
}

double MixingLaw::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case MixingKind::Normal:
      return 1.0;
    case MixingKind::StudentT:
      return sample_mixing(SmnFamily::student_t(a), rng);
    case MixingKind::Slash:
      return sample_mixing(SmnFamily::slash(a), rng);
    case MixingKind::ContaminatedNormal:
      return sample_mixing(SmnFamily::contaminated_normal(a, b), rng);
    case MixingKind::LaplaceViaExp:
      return 1.0 / std::exponential_distribution<double>(a)(rng);
    case MixingKind::BirnbaumSaunders: {
      const double h = 0.5 * a * std::normal_distribution<double>(0.0, 1.0)(rng);
      const double s = h + std::sqrt(h * h + 1.0);
      return b * s * s;
    }
    case MixingKind::Gig:
      return sample_gig(a, b, c, rng);
  }
  return 1.0;
}

void GeneratorSpec::validate() const {
  const int g = components();
  if (g < 1) throw DomainError("GeneratorSpec: need at least one component");
  if (static_cast<int>(sigma2.size()) != g || static_cast<int>(mixing.size()) != g)
    throw DomainError("GeneratorSpec: per-component vectors disagree in length");
  const Eigen::Index p = beta.front().size();
  if (p != static_cast<Eigen::Index>(x_ranges.size()) + 1) throw DomainError("GeneratorSpec: beta length must be 1 + x columns");
  for (const Eigen::VectorXd& b : beta)
    if (b.size() != p) throw DomainError("GeneratorSpec: beta vectors differ in length");
  for (double s : sigma2)
    if (!(s > 0.0)) throw DomainError("GeneratorSpec: sigma2 must be > 0");
  for (const MixingLaw& m : mixing) m.validate();
  const Eigen::Index q = gating_uses_x ? p : static_cast<Eigen::Index>(r_ranges.size()) + 1;
  if (tau.rows() != g - 1 || (g > 1 && tau.cols() != q)) throw DomainError("GeneratorSpec: tau has the wrong shape");
  for (const auto* ranges : {&x_ranges, &r_ranges})
    for (const UniformRange& r : *ranges)
      if (!(r.lo < r.hi)) throw DomainError("GeneratorSpec: empty covariate range");
}

namespace {

Eigen::VectorXd draw_covariates(const std::vector<UniformRange>& ranges, std::mt19937_64& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(ranges.size()) + 1);
  v(0) = 1.0;
  for (std::size_t k = 0; k < ranges.size(); ++k)
    v(static_cast<Eigen::Index>(k) + 1) = std::uniform_real_distribution<double>(ranges[k].lo, ranges[k].hi)(rng);
  return v;
}

void check_fraction(double p, const char* who) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError(std::string(who) + ": fraction must lie in [0,1)");
}

// Type-7 empirical quantile of sorted data.
double quantile7(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Ratio-of-uniforms without mode shift for the density proportional to
// x^(lambda-1) exp(-omega (x + 1/x) / 2), lambda >= 0.
double sample_gig_standard(double lambda, double omega, std::mt19937_64& rng) {
  const auto log_f = [&](double x) { return (lambda - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x); };
  const double mode = ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega)) / omega;
  const double xu = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double log_fm = log_f(mode);
  const double umax = xu * std::exp(0.5 * (log_f(xu) - log_fm));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    const double v = unif(rng);
    const double u = umax * unif(rng);
    if (v <= 0.0 || u <= 0.0) continue;
    const double x = u / v;
    if (2.0 * std::log(v) <= log_f(x) - log_fm) return x;
  }
}

}  // namespace

SimulatedSample generate_moe_data(const GeneratorSpec& spec, std::size_t n, std::mt19937_64& rng) {
  spec.validate();
  if (n < 1) throw DomainError("generate_moe_data: n must be >= 1");
  const int g = spec.components();
  SimulatedSample out;
  out.data.reserve(n);
  out.labels.reserve(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd x = draw_covariates(spec.x_ranges, rng);
    Eigen::VectorXd r = spec.gating_uses_x ? x : draw_covariates(spec.r_ranges, rng);
    int label = 0;
    if (g > 1) {
      const Eigen::VectorXd pi = gating_probs(r, spec.tau);
      const double draw = unif(rng);
      double acc = 0.0;
      label = g - 1;
      for (int j = 0; j < g; ++j) {
        acc += pi(j);
        if (draw < acc) {
          label = j;
          break;
        }
      }
    }
    const std::size_t j = static_cast<std::size_t>(label);
    const double u = spec.mixing[j].sample(rng);
    const double y = x.dot(spec.beta[j]) + std::sqrt(spec.sigma2[j] / u) * stdnorm(rng);
    out.data.push_back(CensoredObservation::exact(y, std::move(x), std::move(r)));
    out.labels.push_back(label);
  }
  return out;
}

std::vector<CensoredResponse> apply_interval_censoring(const std::vector<double>& y, double p, double c,
                                                       std::mt19937_64& rng) {
  check_fraction(p, "apply_interval_censoring");
  if (!(c > 0.0)) throw DomainError("apply_interval_censoring: window width must be > 0");
  std::vector<CensoredResponse> out;
  out.reserve(y.size());
  for (double v : y) out.push_back({v, false, 0.0, 0.0});
  if (p == 0.0 || y.empty()) return out;
  const std::size_t count =
      std::min(y.size(), static_cast<std::size_t>(std::floor(static_cast<double>(y.size()) * p)) + 1);
  std::vector<std::size_t> index(y.size());
  std::iota(index.begin(), index.end(), 0);
  std::vector<std::size_t> chosen;
  std::sample(index.begin(), index.end(), std::back_inserter(chosen), count, rng);
  std::uniform_real_distribution<double> unif(0.0, c);
  for (std::size_t i : chosen) {
    const double u1 = unif(rng);
    const double u2 = unif(rng);
    const double c1 = std::max(y[i] - u1, y[i] + u2 - c);
    const double c2 = std::min(y[i] + u2, y[i] - u1 + c);
    out[i] = {y[i], true, c1, c2};
  }
  return out;
}

std::vector<CensoredResponse> apply_tail_censoring(const std::vector<double>& y, double p, TailSide side) {
  check_fraction(p, "apply_tail_censoring");
  std::vector<CensoredResponse> out;
  out.reserve(y.size());
  for (double v : y) out.push_back({v, false, 0.0, 0.0});
  if (p == 0.0 || y.empty()) return out;
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  const double inf = std::numeric_limits<double>::infinity();
  if (side == TailSide::Right) {
    const double t = quantile7(sorted, 1.0 - p);
    for (CensoredResponse& r : out)
      if (r.w > t) r = {r.w, true, t, inf};
  } else {
    const double t = quantile7(sorted, p);
    for (CensoredResponse& r : out)
      if (r.w < t) r = {r.w, true, -inf, t};
  }
  return out;
}

void set_responses(Dataset& data, const std::vector<CensoredResponse>& responses) {
  if (data.size() != responses.size()) throw DomainError("set_responses: length mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CensoredResponse& r = responses[i];
    data[i].w = r.w;
    data[i].censored = r.censored;
    data[i].c1 = r.censored ? r.c1 : 0.0;
    data[i].c2 = r.censored ? r.c2 : 0.0;
  }
}

std::vector<double> responses_of(const Dataset& data) {
  std::vector<double> y;
  y.reserve(data.size());
  for (const CensoredObservation& obs : data) y.push_back(obs.w);
  return y;
}

void inject_outliers(SimulatedSample& sample, double c_prob, std::mt19937_64& rng) {
  if (!(c_prob >= 0.0 && c_prob < 1.0)) throw DomainError("inject_outliers: probability must lie in [0,1)");
  if (sample.data.empty()) return;
  const std::size_t n = sample.data.size();
  const std::size_t extra = static_cast<std::size_t>(std::floor(static_cast<double>(n) * c_prob));
  const Eigen::Index p = sample.data.front().x.size();
  const Eigen::Index q = sample.data.front().r.size();
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t k = 0; k < extra; ++k) {
    Eigen::VectorXd x(p);
    x(0) = 1.0;
    for (Eigen::Index c = 1; c < p; ++c) x(c) = unif(rng);
    Eigen::VectorXd r;
    if (q == p) {
      r = x;
    } else {
      r.resize(q);
      r(0) = 1.0;
      for (Eigen::Index c = 1; c < q; ++c) r(c) = unif(rng);
    }
    sample.data.push_back(CensoredObservation::exact(-2.0, std::move(x), std::move(r)));
    sample.labels.push_back(kOutlierLabel);
  }
}

double sample_gig(double kappa, double chi, double psi, std::mt19937_64& rng) {
  if (!(chi > 0.0 && psi > 0.0) || !std::isfinite(kappa) || !std::isfinite(chi) || !std::isfinite(psi))
    throw DomainError("sample_gig: need chi > 0 and psi > 0");
  const double omega = std::sqrt(chi * psi);
  const double eta = std::sqrt(chi / psi);
  const double y = sample_gig_standard(std::abs(kappa), omega, rng);
  return eta * (kappa < 0.0 ? 1.0 / y : y);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace moesmn
