#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "fixtures.hpp"
#include "moesmn/error.hpp"
#include "moesmn/simgen.hpp"
#include "moesmn/study.hpp"
#include "oracle.hpp"

using namespace moesmn;
using doctest::Approx;
using fixtures::vec;

namespace {

double gig_log_kernel(double x, double kappa, double chi, double psi) {
  return (kappa - 1.0) * std::log(x) - 0.5 * (chi / x + psi * x);
}

// Kolmogorov-Smirnov distance between sorted draws and a density integrated
// piecewise between consecutive draws.
template <class Density>
double ks_distance(std::vector<double> draws, Density density, double lower) {
  std::sort(draws.begin(), draws.end());
  boost::math::quadrature::gauss_kronrod<double, 15> gk;
  double cdf = 0.0, prev = lower, worst = 0.0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    cdf += gk.integrate(density, prev, draws[i], 0, 0);
    prev = draws[i];
    worst = std::max({worst, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
  }
  return worst;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("degenerate noise reproduces the expert means") {
  GeneratorSpec spec = fixtures::simple_design(SmnFamily::normal());
  spec.sigma2 = {1e-14, 1e-14};
  std::mt19937_64 rng(1);
  const SimulatedSample s = generate_moe_data(spec, 300, rng);
  for (std::size_t i = 0; i < s.data.size(); ++i)
    CHECK(std::abs(s.data[i].w - s.data[i].x.dot(spec.beta[static_cast<std::size_t>(s.labels[i])])) < 1e-6);
}

TEST_CASE("saturated gating puts every record in one component") {
  GeneratorSpec spec = fixtures::simple_design(SmnFamily::normal());
  spec.tau << 500.0, 0.0;
  std::mt19937_64 rng(2);
  const SimulatedSample s = generate_moe_data(spec, 200, rng);
  CHECK(std::all_of(s.labels.begin(), s.labels.end(), [](int l) { return l == 0; }));
}

TEST_CASE("component proportions follow the gating function") {
  const GeneratorSpec spec = gselect_design();
  std::mt19937_64 rng(3);
  const SimulatedSample s = generate_moe_data(spec, 500, rng);
  Eigen::Vector3d expected = Eigen::Vector3d::Zero(), counts = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    expected += gating_probs(s.data[i].r, spec.tau);
    counts(s.labels[i]) += 1.0;
    CHECK(s.data[i].r == s.data[i].x);
  }
  for (int j = 0; j < 3; ++j) CHECK(std::abs(counts(j) / 500.0 - expected(j) / 500.0) < 0.05);
}

TEST_CASE("generation is reproducible") {
  for (OutlierGenerator g : {OutlierGenerator::Gig, OutlierGenerator::Laplace, OutlierGenerator::BirnbaumSaunders}) {
    std::mt19937_64 a(5), b(5);
    const SimulatedSample x = generate_moe_data(outlier_design(g), 100, a), y = generate_moe_data(outlier_design(g), 100, b);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(x.data[i].w == y.data[i].w);
      CHECK(x.data[i].x == y.data[i].x);
    }
    CHECK(x.labels == y.labels);
  }
}

TEST_CASE("interval censoring") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> e;
  std::vector<double> y(100);
  for (double& v : y) v = e(rng);
  const std::vector<CensoredResponse> none = apply_interval_censoring(y, 0.0, 1.0, rng);
  CHECK(std::none_of(none.begin(), none.end(), [](const CensoredResponse& r) { return r.censored; }));
  const std::vector<CensoredResponse> c = apply_interval_censoring(y, 0.15, 1.0, rng);
  CHECK(std::count_if(c.begin(), c.end(), [](const CensoredResponse& r) { return r.censored; }) == 16);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!c[i].censored) {
      CHECK(c[i].w == y[i]);
      continue;
    }
    CHECK(c[i].c1 <= y[i]);
    CHECK(c[i].c2 >= y[i]);
    CHECK(c[i].c1 < c[i].c2);
    CHECK(c[i].c2 - c[i].c1 <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(apply_interval_censoring(y, 1.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(apply_interval_censoring(y, -0.1, 1.0, rng), DomainError);
  CHECK_THROWS_AS(apply_interval_censoring(y, 0.1, 0.0, rng), DomainError);
}

TEST_CASE("interval windows always contain the response") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> e(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(60);
    for (double& v : y) v = e(rng);
    const std::vector<CensoredResponse> c = apply_interval_censoring(y, 0.5, 0.3 + trial * 0.05, rng);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (c[i].censored) {
        CHECK(c[i].c1 <= y[i]);
        CHECK(y[i] <= c[i].c2);
        CHECK(c[i].c1 < c[i].c2);
      }
  }
}

TEST_CASE("tail censoring") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<CensoredResponse> same = apply_tail_censoring(y, 0.0, TailSide::Right);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK_FALSE(same[i].censored);
    CHECK(same[i].w == y[i]);
  }
  // type-7 quantile: 1 + 0.7 (10 - 1) = 7.3
  const std::vector<CensoredResponse> r = apply_tail_censoring(y, 0.3, TailSide::Right);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r[i].censored == (i >= 7));
    if (r[i].censored) {
      CHECK(r[i].c1 == Approx(7.3).epsilon(1e-14));
      CHECK(std::isinf(r[i].c2));
    }
  }
  std::vector<double> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
  const std::vector<CensoredResponse> l = apply_tail_censoring(neg, 0.3, TailSide::Left);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(l[i].censored == r[i].censored);
    if (l[i].censored) {
      CHECK(l[i].c2 == Approx(-r[i].c1).epsilon(1e-14));
      CHECK(l[i].c1 == -oracle::kInf);
    }
  }
  std::mt19937_64 rng(9);
  std::normal_distribution<double> e;
  std::vector<double> big(1000);
  for (double& v : big) v = e(rng);
  const std::vector<CensoredResponse> t = apply_tail_censoring(big, 0.15, TailSide::Left);
  const auto count = std::count_if(t.begin(), t.end(), [](const CensoredResponse& x) { return x.censored; });
  CHECK(std::abs(count - 150) <= 1);
  CHECK_THROWS_AS(apply_tail_censoring(y, 1.0, TailSide::Left), DomainError);
}

TEST_CASE("outlier injection") {
  std::mt19937_64 rng(10);
  SimulatedSample s = generate_moe_data(outlier_design(OutlierGenerator::Gig), 500, rng);
  const SimulatedSample before = s;
  inject_outliers(s, 0.0, rng);
  CHECK(s.data.size() == 500);
  inject_outliers(s, 0.06, rng);
  REQUIRE(s.data.size() == 530);
  for (std::size_t i = 500; i < 530; ++i) {
    CHECK(s.data[i].w == -2.0);
    CHECK_FALSE(s.data[i].censored);
    CHECK(s.labels[i] == kOutlierLabel);
    CHECK(s.data[i].x(1) > -1.0);
    CHECK(s.data[i].x(1) < 1.0);
    CHECK(s.data[i].r == s.data[i].x);
  }
  for (std::size_t i = 0; i < 500; ++i) CHECK(s.data[i].w == before.data[i].w);
}

TEST_CASE("GIG sampler: inverse Gaussian mean") {
  std::mt19937_64 rng(11);
  for (auto [chi, psi] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
    std::vector<double> v(100000);
    for (double& x : v) x = sample_gig(-0.5, chi, psi, rng);
    CHECK(mean(v) == Approx(std::sqrt(chi / psi)).epsilon(0.05));
    CHECK(*std::min_element(v.begin(), v.end()) > 0.0);
  }
}

TEST_CASE("GIG sampler: mean matches the Bessel ratio") {
  std::mt19937_64 rng(12);
  for (auto [k, chi, psi] : {std::tuple{0.5, 1.0, 2.0}, std::tuple{-0.5, 1.0, 0.2}, std::tuple{2.3, 0.4, 3.0}}) {
    std::vector<double> v(100000);
    for (double& x : v) x = sample_gig(k, chi, psi, rng);
    const double w = std::sqrt(chi * psi);
    const double expected = std::sqrt(chi / psi) * boost::math::cyl_bessel_k(k + 1.0, w) / boost::math::cyl_bessel_k(k, w);
    CHECK(mean(v) == Approx(expected).epsilon(0.02));
  }
}

TEST_CASE("GIG sampler: reciprocal identity") {
  // U ~ GIG(k, chi, psi) implies 1/U ~ GIG(-k, psi, chi); with chi = psi and
  // k = 0 the law is its own reciprocal
  std::mt19937_64 rng(13);
  const int n = 100000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = 1.0 / sample_gig(0.5, 1.5, 1.5, rng);
    b[i] = sample_gig(-0.5, 1.5, 1.5, rng);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const auto k = static_cast<std::size_t>(q * n);
    CHECK(a[k] == Approx(b[k]).epsilon(0.03));
  }
  int below = 0;
  for (int i = 0; i < n; ++i) below += sample_gig(0.0, 2.0, 2.0, rng) < 1.0;
  CHECK(std::abs(below / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("GIG sampler: KS distance to the integrated density") {
  std::mt19937_64 rng(14);
  for (auto [k, chi, psi] : {std::tuple{-0.5, 1.0, 2.0}, std::tuple{0.5, 1.0, 0.2}, std::tuple{1.7, 2.0, 1.0}}) {
    std::vector<double> v(100000);
    for (double& x : v) x = sample_gig(k, chi, psi, rng);
    const double norm = 2.0 * std::pow(chi / psi, 0.5 * k) * boost::math::cyl_bessel_k(k, std::sqrt(chi * psi));
    auto dens = [&](double x) { return x <= 0.0 ? 0.0 : std::exp(gig_log_kernel(x, k, chi, psi)) / norm; };
    CHECK(ks_distance(v, dens, 0.0) < 0.01);
  }
  CHECK_THROWS_AS(sample_gig(0.5, 0.0, 1.0, rng), DomainError);
}

TEST_CASE("Laplace via exponential mixing") {
  std::mt19937_64 rng(15);
  const MixingLaw law = MixingLaw::laplace_via_exp(0.5);
  std::normal_distribution<double> e;
  std::vector<double> v(100000);
  for (double& x : v) x = e(rng) / std::sqrt(law.sample(rng));
  auto laplace = [](double x) { return 0.5 * std::exp(-std::abs(x)); };
  std::sort(v.begin(), v.end());
  CHECK(ks_distance(v, laplace, v.front() - 50.0) < 0.01);
}

TEST_CASE("Birnbaum-Saunders mixing law") {
  std::mt19937_64 rng(16);
  for (double alpha : {0.5, 1.0, 3.0}) {
    const MixingLaw law = MixingLaw::birnbaum_saunders(alpha);
    std::vector<double> v(100000);
    for (double& x : v) x = law.sample(rng);
    CHECK(mean(v) == Approx(1.0 + 0.5 * alpha * alpha).epsilon(0.03));
    std::sort(v.begin(), v.end());
    CHECK(v[50000] == Approx(1.0).epsilon(0.03));  // the scale is the median
  }
  CHECK_THROWS_AS(MixingLaw::birnbaum_saunders(-1.0).validate(), DomainError);
}

TEST_CASE("replication seeds are distinct") {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 0; i < 1000; ++i) s.push_back(replication_seed(42, i));
  std::sort(s.begin(), s.end());
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(replication_seed(42, 3) == replication_seed(42, 3));
  CHECK(replication_seed(42, 3) != replication_seed(43, 3));
}
