#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "moesmn/error.hpp"
#include "moesmn/smn.hpp"
#include "moesmn/special.hpp"
#include "oracle.hpp"

using namespace moesmn;
using doctest::Approx;

namespace {

std::vector<SmnFamily> family_grid() {
  return {SmnFamily::normal(),
          SmnFamily::student_t(5.0),
          SmnFamily::student_t(10.0),
          SmnFamily::student_t(30.0),
          SmnFamily::slash(2.0),
          SmnFamily::slash(3.5),
          SmnFamily::contaminated_normal(0.3, 0.3),
          SmnFamily::contaminated_normal(0.1, 0.05),
          SmnFamily::contaminated_normal(0.9, 0.9)};
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("smn_pdf at the mode") {
  const LocationScale std_loc{0.0, 1.0};
  CHECK(smn_pdf(0.0, std_loc, SmnFamily::normal()) == Approx(0.3989423).epsilon(1e-7));
  CHECK(smn_pdf(0.0, std_loc, SmnFamily::slash(1.0)) == Approx(0.2659615).epsilon(1e-7));
  // two-term CN density by hand: 0.3 phi(0; 0, 1/0.3) + 0.7 phi(0)
  const double cn = 0.3 * std::sqrt(0.3) * oracle::phi(0.0) + 0.7 * oracle::phi(0.0);
  CHECK(smn_pdf(0.0, std_loc, SmnFamily::contaminated_normal(0.3, 0.3)) == Approx(cn).epsilon(1e-12));
  CHECK(cn == Approx(0.34480).epsilon(1e-4));
  CHECK(oracle::pdf(0.0, 0.0, 1.0, SmnFamily::contaminated_normal(0.3, 0.3)) == Approx(cn).epsilon(1e-12));
}

TEST_CASE("smn_pdf matches the mixing-law integral off the mode") {
  for (const SmnFamily& fam : family_grid())
    for (double y : {-7.0, -2.2, -0.3, 0.9, 4.0})
      for (LocationScale loc : {LocationScale{0.0, 1.0}, LocationScale{1.5, 0.4}}) {
        CAPTURE(family_tag(fam.kind()));
        CAPTURE(y);
        CHECK(smn_pdf(y, loc, fam) == Approx(oracle::pdf(y, loc.mu, loc.sigma2, fam)).epsilon(1e-9));
      }
}

TEST_CASE("smn_pdf rejects invalid parameters") {
  CHECK_THROWS_AS(SmnFamily::student_t(-1.0), DomainError);
  CHECK_THROWS_AS(SmnFamily::slash(0.0), DomainError);
  CHECK_THROWS_AS(SmnFamily::contaminated_normal(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(SmnFamily::contaminated_normal(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(smn_pdf(0.0, LocationScale{0.0, -1.0}, SmnFamily::normal()), DomainError);
}

TEST_CASE("smn_cdf values") {
  for (const SmnFamily& fam : family_grid()) CHECK(smn_cdf(0.0, fam) == Approx(0.5).epsilon(1e-14));
  CHECK(smn_cdf(1.96, SmnFamily::normal()) == Approx(0.9750021).epsilon(1e-7));
  const double slash = oracle::integrate([](double u) { return 2.0 * u * oracle::Phi(std::sqrt(u)); }, 0.0, 1.0);
  CHECK(std::abs(smn_cdf(1.0, SmnFamily::slash(2.0)) - slash) < 1e-10);
  for (const SmnFamily& fam : family_grid())
    for (double x : {-6.0, -1.5, 0.4, 2.5}) {
      CAPTURE(family_tag(fam.kind()));
      CAPTURE(x);
      CHECK(std::abs(smn_cdf(x, fam) - oracle::cdf(x, fam)) < 1e-10);
    }
}

TEST_CASE("smn_cdf is monotone with the right limits") {
  for (const SmnFamily& fam : family_grid()) {
    double prev = 0.0;
    for (double x = -60.0; x <= 60.0; x += 0.25) {
      const double f = smn_cdf(x, fam);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(smn_cdf(-oracle::kInf, fam) == 0.0);
    CHECK(smn_cdf(oracle::kInf, fam) == 1.0);
  }
}

TEST_CASE("stable_normal_hazard") {
  CHECK(stable_normal_hazard(0.0) == Approx(0.7978846).epsilon(1e-7));
  const double x = -40.0;
  const double expansion = -x + 1.0 / (-x) - 2.0 / std::pow(-x, 3);
  CHECK(expansion == Approx(40.0249688).epsilon(1e-8));
  CHECK(std::abs(stable_normal_hazard(x) - expansion) / expansion < 1e-6);
  CHECK(stable_normal_hazard(5.0) == Approx(oracle::phi(5.0) / oracle::Phi(5.0)).epsilon(1e-12));
  CHECK(stable_normal_hazard(5.0) == Approx(1.4867e-6).epsilon(1e-4));
  CHECK(log_normal_hazard(40.0) == Approx(-0.5 * 1600.0 - std::log(std::sqrt(2.0 * M_PI))).epsilon(1e-12));
}

TEST_CASE("stable_normal_hazard stays finite and positive") {
  for (double x = -300.0; x <= 40.0; x += 0.01) {
    const double h = stable_normal_hazard(x);
    REQUIRE(std::isfinite(h));
    REQUIRE(h > 0.0);
  }
}

TEST_CASE("pvii_cdf") {
  CHECK(pvii_cdf(0.0, 5.0, 3.0) == Approx(0.5).epsilon(1e-14));
  // a = nu + 1, delta = nu is the Student-t(nu) law itself
  for (double nu : {2.5, 4.0, 11.0})
    for (double x : {-2.0, 0.3, 1.7})
      CHECK(pvii_cdf(x, nu + 1.0, nu) == Approx(smn_cdf(x, SmnFamily::student_t(nu))).epsilon(1e-12));
  auto kernel = [](double t) { return std::pow(1.0 + t * t / 3.0, -2.5); };
  const double norm = 2.0 * oracle::integrate(kernel, 0.0, oracle::kInf);
  const double expected = 0.5 + oracle::integrate(kernel, 0.0, 1.0) / norm;
  CHECK(std::abs(pvii_cdf(1.0, 5.0, 3.0) - expected) < 1e-10);
  CHECK_THROWS_AS(pvii_cdf(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(pvii_cdf(0.0, 2.0, 0.0), DomainError);
}

TEST_CASE("upper_incomplete_gamma") {
  CHECK(upper_incomplete_gamma(1.0, 0.0) == Approx(1.0).epsilon(1e-15));
  CHECK(upper_incomplete_gamma(1.0, 2.0) == Approx(0.1353353).epsilon(1e-7));
  const double ref = oracle::integrate([](double t) { return std::pow(t, 1.5) * std::exp(-t); }, 1.3, oracle::kInf);
  CHECK(upper_incomplete_gamma(2.5, 1.3) == Approx(ref).epsilon(1e-12));
  CHECK(upper_incomplete_gamma(2.5, 0.0) == Approx(std::tgamma(2.5)).epsilon(1e-14));
  double prev = upper_incomplete_gamma(3.2, 0.0);
  for (double x = 0.1; x < 20.0; x += 0.1) {
    const double g = upper_incomplete_gamma(3.2, x);
    CHECK(g < prev);
    prev = g;
  }
  CHECK_THROWS_AS(upper_incomplete_gamma(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(upper_incomplete_gamma(1.0, -1.0), DomainError);
}

TEST_CASE("smn_sample moments") {
  std::mt19937_64 rng(11);
  const std::vector<double> n = smn_sample(100000, {0.0, 1.0}, SmnFamily::normal(), rng);
  CHECK(std::abs(sample_mean(n)) < 0.02);
  CHECK(std::abs(sample_var(n) - 1.0) < 0.05);
  const std::vector<double> t = smn_sample(100000, {0.0, 1.0}, SmnFamily::student_t(4.0), rng);
  CHECK(std::abs(sample_var(t) - 2.0) < 0.2);
  const SmnFamily cn = SmnFamily::contaminated_normal(0.3, 0.3);
  int bad = 0;
  for (int i = 0; i < 100000; ++i) bad += sample_mixing(cn, rng) == 0.3;
  CHECK(std::abs(bad / 100000.0 - 0.3) < 0.01);
}

TEST_CASE("smn_sample is deterministic given the seed") {
  for (const SmnFamily& fam : family_grid()) {
    std::mt19937_64 a(99), b(99);
    CHECK(smn_sample(50, {0.3, 2.0}, fam, a) == smn_sample(50, {0.3, 2.0}, fam, b));
  }
}

TEST_CASE("pdf integrates to one") {
  for (const SmnFamily& fam : family_grid()) {
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    const double mass = gk.integrate([&](double y) { return smn_pdf(y, {0.0, 1.0}, fam); }, -50.0, 50.0, 20, 1e-12);
    CAPTURE(family_tag(fam.kind()));
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("cdf derivative is the pdf") {
  const double h = 1e-4;
  for (const SmnFamily& fam : family_grid())
    for (double x = -5.0; x <= 5.0; x += 0.5) {
      const double d = (smn_cdf(x + h, fam) - smn_cdf(x - h, fam)) / (2.0 * h);
      CHECK(std::abs(d - smn_pdf(x, {0.0, 1.0}, fam)) < 1e-5);
    }
}

TEST_CASE("Student-t with huge nu is normal") {
  const SmnFamily t = SmnFamily::student_t(1e6);
  for (double x = -5.0; x <= 5.0; x += 0.1) {
    CHECK(std::abs(smn_pdf(x, {0.0, 1.0}, t) - oracle::phi(x)) < 1e-4);
    CHECK(std::abs(smn_cdf(x, t) - oracle::Phi(x)) < 1e-4);
  }
}

TEST_CASE("log interval probability") {
  const SmnFamily t = SmnFamily::student_t(4.0);
  CHECK(std::exp(smn_log_interval_prob(-1.0, 2.0, t)) == Approx(smn_cdf(2.0, t) - smn_cdf(-1.0, t)).epsilon(1e-12));
  // far upper tail, where the naive difference of cdfs cancels to zero
  const double lp = smn_log_interval_prob(40.0, 41.0, SmnFamily::normal());
  CHECK(std::isfinite(lp));
  // log Phi(-x) from the asymptotic series, ample at x = 40
  auto log_tail = [](double x) {
    const double x2 = x * x;
    return -0.5 * x2 - std::log(x * std::sqrt(2.0 * M_PI)) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2));
  };
  const double ref = log_tail(40.0) + std::log1p(-std::exp(log_tail(41.0) - log_tail(40.0)));
  CHECK(lp == Approx(ref).epsilon(1e-12));
}

TEST_CASE("family tags") {
  CHECK(parse_family_kind("t") == FamilyKind::StudentT);
  CHECK(parse_family_kind("sl") == FamilyKind::Slash);
  CHECK(parse_family_kind("cn") == FamilyKind::ContaminatedNormal);
  CHECK(parse_family_kind("n") == FamilyKind::Normal);
  CHECK_FALSE(parse_family_kind("gig").has_value());
}
