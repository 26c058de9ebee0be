#include <doctest.h>

#include <cmath>
#include <random>

#include "moesmn/error.hpp"
#include "moesmn/model.hpp"
#include "oracle.hpp"

using namespace moesmn;
using doctest::Approx;

namespace {

constexpr double kInf = oracle::kInf;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

MixtureParams two_component(const SmnFamily& fam) {
  MixtureParams theta;
  theta.beta = {vec({0.5, -1.0}), vec({-0.3, 2.0})};
  theta.sigma2 = {0.8, 1.7};
  theta.family = {fam, fam};
  theta.tau = Eigen::MatrixXd(1, 2);
  theta.tau << 0.4, -1.1;
  return theta;
}

Dataset mixed_data() {
  Dataset d;
  d.push_back(CensoredObservation::exact(0.7, vec({1.0, 0.2}), vec({1.0, -0.5})));
  d.push_back(CensoredObservation::interval(-kInf, -0.4, vec({1.0, 1.3}), vec({1.0, 0.8})));
  d.push_back(CensoredObservation::interval(0.1, 1.6, vec({1.0, -0.7}), vec({1.0, 0.1})));
  d.push_back(CensoredObservation::interval(2.2, kInf, vec({1.0, 0.9}), vec({1.0, 1.4})));
  return d;
}

}  // namespace

TEST_CASE("gating_probs") {
  const Eigen::VectorXd r = vec({1.0, 0.3});
  const Eigen::VectorXd p3 = gating_probs(r, Eigen::MatrixXd::Zero(2, 2));
  for (int j = 0; j < 3; ++j) CHECK(p3(j) == Approx(1.0 / 3.0).epsilon(1e-15));
  Eigen::MatrixXd tau(1, 2);
  tau << 0.0, 0.0;
  CHECK(gating_probs(r, tau)(0) == Approx(0.5));
  tau << std::log(3.0), 0.0;
  const Eigen::VectorXd p = gating_probs(r, tau);
  CHECK(p(0) == Approx(0.75).epsilon(1e-14));
  CHECK(p(1) == Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(gating_probs(vec({1.0, 2.0, 3.0}), tau), DomainError);
}

TEST_CASE("gating softmax is shift invariant in the logits") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd tau(3, 3);
  for (Eigen::Index i = 0; i < tau.size(); ++i) tau(i) = nd(rng);
  const Eigen::VectorXd r = vec({1.0, -0.4, 1.2});
  const Eigen::VectorXd p = gating_probs(r, tau);
  CHECK(p.sum() == Approx(1.0).epsilon(1e-15));
  CHECK((p.array() > 0.0).all());
  // moving x1 by a constant and compensating in the intercepts
  const double shift = 0.9;
  Eigen::MatrixXd tau2 = tau;
  tau2.col(0) -= shift * tau.col(1);
  const Eigen::VectorXd p2 = gating_probs(vec({1.0, -0.4 + shift, 1.2}), tau2);
  for (int j = 0; j < 4; ++j) CHECK(p2(j) == Approx(p(j)).epsilon(1e-12));
  // huge logits do not overflow
  Eigen::MatrixXd big(1, 1);
  big << 800.0;
  const Eigen::VectorXd pb = gating_probs(vec({1.0}), big);
  CHECK(pb(0) == Approx(1.0));
  CHECK(pb(1) >= 0.0);
}

TEST_CASE("observed_loglik fixtures") {
  MixtureParams one;
  one.beta = {vec({2.0})};
  one.sigma2 = {1.0};
  one.family = {SmnFamily::normal()};
  one.tau = Eigen::MatrixXd(0, 1);
  const Dataset exact{CensoredObservation::exact(2.0, vec({1.0}), vec({1.0}))};
  CHECK(observed_loglik(exact, one) == Approx(-0.9189385).epsilon(1e-7));
  const Dataset left{CensoredObservation::interval(-kInf, 2.0, vec({1.0}), vec({1.0}))};
  CHECK(observed_loglik(left, one) == Approx(-0.6931472).epsilon(1e-7));
}

TEST_CASE("observed_loglik equals a hand assembly") {
  for (const SmnFamily& fam : {SmnFamily::student_t(3.5), SmnFamily::slash(2.0), SmnFamily::contaminated_normal(0.2, 0.4)}) {
    const MixtureParams theta = two_component(fam);
    const Dataset data = mixed_data();
    double ref = 0.0;
    for (const CensoredObservation& obs : data) {
      const Eigen::VectorXd pi = gating_probs(obs.r, theta.tau);
      double lik = 0.0;
      for (int j = 0; j < 2; ++j) {
        const double mu = obs.x.dot(theta.beta[j]);
        const double s = std::sqrt(theta.sigma2[j]);
        if (!obs.censored) {
          lik += pi(j) * oracle::pdf(obs.w, mu, theta.sigma2[j], fam);
        } else {
          const double hi = std::isinf(obs.c2) ? 1.0 : oracle::cdf((obs.c2 - mu) / s, fam);
          const double lo = std::isinf(obs.c1) ? 0.0 : oracle::cdf((obs.c1 - mu) / s, fam);
          lik += pi(j) * (hi - lo);
        }
      }
      ref += std::log(lik);
    }
    CHECK(observed_loglik(data, theta) == Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("observed_loglik reports unsupported observations") {
  MixtureParams one;
  one.beta = {vec({0.0})};
  one.sigma2 = {1.0};
  one.family = {SmnFamily::normal()};
  one.tau = Eigen::MatrixXd(0, 1);
  Dataset d{CensoredObservation::exact(0.0, vec({1.0}), vec({1.0})),
            CensoredObservation::interval(1e200, kInf, vec({1.0}), vec({1.0}))};
  try {
    observed_loglik(d, one);
    FAIL("expected NumericalSupportError");
  } catch (const NumericalSupportError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("responsibilities") {
  MixtureParams same = two_component(SmnFamily::normal());
  same.beta[1] = same.beta[0];
  same.sigma2[1] = same.sigma2[0];
  same.tau.setZero();
  for (const CensoredObservation& obs : mixed_data()) {
    const Eigen::VectorXd z = responsibilities(obs, same);
    CHECK(z(0) == Approx(0.5).epsilon(1e-14));
  }
  MixtureParams far;
  far.beta = {vec({0.0}), vec({10.0})};
  far.sigma2 = {1.0, 1.0};
  far.family = {SmnFamily::normal(), SmnFamily::normal()};
  far.tau = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::VectorXd z = responsibilities(CensoredObservation::exact(0.0, vec({1.0}), vec({1.0})), far);
  const double z2 = oracle::phi(10.0) / (oracle::phi(0.0) + oracle::phi(10.0));
  CHECK(z(1) == Approx(z2).epsilon(1e-12));
  CHECK(z2 == Approx(1.93e-22).epsilon(1e-2));
  const Eigen::VectorXd zc = responsibilities(CensoredObservation::interval(-kInf, 0.0, vec({1.0}), vec({1.0})), far);
  const double phi_m10 = 0.5 * std::erfc(10.0 / std::sqrt(2.0));
  CHECK(zc(1) == Approx(phi_m10 / (0.5 + phi_m10)).epsilon(1e-12));
  CHECK(zc(1) == Approx(1.52e-23).epsilon(1e-2));
}

TEST_CASE("responsibility rows sum to one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const SmnFamily& fam : {SmnFamily::normal(), SmnFamily::student_t(4.0), SmnFamily::slash(1.5),
                               SmnFamily::contaminated_normal(0.1, 0.2)}) {
    MixtureParams theta = two_component(fam);
    for (int i = 0; i < 200; ++i) {
      const double a = u(rng), b = a + std::abs(u(rng)) + 0.01;
      const CensoredObservation obs =
          i % 3 == 0 ? CensoredObservation::exact(a, vec({1.0, u(rng)}), vec({1.0, u(rng)}))
                     : CensoredObservation::interval(i % 3 == 1 ? -kInf : a, b, vec({1.0, u(rng)}), vec({1.0, u(rng)}));
      CHECK(std::abs(responsibilities(obs, theta).sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("cn_bad_point_prob") {
  auto theta_for = [](double nu, double gamma) {
    MixtureParams t = two_component(SmnFamily::contaminated_normal(nu, gamma));
    return t;
  };
  for (const CensoredObservation& obs : mixed_data()) {
    CHECK(cn_bad_point_prob(obs, 0, theta_for(0.3, 1.0 - 1e-12)) == Approx(0.3).epsilon(1e-9));
    CHECK(cn_bad_point_prob(obs, 1, theta_for(1e-12, 0.3)) < 1e-10);
  }
  // uncensored with delta = 4: two-atom posterior
  MixtureParams t = theta_for(0.3, 0.3);
  const double mu = t.beta[0](0);
  const double s = std::sqrt(t.sigma2[0]);
  const CensoredObservation obs = CensoredObservation::exact(mu + 2.0 * s, vec({1.0, 0.0}), vec({1.0, 0.0}));
  const double bad = 0.3 * std::sqrt(0.3) * oracle::phi(2.0 * std::sqrt(0.3));
  const double good = 0.7 * oracle::phi(2.0);
  CHECK(cn_bad_point_prob(obs, 0, t) == Approx(bad / (bad + good)).epsilon(1e-13));
  // censored case: normal-cdf difference over the CN cdf difference
  const CensoredObservation cens = CensoredObservation::interval(mu - s, mu + 0.5 * s, vec({1.0, 0.0}), vec({1.0, 0.0}));
  const double g = std::sqrt(0.3);
  const double pb = 0.3 * oracle::Phi_diff(-g, 0.5 * g);
  const double pg = 0.7 * oracle::Phi_diff(-1.0, 0.5);
  CHECK(cn_bad_point_prob(cens, 0, t) == Approx(pb / (pb + pg)).epsilon(1e-12));
  CHECK_THROWS_AS(cn_bad_point_prob(obs, 0, two_component(SmnFamily::student_t(3.0))), UsageError);
}

TEST_CASE("swapping components leaves the likelihood unchanged") {
  for (const SmnFamily& fam : {SmnFamily::normal(), SmnFamily::student_t(5.0)}) {
    const MixtureParams theta = two_component(fam);
    MixtureParams swapped = theta;
    std::swap(swapped.beta[0], swapped.beta[1]);
    std::swap(swapped.sigma2[0], swapped.sigma2[1]);
    swapped.tau = -theta.tau;
    const Dataset data = mixed_data();
    CHECK(observed_loglik(data, swapped) == Approx(observed_loglik(data, theta)).epsilon(1e-13));
    const MixtureParams permuted = permute_components(theta, {1, 0});
    CHECK(permuted.tau.isApprox(-theta.tau, 1e-14));
    CHECK(observed_loglik(data, permuted) == Approx(observed_loglik(data, theta)).epsilon(1e-13));
  }
}

TEST_CASE("canonical order and permutation with three components") {
  MixtureParams theta;
  theta.beta = {vec({2.0, 1.0}), vec({-1.0, 0.0}), vec({0.5, 3.0})};
  theta.sigma2 = {1.0, 2.0, 3.0};
  theta.family = std::vector<SmnFamily>(3, SmnFamily::normal());
  theta.tau = Eigen::MatrixXd(2, 2);
  theta.tau << 0.3, -0.2, 1.1, 0.5;
  const std::vector<int> order = canonical_order(theta);
  CHECK(order == std::vector<int>{1, 2, 0});
  const MixtureParams p = permute_components(theta, order);
  const Eigen::VectorXd r = vec({1.0, 0.7});
  const Eigen::VectorXd a = gating_probs(r, theta.tau);
  const Eigen::VectorXd b = gating_probs(r, p.tau);
  for (int j = 0; j < 3; ++j) CHECK(b(j) == Approx(a(order[j])).epsilon(1e-14));
  // ties in the intercept fall back to sigma2
  theta.beta[2](0) = -1.0;
  theta.sigma2[2] = 0.5;
  CHECK(canonical_order(theta) == std::vector<int>{2, 1, 0});
}

TEST_CASE("free parameter count") {
  MixtureParams t = two_component(SmnFamily::student_t(3.0));
  CHECK(free_parameter_count(t, true) == 2 * 2 + 2 + 2 + 1);
  CHECK(free_parameter_count(t, false) == 2 * 2 + 2 + 2 + 2);
  t.family = {SmnFamily::contaminated_normal(0.1, 0.2), SmnFamily::contaminated_normal(0.1, 0.2)};
  CHECK(free_parameter_count(t, false) == 12);
  t.family = {SmnFamily::normal(), SmnFamily::normal()};
  CHECK(free_parameter_count(t, true) == 8);
}

TEST_CASE("observation and parameter validation") {
  CHECK_THROWS_AS(CensoredObservation::interval(1.0, 1.0, vec({1.0}), vec({1.0})).validate(), DomainError);
  CHECK_THROWS_AS(CensoredObservation::interval(-kInf, kInf, vec({1.0}), vec({1.0})).validate(), DomainError);
  CHECK(CensoredObservation::interval(0.0, 2.0, vec({1.0}), vec({1.0})).imputed_response() == 1.0);
  CHECK(CensoredObservation::interval(-kInf, 2.0, vec({1.0}), vec({1.0})).imputed_response() == 2.0);
  CHECK(CensoredObservation::interval(-3.0, kInf, vec({1.0}), vec({1.0})).imputed_response() == -3.0);
  MixtureParams bad = two_component(SmnFamily::normal());
  bad.sigma2[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
