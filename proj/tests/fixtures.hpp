#pragma once

#include <cstdint>
#include <random>

#include "moesmn/simgen.hpp"
#include "moesmn/study.hpp"

namespace fixtures {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// A censored sample from `spec` with tail censoring on `side`.
inline moesmn::SimulatedSample censored_sample(const moesmn::GeneratorSpec& spec, std::size_t n, std::uint64_t seed,
                                               double censoring, moesmn::TailSide side) {
  std::mt19937_64 rng(seed);
  moesmn::SimulatedSample s = moesmn::generate_moe_data(spec, n, rng);
  moesmn::set_responses(s.data, moesmn::apply_tail_censoring(moesmn::responses_of(s.data), censoring, side));
  return s;
}

// Small two-expert design with one covariate and well separated lines.
inline moesmn::GeneratorSpec simple_design(const moesmn::SmnFamily& fam) {
  moesmn::GeneratorSpec s;
  s.beta = {vec({-2.0, 1.5}), vec({2.0, -1.0})};
  s.sigma2 = {0.5, 0.8};
  s.tau = Eigen::MatrixXd(1, 2);
  s.tau << 0.3, 1.0;
  s.mixing = {moesmn::MixingLaw::smn(fam), moesmn::MixingLaw::smn(fam)};
  s.x_ranges = {{-2.0, 2.0}};
  s.r_ranges = {{-1.5, 1.5}};
  return s;
}

}  // namespace fixtures
