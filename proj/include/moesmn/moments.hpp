#pragma once

#include "moesmn/smn.hpp"

namespace moesmn {

/// Conditional moments E(U | .), E(U Y | .), E(U Y^2 | .) for one
/// observation under one component.
struct MomentTriple {
  double u_hat = 1.0;
  double uy_hat = 0.0;
  double uy2_hat = 0.0;
};

/// E(U^r phi(h sqrt(U))) and E(U^r Phi(h sqrt(U))) under the family's mixing law.
double e_phi(double r, double h, const SmnFamily& fam);
double e_Phi(double r, double h, const SmnFamily& fam);
double log_e_phi(double r, double h, const SmnFamily& fam);
double log_e_Phi(double r, double h, const SmnFamily& fam);

/// E(U^r).
double mixing_moment(double r, const SmnFamily& fam);

/// E(U | Y = y).
double u_hat_uncensored(double y, const LocationScale& loc, const SmnFamily& fam);

/// Moments for an exactly observed response: (u, y u, y^2 u).
MomentTriple uncensored_moments(double y, const LocationScale& loc, const SmnFamily& fam);

/// Moments conditional on c1 <= Y <= c2. Bounds may be +-infinity.
/// Throws DegenerateIntervalError when P(c1 <= Y <= c2) < 1e-300.
MomentTriple censored_moments(double c1, double c2, const LocationScale& loc, const SmnFamily& fam);

/// Same quantities by nested adaptive quadrature over (u, y); a CN mixing law
/// is handled as a two-point sum. Independent of the closed forms above and
/// intended for verification only (slow).
MomentTriple quadrature_oracle_moments(double c1, double c2, const LocationScale& loc,
                                       const SmnFamily& fam);

inline constexpr double kIntervalProbFloor = 1e-300;

}  // namespace moesmn
