#pragma once

#include <stdexcept>
#include <vector>

#include "cwcs/characters.hpp"

namespace cwcs {

class SpectralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hurwitz zeta sum_{k>=0} (k + x)^{-s} for x > 0, s != 1, by Euler-Maclaurin
/// with 8 Bernoulli corrections after `direct` explicit terms.
double hurwitz_zeta(double s, double x, int direct = 16);

/// Dirac operator -i d/dtheta + a on the unit circle with a flat line of
/// holonomy a. The bounding spin structure shifts the spectrum by 1/2.
struct CircleDiracSpec {
  double a = 0.0;
  bool bounding_spin = false;
  /// Abel regulator values e for sum sign(l) |l|^{-s} exp(-e |l|); each is
  /// extrapolated to e -> 0. The cutoff keeps exp(-e N) below 1e-17.
  std::vector<double> abel_grid{0.08, 0.04, 0.02, 0.01};
  /// s values extrapolated to s -> 0.
  std::vector<double> s_grid{0.1, 0.05, 0.025, 0.0125, 0.00625};

  /// Spectrum offset in [0, 1): eigenvalues are n + offset.
  double offset() const;
  /// Number of zero eigenvalues.
  int kernel_dim() const;
  /// Eigenvalues n + offset, |n| <= cutoff.
  std::vector<double> eigenvalues(int cutoff) const;
};

struct EtaReport {
  double a = 0.0;
  double offset = 0.0;
  int h = 0;
  double hurwitz = 0.0;  // zeta_H(0, x) - zeta_H(0, 1 - x)
  double abel = 0.0;     // regulated sums, extrapolated in e then in s
  double xi = 0.0;       // (eta + h) / 2, from the Hurwitz value
  bool divergent = false;  // the two disagree beyond 1e-3
};

EtaReport eta_invariant(const CircleDiracSpec& spec);

struct ApsReport {
  double a = 0.0;
  double eta = 0.0;
  int h = 0;
  double xi = 0.0;
  double angle = 0.0;
  int sigma = 1;
  double residual = 0.0;  // distance of sigma xi - angle to the integers
};

/// sigma * xi(a) - angle(disk filling of a) mod 1, with the bounding spin
/// structure of the boundary circle.
ApsReport aps_mod1_check(double a, const EnrichedCycle& ec, int sigma);

/// The sign fixed by the a = 1/4 run.
int calibrate_aps_sign(int resolution = 32);

}  // namespace cwcs
