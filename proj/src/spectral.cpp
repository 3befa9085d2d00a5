#include "cwcs/spectral.hpp"

#include <array>
#include <cmath>

namespace cwcs {

namespace {

// B_{2j} / (2j)!, j = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial{
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

// Neville extrapolation of (x_i, y_i) to x = 0.
double extrapolate_to_zero(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t n = x.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i)
      y[i] = (x[i] * y[i + 1] - x[i + k] * y[i]) / (x[i] - x[i + k]);
  return y[0];
}

void check_grid(const std::vector<double>& g, const char* what) {
  if (g.size() < 2) throw SpectralError(std::string(what) + " needs at least two values");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) throw SpectralError(std::string(what) + " values must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (g[i] == g[j]) throw SpectralError(std::string(what) + " values must be distinct");
  }
}

// sum over nonzero eigenvalues of sign(l) |l|^{-s} exp(-e |l|).
double regulated_sum(double x, double s, double e) {
  const int cutoff = static_cast<int>(std::ceil(40.0 / e)) + 1;
  double sum = 0.0;
  // Pair n + x with -(n + 1 - x) so the partial sums stay small.
  for (int n = 0; n <= cutoff; ++n) {
    const double p = n + x;
    const double q = n + 1.0 - x;
    if (p > 0.0) sum += std::pow(p, -s) * std::exp(-e * p);
    sum -= std::pow(q, -s) * std::exp(-e * q);
  }
  return sum;
}

}  // namespace

double hurwitz_zeta(double s, double x, int direct) {
  if (!(x > 0.0)) throw SpectralError("hurwitz_zeta needs x > 0");
  if (s == 1.0) throw SpectralError("hurwitz_zeta has a pole at s = 1");
  if (direct < 1) throw SpectralError("hurwitz_zeta needs direct >= 1");
  double sum = 0.0;
  for (int k = 0; k < direct; ++k) sum += std::pow(k + x, -s);
  const double big = direct + x;
  sum += std::pow(big, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(big, -s);
  // Rising factorial s (s + 1) ... (s + 2j - 2), times big^{-s-2j+1}.
  double rising = s;
  double power = std::pow(big, -s - 1.0);
  for (int j = 0; j < 8; ++j) {
    sum += kBernoulliOverFactorial[j] * rising * power;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    power /= big * big;
  }
  return sum;
}

double CircleDiracSpec::offset() const {
  double x = a + (bounding_spin ? 0.5 : 0.0);
  x -= std::floor(x);
  if (x >= 1.0) x = 0.0;
  return x;
}

int CircleDiracSpec::kernel_dim() const { return offset() == 0.0 ? 1 : 0; }

std::vector<double> CircleDiracSpec::eigenvalues(int cutoff) const {
  if (cutoff < 0) throw SpectralError("eigenvalues needs cutoff >= 0");
  std::vector<double> out;
  out.reserve(2 * cutoff + 1);
  const double x = offset();
  for (int n = -cutoff; n <= cutoff; ++n) out.push_back(n + x);
  return out;
}

EtaReport eta_invariant(const CircleDiracSpec& spec) {
  if (!std::isfinite(spec.a)) throw SpectralError("holonomy must be finite");
  check_grid(spec.abel_grid, "abel_grid");
  check_grid(spec.s_grid, "s_grid");

  EtaReport r;
  r.a = spec.a;
  r.offset = spec.offset();
  r.h = spec.kernel_dim();
  const double x = r.offset;
  // Positive eigenvalues n + x (n >= 0, x > 0) and negative ones -(n + 1 - x).
  // With x = 0 the spectrum is symmetric about the kernel.
  r.hurwitz = x == 0.0 ? 0.0 : hurwitz_zeta(0.0, x) - hurwitz_zeta(0.0, 1.0 - x);

  std::vector<double> at_s;
  at_s.reserve(spec.s_grid.size());
  for (double s : spec.s_grid) {
    std::vector<double> at_e;
    at_e.reserve(spec.abel_grid.size());
    for (double e : spec.abel_grid) at_e.push_back(regulated_sum(x, s, e));
    at_s.push_back(extrapolate_to_zero(spec.abel_grid, at_e));
  }
  r.abel = extrapolate_to_zero(spec.s_grid, at_s);
  r.divergent = std::abs(r.abel - r.hurwitz) > 1e-3;
  r.xi = 0.5 * (r.hurwitz + r.h);
  return r;
}

ApsReport aps_mod1_check(double a, const EnrichedCycle& ec, int sigma) {
  if (sigma != 1 && sigma != -1) throw SpectralError("sigma must be +1 or -1");
  CircleDiracSpec spec;
  spec.a = a;
  spec.bounding_spin = true;
  const EtaReport e = eta_invariant(spec);
  ApsReport r;
  r.a = a;
  r.eta = e.hurwitz;
  r.h = e.h;
  r.xi = e.xi;
  r.angle = angle_pairing(ec).value.real();
  r.sigma = sigma;
  r.residual = mod1_distance(sigma * r.xi - r.angle);
  return r;
}

int calibrate_aps_sign(int resolution) {
  const EnrichedCycle ec = disk_cycle(0.25, resolution);
  const double plus = aps_mod1_check(0.25, ec, 1).residual;
  const double minus = aps_mod1_check(0.25, ec, -1).residual;
  return plus <= minus ? 1 : -1;
}

}  // namespace cwcs
