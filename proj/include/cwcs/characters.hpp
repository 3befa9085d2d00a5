#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cwcs/geometry.hpp"

namespace cwcs {

class CharacterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Element of C/Z: the real part is reduced to [0, 1), the imaginary part is
/// kept as is. `raw` is the unreduced integral.
struct AngleValue {
  Complex raw{};
  Complex value{};

  static AngleValue reduce(Complex raw);
  AngleValue operator+(const AngleValue& o) const { return reduce(raw + o.raw); }
  AngleValue operator-(const AngleValue& o) const { return reduce(raw - o.raw); }
};

/// Distance of x to the nearest integer.
double mod1_distance(double x);

/// int (i/2pi) tr R over the chart, with the geometry's orientation.
double chern_number(const GeometrySpec& g, const std::string& connection);
/// int Todd(tangent) over the chart (even-dimensional).
Complex todd_genus(const GeometrySpec& g, const std::string& tangent = "tangent");

/// Odd-dimensional closed Sigma with bundle/tangent data, filled by W.
struct EnrichedCycle {
  GeometrySpec sigma;
  GeometrySpec filling;
  std::string bundle = "bundle";
  std::string tangent = "tangent";
};

/// The disk filling of the circle with flat holonomy a.
EnrichedCycle disk_cycle(double a, int resolution = 0, DiskProfile profile = {},
                         int extra_flux = 0);

/// Sigma must be closed and odd-dimensional, W even-dimensional with exactly
/// one boundary component matching Sigma's data.
void validate(const EnrichedCycle& ec, double tol = 1e-8);

/// int_W ch(bundle) ^ Todd(tangent), with W's orientation.
Complex ch_todd_integral(const GeometrySpec& w, const std::string& bundle,
                         const std::string& tangent);

AngleValue angle_pairing(const EnrichedCycle& ec);

/// Filling with the bundle potential replaced by A + i d(phi) times the
/// identity. phi must not vary across the collar; on Sigma the change is then
/// a gauge transformation (accepted for rank one).
EnrichedCycle gauge_transform(const EnrichedCycle& ec,
                              const std::function<double(std::span<const double>)>& phi);

struct FillingReport {
  long integer = 0;
  double deviation = 0.0;
  Complex difference{};
};

/// raw(ec) - raw(alt) must be an integer.
FillingReport filling_independence(const EnrichedCycle& ec, const EnrichedCycle& alt);

struct VariationReport {
  AngleValue angle_difference;
  AngleValue bordism_integral;
  double residual = 0.0;
  double closedness = 0.0;
};

/// angle(ec1) - angle(ec0) against int_bordism C ^ Todd, where C is given on
/// the bordism (already pulled back) and the bordism boundary is
/// Sigma1 - Sigma0.
VariationReport variation_check(const EnrichedCycle& ec0, const EnrichedCycle& ec1,
                                const GeometrySpec& bordism, const MixedForm& c,
                                const std::string& tangent = "tangent", double tol = 1e-6);

struct IntegralityProbe {
  GeometrySpec probe;    // closed, even-dimensional
  MixedForm c;           // C pulled back to the probe
  std::string tangent = "tangent";
};

struct IntegralityReport {
  bool member = true;
  double worst = 0.0;
  std::vector<Complex> values;
};

/// Every int C ^ Todd(probe) within tol of an integer (and imaginary part
/// within tol of zero).
IntegralityReport integrality_membership(const std::vector<IntegralityProbe>& probes,
                                         double tol = 1e-6);

struct ZnReport {
  AngleValue value;
  Complex v_integral{};
  Complex q_integral{};
  /// distance of n * value to the integers
  double order_residual = 0.0;
};

/// (1/n) int_V ch Todd - int_Q ch Todd, reduced mod 1.
ZnReport zn_pairing(const ZnCycleSpec& z);

/// Distance of the pairing of a Z/n-boundary to 0 in C/Z.
double zn_boundary_vanishing(const ZnCycleSpec& z);

struct PushforwardReport {
  Complex total_space{};   // t(pulled-back cycle) = int_T ch(E) Todd(T)
  Complex base_route{};    // int_X I(Todd_v ch(E)) Todd(X)
  double chain_residual = 0.0;  // |Todd_X ^ I(Todd_v C) - I(pi* Todd_X ^ Todd_v ^ C)|
  MixedForm variation_form;     // C(b) = I(Todd_v ^ ch(E))
};

/// Wrong-way map on a product fibration (base = leading factor). The bundle
/// and the total tangent (base tangent + vertical) come from the geometry.
PushforwardReport pushforward_character(const GeometrySpec& total,
                                        const std::string& bundle = "bundle");

/// Total space disk2_flat(a) x S^2 with E = L_a (x) O(m); fiber tangent O(2).
/// Default resolution 32 per axis.
GeometrySpec pushforward_example(double a, int m, int resolution = 0);

}  // namespace cwcs
