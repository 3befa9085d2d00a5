#include "cwcs/characters.hpp"

#include <cmath>
#include <sstream>

namespace cwcs {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Max |A_a - A_b| after allowing an integral rank-one gauge change.
bool same_bundle_data(const GeometrySpec& a, const GeometrySpec& b, const std::string& name,
                      double tol) {
  if (!a.grid->compatible(*b.grid)) return false;
  if (!a.has_connection(name) || !b.has_connection(name)) return false;
  const Connection& ca = a.connection(name);
  const Connection& cb = b.connection(name);
  if (ca.rank() != cb.rank()) return false;
  if (!ca.has_potential() || !cb.has_potential()) return true;
  const MatrixForm diff = ca.potential() - rebind(cb, a.grid).potential();
  if (diff.max_norm() <= tol) return true;
  if (ca.rank() != 1 || exterior_d(diff).max_norm() > tol) return false;
  for (const auto& cyc : a.cycles.cycles) {
    if (cyc.dim != 1) continue;
    const Complex p = period(diff * kChernNorm, cyc);
    if (mod1_distance(std::real(p)) > tol || std::abs(std::imag(p)) > tol) return false;
  }
  return true;
}

// The factor of a pulled-back form on a product chart: values on the slice
// {fiber node 0}, components without fiber axes.
MatrixForm restrict_to_base(const MatrixForm& f, const GridPtr& base, std::size_t fiber_size) {
  MatrixForm out(base, f.degree(), f.rank());
  const IndexMask base_axes = (1u << base->dim()) - 1u;
  const std::size_t blk = f.block();
  for (IndexMask m : f.masks()) {
    if ((m & ~base_axes) != 0) continue;
    auto src = f.component(m);
    auto dst = out.component_mut(m);
    for (std::size_t node = 0; node < base->size(); ++node) {
      for (std::size_t k = 0; k < blk; ++k) dst[node * blk + k] = src[node * fiber_size * blk + k];
    }
  }
  return out;
}

MixedForm restrict_to_base(const MixedForm& f, const GridPtr& base, std::size_t fiber_size) {
  MixedForm out(base, f.rank());
  for (int p = 0; p <= std::min(f.dim(), base->dim()); ++p) {
    if (f.has(p)) out.add(restrict_to_base(f.part(p), base, fiber_size));
  }
  return out;
}

double mixed_difference(const MixedForm& a, const MixedForm& b) {
  double worst = 0.0;
  for (int p = 0; p <= a.dim(); ++p) {
    worst = std::max(worst, max_norm_on_support(a.part_or_zero(p) - b.part_or_zero(p)));
  }
  return worst;
}

}  // namespace

AngleValue AngleValue::reduce(Complex raw) {
  double r = std::real(raw) - std::floor(std::real(raw));
  if (r >= 1.0) r -= 1.0;
  return {raw, Complex(r, std::imag(raw))};
}

double mod1_distance(double x) { return std::abs(x - std::round(x)); }

EnrichedCycle disk_cycle(double a, int resolution, DiskProfile profile, int extra_flux) {
  EnrichedCycle ec;
  ec.filling = disk2_flat(a, resolution, profile, extra_flux);
  ec.sigma = *ec.filling.boundary->components.front().geometry;
  return ec;
}

double chern_number(const GeometrySpec& g, const std::string& connection) {
  return std::real(
      integrate_chart(char_power(g.connection(connection), 1) * kChernNorm, g.orientation));
}

Complex todd_genus(const GeometrySpec& g, const std::string& tangent) {
  if (g.dim() % 2 != 0) throw CharacterError("'" + g.name + "' is odd-dimensional");
  return integrate_chart(todd_form(g.connection(tangent)).top(), g.orientation);
}

void validate(const EnrichedCycle& ec, double tol) {
  if (!ec.sigma.closed()) throw CharacterError("Sigma must be closed");
  if (ec.sigma.dim() % 2 == 0) throw CharacterError("Sigma must be odd-dimensional");
  if (ec.filling.dim() != ec.sigma.dim() + 1) {
    throw CharacterError("the filling must have dimension dim Sigma + 1");
  }
  if (!ec.filling.boundary || ec.filling.boundary->components.size() != 1) {
    throw CharacterError("the filling must have exactly one boundary component");
  }
  const auto& comp = ec.filling.boundary->components.front();
  if (!comp.geometry || comp.orientation != 1) {
    throw CharacterError("the filling boundary must be Sigma with its own orientation");
  }
  for (const auto& name : {ec.bundle, ec.tangent}) {
    if (!same_bundle_data(ec.sigma, *comp.geometry, name, tol)) {
      throw CharacterError("connection '" + name + "' on the filling boundary differs from Sigma");
    }
  }
  validate(ec.filling, tol);
}

Complex ch_todd_integral(const GeometrySpec& w, const std::string& bundle,
                         const std::string& tangent) {
  if (w.dim() % 2 != 0) throw CharacterError("'" + w.name + "' is odd-dimensional");
  const MixedForm integrand =
      trace(wedge(chern_character(w.connection(bundle)), todd_form(w.connection(tangent))));
  return integrate_chart(integrand.top(), w.orientation);
}

AngleValue angle_pairing(const EnrichedCycle& ec) {
  validate(ec);
  return AngleValue::reduce(ch_todd_integral(ec.filling, ec.bundle, ec.tangent));
}

EnrichedCycle gauge_transform(const EnrichedCycle& ec,
                              const std::function<double(std::span<const double>)>& phi) {
  const Connection& c = ec.filling.connection(ec.bundle);
  if (!c.has_potential()) throw CharacterError("gauge transform needs a bundle potential");
  const int r = c.rank();
  MatrixForm f(ec.filling.grid, 0, r);
  f.fill(0, [&](auto x, auto m) {
    const double v = phi(x);
    for (int i = 0; i < r; ++i) m[i * r + i] = Complex(0.0, v);
  });
  EnrichedCycle out = ec;
  out.filling.set_connection(Connection::from_potential(ec.bundle, c.potential() + exterior_d(f)));
  validate(out);
  return out;
}

FillingReport filling_independence(const EnrichedCycle& ec, const EnrichedCycle& alt) {
  if (!same_bundle_data(ec.sigma, alt.sigma, ec.bundle, 1e-8) ||
      !same_bundle_data(ec.sigma, alt.sigma, ec.tangent, 1e-8)) {
    throw CharacterError("the two fillings bound different enriched cycles");
  }
  FillingReport r;
  r.difference = angle_pairing(ec).raw - angle_pairing(alt).raw;
  r.integer = std::lround(std::real(r.difference));
  r.deviation = std::abs(r.difference - Complex(static_cast<double>(r.integer)));
  return r;
}

VariationReport variation_check(const EnrichedCycle& ec0, const EnrichedCycle& ec1,
                                const GeometrySpec& bordism, const MixedForm& c,
                                const std::string& tangent, double tol) {
  if (!bordism.boundary || bordism.boundary->components.size() != 2) {
    throw CharacterError("the bordism must have two boundary components");
  }
  if (!c.grid_ptr()->compatible(*bordism.grid)) {
    throw CharacterError("C is not sampled on the bordism grid");
  }
  const BoundaryComponent* out = nullptr;
  const BoundaryComponent* in = nullptr;
  for (const auto& comp : bordism.boundary->components) {
    (comp.orientation > 0 ? out : in) = &comp;
  }
  if (!out || !in) throw CharacterError("the bordism boundary must be Sigma1 - Sigma0");
  if (!same_bundle_data(ec1.sigma, *out->geometry, ec1.bundle, tol) ||
      !same_bundle_data(ec0.sigma, *in->geometry, ec0.bundle, tol)) {
    throw CharacterError("bordism ends do not match the enriched cycles");
  }

  VariationReport r;
  r.closedness = 0.0;
  for (int p = 0; p < c.dim(); ++p) {
    if (c.has(p)) r.closedness = std::max(r.closedness, max_norm_on_support(exterior_d(c.part(p))));
  }
  r.angle_difference = angle_pairing(ec1) - angle_pairing(ec0);
  const MixedForm integrand = trace(wedge(c, todd_form(bordism.connection(tangent))));
  r.bordism_integral = AngleValue::reduce(integrate_chart(integrand.top(), bordism.orientation));
  const Complex d = r.angle_difference.raw - r.bordism_integral.raw;
  r.residual = std::hypot(mod1_distance(std::real(d)), std::imag(d));
  return r;
}

IntegralityReport integrality_membership(const std::vector<IntegralityProbe>& probes,
                                         double tol) {
  IntegralityReport r;
  for (const auto& p : probes) {
    if (!p.probe.closed()) throw CharacterError("probe '" + p.probe.name + "' is not closed");
    const MixedForm integrand = trace(wedge(p.c, todd_form(p.probe.connection(p.tangent))));
    const Complex v = integrate_chart(integrand.top(), p.probe.orientation);
    r.values.push_back(v);
    const double dev = std::hypot(mod1_distance(std::real(v)), std::imag(v));
    r.worst = std::max(r.worst, dev);
  }
  r.member = r.worst <= tol;
  return r;
}

ZnReport zn_pairing(const ZnCycleSpec& z) {
  validate(z);
  ZnReport r;
  for (const auto& piece : z.v) r.v_integral += ch_todd_integral(piece, z.bundle, z.tangent);
  r.q_integral = ch_todd_integral(z.q, z.bundle, z.tangent);
  r.value = AngleValue::reduce(r.v_integral / static_cast<double>(z.n) - r.q_integral);
  r.order_residual = mod1_distance(z.n * std::real(r.value.value));
  return r;
}

double zn_boundary_vanishing(const ZnCycleSpec& z) {
  const ZnReport r = zn_pairing(z);
  return std::hypot(mod1_distance(std::real(r.value.value)), std::imag(r.value.value));
}

PushforwardReport pushforward_character(const GeometrySpec& total, const std::string& bundle) {
  if (!total.fibration) throw CharacterError("'" + total.name + "' carries no fibration");
  const Fibration& f = *total.fibration;
  if (f.fiber->dim() % 2 != 0) {
    throw CharacterError("odd-dimensional fibers need a spin^c structure and are not supported");
  }
  const std::string base_name = f.base_tangent + "@1";
  const MixedForm ch = chern_character(total.connection(bundle));
  const MixedForm todd_v = todd_form(total.connection(f.vertical_tangent));
  const MixedForm todd_base_up = todd_form(total.connection(base_name));
  const MixedForm todd_base = restrict_to_base(todd_base_up, f.base, f.fiber->size());

  PushforwardReport r{.variation_form = MixedForm(f.base, 1)};
  const MixedForm vc = trace(wedge(todd_v, ch));
  r.variation_form = fiber_integrate(vc, f.base, *f.fiber);

  const MixedForm lhs = wedge(todd_base, r.variation_form);
  const MixedForm rhs = fiber_integrate(wedge(todd_base_up, vc), f.base, *f.fiber);
  r.chain_residual = mixed_difference(lhs, rhs);

  r.base_route = integrate_chart(lhs.top(), total.orientation);
  r.total_space = ch_todd_integral(total, bundle, "tangent");
  if (std::abs(r.total_space - integrate_chart(rhs.top(), total.orientation)) > 1e-6 *
                                                                                 (1.0 + std::abs(r.total_space))) {
    // Fubini on the chart is exact up to round-off; anything else is a bug.
    throw CharacterError("fiber integration does not preserve the total integral: " +
                         fmt(std::abs(r.total_space - integrate_chart(rhs.top(), total.orientation))));
  }
  return r;
}

GeometrySpec pushforward_example(double a, int m, int resolution) {
  const int n = resolution > 0 ? resolution : 32;
  return product(disk2_flat(a, n), sphere2_monopole(m, n));
}

}  // namespace cwcs
