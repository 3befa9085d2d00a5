#include "cwcs/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cwcs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

GridPtr make_grid(std::vector<int> res, std::vector<bool> per) {
  return std::make_shared<const ChartGrid>(std::move(res), std::move(per));
}

int resolve(int n, int dim) { return n > 0 ? n : default_resolution(dim); }

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// Peak-one bump supported on |x - c| < w.
double bump(double x, double c, double w) {
  const double s = (x - c) / w;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double frac_distance(double x) { return std::abs(x - std::round(x)); }

// A = -2 pi i sum_a hol[a] dx_a.
MatrixForm flat_line(const GridPtr& g, const std::vector<double>& hol) {
  MatrixForm a(g, 1, 1);
  for (int ax = 0; ax < g->dim() && ax < static_cast<int>(hol.size()); ++ax) {
    if (hol[ax] == 0.0) continue;
    const Complex v = -2.0 * kPi * kI * hol[ax];
    a.fill(IndexMask{1} << ax, [&](auto, auto m) { m[0] = v; });
  }
  return a;
}

// Monopole of charge k on the (theta = pi u, phi = 2 pi v) chart:
// F = -(i k / 2) sin(theta) dtheta ^ dphi.
MatrixForm monopole_curvature(const GridPtr& g, int k) {
  MatrixForm f(g, 2, 1);
  if (k == 0) return f;
  f.fill(0b11, [&](auto x, auto m) { m[0] = -kI * (kPi * kPi * k) * std::sin(kPi * x[0]); });
  return f;
}

void add_coordinate_cycles(const ChartGrid& g, int kmin, int kmax, CycleBasis& basis) {
  const int d = g.dim();
  for (int k = kmin; k <= kmax; ++k) {
    for (IndexMask m = 0; m < (IndexMask{1} << d); ++m) {
      if (mask_degree(m) != k) continue;
      std::string label = "T[";
      for (int a = 0; a < d; ++a) {
        if (m & (IndexMask{1} << a)) label += std::to_string(a);
      }
      basis.cycles.push_back(coordinate_cycle(g, m, {}, label + "]"));
    }
  }
}

// Smooth test form, flattened at the ends of open axes so that it is smooth
// on the manifold whatever happens at coordinate-singular loci.
MatrixForm test_form(const GridPtr& g, int degree) {
  MatrixForm f(g, degree, 1);
  const int d = g->dim();
  for (IndexMask m = 0; m < (IndexMask{1} << d); ++m) {
    if (mask_degree(m) != degree) continue;
    f.fill(m, [&](auto x, auto out) {
      double v = 1.0;
      for (int a = 0; a < d; ++a) {
        if (g->periodic(a)) {
          v *= 1.0 + 0.5 * std::sin(2.0 * kPi * x[a] + 0.3 * (a + 1) + 0.7 * m);
        } else {
          v *= std::pow(std::sin(kPi * x[a]), 4) * (1.0 + 0.3 * x[a]);
        }
      }
      out[0] = v;
    });
  }
  return f;
}

IndexMask drop_axis(IndexMask m, int axis) {
  const IndexMask low = m & ((IndexMask{1} << axis) - 1);
  const IndexMask high = (m >> (axis + 1)) << axis;
  return low | high;
}

GeometrySpec boundary_circle(const GridPtr& face, double holonomy, const std::string& name) {
  GeometrySpec c;
  c.name = name;
  c.grid = face;
  c.cycles.cycles.push_back(coordinate_cycle(*face, 0b1, {}, "S1"));
  c.set_connection(Connection::from_potential("bundle", flat_line(face, {holonomy})));
  c.set_connection(Connection::trivial("tangent", face, 1));
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

bool GeometrySpec::has_connection(std::string_view name) const {
  return std::any_of(connections.begin(), connections.end(),
                     [&](const Connection& c) { return c.name() == name; });
}

const Connection& GeometrySpec::connection(std::string_view name) const {
  for (const auto& c : connections) {
    if (c.name() == name) return c;
  }
  throw GeometryError("connection_lookup",
                      "geometry '" + this->name + "' has no connection '" + std::string(name) + "'");
}

void GeometrySpec::set_connection(Connection c) {
  for (auto& existing : connections) {
    if (existing.name() == c.name()) {
      existing = std::move(c);
      return;
    }
  }
  connections.push_back(std::move(c));
}

int default_resolution(int dim) {
  switch (dim) {
    case 1: return 256;
    case 2: return 64;
    case 3: return 24;
    default: return 16;
  }
}

GeometrySpec circle(int n) {
  n = resolve(n, 1);
  GeometrySpec g;
  g.name = "circle";
  g.grid = make_grid({n}, {true});
  add_coordinate_cycles(*g.grid, 1, 1, g.cycles);
  g.set_connection(Connection::trivial("bundle", g.grid, 1));
  g.set_connection(Connection::trivial("tangent", g.grid, 1));
  return g;
}

GeometrySpec torus(int dim, int n) {
  n = resolve(n, dim);
  GeometrySpec g;
  g.name = "torus" + std::to_string(dim);
  g.grid = make_grid(std::vector<int>(dim, n), std::vector<bool>(dim, true));
  add_coordinate_cycles(*g.grid, 1, dim, g.cycles);
  g.set_connection(Connection::trivial("bundle", g.grid, 1));
  g.set_connection(Connection::trivial("tangent", g.grid, std::max(1, dim / 2)));
  return g;
}

GeometrySpec sphere2_monopole(int k, int n) {
  n = resolve(n, 2);
  GeometrySpec g;
  g.name = "sphere2_monopole(" + std::to_string(k) + ")";
  g.chart = ChartKind::Sphere;
  g.grid = make_grid({n, n}, {false, true});
  g.cycles.cycles.push_back(coordinate_cycle(*g.grid, 0b11, {}, "S2"));
  g.set_connection(Connection::from_curvature("bundle", monopole_curvature(g.grid, k)));
  g.set_connection(Connection::from_curvature("tangent", monopole_curvature(g.grid, 2)));
  return g;
}

GeometrySpec cp1_tangent(int n) {
  GeometrySpec g = sphere2_monopole(2, n);
  g.name = "cp1_tangent";
  return g;
}

double DiskProfile::operator()(double r) const {
  const double c = 1.0 - collar;
  return smooth_step(r * r / (c * c)) + bump * cwcs::bump(r, bump_center, bump_width);
}

GeometrySpec disk2_flat(double a, int n, DiskProfile profile, int extra_flux) {
  n = resolve(n, 2);
  if (!(profile.collar > 0.0 && profile.collar < 0.9)) {
    throw GeometryError("parameters", "disk collar width must lie in (0, 0.9)");
  }
  GeometrySpec g;
  g.name = "disk2_flat(" + fmt(a) + ")";
  g.chart = ChartKind::Polar;
  g.grid = make_grid({n, n}, {false, true});
  const double flux = a + extra_flux;
  MatrixForm pot(g.grid, 1, 1);
  pot.fill(0b10, [&](auto x, auto m) { m[0] = -2.0 * kPi * kI * flux * profile(x[0]); });
  g.set_connection(Connection::from_potential("bundle", std::move(pot)));
  g.set_connection(Connection::trivial("tangent", g.grid, 1));

  BoundaryInfo b;
  b.collar_width = profile.collar;
  auto face = face_grid(*g.grid, 0);
  b.components.push_back(
      {std::make_shared<GeometrySpec>(boundary_circle(face, flux, "circle")), 0, 1, 1});
  g.boundary = std::move(b);
  return g;
}

GeometrySpec cylinder_bordism(double a0, double a1, int n) {
  n = resolve(n, 2);
  GeometrySpec g;
  g.name = "cylinder(" + fmt(a0) + "," + fmt(a1) + ")";
  g.grid = make_grid({n, n}, {false, true});
  constexpr double collar = 0.2;
  MatrixForm pot(g.grid, 1, 1);
  pot.fill(0b10, [&](auto x, auto m) {
    const double s = smooth_step((x[0] - collar) / (1.0 - 2.0 * collar));
    m[0] = -2.0 * kPi * kI * (a0 + s * (a1 - a0));
  });
  g.set_connection(Connection::from_potential("bundle", std::move(pot)));
  g.set_connection(Connection::trivial("tangent", g.grid, 1));
  BoundaryInfo b;
  b.collar_width = collar;
  auto face = face_grid(*g.grid, 0);
  b.components.push_back(
      {std::make_shared<GeometrySpec>(boundary_circle(face, a1, "circle(a1)")), 0, 1, 1});
  b.components.push_back(
      {std::make_shared<GeometrySpec>(boundary_circle(face, a0, "circle(a0)")), 0, 0, -1});
  g.boundary = std::move(b);
  return g;
}

GeometrySpec product(const GeometrySpec& g1, const GeometrySpec& g2) {
  GeometrySpec g;
  g.name = "product(" + g1.name + "," + g2.name + ")";
  g.chart = ChartKind::Product;
  g.grid = product_grid(*g1.grid, *g2.grid);
  g.orientation = g1.orientation * g2.orientation;
  const int d1 = g1.dim();

  // Homology of a product: cycles of each factor times a point or a cycle of
  // the other. Points are node 0.
  auto cross = [&](const Cycle* c1, const Cycle* c2) {
    Cycle c;
    c.label = (c1 ? c1->label : "pt") + "x" + (c2 ? c2->label : "pt");
    c.dim = (c1 ? c1->dim : 0) + (c2 ? c2->dim : 0);
    const std::vector<CycleTerm> pt{{0, 0, 1.0}};
    const auto& t1 = c1 ? c1->terms : pt;
    const auto& t2 = c2 ? c2->terms : pt;
    c.terms.reserve(t1.size() * t2.size());
    for (const auto& a : t1) {
      for (const auto& b : t2) {
        c.terms.push_back(
            {a.node * g2.grid->size() + b.node, a.mask | (b.mask << d1), a.weight * b.weight});
      }
    }
    return c;
  };
  if (g1.closed() && g2.closed()) {
    for (const auto& c1 : g1.cycles.cycles) g.cycles.cycles.push_back(cross(&c1, nullptr));
    for (const auto& c2 : g2.cycles.cycles) g.cycles.cycles.push_back(cross(nullptr, &c2));
    for (const auto& c1 : g1.cycles.cycles) {
      for (const auto& c2 : g2.cycles.cycles) g.cycles.cycles.push_back(cross(&c1, &c2));
    }
  }

  for (const auto& c : g1.connections) {
    g.set_connection(pull_back_first(c, g.grid).renamed(c.name() + "@1"));
  }
  for (const auto& c : g2.connections) {
    g.set_connection(pull_back_second(c, g.grid).renamed(c.name() + "@2"));
  }
  if (g.has_connection("tangent@1") && g.has_connection("tangent@2")) {
    g.set_connection(
        direct_sum(g.connection("tangent@1"), g.connection("tangent@2")).renamed("tangent"));
  }
  if (g.has_connection("bundle@1") && g.has_connection("bundle@2")) {
    g.set_connection(
        tensor_product(g.connection("bundle@1"), g.connection("bundle@2")).renamed("bundle"));
  }

  if (g1.boundary && g2.boundary) {
    throw GeometryError("product", "corners (both factors with boundary) are not supported");
  }
  if (g1.boundary) {
    BoundaryInfo b;
    b.collar_width = g1.boundary->collar_width;
    for (const auto& comp : g1.boundary->components) {
      if (!comp.geometry) continue;
      b.components.push_back({std::make_shared<GeometrySpec>(product(*comp.geometry, g2)),
                              comp.normal_axis, comp.side, comp.orientation});
    }
    g.boundary = std::move(b);
  } else if (g2.boundary) {
    BoundaryInfo b;
    b.collar_width = g2.boundary->collar_width;
    const int sign = (d1 % 2) ? -1 : 1;
    for (const auto& comp : g2.boundary->components) {
      if (!comp.geometry) continue;
      b.components.push_back({std::make_shared<GeometrySpec>(product(g1, *comp.geometry)),
                              comp.normal_axis < 0 ? -1 : comp.normal_axis + d1, comp.side,
                              sign * comp.orientation});
    }
    g.boundary = std::move(b);
  }

  Fibration f;
  f.base = g1.grid;
  f.fiber = g2.grid;
  f.vertical_tangent = "tangent@2";
  f.base_tangent = "tangent";
  g.fibration = std::move(f);
  return g;
}

GeometrySpec hopf_s3_over_s2(int n, HopfPatch patch) {
  n = resolve(n, 3);
  if (!(0.0 < patch.eta0 && patch.eta0 < patch.eta1 && patch.eta1 < kPi / 2)) {
    throw GeometryError("parameters", "Hopf patch needs 0 < eta0 < eta1 < pi/2");
  }
  GeometrySpec g;
  g.name = "hopf_s3_over_s2";
  g.grid = make_grid({n, n, n}, {false, true, true});
  // A coordinate patch: it has boundary, but no boundary data is attached.
  g.boundary = BoundaryInfo{};
  return g;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    if (c != ' ') cur += c;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& ctx) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) {
    throw GeometryError("parameters", "bad numeric argument '" + s + "' in " + ctx);
  }
  return v;
}

int parse_integer(const std::string& s, const std::string& ctx) {
  const double v = parse_number(s, ctx);
  if (v != std::round(v)) throw GeometryError("parameters", ctx + " needs an integer, got " + s);
  return static_cast<int>(v);
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"circle",     "torus2",     "torus4",          "sphere2_monopole", "cp1_tangent",
          "disk2_flat", "product",    "hopf_s3_over_s2", "zn_pair"};
}

GeometrySpec catalog(std::string_view full, const CatalogParams& params) {
  std::string name(full);
  std::vector<std::string> args;
  if (auto open = name.find('('); open != std::string::npos) {
    if (name.back() != ')') throw GeometryError("catalog", "unbalanced parentheses in " + name);
    args = split_args(std::string_view(name).substr(open + 1, name.size() - open - 2));
    name = name.substr(0, open);
  }
  CatalogParams p = params;
  const int res = p.resolution;
  auto nargs = [&](std::size_t max) {
    if (args.size() > max) throw GeometryError("catalog", "too many arguments for " + name);
  };
  if (name == "circle") {
    nargs(0);
    return circle(res);
  }
  if (name == "torus2" || name == "torus4") {
    nargs(0);
    return torus(name == "torus2" ? 2 : 4, res);
  }
  if (name == "sphere2_monopole") {
    nargs(1);
    if (!args.empty()) p.k = parse_integer(args[0], name);
    return sphere2_monopole(p.k, res);
  }
  if (name == "cp1_tangent") {
    nargs(0);
    return cp1_tangent(res);
  }
  if (name == "disk2_flat") {
    nargs(1);
    if (!args.empty()) p.a = parse_number(args[0], name);
    return disk2_flat(p.a, res);
  }
  if (name == "hopf_s3_over_s2" || name == "hopf") {
    nargs(0);
    return hopf_s3_over_s2(res);
  }
  if (name == "zn_pair") {
    nargs(2);
    if (args.size() > 0) p.n = parse_integer(args[0], name);
    if (args.size() > 1) p.k = parse_integer(args[1], name);
    return zn_pair(p.n, p.k, res).v.front();
  }
  if (name == "product") {
    if (args.size() != 2) throw GeometryError("catalog", "product needs two geometries");
    return product(catalog(args[0], params), catalog(args[1], params));
  }
  throw GeometryError("catalog", "unknown geometry '" + std::string(full) + "'");
}

// ---------------------------------------------------------------------------

GridPtr face_grid(const ChartGrid& g, int axis) {
  std::vector<int> res;
  std::vector<bool> per;
  for (int a = 0; a < g.dim(); ++a) {
    if (a == axis) continue;
    res.push_back(g.resolution(a));
    per.push_back(g.periodic(a));
  }
  if (res.empty()) throw GeometryError("face", "cannot take a face of a 1-dimensional chart");
  return make_grid(std::move(res), std::move(per));
}

MatrixForm restrict_to_face(const MatrixForm& f, int axis, int side, const GridPtr& face) {
  const ChartGrid& g = f.grid();
  if (g.periodic(axis)) throw GeometryError("face", "periodic axes have no faces");
  const std::size_t stride = g.stride(axis);
  const int n = g.resolution(axis);
  const int target = side ? n - 1 : 0;
  if (face->size() * n != g.size()) throw GeometryError("face", "face grid does not match");
  MatrixForm out(face, f.degree(), f.rank());
  const std::size_t bo = f.block();
  const IndexMask bit = IndexMask{1} << axis;
  for (IndexMask m : f.masks()) {
    if (m & bit) continue;
    auto src = f.component(m);
    auto dst = out.component_mut(drop_axis(m, axis));
    for (std::size_t q = 0; q < face->size(); ++q) {
      const std::size_t hi = q / stride;
      const std::size_t lo = q % stride;
      const std::size_t node = (hi * n + target) * stride + lo;
      std::copy_n(&src[node * bo], bo, &dst[q * bo]);
    }
  }
  return out;
}

double collar_residual(const MatrixForm& a, int axis, int side, double width) {
  const ChartGrid& g = a.grid();
  const std::size_t stride = g.stride(axis);
  const int n = g.resolution(axis);
  const int target = side ? n - 1 : 0;
  const std::size_t bo = a.block();
  const IndexMask bit = IndexMask{1} << axis;
  double worst = 0.0;
  for (IndexMask m : a.masks()) {
    auto c = a.component(m);
    for (std::size_t node = 0; node < g.size(); ++node) {
      const int i = g.axis_index(node, axis);
      const double x = g.coord(axis, i);
      const double dist = side ? 1.0 - x : x;
      if (dist > width + 1e-12) continue;
      const std::size_t face_node = node + (static_cast<std::ptrdiff_t>(target) - i) * stride;
      for (std::size_t k = 0; k < bo; ++k) {
        const Complex v = c[node * bo + k];
        const double r = (m & bit) ? std::abs(v) : std::abs(v - c[face_node * bo + k]);
        worst = std::max(worst, r);
      }
    }
  }
  return worst;
}

namespace {

void check_boundary(const GeometrySpec& g, double tol) {
  const auto& info = *g.boundary;
  for (const auto& comp : info.components) {
    if (!comp.geometry || comp.normal_axis < 0) continue;
    const GeometrySpec& b = *comp.geometry;
    auto face = b.grid;
    for (const auto& cb : b.connections) {
      if (!cb.has_potential() || !g.has_connection(cb.name())) continue;
      const Connection& cw = g.connection(cb.name());
      if (!cw.has_potential()) continue;
      const MatrixForm& aw = cw.potential();
      if (!face->compatible(*face_grid(*g.grid, comp.normal_axis))) {
        throw GeometryError("boundary_restriction",
                            "component '" + b.name + "' grid does not match the face");
      }
      const MatrixForm diff =
          restrict_to_face(aw, comp.normal_axis, comp.side, face) - cb.potential();
      if (diff.max_norm() > tol) {
        // Rank one: accept a gauge transformation of integral winding.
        bool gauge = cb.rank() == 1 && exterior_d(diff).max_norm() < tol;
        for (const auto& cyc : b.cycles.cycles) {
          if (!gauge) break;
          if (cyc.dim != 1) continue;
          gauge = frac_distance(std::real(period(diff * kChernNorm, cyc))) < tol &&
                  std::abs(std::imag(period(diff * kChernNorm, cyc))) < tol;
        }
        if (!gauge) {
          throw GeometryError("boundary_restriction",
                              "connection '" + cb.name() + "' of '" + g.name +
                                  "' does not restrict to the data on '" + b.name + "'");
        }
      }
      const double collar = collar_residual(aw, comp.normal_axis, comp.side, info.collar_width);
      if (collar > tol) {
        throw GeometryError("collar_product", "connection '" + cw.name() + "' of '" + g.name +
                                                  "' varies across the collar by " + fmt(collar));
      }
    }
  }
}

}  // namespace

void validate(const GeometrySpec& g, double tol) {
  if (!g.grid) throw GeometryError("grid", "geometry '" + g.name + "' has no grid");
  double total = 0.0;
  for (double w : g.grid->quad_weight()) {
    if (!(w >= 0.0)) {
      throw GeometryError("quad_weight_nonnegative",
                          "geometry '" + g.name + "' has a negative quadrature weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw GeometryError("quad_weight_positive", "geometry '" + g.name + "' has zero total weight");
  }
  if (g.orientation != 1 && g.orientation != -1) {
    throw GeometryError("orientation", "orientation must be +1 or -1");
  }
  for (const auto& c : g.connections) {
    if (!c.grid_ptr()->compatible(*g.grid)) {
      throw GeometryError("connection_grid",
                          "connection '" + c.name() + "' lives on a different grid");
    }
  }
  if (g.closed()) {
    const double s = std::abs(integrate_chart(exterior_d(test_form(g.grid, g.dim() - 1))));
    if (s > tol) {
      throw GeometryError("stokes_closed",
                          "integral of an exact form over '" + g.name + "' is " + fmt(s));
    }
  }
  for (const auto& c : g.cycles.cycles) {
    if (c.dim < 1) continue;
    for (const auto& t : c.terms) {
      if (t.node >= g.grid->size() || mask_degree(t.mask) != c.dim) {
        throw GeometryError("cycle_terms", "cycle '" + c.label + "' is malformed");
      }
    }
    const double p = std::abs(period(exterior_d(test_form(g.grid, c.dim - 1)), c));
    if (p > tol) {
      throw GeometryError("cycle_exactness",
                          "exact form has period " + fmt(p) + " on cycle '" + c.label + "'");
    }
  }
  if (g.boundary) check_boundary(g, tol);
  if (g.fibration) {
    const auto& f = *g.fibration;
    if (f.base->size() * f.fiber->size() != g.grid->size() ||
        f.base->dim() + f.fiber->dim() != g.dim()) {
      throw GeometryError("fibration", "base x fiber does not match the total chart");
    }
  }
  if (g.frame) {
    const int m = g.frame->size();
    if (g.frame->vertical < 1 || g.frame->horizontal < 1 ||
        static_cast<int>(g.frame->bracket.size()) != m * m * m) {
      throw GeometryError("frame", "bracket table needs (vertical + horizontal)^3 entries");
    }
  }
}

// ---------------------------------------------------------------------------
// Z/n examples.

namespace {

// Unit disk minus holes; chart square [-L, L]^2.
struct HoledDisk {
  static constexpr double L = 1.1;
  std::vector<std::array<double, 2>> centers;
  double hole_radius = 0.12;
  double p = 0.0;  // winding parameter of A around every hole

  static double to_xy(double u) { return -L + 2.0 * L * u; }

  bool inside(double x, double y) const {
    if (x * x + y * y > 1.0) return false;
    for (const auto& c : centers) {
      const double dx = x - c[0];
      const double dy = y - c[1];
      if (dx * dx + dy * dy < hole_radius * hole_radius) return false;
    }
    return true;
  }

  // (i/2pi) A = sum_j (p / 2 pi) dphi_j, as (x, y) components.
  std::array<double, 2> normalized_potential(double x, double y) const {
    std::array<double, 2> a{0.0, 0.0};
    for (const auto& c : centers) {
      const double dx = x - c[0];
      const double dy = y - c[1];
      const double r2 = dx * dx + dy * dy;
      a[0] += p / (2.0 * kPi) * (-dy / r2);
      a[1] += p / (2.0 * kPi) * (dx / r2);
    }
    return a;
  }

  // Holonomy parameter along a circle; +1 = counter-clockwise.
  double loop(double cx, double cy, double r, int orientation) const {
    constexpr int m = 4096;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * kPi * i / m;
      const double x = cx + r * std::cos(t);
      const double y = cy + r * std::sin(t);
      const auto a = normalized_potential(x, y);
      s += a[0] * (-r * std::sin(t)) + a[1] * (r * std::cos(t));
    }
    return orientation * s * (2.0 * kPi / m);
  }
};

HoledDisk holed_disk(int n, int k) {
  HoledDisk h;
  const int holes = n - 1;
  for (int j = 0; j < holes; ++j) {
    const double t = 2.0 * kPi * j / holes;
    h.centers.push_back({0.5 * std::cos(t), 0.5 * std::sin(t)});
  }
  if (holes > 1) h.hole_radius = std::min(0.12, 0.3 * std::sin(kPi / holes));
  h.p = -static_cast<double>(k) / n;
  return h;
}

}  // namespace

ZnCycleSpec zn_pair(int n, int k, int resolution) {
  if (n < 2) throw GeometryError("parameters", "zn_pair needs n >= 2");
  if (n > 12) throw GeometryError("parameters", "zn_pair supports n <= 12");
  const int res = resolve(resolution, 2);
  const HoledDisk h = holed_disk(n, k);
  const double hol = static_cast<double>(k) / n;

  ZnCycleSpec z;
  z.n = n;
  z.beta_v = boundary_circle(make_grid({res}, {true}), hol, "beta_v");

  GeometrySpec v;
  v.name = "zn_pair(" + std::to_string(n) + "," + std::to_string(k) + ").V";
  const ChartGrid square({res, res}, {false, false});
  v.grid = std::make_shared<const ChartGrid>(square.masked([&](std::span<const double> x) {
    return h.inside(HoledDisk::to_xy(x[0]), HoledDisk::to_xy(x[1]));
  }));
  // The flat line has no global gauge on the square (its potential is
  // singular inside the holes), so it is carried by its curvature, which is
  // zero; the holonomies are recorded from the closed-form potential.
  v.set_connection(Connection::from_curvature("bundle", MatrixForm(v.grid, 2, 1)));
  v.set_connection(Connection::trivial("tangent", v.grid, 1));
  BoundaryInfo b;
  auto beta = std::make_shared<GeometrySpec>(z.beta_v);
  for (int j = 0; j <= n - 1; ++j) b.components.push_back({beta, -1, 1, 1});
  v.boundary = std::move(b);
  z.v.push_back(std::move(v));

  z.v_boundary.push_back({"outer", h.loop(0.0, 0.0, 1.0, +1)});
  for (std::size_t j = 0; j < h.centers.size(); ++j) {
    z.v_boundary.push_back({"hole" + std::to_string(j),
                            h.loop(h.centers[j][0], h.centers[j][1], h.hole_radius, -1)});
  }

  z.q = disk2_flat(hol, res);
  z.q.name = "zn_pair(" + std::to_string(n) + "," + std::to_string(k) + ").Q";
  return z;
}

ZnCycleSpec zn_bounding(int n, double a, int resolution) {
  if (n < 2) throw GeometryError("parameters", "zn_bounding needs n >= 2");
  const int res = resolve(resolution, 2);
  ZnCycleSpec z;
  z.n = n;
  z.beta_v = boundary_circle(make_grid({res}, {true}), a, "beta_v");
  for (int i = 0; i < n; ++i) {
    DiskProfile prof;
    prof.collar = 0.15 + 0.05 * (i % 3);
    prof.bump = 0.3 * i;
    GeometrySpec d = disk2_flat(a, res, prof);
    d.name = "copy" + std::to_string(i);
    z.v_boundary.push_back({"copy" + std::to_string(i), a});
    z.v.push_back(std::move(d));
  }
  z.q = disk2_flat(a, res);
  z.q.name = "Q";
  return z;
}

namespace {

// Compactly supported interior 1-forms used to deform enrichments.
MatrixForm interior_perturbation(const GeometrySpec& g, double scale, int variant) {
  MatrixForm beta(g.grid, 1, 1);
  if (g.chart == ChartKind::Polar) {
    const double c = variant ? 0.55 : 0.45;
    beta.fill(0b10, [&](auto x, auto m) { m[0] = -2.0 * kPi * kI * scale * bump(x[0], c, 0.2); });
    return beta;
  }
  if (g.chart == ChartKind::Flat && g.dim() == 2 && g.grid->has_mask()) {
    constexpr double two_l = 2.0 * HoledDisk::L;
    beta.fill(variant ? 0b01 : 0b10, [&](auto x, auto m) {
      const double X = HoledDisk::to_xy(x[0]);
      const double Y = HoledDisk::to_xy(x[1]);
      const double r = std::sqrt(X * X + Y * Y);
      m[0] = -kI * scale * bump(r, 0.0, 0.25) * (variant ? -Y : X) * two_l;
    });
    return beta;
  }
  throw GeometryError("deformation", "no interior perturbation for '" + g.name + "'");
}

GeometrySpec perturb(const GeometrySpec& g, double t) {
  GeometrySpec out = g;
  int variant = 0;
  for (const char* name : {"bundle", "tangent"}) {
    const Connection& c = g.connection(name);
    const MatrixForm beta = interior_perturbation(g, t * (variant ? 0.2 : 0.3), variant);
    if (c.has_potential() && !c.analytic_curvature()) {
      out.set_connection(Connection::from_potential(name, c.potential() + beta));
    } else {
      out.set_connection(Connection::from_curvature(name, curvature(c) + exterior_d(beta)));
    }
    ++variant;
  }
  return out;
}

}  // namespace

ZnCycleSpec deform_enrichment(const ZnCycleSpec& z, double t) {
  ZnCycleSpec out = z;
  for (auto& piece : out.v) piece = perturb(piece, t);
  out.q = perturb(z.q, t);
  return out;
}

ZnCycleSpec multiply(const GeometrySpec& u, const ZnCycleSpec& z) {
  if (!u.closed()) throw GeometryError("parameters", "the multiplying factor must be closed");
  auto lift = [&](const GeometrySpec& g) {
    GeometrySpec p = product(u, g);
    p.set_connection(p.connection(z.bundle + "@2").renamed(z.bundle));
    if (p.boundary) {
      for (auto& comp : p.boundary->components) {
        auto b = std::make_shared<GeometrySpec>(*comp.geometry);
        b->set_connection(b->connection(z.bundle + "@2").renamed(z.bundle));
        comp.geometry = std::move(b);
      }
    }
    return p;
  };
  ZnCycleSpec out;
  out.n = z.n;
  for (const auto& piece : z.v) out.v.push_back(lift(piece));
  out.v_boundary = z.v_boundary;
  out.beta_v = lift(z.beta_v);
  out.q = lift(z.q);
  out.bundle = z.bundle;
  out.tangent = z.tangent;
  return out;
}

void validate(const ZnCycleSpec& z, double tol) {
  if (static_cast<int>(z.v_boundary.size()) != z.n) {
    throw GeometryError("boundary_count", "V has " + std::to_string(z.v_boundary.size()) +
                                              " boundary components, expected " +
                                              std::to_string(z.n));
  }
  // On U x beta V the circle cycle is pt x c.
  auto circle_cycle = [](const GeometrySpec& g) {
    const Cycle* found = nullptr;
    for (const auto& c : g.cycles.cycles) {
      if (c.dim != 1) continue;
      if (!found || c.label.rfind("ptx", 0) == 0) found = &c;
    }
    if (!found) throw GeometryError("boundary_identification", "'" + g.name + "' has no 1-cycle");
    return found;
  };
  double beta_hol = 0.0;
  const Connection& cb = z.beta_v.connection(z.bundle);
  if (cb.has_potential()) {
    beta_hol = std::real(period(cb.potential() * kChernNorm, *circle_cycle(z.beta_v)));
  }
  for (const auto& b : z.v_boundary) {
    if (frac_distance(b.holonomy - beta_hol) > tol) {
      throw GeometryError("boundary_identification",
                          "component '" + b.label + "' has holonomy " + fmt(b.holonomy) +
                              ", beta V has " + fmt(beta_hol));
    }
  }
  if (z.q.boundary) {
    for (const auto& comp : z.q.boundary->components) {
      const Connection& c = comp.geometry->connection(z.bundle);
      const double h = std::real(
          period(c.potential() * kChernNorm, *circle_cycle(*comp.geometry)));
      if (frac_distance(h - beta_hol) > tol) {
        throw GeometryError("boundary_identification",
                            "Q boundary holonomy " + fmt(h) + " differs from beta V");
      }
    }
  }
  for (const auto& piece : z.v) validate(piece, tol);
  validate(z.q, tol);
}

}  // namespace cwcs
