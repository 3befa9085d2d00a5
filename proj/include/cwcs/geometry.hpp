#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwcs/connection.hpp"
#include "cwcs/cycles.hpp"
#include "cwcs/form.hpp"

namespace cwcs {

class GeometryError : public std::runtime_error {
 public:
  GeometryError(std::string check, const std::string& what)
      : std::runtime_error(check + ": " + what), check_(std::move(check)) {}
  const std::string& check() const { return check_; }

 private:
  std::string check_;
};

/// How the unit chart maps to the manifold. Only used to pick smooth test
/// forms and to interpret config connection kinds.
enum class ChartKind {
  Flat,     // torus / box coordinates
  Sphere,   // u -> theta = pi u (open), v -> phi = 2 pi v
  Polar,    // u -> r (open), v -> angle / 2 pi
  Product,  // tensor product of two catalog charts
};

struct GeometrySpec;

/// Boundary component. Coordinate faces carry (normal_axis, side); masked
/// charts have curved boundaries and set normal_axis = -1.
struct BoundaryComponent {
  std::shared_ptr<const GeometrySpec> geometry;
  int normal_axis = -1;
  int side = 1;
  /// +1 when the induced (outward-normal-first) orientation agrees with the
  /// component geometry's own orientation.
  int orientation = 1;
};

struct BoundaryInfo {
  std::vector<BoundaryComponent> components;
  double collar_width = 0.0;
};

/// Product fibration: total chart = base axes followed by fiber axes.
struct Fibration {
  GridPtr base;
  std::shared_ptr<const ChartGrid> fiber;
  std::string vertical_tangent;  // connection name on the total space
  std::string base_tangent;      // connection name on the base geometry
};

/// Constant structure constants of an orthonormal frame, as read from a
/// config: bracket[(a * m + b) * m + c] = <[e_a, e_b], e_c>. The first
/// `vertical` fields are vertical.
struct BracketTable {
  int vertical = 0;
  int horizontal = 0;
  std::vector<double> bracket;
  int size() const { return vertical + horizontal; }
};

struct GeometrySpec {
  std::string name;
  GridPtr grid;
  ChartKind chart = ChartKind::Flat;
  int orientation = 1;
  CycleBasis cycles;
  std::optional<BoundaryInfo> boundary;
  std::optional<Fibration> fibration;
  std::optional<BracketTable> frame;
  std::vector<Connection> connections;

  int dim() const { return grid->dim(); }
  bool closed() const { return !boundary.has_value(); }
  bool has_connection(std::string_view name) const;
  const Connection& connection(std::string_view name) const;
  void set_connection(Connection c);
};

/// Resolution used when a builder is given n <= 0.
int default_resolution(int dim);

GeometrySpec circle(int n = 0);
GeometrySpec torus(int dim, int n = 0);
/// S^2 with "bundle" = monopole of charge k and "tangent" = the charge-2 line
/// (the holomorphic tangent bundle of CP^1).
GeometrySpec sphere2_monopole(int k, int n = 0);
GeometrySpec cp1_tangent(int n = 0);

/// Radial profile rho(r): flat at r = 0, identically 1 for r >= 1 - collar.
struct DiskProfile {
  double collar = 0.2;
  /// Compactly supported interior bump added to the profile (zero at both ends).
  double bump = 0.0;
  double bump_center = 0.45;
  double bump_width = 0.2;
  double operator()(double r) const;
};

/// Polar disk with "bundle" A = -2 pi i (a + m) rho(r) dv, m = extra_flux:
/// boundary holonomy a mod 1, total flux a + m, trivial flat "tangent".
GeometrySpec disk2_flat(double a, int n = 0, DiskProfile profile = {}, int extra_flux = 0);

/// Cylinder [0,1]_s x S^1 with A = -2 pi i (a + s (a1 - a)) dv; boundary
/// {s=1} minus {s=0}.
GeometrySpec cylinder_bordism(double a0, double a1, int n = 0);

/// Product chart with pulled-back connections; "tangent" is the direct sum of
/// the factor tangents when both exist. Fibration: g1 base, g2 fiber.
GeometrySpec product(const GeometrySpec& g1, const GeometrySpec& g2);

/// Coordinate patch of S^3 in Hopf coordinates (eta open on [eta0, eta1],
/// xi1 = 2 pi v, xi2 = 2 pi w). The frame lives in the adiabatic module.
struct HopfPatch {
  double eta0 = 0.3;
  double eta1 = 1.2;
};
GeometrySpec hopf_s3_over_s2(int n = 0, HopfPatch patch = {});

struct CatalogParams {
  int k = 1;
  int n = 3;
  double a = 0.25;
  int resolution = 0;
};

/// Names: circle, torus2, torus4, sphere2_monopole, cp1_tangent, disk2_flat,
/// hopf_s3_over_s2, zn_pair (returns V). "product(a,b)" composes names.
GeometrySpec catalog(std::string_view name, const CatalogParams& params = {});
std::vector<std::string> catalog_names();

// ---------------------------------------------------------------------------
// Z/n-manifolds.

/// Boundary circle of a holed chart, with the analytic holonomy parameter
/// (i/2pi) * oint A in the induced orientation.
struct CurvedBoundary {
  std::string label;
  double holonomy = 0.0;
};

struct ZnCycleSpec {
  int n = 2;
  std::vector<GeometrySpec> v;  // disjoint pieces of V
  std::vector<CurvedBoundary> v_boundary;
  GeometrySpec beta_v;
  GeometrySpec q;
  std::string bundle = "bundle";
  std::string tangent = "tangent";
};

/// V = unit disk minus n-1 holes carrying a flat line with boundary holonomy
/// k/n on every component; Q = polar disk of flux k/n.
ZnCycleSpec zn_pair(int n, int k, int resolution = 0);

/// A Z/n-boundary: V = n disks, each a filling of beta V with the same
/// boundary data (profiles may differ), Q = the first of them.
ZnCycleSpec zn_bounding(int n, double a, int resolution = 0);

/// Adds a compactly supported interior perturbation of size t to the bundle
/// and tangent connections of every piece of V and of Q.
ZnCycleSpec deform_enrichment(const ZnCycleSpec& z, double t);

/// U x (V, beta V): every piece of V and Q is multiplied by U.
ZnCycleSpec multiply(const GeometrySpec& u, const ZnCycleSpec& z);

void validate(const ZnCycleSpec& z, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Boundary restriction and validation.

/// Chart with `axis` removed.
GridPtr face_grid(const ChartGrid& g, int axis);
/// Pull-back to the face {x_axis = side}: tangential components at face nodes.
MatrixForm restrict_to_face(const MatrixForm& f, int axis, int side, const GridPtr& face);

/// Max |A(x) - A(x projected to the face)| and |A_normal| over the collar.
double collar_residual(const MatrixForm& a, int axis, int side, double width);

/// Throws GeometryError naming the failed check.
void validate(const GeometrySpec& g, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Config files.

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

GeometrySpec load_geometry(std::string_view text);
GeometrySpec load_geometry_file(const std::string& path);

}  // namespace cwcs
