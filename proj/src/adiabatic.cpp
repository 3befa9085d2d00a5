#include "cwcs/adiabatic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace cwcs {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Mat = Eigen::MatrixXd;

std::size_t cube(int m) { return static_cast<std::size_t>(m) * m * m; }

// (M_a)_{cb} = G_abc: the matrix of nabla_{e_a} acting on frame coefficients.
Mat frame_matrix(const ConnectionTensor& t, std::size_t node, int a) {
  Mat out(t.m, t.m);
  for (int b = 0; b < t.m; ++b) {
    for (int c = 0; c < t.m; ++c) out(c, b) = t.at(node, a, b, c);
  }
  return out;
}

Mat chart_fields(const SubmersionFrame& f, std::size_t node) {
  const int m = f.size();
  const int d = f.grid->dim();
  Mat e(d, m);
  for (int a = 0; a < m; ++a) {
    for (int i = 0; i < d; ++i) e(i, a) = f.field[(node * m + a) * d + i];
  }
  return e;
}

Mat chart_metric(const SubmersionFrame& f, std::size_t node) {
  const int d = f.grid->dim();
  Mat g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = f.metric[(node * d + i) * d + j];
  }
  return g;
}

std::vector<double> lambda_weights(const SubmersionFrame& f, double lambda) {
  std::vector<double> w(f.size(), 1.0);
  for (int a = f.vertical; a < f.size(); ++a) w[a] = lambda;
  return w;
}

SubmersionFrame blank_frame(std::string name, GridPtr grid, int vertical, int horizontal) {
  SubmersionFrame f;
  f.name = std::move(name);
  f.grid = std::move(grid);
  f.vertical = vertical;
  f.horizontal = horizontal;
  f.bracket.assign(f.grid->size() * cube(f.size()), 0.0);
  return f;
}

void set_bracket(SubmersionFrame& f, std::size_t node, int a, int b, int c, double v) {
  const std::size_t m = f.size();
  f.bracket[((node * m + a) * m + b) * m + c] = v;
  f.bracket[((node * m + b) * m + a) * m + c] = -v;
}

struct HopfChart {
  double eta0, len;
  double eta(const ChartGrid& g, std::size_t node) const {
    return eta0 + len * g.coord(0, g.axis_index(node, 0));
  }
};

// Chart fields and metric for fields given in (d_eta, d_xi1, d_xi2) components.
void set_hopf_fields(SubmersionFrame& f, const HopfChart& h,
                     const std::function<void(double eta, double psi, double (*)[3])>& comps) {
  const std::size_t n = f.grid->size();
  f.field.assign(n * 9, 0.0);
  f.metric.assign(n * 9, 0.0);
  const double scale[3] = {1.0 / h.len, 1.0 / (2 * kPi), 1.0 / (2 * kPi)};
  for (std::size_t node = 0; node < n; ++node) {
    const double eta = h.eta(*f.grid, node);
    const double psi = 2 * kPi * (f.grid->coord(1, f.grid->axis_index(node, 1)) +
                                  f.grid->coord(2, f.grid->axis_index(node, 2)));
    double e[3][3];
    comps(eta, psi, e);
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i < 3; ++i) f.field[(node * 3 + a) * 3 + i] = e[a][i] * scale[i];
    }
    const double diag[3] = {h.len * h.len, std::pow(2 * kPi * std::cos(eta), 2),
                            std::pow(2 * kPi * std::sin(eta), 2)};
    for (int i = 0; i < 3; ++i) f.metric[(node * 3 + i) * 3 + i] = diag[i];
  }
}

bool near_open_face(const ChartGrid& g, std::size_t node, int rows) {
  for (int i = 0; i < g.dim(); ++i) {
    if (g.periodic(i)) continue;
    const int k = g.axis_index(node, i);
    if (k < rows || k >= g.resolution(i) - rows) return true;
  }
  return false;
}

double weighted_max(const ChartGrid& g, const std::vector<double>& per_node, int skip_rows = 0) {
  double worst = 0.0;
  const auto w = g.quad_weight();
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (w[node] > 0.0 && !near_open_face(g, node, skip_rows)) worst = std::max(worst, per_node[node]);
  }
  return worst;
}

// d/dx_i of every table entry: out[i][node * block + k].
std::vector<std::vector<Complex>> chart_derivatives(const ChartGrid& g,
                                                    const std::vector<double>& table,
                                                    std::size_t block) {
  std::vector<Complex> in(table.begin(), table.end());
  std::vector<std::vector<Complex>> out(g.dim(), std::vector<Complex>(in.size()));
  for (int i = 0; i < g.dim(); ++i) g.differentiate(i, in, out[i], block);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Frames.

SubmersionFrame hopf_frame(int n, HopfPatch patch) {
  const GeometrySpec g = hopf_s3_over_s2(n, patch);
  SubmersionFrame f = blank_frame("hopf", g.grid, 1, 2);
  const HopfChart h{patch.eta0, patch.eta1 - patch.eta0};
  f.base_bracket.assign(f.grid->size() * 8, 0.0);
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    const double cot2 = 1.0 / std::tan(2.0 * h.eta(*f.grid, node));
    // [E1, E2] = 2 V - 2 cot(2 eta) E2; the base frame (2 d_theta,
    // (2 / sin theta) d_phi) on the radius-1/2 sphere has the same
    // horizontal part.
    set_bracket(f, node, 1, 2, 0, 2.0);
    set_bracket(f, node, 1, 2, 2, -2.0 * cot2);
    f.base_bracket[node * 8 + 0 * 4 + 1 * 2 + 1] = -2.0 * cot2;
    f.base_bracket[node * 8 + 1 * 4 + 0 * 2 + 1] = 2.0 * cot2;
  }
  set_hopf_fields(f, h, [](double eta, double, double (*e)[3]) {
    const double rows[3][3] = {{0, 1, 1}, {1, 0, 0}, {0, std::tan(eta), -1.0 / std::tan(eta)}};
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i < 3; ++i) e[a][i] = rows[a][i];
    }
  });
  return f;
}

SubmersionFrame hopf_left_invariant_frame(int n, HopfPatch patch) {
  const GeometrySpec g = hopf_s3_over_s2(n, patch);
  SubmersionFrame f = blank_frame("hopf_left_invariant", g.grid, 1, 2);
  f.special = false;
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    set_bracket(f, node, 0, 1, 2, -2.0);
    set_bracket(f, node, 1, 2, 0, -2.0);
    set_bracket(f, node, 2, 0, 1, -2.0);
  }
  const HopfChart h{patch.eta0, patch.eta1 - patch.eta0};
  set_hopf_fields(f, h, [](double eta, double psi, double (*e)[3]) {
    const double t = std::tan(eta);
    const double ct = 1.0 / t;
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    // X2 = cos psi E1 + sin psi E2, X3 = sin psi E1 - cos psi E2.
    const double rows[3][3] = {{0, 1, 1}, {c, s * t, -s * ct}, {s, -c * t, c * ct}};
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i < 3; ++i) e[a][i] = rows[a][i];
    }
  });
  return f;
}

SubmersionFrame flat_product_frame(int n) {
  const GeometrySpec g = torus(3, n);
  SubmersionFrame f = blank_frame("flat_product", g.grid, 1, 2);
  f.base_bracket.assign(f.grid->size() * 8, 0.0);
  const std::size_t nodes = f.grid->size();
  f.field.assign(nodes * 9, 0.0);
  f.metric.assign(nodes * 9, 0.0);
  // Fiber axis 2 first, then the base axes.
  const int axis_of[3] = {2, 0, 1};
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int a = 0; a < 3; ++a) f.field[(node * 3 + a) * 3 + axis_of[a]] = 1.0;
    for (int i = 0; i < 3; ++i) f.metric[(node * 3 + i) * 3 + i] = 1.0;
  }
  return f;
}

SubmersionFrame frame_from_table(const GeometrySpec& g) {
  if (!g.frame) throw GeometryError("frame", "geometry '" + g.name + "' has no bracket table");
  const BracketTable& t = *g.frame;
  SubmersionFrame f = blank_frame(g.name, g.grid, t.vertical, t.horizontal);
  const std::size_t block = cube(t.size());
  if (t.bracket.size() != block) {
    throw GeometryError("frame", "bracket table has " + std::to_string(t.bracket.size()) +
                                     " entries, expected " + std::to_string(block));
  }
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    std::copy(t.bracket.begin(), t.bracket.end(), f.bracket.begin() + node * block);
  }
  return f;
}

FrameReport frame_report(const SubmersionFrame& f) {
  FrameReport r;
  const int m = f.size();
  const int h = f.horizontal;
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    if (f.has_fields()) {
      const Mat e = chart_fields(f, node);
      const Mat gram = e.transpose() * chart_metric(f, node) * e;
      r.orthonormality =
          std::max(r.orthonormality, (gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff());
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int c = 0; c < m; ++c) {
          r.antisymmetry = std::max(r.antisymmetry, std::abs(f.c(node, a, b, c) + f.c(node, b, a, c)));
          if (!f.special || f.is_vertical(c)) continue;
          if (f.is_vertical(a) != f.is_vertical(b)) {
            r.vertical_mixing = std::max(r.vertical_mixing, std::abs(f.c(node, a, b, c)));
          }
          if (!f.is_vertical(a) && !f.is_vertical(b) && !f.base_bracket.empty()) {
            const int i = a - f.vertical, j = b - f.vertical, k = c - f.vertical;
            const double base = f.base_bracket[node * h * h * h + (i * h + j) * h + k];
            r.base_bracket = std::max(r.base_bracket, std::abs(f.c(node, a, b, c) - base));
          }
        }
      }
    }
  }
  return r;
}

void validate(const SubmersionFrame& f, double tol) {
  if (!f.grid) throw GeometryError("frame", "frame '" + f.name + "' has no grid");
  if (f.vertical < 1 || f.horizontal < 1) {
    throw GeometryError("frame", "frame '" + f.name + "' needs vertical and horizontal fields");
  }
  if (f.bracket.size() != f.grid->size() * cube(f.size())) {
    throw GeometryError("frame", "bracket table size does not match the grid");
  }
  if (f.has_fields() && f.grid->dim() != f.size()) {
    throw GeometryError("frame", "frame size differs from the chart dimension");
  }
  const FrameReport r = frame_report(f);
  auto require = [&](double v, const char* what) {
    if (v > tol) {
      throw GeometryError("frame", "frame '" + f.name + "': " + what + " residual " +
                                       std::to_string(v));
    }
  };
  require(r.orthonormality, "orthonormality");
  require(r.antisymmetry, "bracket antisymmetry");
  require(r.vertical_mixing, "[horizontal, vertical] has a horizontal part;");
  require(r.base_bracket, "horizontal bracket differs from the base bracket;");
}

double bracket_fd_residual(const SubmersionFrame& f, int skip_rows) {
  if (!f.has_fields()) throw GeometryError("frame", "frame '" + f.name + "' has no chart fields");
  const int m = f.size();
  const int d = f.grid->dim();
  const auto de = chart_derivatives(*f.grid, f.field, static_cast<std::size_t>(m) * d);
  std::vector<double> worst(f.grid->size(), 0.0);
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    const Mat e = chart_fields(f, node);
    const Mat g = chart_metric(f, node);
    // J_a(k, i) = d_i e_a^k
    std::vector<Mat> jac(m, Mat(d, d));
    for (int a = 0; a < m; ++a) {
      for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) jac[a](k, i) = de[i][(node * m + a) * d + k].real();
      }
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        const Eigen::VectorXd br = jac[b] * e.col(a) - jac[a] * e.col(b);
        for (int c = 0; c < m; ++c) {
          const double v = br.dot(g * e.col(c));
          worst[node] = std::max(worst[node], std::abs(v - f.c(node, a, b, c)));
        }
      }
    }
  }
  return weighted_max(*f.grid, worst, skip_rows);
}

// ---------------------------------------------------------------------------
// Connection tensors.

ConnectionTensor::ConnectionTensor(GridPtr g, int size, ConnectionKind k, double lam)
    : grid(std::move(g)), m(size), kind(k), lambda(lam), weight(size, 1.0),
      values(grid->size() * cube(size), 0.0) {}

double ConnectionTensor::antisymmetry_residual() const {
  const bool limit = std::isinf(lambda);
  double worst = 0.0;
  for (std::size_t node = 0; node < grid->size(); ++node) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int c = 0; c < m; ++c) {
          // The limit metric is degenerate across the two blocks.
          if (limit && (weight[b] != weight[c])) continue;
          worst = std::max(worst, std::abs(weight[c] * at(node, a, b, c) +
                                           weight[b] * at(node, a, c, b)));
        }
      }
    }
  }
  return worst;
}

double ConnectionTensor::max_abs() const {
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v));
  return worst;
}

ConnectionTensor operator-(const ConnectionTensor& a, const ConnectionTensor& b) {
  ConnectionTensor out = a;
  out.kind = ConnectionKind::Difference;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values.at(i);
  return out;
}

ConnectionTensor operator+(const ConnectionTensor& a, const ConnectionTensor& b) {
  ConnectionTensor out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values.at(i);
  return out;
}

ConnectionTensor vertical_connection(const SubmersionFrame& f) {
  validate(f);
  const int m = f.size();
  ConnectionTensor t(f.grid, m, ConnectionKind::Vertical);
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = 0; a < m; ++a) {
      for (int y = 0; y < f.vertical; ++y) {
        for (int z = 0; z < f.vertical; ++z) {
          if (f.is_vertical(a)) {
            // Levi-Civita connection of the fiber.
            t.at(node, a, y, z) =
                0.5 * (f.c(node, a, y, z) + f.c(node, z, a, y) + f.c(node, z, y, a));
          } else {
            t.at(node, a, y, z) = 0.5 * (f.c(node, a, y, z) - f.c(node, a, z, y));
          }
        }
      }
    }
  }
  return t;
}

ConnectionTensor horizontal_connection(const SubmersionFrame& f) {
  validate(f);
  const int m = f.size();
  ConnectionTensor t(f.grid, m, ConnectionKind::Horizontal);
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = f.vertical; a < m; ++a) {
      for (int b = f.vertical; b < m; ++b) {
        for (int c = f.vertical; c < m; ++c) {
          t.at(node, a, b, c) =
              0.5 * (f.c(node, a, b, c) + f.c(node, c, a, b) + f.c(node, c, b, a));
        }
      }
    }
  }
  return t;
}

ConnectionTensor direct_sum_connection(const SubmersionFrame& f) {
  ConnectionTensor t = vertical_connection(f) + horizontal_connection(f);
  t.kind = ConnectionKind::DirectSum;
  return t;
}

ConnectionTensor riemannian_connection(const SubmersionFrame& f, double lambda) {
  validate(f);
  if (!(lambda > 0.0)) throw GeometryError("parameters", "lambda must be positive");
  const int m = f.size();
  ConnectionTensor t(f.grid, m, ConnectionKind::Riemannian, lambda);
  t.weight = lambda_weights(f, lambda);
  const auto& s = t.weight;
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        for (int c = 0; c < m; ++c) {
          const double koszul = 0.5 * (s[c] * f.c(node, a, b, c) + s[b] * f.c(node, c, a, b) +
                                       s[a] * f.c(node, c, b, a));
          t.at(node, a, b, c) = koszul / s[c];
        }
      }
    }
  }
  return t;
}

ConnectionTensor b_tensor(const SubmersionFrame& f, double lambda) {
  ConnectionTensor t = riemannian_connection(f, lambda) - direct_sum_connection(f);
  t.weight = lambda_weights(f, lambda);
  t.lambda = lambda;
  return t;
}

ConnectionTensor b_tilde(const SubmersionFrame& f) {
  const ConnectionTensor b = b_tensor(f, 1.0);
  ConnectionTensor t(f.grid, f.size(), ConnectionKind::Difference,
                     std::numeric_limits<double>::infinity());
  t.weight = lambda_weights(f, t.lambda);
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = 0; a < f.size(); ++a) {
      for (int h = f.vertical; h < f.size(); ++h) {
        for (int z = 0; z < f.vertical; ++z) t.at(node, a, h, z) = b.at(node, a, h, z);
      }
    }
  }
  return t;
}

ConnectionTensor adiabatic_limit(const SubmersionFrame& f) {
  ConnectionTensor t = direct_sum_connection(f) + b_tilde(f);
  t.kind = ConnectionKind::AdiabaticLimit;
  t.lambda = std::numeric_limits<double>::infinity();
  t.weight = lambda_weights(f, t.lambda);
  return t;
}

namespace {

// Component class 1..8 of (a, b, c): vertical/horizontal pattern
// VVV, HVV, VVH, HVH, VHV, HHV, VHH, HHH.
int component_class(const SubmersionFrame& f, int a, int b, int c) {
  static const int table[8] = {1, 3, 5, 7, 2, 4, 6, 8};
  const int key = (f.is_vertical(a) ? 0 : 4) + (f.is_vertical(b) ? 0 : 2) + (f.is_vertical(c) ? 0 : 1);
  return table[key];
}

// Closed form of <B_a b, c> at lambda = 1 in terms of brackets.
double b_closed_form(const SubmersionFrame& f, std::size_t node, int a, int b, int c) {
  switch (component_class(f, a, b, c)) {
    case 3:  // <B_X Y, H> = (<[H,X],Y> + <X,[H,Y]>) / 2
      return 0.5 * (f.c(node, c, a, b) + f.c(node, c, b, a));
    case 4:  // <B_H Y, I> = -<[H,I],Y> / 2
      return -0.5 * f.c(node, a, c, b);
    case 5:  // <B_X I, Z> = -(<[I,X],Z> + <X,[I,Z]>) / 2
      return -0.5 * (f.c(node, b, a, c) + f.c(node, b, c, a));
    case 6:  // <B_H I, Z> = <[H,I],Z> / 2
      return 0.5 * f.c(node, a, b, c);
    case 7:  // <B_X I, J> = -<[I,J],X> / 2
      return -0.5 * f.c(node, b, c, a);
    default:
      return 0.0;
  }
}

bool scales_inversely(int cls) { return cls == 3 || cls == 4 || cls == 7; }

}  // namespace

std::array<double, 8> b_class_residuals(const SubmersionFrame& f, double lambda) {
  const ConnectionTensor b = b_tensor(f, lambda);
  std::array<double, 8> r{};
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = 0; a < f.size(); ++a) {
      for (int bb = 0; bb < f.size(); ++bb) {
        for (int c = 0; c < f.size(); ++c) {
          const int cls = component_class(f, a, bb, c);
          const double factor = scales_inversely(cls) ? 1.0 / lambda : 1.0;
          const double v = std::abs(b.at(node, a, bb, c) - factor * b_closed_form(f, node, a, bb, c));
          r[cls - 1] = std::max(r[cls - 1], v);
        }
      }
    }
  }
  return r;
}

std::array<double, 8> b_class_magnitudes(const SubmersionFrame& f, double lambda) {
  const ConnectionTensor b = b_tensor(f, lambda);
  std::array<double, 8> r{};
  for (std::size_t node = 0; node < f.grid->size(); ++node) {
    for (int a = 0; a < f.size(); ++a) {
      for (int bb = 0; bb < f.size(); ++bb) {
        for (int c = 0; c < f.size(); ++c) {
          const int cls = component_class(f, a, bb, c);
          r[cls - 1] = std::max(r[cls - 1], std::abs(b.at(node, a, bb, c)));
        }
      }
    }
  }
  return r;
}

ScalingReport lambda_scaling(const SubmersionFrame& f, std::vector<double> lambdas) {
  ScalingReport r;
  r.lambdas = std::move(lambdas);
  const ConnectionTensor b1 = b_tensor(f, 1.0);
  for (double lambda : r.lambdas) {
    const ConnectionTensor bl = b_tensor(f, lambda);
    for (std::size_t node = 0; node < f.grid->size(); ++node) {
      for (int a = 0; a < f.size(); ++a) {
        for (int b = 0; b < f.size(); ++b) {
          for (int c = 0; c < f.size(); ++c) {
            const int cls = component_class(f, a, b, c);
            const double p = scales_inversely(cls) ? lambda : 1.0;
            const double v = std::abs(p * bl.at(node, a, b, c) - b1.at(node, a, b, c));
            r.residual[cls - 1] = std::max(r.residual[cls - 1], v);
          }
        }
      }
    }
  }
  return r;
}

LimitReport limit_rate(const SubmersionFrame& f, double lambda1, double lambda2) {
  LimitReport r;
  r.lambda1 = lambda1;
  r.lambda2 = lambda2;
  const ConnectionTensor limit = b_tilde(f);
  const ConnectionTensor b1 = b_tensor(f, lambda1);
  const ConnectionTensor b2 = b_tensor(f, lambda2);
  for (std::size_t i = 0; i < limit.values.size(); ++i) {
    r.distance1 = std::max(r.distance1, std::abs(b1.values[i] - limit.values[i]));
    r.distance2 = std::max(r.distance2, std::abs(b2.values[i] - limit.values[i]));
    const double extrapolated =
        (lambda2 * b2.values[i] - lambda1 * b1.values[i]) / (lambda2 - lambda1);
    r.richardson = std::max(r.richardson, std::abs(extrapolated - limit.values[i]));
  }
  r.rate = (r.distance1 > 0.0 && r.distance2 > 0.0)
               ? std::log(r.distance1 / r.distance2) / std::log(lambda2 / lambda1)
               : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Curvature and the certificate.

std::vector<double> frame_curvature(const SubmersionFrame& f, const ConnectionTensor& c) {
  const int m = f.size();
  const std::size_t nodes = f.grid->size();
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  std::vector<double> out(nodes * mm * mm, 0.0);
  std::vector<std::vector<Complex>> dg;
  if (f.has_fields()) dg = chart_derivatives(*f.grid, c.values, cube(m));
  const int d = f.grid->dim();

  for (std::size_t node = 0; node < nodes; ++node) {
    std::vector<Mat> mat(m);
    for (int a = 0; a < m; ++a) mat[a] = frame_matrix(c, node, a);
    // e_a(M_b)
    std::vector<Mat> deriv(mm, Mat::Zero(m, m));
    if (f.has_fields()) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          Mat& out_ab = deriv[a * m + b];
          for (int i = 0; i < d; ++i) {
            const double ea = f.field[(node * m + a) * d + i];
            if (ea == 0.0) continue;
            for (int bb = 0; bb < m; ++bb) {
              for (int cc = 0; cc < m; ++cc) {
                out_ab(cc, bb) += ea * dg[i][node * cube(m) + (b * m + bb) * m + cc].real();
              }
            }
          }
        }
      }
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        Mat r = deriv[a * m + b] - deriv[b * m + a] + mat[a] * mat[b] - mat[b] * mat[a];
        for (int k = 0; k < m; ++k) r -= f.c(node, a, b, k) * mat[k];
        double* dst = &out[(node * mm + a * m + b) * mm];
        for (int rr = 0; rr < m; ++rr) {
          for (int ss = 0; ss < m; ++ss) dst[rr * m + ss] = r(rr, ss);
        }
      }
    }
  }
  return out;
}

namespace {

Mat curvature_block(const std::vector<double>& r, std::size_t node, int m, int a, int b) {
  const std::size_t mm = static_cast<std::size_t>(m) * m;
  Mat out(m, m);
  const double* src = &r[(node * mm + a * m + b) * mm];
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) out(i, j) = src[i * m + j];
  }
  return out;
}

// Chart coframe theta(a, i) = theta^a(d_i).
Mat coframe(const SubmersionFrame& f, std::size_t node) { return chart_fields(f, node).inverse(); }

// Chart 2-form of frame components R(e_a, e_b).
MatrixForm chart_two_form(const SubmersionFrame& f, const std::vector<double>& r) {
  const int m = f.size();
  const int d = f.grid->dim();
  MatrixForm out(f.grid, 2, m);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      auto comp = out.component_mut((1u << i) | (1u << j));
      for (std::size_t node = 0; node < f.grid->size(); ++node) {
        const Mat th = coframe(f, node);
        Mat acc = Mat::Zero(m, m);
        for (int a = 0; a < m; ++a) {
          for (int b = 0; b < m; ++b) {
            const double w = th(a, i) * th(b, j);
            if (w != 0.0) acc += w * curvature_block(r, node, m, a, b);
          }
        }
        for (int rr = 0; rr < m; ++rr) {
          for (int ss = 0; ss < m; ++ss) comp[node * m * m + rr * m + ss] = acc(rr, ss);
        }
      }
    }
  }
  return out;
}

// Max |tr(P R_{a2 a3} ... R_{a_{2l-2} a_{2l-1}})| over all frame index choices.
double max_trace(const Mat& p, const std::vector<Mat>& blocks, int remaining) {
  if (remaining == 0) return std::abs(p.trace());
  double worst = 0.0;
  for (const auto& r : blocks) worst = std::max(worst, max_trace(p * r, blocks, remaining - 1));
  return worst;
}

}  // namespace

Connection to_connection(const SubmersionFrame& f, const ConnectionTensor& c,
                         const std::string& name) {
  if (!f.has_fields()) {
    throw GeometryError("frame", "frame '" + f.name + "' has no chart fields to export");
  }
  const int m = f.size();
  MatrixForm a(f.grid, 1, m);
  for (int i = 0; i < f.grid->dim(); ++i) {
    auto comp = a.component_mut(1u << i);
    for (std::size_t node = 0; node < f.grid->size(); ++node) {
      const Mat th = coframe(f, node);
      for (int k = 0; k < m; ++k) {
        if (th(k, i) == 0.0) continue;
        const Mat mk = frame_matrix(c, node, k);
        for (int rr = 0; rr < m; ++rr) {
          for (int ss = 0; ss < m; ++ss) comp[node * m * m + rr * m + ss] += th(k, i) * mk(rr, ss);
        }
      }
    }
  }
  return Connection::from_potential(name, std::move(a));
}

CertificateReport cs_triviality_certificate(const SubmersionFrame& f, int l_max, bool full_b,
                                            double tol) {
  if (l_max < 1) throw GeometryError("parameters", "l_max must be at least 1");
  validate(f);
  const int m = f.size();
  const std::size_t nodes = f.grid->size();
  const ConnectionTensor sum = direct_sum_connection(f);
  const ConnectionTensor b = full_b ? b_tensor(f, 1.0) : b_tilde(f);
  const ConnectionTensor end = sum + b;

  CertificateReport rep;
  const auto r0 = frame_curvature(f, sum);
  const auto r1 = frame_curvature(f, end);
  // dB = R(1) - R(0) - [B, B]; the curve is linear.
  std::vector<double> db(r0.size());
  for (std::size_t node = 0; node < nodes; ++node) {
    std::vector<Mat> bm(m);
    for (int a = 0; a < m; ++a) bm[a] = frame_matrix(b, node, a);
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) {
        const Mat bb = bm[a] * bm[c] - bm[c] * bm[a];
        rep.bracket = std::max(rep.bracket, bb.cwiseAbs().maxCoeff());
        const Mat d = curvature_block(r1, node, m, a, c) - curvature_block(r0, node, m, a, c) - bb;
        for (int rr = 0; rr < m; ++rr) {
          for (int ss = 0; ss < m; ++ss) {
            db[((node * m + a) * m + c) * m * m + rr * m + ss] = d(rr, ss);
            if (f.is_vertical(ss)) {
              rep.db_vertical = std::max(rep.db_vertical, std::abs(d(rr, ss)));
            } else if (!f.is_vertical(rr)) {
              rep.db_horizontal = std::max(rep.db_horizontal, std::abs(d(rr, ss)));
            }
          }
        }
      }
    }
  }

  const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  std::optional<ConnectionCurve> curve;
  if (f.has_fields()) {
    curve.emplace(to_connection(f, sum, "direct_sum"), to_connection(f, end, "end"));
    double h = 0.0;
    for (int i = 0; i < f.grid->dim(); ++i) h = std::max(h, f.grid->spacing(i));
    rep.split_tolerance = 10.0 * h * h;
    for (double t : ts) {
      std::vector<double> rt(r0.size());
      for (std::size_t i = 0; i < rt.size(); ++i) rt[i] = r0[i] + t * db[i];
      const MatrixForm diff = curve->curvature(t) - chart_two_form(f, rt);
      const std::size_t blk = diff.block();
      for (IndexMask mask : diff.masks()) {
        const auto comp = diff.component(mask);
        for (std::size_t node = 0; node < nodes; ++node) {
          if (f.grid->quad_weight()[node] <= 0.0) continue;
          double& slot = near_open_face(*f.grid, node, kClosureRows) ? rep.curvature_split_boundary
                                                                     : rep.curvature_split;
          for (std::size_t k = 0; k < blk; ++k) slot = std::max(slot, std::abs(comp[node * blk + k]));
        }
      }
    }
  }

  for (int l = 1; l <= l_max; ++l) {
    CertificateLevel lev;
    lev.l = l;
    for (double t : ts) {
      for (std::size_t node = 0; node < nodes; ++node) {
        std::vector<Mat> blocks;
        for (int a = 0; a < m; ++a) {
          for (int c = a + 1; c < m; ++c) {
            blocks.push_back(curvature_block(r0, node, m, a, c) +
                             t * (curvature_block(r1, node, m, a, c) -
                                  curvature_block(r0, node, m, a, c)));
          }
        }
        // R^t on a linear curve is R0 + t dB + t^2 [B, B]; with [B, B] = 0 the
        // interpolation above is exact, otherwise add the quadratic term.
        if (rep.bracket > 0.0) {
          int idx = 0;
          for (int a = 0; a < m; ++a) {
            for (int c = a + 1; c < m; ++c, ++idx) {
              const Mat ba = frame_matrix(b, node, a);
              const Mat bc = frame_matrix(b, node, c);
              blocks[idx] += (t * t - t) * (ba * bc - bc * ba);
            }
          }
        }
        for (int a = 0; a < m; ++a) {
          lev.frame_trace = std::max(lev.frame_trace, max_trace(frame_matrix(b, node, a), blocks, l - 1));
        }
      }
      if (curve && 2 * l - 1 <= f.grid->dim()) {
        lev.form_trace =
            std::max(lev.form_trace, max_norm_on_support(transgression_integrand(*curve, l, t)));
      }
    }
    rep.levels.push_back(lev);
  }

  rep.pass = rep.bracket <= tol && rep.db_vertical <= tol && rep.db_horizontal <= tol &&
             (!f.has_fields() || rep.curvature_split <= rep.split_tolerance);
  for (const auto& lev : rep.levels) {
    rep.pass = rep.pass && lev.frame_trace <= tol && lev.form_trace <= tol;
  }
  return rep;
}

}  // namespace cwcs
