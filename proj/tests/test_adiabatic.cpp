#include <cmath>

#include "doctest.h"

#include "cwcs/adiabatic.hpp"

using namespace cwcs;

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Round S^3 in Hopf coordinates (eta, xi1, xi2) with the base stretched by
// lambda: g = lambda g + (1 - lambda) V^b V^b, V = d_xi1 + d_xi2.
Mat3 hopf_metric(double eta, double lambda) {
  const Vec3 diag{1.0, std::cos(eta) * std::cos(eta), std::sin(eta) * std::sin(eta)};
  const Vec3 vflat{0.0, diag[1], diag[2]};
  Mat3 g{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      g[i][j] = (i == j ? lambda * diag[i] : 0.0) + (1.0 - lambda) * vflat[i] * vflat[j];
    }
  }
  return g;
}

Mat3 inverse(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      r[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / det;
    }
  }
  return r;
}

// Frame fields in (eta, xi1, xi2) components.
using FieldFn = Mat3 (*)(double eta, double xi1, double xi2);

Mat3 special_fields(double eta, double, double) {
  return {Vec3{0, 1, 1}, Vec3{1, 0, 0}, Vec3{0, std::tan(eta), -1.0 / std::tan(eta)}};
}

Mat3 left_invariant_fields(double eta, double xi1, double xi2) {
  const double t = std::tan(eta), c = std::cos(xi1 + xi2), s = std::sin(xi1 + xi2);
  return {Vec3{0, 1, 1}, Vec3{c, s * t, -s / t}, Vec3{s, -c * t, c / t}};
}

// <nabla^lambda_{e_a} e_b, e_c> with the lambda = 1 inner product, from
// Christoffel symbols and finite differences of closed-form fields.
double christoffel_oracle(FieldFn fields, const Vec3& x, double lambda, int a, int b, int c) {
  const double h = 1e-5;
  auto metric_at = [&](double eta) { return hopf_metric(eta, lambda); };
  Mat3 dg[3]{};  // dg[l][i][j] = d_l g_ij; only eta matters
  {
    const Mat3 gp = metric_at(x[0] + h), gm = metric_at(x[0] - h);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) dg[0][i][j] = (gp[i][j] - gm[i][j]) / (2 * h);
    }
  }
  const Mat3 g = metric_at(x[0]);
  const Mat3 gi = inverse(g);
  double gamma[3][3][3]{};  // gamma[k][i][j]
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int l = 0; l < 3; ++l) {
          gamma[k][i][j] += 0.5 * gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
        }
      }
    }
  }
  const Mat3 e = fields(x[0], x[1], x[2]);
  // d_i e_b^k
  double de[3][3]{};
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Mat3 ep = fields(xp[0], xp[1], xp[2]), em = fields(xm[0], xm[1], xm[2]);
    for (int k = 0; k < 3; ++k) de[i][k] = (ep[b][k] - em[b][k]) / (2 * h);
  }
  Vec3 nabla{};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      nabla[k] += e[a][i] * de[i][k];
      for (int j = 0; j < 3; ++j) nabla[k] += e[a][i] * gamma[k][i][j] * e[b][j];
    }
  }
  const Mat3 g1 = hopf_metric(x[0], 1.0);
  double out = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) out += nabla[k] * g1[k][l] * e[c][l];
  }
  return out;
}

double levi_civita_gap(const SubmersionFrame& f, FieldFn fields, double lambda) {
  const HopfPatch patch;
  const auto t = riemannian_connection(f, lambda);
  const auto& g = *f.grid;
  double worst = 0.0;
  for (std::size_t node = 0; node < g.size(); node += 37) {
    const Vec3 x{patch.eta0 + (patch.eta1 - patch.eta0) * g.coord(0, g.axis_index(node, 0)),
                 2 * kPi * g.coord(1, g.axis_index(node, 1)),
                 2 * kPi * g.coord(2, g.axis_index(node, 2))};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int c = 0; c < 3; ++c) {
          worst = std::max(worst, std::abs(t.at(node, a, b, c) -
                                           christoffel_oracle(fields, x, lambda, a, b, c)));
        }
      }
    }
  }
  return worst;
}

double eps(int i, int j, int k) { return 0.5 * (i - j) * (j - k) * (k - i); }

}  // namespace

TEST_CASE("frames: orthonormal, brackets match the sampled fields") {
  const auto hopf = hopf_frame(16);
  const auto left = hopf_left_invariant_frame(16);
  CHECK_NOTHROW(validate(hopf));
  CHECK_NOTHROW(validate(left));
  CHECK_NOTHROW(validate(flat_product_frame(8)));
  CHECK(frame_report(hopf).orthonormality < 1e-12);

  // The left-invariant frame rotates along the fibers: [V, X2] has a
  // horizontal part, so it is not special.
  auto wrongly_special = left;
  wrongly_special.special = true;
  CHECK_THROWS_AS(validate(wrongly_special), GeometryError);

  // Finite-difference brackets converge to the tables at second order away
  // from the closure rows of the open axis, a little slower on them.
  using Builder = SubmersionFrame (*)(int, HopfPatch);
  for (Builder fn : {Builder{&hopf_frame}, Builder{&hopf_left_invariant_frame}}) {
    const auto f16 = fn(16, {});
    const auto f32 = fn(32, {});
    const double i16 = bracket_fd_residual(f16, kClosureRows);
    const double i32 = bracket_fd_residual(f32, kClosureRows);
    const double r16 = bracket_fd_residual(f16);
    const double r32 = bracket_fd_residual(f32);
    CAPTURE(i16);
    CAPTURE(i32);
    CAPTURE(r16);
    CAPTURE(r32);
    CHECK(i32 < 0.02);
    CHECK(i16 / i32 > 3.8);
    CHECK(r16 / r32 > 3.0);
  }
}

TEST_CASE("Koszul connections match the Christoffel oracle") {
  const auto hopf = hopf_frame(12);
  const auto left = hopf_left_invariant_frame(12);
  for (double lambda : {1.0, 4.0}) {
    CAPTURE(lambda);
    CHECK(levi_civita_gap(hopf, special_fields, lambda) < 1e-7);
    CHECK(levi_civita_gap(left, left_invariant_fields, lambda) < 1e-7);
  }
}

TEST_CASE("left-invariant frame: round S^3 constants") {
  const auto left = hopf_left_invariant_frame(8);
  const auto r = riemannian_connection(left, 1.0);
  // nabla_X Y = [X, Y] / 2 on a bi-invariant metric.
  double worst = 0.0;
  for (std::size_t node = 0; node < left.grid->size(); ++node) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(r.at(node, a, b, c) + eps(a, b, c)));
      }
    }
  }
  CHECK(worst < 1e-14);
  // A one-dimensional fiber: the vertical connection is zero.
  CHECK(vertical_connection(left).max_abs() == 0.0);
}

TEST_CASE("connections preserve the metric") {
  const auto hopf = hopf_frame(12);
  CHECK(vertical_connection(hopf).antisymmetry_residual() < 1e-14);
  CHECK(horizontal_connection(hopf).antisymmetry_residual() < 1e-14);
  CHECK(direct_sum_connection(hopf).antisymmetry_residual() < 1e-14);
  for (double lambda : {1.0, 3.0, 100.0}) {
    CHECK(riemannian_connection(hopf, lambda).antisymmetry_residual() < 1e-12 * lambda);
    CHECK(b_tensor(hopf, lambda).antisymmetry_residual() < 1e-12 * lambda);
  }
  CHECK(adiabatic_limit(hopf).antisymmetry_residual() < 1e-14);
}

TEST_CASE("B tensor classes on the Hopf fibration") {
  const auto hopf = hopf_frame(12);
  for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
    const auto r = b_class_residuals(hopf, lambda);
    for (int i = 0; i < 8; ++i) {
      CAPTURE(i + 1);
      CHECK(r[i] < 1e-12);
    }
  }
  const auto b = b_tensor(hopf, 1.0);
  double zero_classes = 0.0;
  for (std::size_t node = 0; node < hopf.grid->size(); ++node) {
    zero_classes = std::max({zero_classes, std::abs(b.at(node, 0, 0, 0)),   // 1
                             std::abs(b.at(node, 1, 0, 0)),                 // 2
                             std::abs(b.at(node, 1, 1, 2)),                 // 8
                             std::abs(b.at(node, 2, 2, 1))});
    // <B_H Y, I> = -<[H, I], Y> / 2 = -1 for H = E1, I = E2, Y = V.
    CHECK(b.at(node, 1, 0, 2) == doctest::Approx(-1.0));
    CHECK(b.at(node, 1, 2, 0) == doctest::Approx(1.0));
  }
  CHECK(zero_classes == 0.0);
  const auto mags = b_class_magnitudes(hopf);
  CHECK(mags[0] == 0.0);
  CHECK(mags[1] == 0.0);
  CHECK(mags[7] == 0.0);
  CHECK(mags[5] == doctest::Approx(1.0));

  const auto s = lambda_scaling(hopf);
  for (int i = 0; i < 8; ++i) CHECK(s.residual[i] < 1e-10);
}

TEST_CASE("adiabatic limit: B~ vanishes on vertical inputs, 1/lambda rate") {
  const auto hopf = hopf_frame(12);
  const auto bt = b_tilde(hopf);
  for (std::size_t node = 0; node < hopf.grid->size(); ++node) {
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) REQUIRE(bt.at(node, a, 0, c) == 0.0);
    }
  }
  const auto lim = limit_rate(hopf);
  CHECK(lim.distance1 > 0.0);
  const double ratio = lim.distance1 / lim.distance2;
  CHECK(ratio > 500.0);
  CHECK(ratio < 2000.0);
  CHECK(lim.rate == doctest::Approx(1.0).epsilon(0.05));
  CHECK(lim.richardson < 1e-9);
}

TEST_CASE("CS-triviality certificate on the Hopf fibration") {
  const auto hopf = hopf_frame(16);
  const auto cert = cs_triviality_certificate(hopf, 2);
  CHECK(cert.pass);
  CHECK(cert.bracket == 0.0);
  CHECK(cert.db_vertical < 1e-12);
  CHECK(cert.db_horizontal < 1e-12);
  CHECK(cert.curvature_split < cert.split_tolerance);
  CHECK(cert.curvature_split_boundary < 2.0);
  REQUIRE(cert.levels.size() == 2);
  for (const auto& lev : cert.levels) {
    CAPTURE(lev.l);
    CHECK(lev.frame_trace < 1e-10);
    CHECK(lev.form_trace < 1e-10);
  }

  // With the full B the trace does not vanish: the check has power.
  const auto control = cs_triviality_certificate(hopf, 2, true);
  CHECK_FALSE(control.pass);
  CHECK(control.levels[1].frame_trace > 1e-3);
}

TEST_CASE("CS-triviality certificate on a flat product is trivial") {
  const auto flat = flat_product_frame(8);
  CHECK(b_tensor(flat, 1.0).max_abs() == 0.0);
  CHECK(b_tilde(flat).max_abs() == 0.0);
  const auto cert = cs_triviality_certificate(flat, 2);
  CHECK(cert.pass);
  CHECK(cert.curvature_split == 0.0);
  for (const auto& lev : cert.levels) CHECK(lev.frame_trace == 0.0);
}

TEST_CASE("frame from a config bracket table") {
  const char* text = R"(
[grid]
resolution = [6, 6, 6]
periodic = [true, true, true]
[fibration]
base_dim = 2
[fibration.frame]
vertical = 1
horizontal = 2
bracket = [0, 0, 0,   0, 0, -2,   0, 2, 0,
           0, 0, 2,   0, 0, 0,   -2, 0, 0,
           0, -2, 0,  2, 0, 0,    0, 0, 0]
)";
  const auto g = load_geometry(text);
  auto f = frame_from_table(g);
  // su(2) constants: rotating horizontal fields, not special.
  CHECK_THROWS_AS(validate(f), GeometryError);
  f.special = false;
  const auto r = riemannian_connection(f, 1.0);
  CHECK(r.at(0, 0, 1, 2) == doctest::Approx(-1.0));
  CHECK(r.antisymmetry_residual() < 1e-14);
  CHECK_THROWS_AS(to_connection(f, r, "x"), GeometryError);
}
