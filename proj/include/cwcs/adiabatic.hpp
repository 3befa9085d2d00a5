#pragma once

#include <array>
#include <string>
#include <vector>

#include "cwcs/connection.hpp"
#include "cwcs/geometry.hpp"

namespace cwcs {

/// Orthonormal frame of a Riemannian submersion, vertical fields first.
///
/// bracket[(node * m + a) * m * m + b * m + c] = <[e_a, e_b], e_c>. When the
/// chart components of the fields are known (`field`, `metric`), derivatives
/// along the frame are taken on the grid; without them the tables are
/// treated as constant (homogeneous frames read from a config).
struct SubmersionFrame {
  std::string name;
  GridPtr grid;
  int vertical = 0;
  int horizontal = 0;
  /// Horizontal fields are lifts of base fields.
  bool special = true;
  std::vector<double> bracket;
  /// <[h_i, h_j], h_k> of the base frame at the image point (h^3 per node);
  /// empty when not known.
  std::vector<double> base_bracket;
  /// field[(node * m + a) * d + i] = dx_i(e_a).
  std::vector<double> field;
  /// metric[(node * d + i) * d + j] = <d_i, d_j> at lambda = 1.
  std::vector<double> metric;

  int size() const { return vertical + horizontal; }
  bool is_vertical(int a) const { return a < vertical; }
  bool has_fields() const { return !field.empty(); }
  double c(std::size_t node, int a, int b, int k) const {
    const std::size_t m = size();
    return bracket[((node * m + a) * m + b) * m + k];
  }
};

/// Special Hopf frame on the hopf_s3_over_s2 patch: V = d_xi1 + d_xi2,
/// E1 = d_eta, E2 = tan(eta) d_xi1 - cot(eta) d_xi2.
SubmersionFrame hopf_frame(int n = 0, HopfPatch patch = {});
/// Left-invariant SU(2) frame (X1 = V, X2, X3 rotating with xi1 + xi2) on the
/// same patch; not special. [X_i, X_j] = -2 eps_ijk X_k.
SubmersionFrame hopf_left_invariant_frame(int n = 0, HopfPatch patch = {});
/// T^2 x S^1 over T^2 with the coordinate frame.
SubmersionFrame flat_product_frame(int n = 0);
/// Homogeneous frame from a geometry's bracket table.
SubmersionFrame frame_from_table(const GeometrySpec& g);

struct FrameReport {
  double orthonormality = 0.0;
  double vertical_mixing = 0.0;  // horizontal part of [H, X]
  double base_bracket = 0.0;     // horizontal part of [H, I] minus the base bracket
  double antisymmetry = 0.0;     // bracket antisymmetry in (a, b)
};

FrameReport frame_report(const SubmersionFrame& f);
/// Throws GeometryError("frame", ...) unless every report entry is within tol.
/// The mixing and base-bracket checks apply to special frames only.
void validate(const SubmersionFrame& f, double tol = 1e-8);

/// Rows of an open axis covered by the one-sided derivative closure.
inline constexpr int kClosureRows = 4;

/// Max over nodes with positive weight of |table - bracket of the sampled
/// fields by finite differences|. Needs chart fields. `skip_rows` drops nodes
/// that close to an open face.
double bracket_fd_residual(const SubmersionFrame& f, int skip_rows = 0);

enum class ConnectionKind { Vertical, Horizontal, DirectSum, Riemannian, AdiabaticLimit, Difference };

/// values[((node * m + a) * m + b) * m + c] = <nabla_{e_a} e_b, e_c>, with the
/// lambda = 1 inner product. `weight` holds the lambda-metric weights of the
/// frame (1 vertical, lambda horizontal).
struct ConnectionTensor {
  GridPtr grid;
  int m = 0;
  ConnectionKind kind = ConnectionKind::Difference;
  double lambda = 1.0;
  std::vector<double> weight;
  std::vector<double> values;

  ConnectionTensor(GridPtr g, int size, ConnectionKind k, double lam = 1.0);
  double& at(std::size_t node, int a, int b, int c) {
    return values[((node * m + a) * m + b) * m + c];
  }
  double at(std::size_t node, int a, int b, int c) const {
    return values[((node * m + a) * m + b) * m + c];
  }
  /// max |w_c G_abc + w_b G_acb|.
  double antisymmetry_residual() const;
  double max_abs() const;
};

ConnectionTensor operator-(const ConnectionTensor& a, const ConnectionTensor& b);
ConnectionTensor operator+(const ConnectionTensor& a, const ConnectionTensor& b);

ConnectionTensor vertical_connection(const SubmersionFrame& f);
ConnectionTensor horizontal_connection(const SubmersionFrame& f);
ConnectionTensor direct_sum_connection(const SubmersionFrame& f);
/// Koszul formula for constant inner products, base stretched by lambda.
ConnectionTensor riemannian_connection(const SubmersionFrame& f, double lambda = 1.0);
/// B^lambda = nabla^{lambda r} - nabla^(+).
ConnectionTensor b_tensor(const SubmersionFrame& f, double lambda = 1.0);
/// B~: zero on vertical inputs, B~_s(H) = (B_s H)^V.
ConnectionTensor b_tilde(const SubmersionFrame& f);
/// nabla~ = nabla^(+) + B~.
ConnectionTensor adiabatic_limit(const SubmersionFrame& f);

/// Residual per component class 1..8 of B^lambda against the closed forms in
/// terms of brackets, with the lambda factors (1/lambda for 3, 4, 7).
std::array<double, 8> b_class_residuals(const SubmersionFrame& f, double lambda = 1.0);

/// max |B^lambda component| per class 1..8.
std::array<double, 8> b_class_magnitudes(const SubmersionFrame& f, double lambda = 1.0);

struct ScalingReport {
  std::vector<double> lambdas;
  /// max over lambda of |lambda^p B^lambda - B| for each class (p = 1 or 0).
  std::array<double, 8> residual{};
};
ScalingReport lambda_scaling(const SubmersionFrame& f, std::vector<double> lambdas = {1, 2, 4, 8});

struct LimitReport {
  double lambda1 = 1e3;
  double lambda2 = 1e6;
  double distance1 = 0.0;  // max |B^lambda1 - B~|
  double distance2 = 0.0;
  double rate = 0.0;       // log(distance1 / distance2) / log(lambda2 / lambda1)
  double richardson = 0.0; // two-point 1/lambda extrapolation vs B~
};
LimitReport limit_rate(const SubmersionFrame& f, double lambda1 = 1e3, double lambda2 = 1e6);

/// Frame components of the curvature: R[((node * m + a) * m + b) * m * m + r * m + s]
/// = (R(e_a, e_b))_{rs}, acting on frame coefficient vectors.
std::vector<double> frame_curvature(const SubmersionFrame& f, const ConnectionTensor& c);

/// Chart connection (rank m, frame-indexed) of a tensor; needs chart fields.
Connection to_connection(const SubmersionFrame& f, const ConnectionTensor& c,
                         const std::string& name);

struct CertificateLevel {
  int l = 0;
  double frame_trace = 0.0;  // max |tr(B R^t ... R^t)| over frame indices and t
  double form_trace = 0.0;   // max |l tr(B ^ (R^t)^{l-1})| as a chart form
};

struct CertificateReport {
  double bracket = 0.0;         // max |[B, B](e_a, e_b)|
  double db_vertical = 0.0;     // max |dB(e_a, e_b)| on vertical inputs
  double db_horizontal = 0.0;   // max horizontal part of dB(e_a, e_b)(H)
  /// |R^t - (R + t dB)| against the direct chart curvature, away from the
  /// closure rows of open faces, and on those rows.
  double curvature_split = 0.0;
  double curvature_split_boundary = 0.0;
  double split_tolerance = 0.0; // 10 h^2
  std::vector<CertificateLevel> levels;
  bool pass = false;
};

/// Checks that the trace integrands of TP_l(nabla^(+), nabla^(+) + B) vanish
/// pointwise. B = B~ unless `full_b`, which uses B^1 (the control run).
CertificateReport cs_triviality_certificate(const SubmersionFrame& f, int l_max = 2,
                                            bool full_b = false, double tol = 1e-10);

}  // namespace cwcs
