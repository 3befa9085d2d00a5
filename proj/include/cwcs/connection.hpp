#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cwcs/cycles.hpp"
#include "cwcs/form.hpp"

namespace cwcs {

/// i/(2 pi): Omega = kChernNorm * R.
inline const Complex kChernNorm{0.0, 0.5 / 3.14159265358979323846};

/// Connection on a trivialized rank-n bundle over one chart.
///
/// Either the potential A is known (curvature dA + A^A) or only the curvature
/// is (monopole-type bundles with no global gauge). When both are supplied the
/// curvature is checked against dA + A^A.
class Connection {
 public:
  static Connection from_potential(std::string name, MatrixForm potential);
  static Connection from_curvature(std::string name, MatrixForm curvature);
  static Connection with_curvature(std::string name, MatrixForm potential,
                                   MatrixForm curvature);
  static Connection trivial(std::string name, GridPtr grid, int rank);

  const std::string& name() const { return name_; }
  int rank() const { return rank_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool has_potential() const { return potential_.has_value(); }
  const MatrixForm& potential() const;
  const std::optional<MatrixForm>& analytic_curvature() const { return curvature_; }

  Connection renamed(std::string name) const;

 private:
  Connection(std::string name, GridPtr grid, int rank) :
      name_(std::move(name)), grid_(std::move(grid)), rank_(rank) {}

  std::string name_;
  GridPtr grid_;
  int rank_;
  std::optional<MatrixForm> potential_;
  std::optional<MatrixForm> curvature_;
};

class ConnectionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

MatrixForm curvature_from_potential(const MatrixForm& a);
MatrixForm curvature(const Connection& c);
/// max |dR - (R^A - A^R)|.
double bianchi_residual(const Connection& c);

/// tr(R^l), unnormalized. Zero form of degree 2l (empty) when 2l > dim.
MatrixForm char_power(const Connection& c, int l);
MatrixForm trace_power(const MatrixForm& r, int l);

enum class ToddSign { Standard, Flipped };

/// tr exp(Omega).
MixedForm chern_character(const Connection& c);
/// exp(tr log td(Omega)), td(x) = x/(1 - e^{-x}); Flipped uses x/(e^x - 1).
MixedForm todd_form(const Connection& c, ToddSign sign = ToddSign::Standard);

/// Coefficients of log td(x) in powers of x, up to x^kmax.
std::vector<double> log_todd_coefficients(int kmax, ToddSign sign = ToddSign::Standard);

Connection direct_sum(const Connection& a, const Connection& b);
/// a (x) 1 + 1 (x) b.
Connection tensor_product(const Connection& a, const Connection& b);
Connection pull_back_first(const Connection& c, const GridPtr& product);
Connection pull_back_second(const Connection& c, const GridPtr& product);
/// Same connection seen on a grid with the same node layout (e.g. masked).
Connection rebind(const Connection& c, const GridPtr& grid);

/// A^t = A0 + t (A1 - A0) + t (1 - t) bend.
class ConnectionCurve {
 public:
  ConnectionCurve(Connection start, Connection end);
  ConnectionCurve(Connection start, Connection end, MatrixForm bend);

  const Connection& start() const { return start_; }
  const Connection& end() const { return end_; }
  int rank() const { return start_.rank(); }
  /// Polynomial degree of A^t in t.
  int degree() const { return bend_ ? 2 : 1; }

  MatrixForm potential(double t) const;
  MatrixForm velocity(double t) const;
  MatrixForm curvature(double t) const;

 private:
  Connection start_;
  Connection end_;
  MatrixForm delta_;
  std::optional<MatrixForm> bend_;
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights);

/// l * tr(B^t ^ (R^t)^{l-1}) at a single t.
MatrixForm transgression_integrand(const ConnectionCurve& curve, int l, double t);
/// TP_l = l int_0^1 tr(B^t ^ (R^t)^{l-1}) dt, unnormalized.
MatrixForm transgression(const ConnectionCurve& curve, int l);
/// max |d TP_l - (tr R1^l - tr R0^l)|.
double transgression_residual(const ConnectionCurve& curve, int l);

/// Transgression of the product P_{l1} P_{l2} along the curve.
MatrixForm transgression_product(const ConnectionCurve& curve, int l1, int l2);
/// Max over cycles of |period(T(P Q) - TP ^ Q(R0) - TQ ^ P(R1))|.
double transgression_product_check(const ConnectionCurve& curve, int l1, int l2,
                                   const CycleBasis& cycles);

struct CsLevel {
  int l = 0;
  double closedness = 0.0;
  double max_period = 0.0;
  std::size_t cycles_checked = 0;
  bool exact = false;
};

struct CsReport {
  bool equivalent = true;
  std::vector<CsLevel> levels;
};

/// Exactness proxy per level l <= rank: d TP_l small and every period of the
/// normalized (i/2pi)^l TP_l over cycles of dimension 2l-1 small.
CsReport cs_equivalent(const Connection& c0, const Connection& c1, const CycleBasis& cycles,
                       double tol = 1e-6);

}  // namespace cwcs
