#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cwcs/grid.hpp"

namespace cwcs {

class FormError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using GridPtr = std::shared_ptr<const ChartGrid>;

/// Index tuples i1 < ... < ip are stored as bit masks over the chart axes.
using IndexMask = unsigned;

int mask_degree(IndexMask mask);

/// Sign of dx_I ^ dx_J once re-sorted into increasing order; 0 if I, J overlap.
int wedge_sign(IndexMask lhs, IndexMask rhs);

/// Homogeneous degree-p differential form whose coefficients are n x n complex
/// matrices sampled at every grid node. A missing component is zero.
///
/// Coefficient layout per component: node-major, then the row-major n*n matrix.
class MatrixForm {
 public:
  using Filler = std::function<void(std::span<const double> x, std::span<Complex> m)>;

  MatrixForm(GridPtr grid, int degree, int rank);

  static MatrixForm scalar(GridPtr grid, Complex value);
  static MatrixForm identity(GridPtr grid, int rank);

  const ChartGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return grid_->dim(); }
  int degree() const { return degree_; }
  int rank() const { return rank_; }
  std::size_t block() const { return static_cast<std::size_t>(rank_) * rank_; }

  bool has(IndexMask mask) const;
  /// Empty span for a zero component.
  std::span<const Complex> component(IndexMask mask) const;
  /// Allocates a zero-filled component on first use.
  std::span<Complex> component_mut(IndexMask mask);
  std::vector<IndexMask> masks() const;

  /// Sets component `mask` from a pointwise generator of the n x n matrix.
  MatrixForm& fill(IndexMask mask, const Filler& f);

  Complex at(std::size_t node, IndexMask mask, int row = 0, int col = 0) const;

  double max_norm() const;
  bool is_zero() const { return max_norm() == 0.0; }

  MatrixForm& operator+=(const MatrixForm& other);
  MatrixForm& operator-=(const MatrixForm& other);
  MatrixForm& operator*=(Complex s);

  friend MatrixForm operator+(MatrixForm a, const MatrixForm& b) { return a += b; }
  friend MatrixForm operator-(MatrixForm a, const MatrixForm& b) { return a -= b; }
  friend MatrixForm operator*(Complex s, MatrixForm a) { return a *= s; }
  friend MatrixForm operator*(MatrixForm a, Complex s) { return a *= s; }

 private:
  void check_compatible(const MatrixForm& other, const char* op) const;

  GridPtr grid_;
  int degree_;
  int rank_;
  std::vector<std::vector<Complex>> comps_;
};

MatrixForm wedge(const MatrixForm& a, const MatrixForm& b);
MatrixForm exterior_d(const MatrixForm& a);
MatrixForm trace(const MatrixForm& a);
/// Pointwise matrix commutator-style product a^b - (-1)^{pq} b^a.
MatrixForm graded_commutator(const MatrixForm& a, const MatrixForm& b);

/// Quadrature of a scalar top-degree form over the chart (coordinate measure).
Complex integrate_chart(const MatrixForm& a, int orientation = +1);

/// Max |coefficient| over nodes with positive quadrature weight.
double max_norm_on_support(const MatrixForm& a);

/// Mixed-degree form: one homogeneous part per degree 0..dim.
class MixedForm {
 public:
  MixedForm(GridPtr grid, int rank);
  explicit MixedForm(const MatrixForm& homogeneous);

  const GridPtr& grid_ptr() const { return grid_; }
  int rank() const { return rank_; }
  int dim() const { return grid_->dim(); }

  bool has(int degree) const;
  const MatrixForm& part(int degree) const;
  /// Zero form of that degree if absent.
  MatrixForm part_or_zero(int degree) const;
  MatrixForm top() const { return part_or_zero(dim()); }
  void add(const MatrixForm& f);

  MixedForm& operator+=(const MixedForm& other);
  MixedForm& operator*=(Complex s);
  friend MixedForm operator+(MixedForm a, const MixedForm& b) { return a += b; }
  friend MixedForm operator*(Complex s, MixedForm a) { return a *= s; }

  double max_norm() const;

 private:
  GridPtr grid_;
  int rank_;
  std::vector<std::optional<MatrixForm>> parts_;
};

MixedForm wedge(const MixedForm& a, const MixedForm& b);
MixedForm trace(const MixedForm& a);
MixedForm exterior_d(const MixedForm& a);

/// exp of a scalar mixed form with no degree-0 part: sum_k s^k / k!.
MixedForm exp_nilpotent(const MixedForm& s);

// ---------------------------------------------------------------------------
// Product charts. The product of charts A (axes 0..da-1) and B (axes da..)
// stores nodes as a_node * |B| + b_node.

GridPtr product_grid(const ChartGrid& a, const ChartGrid& b);
MatrixForm pull_back_first(const MatrixForm& a, const GridPtr& product);
MatrixForm pull_back_second(const MatrixForm& b, const GridPtr& product);

/// Integration over the trailing `fiber` axes of a product chart. Components
/// lacking any fiber axis drop out. `base` must be the leading factor.
MatrixForm fiber_integrate(const MatrixForm& a, const GridPtr& base, const ChartGrid& fiber);
MixedForm fiber_integrate(const MixedForm& a, const GridPtr& base, const ChartGrid& fiber);

}  // namespace cwcs
