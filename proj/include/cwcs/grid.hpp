#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwcs {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 8;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor-product grid on the unit chart [0,1]^d.
///
/// Periodic axes carry N nodes at i/N (node N is node 0), trapezoid weights and
/// second-order central differences. Non-periodic axes carry N nodes at
/// i/(N-1), endpoints included, and use the diagonal-norm SBP(4,2) operator
/// whose norm doubles as the quadrature rule. The pairing of the two makes
/// sum_i w_i (D f)_i = f(1) - f(0) hold exactly, so Stokes holds discretely.
///
/// Node numbering is row-major: axis 0 varies slowest.
class ChartGrid {
 public:
  ChartGrid(std::vector<int> resolution, std::vector<bool> periodic);

  int dim() const { return static_cast<int>(resolution_.size()); }
  std::size_t size() const { return size_; }
  int resolution(int axis) const { return resolution_.at(axis); }
  bool periodic(int axis) const { return periodic_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  std::size_t stride(int axis) const { return stride_.at(axis); }

  double coord(int axis, int i) const { return i * spacing_[axis]; }
  int axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride_[axis]) % resolution_[axis]);
  }
  void coords(std::size_t node, std::span<double> out) const;
  std::vector<double> coords(std::size_t node) const;

  /// Coordinate-measure quadrature weight per node (product of axis weights,
  /// zeroed outside a mask if one was applied).
  std::span<const double> quad_weight() const { return weights_; }
  double axis_weight(int axis, int i) const;

  /// Copy of this grid with weights zeroed where `inside` is false.
  ChartGrid masked(const std::function<bool(std::span<const double>)>& inside) const;
  bool has_mask() const { return masked_; }
  /// Copy with every weight multiplied by `factor` (a constant volume density).
  ChartGrid scaled(double factor) const;

  /// Tensor product chart: axes of `a` first, then axes of `b`; weights multiply.
  static ChartGrid product(const ChartGrid& a, const ChartGrid& b);

  /// Same node layout (resolution and periodicity); weights may differ.
  bool compatible(const ChartGrid& other) const;

  /// Derivative along `axis`. Each node owns `block` consecutive values in
  /// `in`/`out` (e.g. the n*n entries of a matrix coefficient).
  void differentiate(int axis, std::span<const Complex> in, std::span<Complex> out,
                     std::size_t block) const;

  std::string describe() const;

 private:
  std::vector<int> resolution_;
  std::vector<bool> periodic_;
  std::vector<double> spacing_;
  std::vector<std::size_t> stride_;
  std::vector<std::vector<double>> axis_weights_;
  std::vector<double> weights_;
  std::size_t size_ = 0;
  bool masked_ = false;
};

/// Minimum node count on a non-periodic axis (SBP boundary closure width).
inline constexpr int kMinOpenAxisNodes = 8;

}  // namespace cwcs
