#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "cwcs/form.hpp"

namespace cwcs {

/// Smooth periodic n x n matrix field: sum of a few low Fourier modes with
/// random coefficients of size `amp`.
class RandomField {
 public:
  RandomField(int dim, int rank, double amp, std::mt19937& rng) : dim_(dim), rank_(rank) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> k(0, 1);
    for (int t = 0; t < 3; ++t) {
      Mode m;
      m.k.resize(dim);
      for (auto& ki : m.k) ki = k(rng);
      m.phase = u(rng) * std::numbers::pi;
      m.c.resize(rank * rank);
      for (auto& c : m.c) c = amp * Complex(u(rng), u(rng));
      modes_.push_back(std::move(m));
    }
  }

  void operator()(std::span<const double> x, std::span<Complex> out) const {
    for (auto& v : out) v = 0.0;
    for (const auto& m : modes_) {
      double arg = m.phase;
      for (int a = 0; a < dim_; ++a) arg += 2.0 * std::numbers::pi * m.k[a] * x[a];
      const double s = std::sin(arg);
      for (int i = 0; i < rank_ * rank_; ++i) out[i] += s * m.c[i];
    }
  }

 private:
  struct Mode {
    std::vector<int> k;
    double phase;
    std::vector<Complex> c;
  };
  int dim_;
  int rank_;
  std::vector<Mode> modes_;
};

inline MatrixForm random_form(const GridPtr& g, int degree, int rank, double amp,
                              std::mt19937& rng) {
  MatrixForm f(g, degree, rank);
  const int d = g->dim();
  for (IndexMask m = 0; m < (IndexMask{1} << d); ++m) {
    if (mask_degree(m) != degree) continue;
    RandomField field(d, rank, amp, rng);
    f.fill(m, field);
  }
  return f;
}

}  // namespace cwcs
