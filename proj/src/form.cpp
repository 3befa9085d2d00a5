#include "cwcs/form.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace cwcs {

int mask_degree(IndexMask mask) { return std::popcount(mask); }

int wedge_sign(IndexMask lhs, IndexMask rhs) {
  if (lhs & rhs) return 0;
  // Each pair (i in lhs, j in rhs) with i > j costs one transposition.
  int swaps = 0;
  for (IndexMask r = rhs; r; r &= r - 1) {
    const IndexMask j = r & (~r + 1);
    swaps += std::popcount(lhs & ~((j << 1) - 1));
  }
  return (swaps % 2) ? -1 : 1;
}

namespace {

// out += s * a * b for n x n row-major blocks; either side may be 1 x 1.
void accumulate_product(std::span<const Complex> a, int ra, std::span<const Complex> b, int rb,
                        std::span<Complex> out, Complex s, std::size_t nodes) {
  const int n = std::max(ra, rb);
  const std::size_t bo = static_cast<std::size_t>(n) * n;
  if (ra == 1 && rb == 1) {
    for (std::size_t p = 0; p < nodes; ++p) out[p] += s * a[p] * b[p];
    return;
  }
  if (ra == 1) {
    for (std::size_t p = 0; p < nodes; ++p) {
      const Complex f = s * a[p];
      for (std::size_t k = 0; k < bo; ++k) out[p * bo + k] += f * b[p * bo + k];
    }
    return;
  }
  if (rb == 1) {
    for (std::size_t p = 0; p < nodes; ++p) {
      const Complex f = s * b[p];
      for (std::size_t k = 0; k < bo; ++k) out[p * bo + k] += f * a[p * bo + k];
    }
    return;
  }
  for (std::size_t p = 0; p < nodes; ++p) {
    const Complex* pa = &a[p * bo];
    const Complex* pb = &b[p * bo];
    Complex* po = &out[p * bo];
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const Complex aik = s * pa[i * n + k];
        if (aik == Complex{}) continue;
        for (int j = 0; j < n; ++j) po[i * n + j] += aik * pb[k * n + j];
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

MatrixForm::MatrixForm(GridPtr grid, int degree, int rank)
    : grid_(std::move(grid)), degree_(degree), rank_(rank) {
  if (!grid_) throw FormError("form requires a grid");
  if (rank_ < 1) throw FormError("form rank must be >= 1");
  if (degree_ < 0) throw FormError("form degree must be >= 0");
  comps_.resize(std::size_t{1} << grid_->dim());
}

MatrixForm MatrixForm::scalar(GridPtr grid, Complex value) {
  MatrixForm f(std::move(grid), 0, 1);
  auto c = f.component_mut(0);
  std::fill(c.begin(), c.end(), value);
  return f;
}

MatrixForm MatrixForm::identity(GridPtr grid, int rank) {
  MatrixForm f(std::move(grid), 0, rank);
  auto c = f.component_mut(0);
  const std::size_t bo = f.block();
  for (std::size_t p = 0; p < f.grid().size(); ++p) {
    for (int i = 0; i < rank; ++i) c[p * bo + i * rank + i] = 1.0;
  }
  return f;
}

bool MatrixForm::has(IndexMask mask) const {
  return mask < comps_.size() && !comps_[mask].empty();
}

std::span<const Complex> MatrixForm::component(IndexMask mask) const {
  if (!has(mask)) return {};
  return comps_[mask];
}

std::span<Complex> MatrixForm::component_mut(IndexMask mask) {
  if (mask >= comps_.size() || mask_degree(mask) != degree_) {
    throw FormError("component mask does not match form degree " + std::to_string(degree_));
  }
  auto& c = comps_[mask];
  if (c.empty()) c.assign(grid_->size() * block(), Complex{});
  return c;
}

std::vector<IndexMask> MatrixForm::masks() const {
  std::vector<IndexMask> out;
  for (IndexMask m = 0; m < comps_.size(); ++m) {
    if (!comps_[m].empty()) out.push_back(m);
  }
  return out;
}

MatrixForm& MatrixForm::fill(IndexMask mask, const Filler& f) {
  auto c = component_mut(mask);
  const std::size_t bo = block();
  std::vector<double> x(dim());
  for (std::size_t p = 0; p < grid_->size(); ++p) {
    grid_->coords(p, x);
    f(x, c.subspan(p * bo, bo));
  }
  return *this;
}

Complex MatrixForm::at(std::size_t node, IndexMask mask, int row, int col) const {
  if (!has(mask)) return {};
  return comps_[mask][node * block() + row * rank_ + col];
}

double MatrixForm::max_norm() const {
  double m = 0.0;
  for (const auto& c : comps_) {
    for (const auto& v : c) m = std::max(m, std::abs(v));
  }
  return m;
}

void MatrixForm::check_compatible(const MatrixForm& other, const char* op) const {
  if (!grid_->compatible(other.grid())) throw FormError(std::string(op) + ": grid mismatch");
  if (degree_ != other.degree_) throw FormError(std::string(op) + ": degree mismatch");
  if (rank_ != other.rank_) throw FormError(std::string(op) + ": rank mismatch");
}

MatrixForm& MatrixForm::operator+=(const MatrixForm& other) {
  check_compatible(other, "add");
  for (IndexMask m : other.masks()) {
    auto dst = component_mut(m);
    auto src = other.component(m);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return *this;
}

MatrixForm& MatrixForm::operator-=(const MatrixForm& other) {
  check_compatible(other, "subtract");
  for (IndexMask m : other.masks()) {
    auto dst = component_mut(m);
    auto src = other.component(m);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  }
  return *this;
}

MatrixForm& MatrixForm::operator*=(Complex s) {
  for (auto& c : comps_) {
    for (auto& v : c) v *= s;
  }
  return *this;
}

// ---------------------------------------------------------------------------

MatrixForm wedge(const MatrixForm& a, const MatrixForm& b) {
  if (!a.grid().compatible(b.grid())) throw FormError("wedge: grid mismatch");
  if (a.rank() != b.rank() && a.rank() != 1 && b.rank() != 1) {
    throw FormError("wedge: rank mismatch " + std::to_string(a.rank()) + " vs " +
                    std::to_string(b.rank()));
  }
  const int rank = std::max(a.rank(), b.rank());
  MatrixForm out(a.grid_ptr(), a.degree() + b.degree(), rank);
  if (out.degree() > a.dim()) return out;
  for (IndexMask ma : a.masks()) {
    for (IndexMask mb : b.masks()) {
      const int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      accumulate_product(a.component(ma), a.rank(), b.component(mb), b.rank(),
                         out.component_mut(ma | mb), static_cast<double>(s), a.grid().size());
    }
  }
  return out;
}

MatrixForm exterior_d(const MatrixForm& a) {
  MatrixForm out(a.grid_ptr(), a.degree() + 1, a.rank());
  if (out.degree() > a.dim()) return out;
  std::vector<Complex> scratch(a.grid().size() * a.block());
  for (IndexMask m : a.masks()) {
    for (int axis = 0; axis < a.dim(); ++axis) {
      const IndexMask bit = IndexMask{1} << axis;
      if (m & bit) continue;
      a.grid().differentiate(axis, a.component(m), scratch, a.block());
      const double s = wedge_sign(bit, m);
      auto dst = out.component_mut(m | bit);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += s * scratch[k];
    }
  }
  return out;
}

MatrixForm trace(const MatrixForm& a) {
  MatrixForm out(a.grid_ptr(), a.degree(), 1);
  const int n = a.rank();
  const std::size_t bo = a.block();
  for (IndexMask m : a.masks()) {
    auto src = a.component(m);
    auto dst = out.component_mut(m);
    for (std::size_t p = 0; p < a.grid().size(); ++p) {
      Complex t{};
      for (int i = 0; i < n; ++i) t += src[p * bo + i * n + i];
      dst[p] = t;
    }
  }
  return out;
}

MatrixForm graded_commutator(const MatrixForm& a, const MatrixForm& b) {
  MatrixForm out = wedge(a, b);
  const double s = ((a.degree() * b.degree()) % 2) ? -1.0 : 1.0;
  out -= s * wedge(b, a);
  return out;
}

Complex integrate_chart(const MatrixForm& a, int orientation) {
  if (a.rank() != 1) throw FormError("integrate: form must be scalar (rank 1)");
  if (a.degree() != a.dim()) {
    throw FormError("integrate: degree " + std::to_string(a.degree()) +
                    " does not match dimension " + std::to_string(a.dim()));
  }
  const IndexMask top = (IndexMask{1} << a.dim()) - 1;
  auto c = a.component(top);
  if (c.empty()) return {};
  auto w = a.grid().quad_weight();
  Complex sum{};
  for (std::size_t p = 0; p < c.size(); ++p) sum += w[p] * c[p];
  return static_cast<double>(orientation) * sum;
}

double max_norm_on_support(const MatrixForm& a) {
  auto w = a.grid().quad_weight();
  const std::size_t bo = a.block();
  double m = 0.0;
  for (IndexMask mask : a.masks()) {
    auto c = a.component(mask);
    for (std::size_t p = 0; p < w.size(); ++p) {
      if (w[p] <= 0.0) continue;
      for (std::size_t k = 0; k < bo; ++k) m = std::max(m, std::abs(c[p * bo + k]));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

MixedForm::MixedForm(GridPtr grid, int rank) : grid_(std::move(grid)), rank_(rank) {
  parts_.resize(grid_->dim() + 1);
}

MixedForm::MixedForm(const MatrixForm& homogeneous)
    : MixedForm(homogeneous.grid_ptr(), homogeneous.rank()) {
  add(homogeneous);
}

bool MixedForm::has(int degree) const {
  return degree >= 0 && degree < static_cast<int>(parts_.size()) && parts_[degree].has_value();
}

const MatrixForm& MixedForm::part(int degree) const {
  if (!has(degree)) throw FormError("mixed form has no part of degree " + std::to_string(degree));
  return *parts_[degree];
}

MatrixForm MixedForm::part_or_zero(int degree) const {
  if (has(degree)) return *parts_[degree];
  return MatrixForm(grid_, degree, rank_);
}

void MixedForm::add(const MatrixForm& f) {
  if (f.rank() != rank_) throw FormError("mixed form: rank mismatch");
  if (f.degree() > dim()) return;
  auto& slot = parts_[f.degree()];
  if (slot) {
    *slot += f;
  } else {
    slot = f;
  }
}

MixedForm& MixedForm::operator+=(const MixedForm& other) {
  for (const auto& p : other.parts_) {
    if (p) add(*p);
  }
  return *this;
}

MixedForm& MixedForm::operator*=(Complex s) {
  for (auto& p : parts_) {
    if (p) *p *= s;
  }
  return *this;
}

double MixedForm::max_norm() const {
  double m = 0.0;
  for (const auto& p : parts_) {
    if (p) m = std::max(m, p->max_norm());
  }
  return m;
}

MixedForm wedge(const MixedForm& a, const MixedForm& b) {
  MixedForm out(a.grid_ptr(), std::max(a.rank(), b.rank()));
  for (int p = 0; p <= a.dim(); ++p) {
    if (!a.has(p)) continue;
    for (int q = 0; p + q <= a.dim(); ++q) {
      if (!b.has(q)) continue;
      out.add(wedge(a.part(p), b.part(q)));
    }
  }
  return out;
}

MixedForm trace(const MixedForm& a) {
  MixedForm out(a.grid_ptr(), 1);
  for (int p = 0; p <= a.dim(); ++p) {
    if (a.has(p)) out.add(trace(a.part(p)));
  }
  return out;
}

MixedForm exterior_d(const MixedForm& a) {
  MixedForm out(a.grid_ptr(), a.rank());
  for (int p = 0; p < a.dim(); ++p) {
    if (a.has(p)) out.add(exterior_d(a.part(p)));
  }
  return out;
}

MixedForm exp_nilpotent(const MixedForm& s) {
  if (s.rank() != 1) throw FormError("exp_nilpotent: scalar forms only");
  if (s.has(0) && s.part(0).max_norm() != 0.0) {
    throw FormError("exp_nilpotent: degree-0 part must vanish");
  }
  MixedForm out(MatrixForm::scalar(s.grid_ptr(), 1.0));
  MixedForm power(MatrixForm::scalar(s.grid_ptr(), 1.0));
  double factorial = 1.0;
  for (int k = 1; k <= s.dim(); ++k) {
    power = wedge(power, s);
    if (power.max_norm() == 0.0) break;
    factorial *= k;
    MixedForm term = power;
    term *= 1.0 / factorial;
    out += term;
  }
  return out;
}

// ---------------------------------------------------------------------------

GridPtr product_grid(const ChartGrid& a, const ChartGrid& b) {
  return std::make_shared<const ChartGrid>(ChartGrid::product(a, b));
}

namespace {

MatrixForm pull_back(const MatrixForm& f, const GridPtr& product, bool first) {
  const ChartGrid& g = *product;
  const int df = f.dim();
  const int shift = first ? 0 : g.dim() - df;
  const std::size_t other = g.size() / f.grid().size();
  if (g.size() != other * f.grid().size() || df > g.dim()) {
    throw FormError("pull_back: factor does not divide the product chart");
  }
  MatrixForm out(product, f.degree(), f.rank());
  const std::size_t bo = f.block();
  for (IndexMask m : f.masks()) {
    auto src = f.component(m);
    auto dst = out.component_mut(m << shift);
    for (std::size_t p = 0; p < f.grid().size(); ++p) {
      for (std::size_t q = 0; q < other; ++q) {
        const std::size_t node = first ? p * other + q : q * f.grid().size() + p;
        std::copy_n(&src[p * bo], bo, &dst[node * bo]);
      }
    }
  }
  return out;
}

}  // namespace

MatrixForm pull_back_first(const MatrixForm& a, const GridPtr& product) {
  return pull_back(a, product, true);
}

MatrixForm pull_back_second(const MatrixForm& b, const GridPtr& product) {
  return pull_back(b, product, false);
}

MatrixForm fiber_integrate(const MatrixForm& a, const GridPtr& base, const ChartGrid& fiber) {
  const int db = base->dim();
  const int dfib = fiber.dim();
  if (db + dfib != a.dim() || base->size() * fiber.size() != a.grid().size()) {
    throw FormError("fiber_integrate: form does not live on base x fiber");
  }
  const int out_degree = a.degree() - dfib;
  MatrixForm out(base, std::max(out_degree, 0), a.rank());
  if (out_degree < 0) return out;
  const IndexMask fiber_mask = ((IndexMask{1} << dfib) - 1) << db;
  const IndexMask base_mask = (IndexMask{1} << db) - 1;
  const std::size_t bo = a.block();
  auto wf = fiber.quad_weight();
  for (IndexMask m : a.masks()) {
    if ((m & fiber_mask) != fiber_mask) continue;
    auto src = a.component(m);
    auto dst = out.component_mut(m & base_mask);
    for (std::size_t p = 0; p < base->size(); ++p) {
      for (std::size_t q = 0; q < fiber.size(); ++q) {
        const std::size_t node = p * fiber.size() + q;
        for (std::size_t k = 0; k < bo; ++k) dst[p * bo + k] += wf[q] * src[node * bo + k];
      }
    }
  }
  return out;
}

MixedForm fiber_integrate(const MixedForm& a, const GridPtr& base, const ChartGrid& fiber) {
  MixedForm out(base, a.rank());
  for (int p = fiber.dim(); p <= a.dim(); ++p) {
    if (a.has(p)) out.add(fiber_integrate(a.part(p), base, fiber));
  }
  return out;
}

}  // namespace cwcs
