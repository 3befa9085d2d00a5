#include "cwcs/grid.hpp"

#include <array>
#include <sstream>

namespace cwcs {

namespace {

// SBP(4,2) boundary closure, rows 0..3 acting on columns 0..5, in units of 1/h.
constexpr std::array<std::array<double, 6>, 4> kSbpBoundary = {{
    {-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0, 0.0, 0.0},
    {-1.0 / 2.0, 0.0, 1.0 / 2.0, 0.0, 0.0, 0.0},
    {4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0},
    {3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0},
}};

constexpr std::array<double, 4> kSbpNorm = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0,
                                            49.0 / 48.0};

}  // namespace

ChartGrid::ChartGrid(std::vector<int> resolution, std::vector<bool> periodic)
    : resolution_(std::move(resolution)), periodic_(std::move(periodic)) {
  if (resolution_.empty() || resolution_.size() > static_cast<std::size_t>(kMaxDim)) {
    throw GridError("chart dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (periodic_.size() != resolution_.size()) {
    throw GridError("periodic flags must match the number of axes");
  }
  const int d = dim();
  spacing_.resize(d);
  stride_.resize(d);
  axis_weights_.resize(d);
  size_ = 1;
  for (int a = d - 1; a >= 0; --a) {
    const int n = resolution_[a];
    if (periodic_[a] && n < 3) {
      throw GridError("periodic axis " + std::to_string(a) + " needs at least 3 nodes");
    }
    if (!periodic_[a] && n < kMinOpenAxisNodes) {
      throw GridError("non-periodic axis " + std::to_string(a) + " needs at least " +
                      std::to_string(kMinOpenAxisNodes) + " nodes");
    }
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(n);
    const double h = periodic_[a] ? 1.0 / n : 1.0 / (n - 1);
    spacing_[a] = h;
    auto& w = axis_weights_[a];
    w.assign(n, h);
    if (!periodic_[a]) {
      for (int i = 0; i < 4; ++i) {
        w[i] = kSbpNorm[i] * h;
        w[n - 1 - i] = kSbpNorm[i] * h;
      }
    }
  }
  weights_.resize(size_);
  for (std::size_t node = 0; node < size_; ++node) {
    double w = 1.0;
    for (int a = 0; a < d; ++a) w *= axis_weights_[a][axis_index(node, a)];
    weights_[node] = w;
  }
}

void ChartGrid::coords(std::size_t node, std::span<double> out) const {
  for (int a = 0; a < dim(); ++a) out[a] = coord(a, axis_index(node, a));
}

std::vector<double> ChartGrid::coords(std::size_t node) const {
  std::vector<double> x(dim());
  coords(node, x);
  return x;
}

double ChartGrid::axis_weight(int axis, int i) const { return axis_weights_.at(axis).at(i); }

ChartGrid ChartGrid::masked(const std::function<bool(std::span<const double>)>& inside) const {
  ChartGrid out = *this;
  std::vector<double> x(dim());
  for (std::size_t node = 0; node < size_; ++node) {
    coords(node, x);
    if (!inside(x)) out.weights_[node] = 0.0;
  }
  out.masked_ = true;
  return out;
}

ChartGrid ChartGrid::scaled(double factor) const {
  ChartGrid out = *this;
  for (auto& w : out.weights_) w *= factor;
  return out;
}

ChartGrid ChartGrid::product(const ChartGrid& a, const ChartGrid& b) {
  std::vector<int> res = a.resolution_;
  res.insert(res.end(), b.resolution_.begin(), b.resolution_.end());
  std::vector<bool> per = a.periodic_;
  per.insert(per.end(), b.periodic_.begin(), b.periodic_.end());
  ChartGrid out(std::move(res), std::move(per));
  for (std::size_t i = 0; i < a.size_; ++i) {
    for (std::size_t j = 0; j < b.size_; ++j) {
      out.weights_[i * b.size_ + j] = a.weights_[i] * b.weights_[j];
    }
  }
  out.masked_ = a.masked_ || b.masked_;
  return out;
}

bool ChartGrid::compatible(const ChartGrid& other) const {
  return resolution_ == other.resolution_ && periodic_ == other.periodic_;
}

void ChartGrid::differentiate(int axis, std::span<const Complex> in, std::span<Complex> out,
                              std::size_t block) const {
  if (in.size() != size_ * block || out.size() != size_ * block) {
    throw GridError("differentiate: array size does not match grid");
  }
  const int n = resolution_.at(axis);
  const std::size_t s = stride_[axis] * block;
  const double inv_h = 1.0 / spacing_[axis];
  const std::size_t outer = size_ / (stride_[axis] * n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t inner = 0; inner < stride_[axis]; ++inner) {
      const std::size_t base = (o * stride_[axis] * n + inner) * block;
      for (std::size_t b = 0; b < block; ++b) {
        auto f = [&](int i) { return in[base + b + i * s]; };
        auto put = [&](int i, Complex v) { out[base + b + i * s] = v; };
        if (periodic_[axis]) {
          for (int i = 0; i < n; ++i) {
            const int ip = (i + 1) % n;
            const int im = (i + n - 1) % n;
            put(i, 0.5 * inv_h * (f(ip) - f(im)));
          }
          continue;
        }
        for (int i = 0; i < 4; ++i) {
          Complex lo = 0.0;
          Complex hi = 0.0;
          for (int j = 0; j < 6; ++j) {
            lo += kSbpBoundary[i][j] * f(j);
            hi -= kSbpBoundary[i][j] * f(n - 1 - j);
          }
          put(i, inv_h * lo);
          put(n - 1 - i, inv_h * hi);
        }
        for (int i = 4; i < n - 4; ++i) {
          const Complex v = (f(i - 2) - f(i + 2)) / 12.0 + (f(i + 1) - f(i - 1)) * (2.0 / 3.0);
          put(i, inv_h * v);
        }
      }
    }
  }
}

std::string ChartGrid::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim(); ++a) {
    if (a) os << "x";
    os << resolution_[a] << (periodic_[a] ? "p" : "o");
  }
  return os.str();
}

}  // namespace cwcs
