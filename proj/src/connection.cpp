#include "cwcs/connection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cwcs {

namespace {

double max_spacing(const ChartGrid& g) {
  double h = 0.0;
  for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.spacing(a));
  return h;
}

void require_potential(const Connection& c, const char* op) {
  if (!c.has_potential()) {
    throw ConnectionError(std::string(op) + ": connection '" + c.name() +
                          "' is given by its curvature only (no potential)");
  }
}

// Block-diagonal embedding of two forms of equal degree.
MatrixForm block_diag(const MatrixForm& a, const MatrixForm& b) {
  const int na = a.rank();
  const int nb = b.rank();
  const int n = na + nb;
  MatrixForm out(a.grid_ptr(), a.degree(), n);
  const std::size_t size = a.grid().size();
  auto place = [&](const MatrixForm& f, int offset) {
    const int r = f.rank();
    for (IndexMask m : f.masks()) {
      auto src = f.component(m);
      auto dst = out.component_mut(m);
      for (std::size_t p = 0; p < size; ++p) {
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < r; ++j) {
            dst[p * n * n + (offset + i) * n + offset + j] = src[p * r * r + i * r + j];
          }
        }
      }
    }
  };
  place(a, 0);
  place(b, na);
  return out;
}

// a (x) 1_{nb} + 1_{na} (x) b.
MatrixForm kron_sum(const MatrixForm& a, int nb_rank, const MatrixForm* b, int na_rank) {
  const int na = na_rank;
  const int nb = nb_rank;
  const int n = na * nb;
  const GridPtr& grid = a.grid_ptr();
  MatrixForm out(grid, a.degree(), n);
  const std::size_t size = grid->size();
  for (IndexMask m : a.masks()) {
    auto src = a.component(m);
    auto dst = out.component_mut(m);
    for (std::size_t p = 0; p < size; ++p) {
      for (int i = 0; i < na; ++i) {
        for (int j = 0; j < na; ++j) {
          const Complex v = src[p * na * na + i * na + j];
          for (int k = 0; k < nb; ++k) dst[p * n * n + (i * nb + k) * n + j * nb + k] += v;
        }
      }
    }
  }
  if (!b) return out;
  for (IndexMask m : b->masks()) {
    auto src = b->component(m);
    auto dst = out.component_mut(m);
    for (std::size_t p = 0; p < size; ++p) {
      for (int i = 0; i < na; ++i) {
        for (int k = 0; k < nb; ++k) {
          for (int l = 0; l < nb; ++l) {
            dst[p * n * n + (i * nb + k) * n + i * nb + l] += src[p * nb * nb + k * nb + l];
          }
        }
      }
    }
  }
  return out;
}

MatrixForm copy_to_grid(const MatrixForm& f, const GridPtr& grid) {
  if (!grid->compatible(f.grid())) throw ConnectionError("rebind: node layouts differ");
  MatrixForm out(grid, f.degree(), f.rank());
  for (IndexMask m : f.masks()) {
    auto src = f.component(m);
    std::copy(src.begin(), src.end(), out.component_mut(m).begin());
  }
  return out;
}

// Wedge power r^k (k >= 1).
MatrixForm wedge_power(const MatrixForm& r, int k) {
  MatrixForm p = r;
  for (int i = 1; i < k; ++i) p = wedge(p, r);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

Connection Connection::from_potential(std::string name, MatrixForm potential) {
  if (potential.degree() != 1) throw ConnectionError("potential must be a 1-form");
  Connection c(std::move(name), potential.grid_ptr(), potential.rank());
  c.potential_ = std::move(potential);
  return c;
}

Connection Connection::from_curvature(std::string name, MatrixForm curvature) {
  if (curvature.degree() != 2) throw ConnectionError("curvature must be a 2-form");
  Connection c(std::move(name), curvature.grid_ptr(), curvature.rank());
  c.curvature_ = std::move(curvature);
  return c;
}

Connection Connection::with_curvature(std::string name, MatrixForm potential,
                                      MatrixForm curvature) {
  if (potential.degree() != 1) throw ConnectionError("potential must be a 1-form");
  if (curvature.degree() != 2) throw ConnectionError("curvature must be a 2-form");
  if (potential.rank() != curvature.rank()) {
    throw ConnectionError("potential and curvature ranks differ");
  }
  // Discretization error of dA scales with the size of the field, hence the
  // relative bound.
  const double h = max_spacing(potential.grid());
  const double scale = std::max(1.0, curvature.max_norm());
  const double residual = max_norm_on_support(curvature - curvature_from_potential(potential));
  if (residual > 10.0 * h * h * scale) {
    throw ConnectionError("connection '" + name + "': analytic curvature differs from dA + A^A by " +
                          std::to_string(residual));
  }
  Connection c(std::move(name), potential.grid_ptr(), potential.rank());
  c.potential_ = std::move(potential);
  c.curvature_ = std::move(curvature);
  return c;
}

Connection Connection::trivial(std::string name, GridPtr grid, int rank) {
  return from_potential(std::move(name), MatrixForm(std::move(grid), 1, rank));
}

const MatrixForm& Connection::potential() const {
  require_potential(*this, "potential");
  return *potential_;
}

Connection Connection::renamed(std::string name) const {
  Connection c = *this;
  c.name_ = std::move(name);
  return c;
}

MatrixForm curvature_from_potential(const MatrixForm& a) {
  return exterior_d(a) + wedge(a, a);
}

MatrixForm curvature(const Connection& c) {
  if (c.analytic_curvature()) return *c.analytic_curvature();
  return curvature_from_potential(c.potential());
}

double bianchi_residual(const Connection& c) {
  const MatrixForm r = curvature(c);
  if (!c.has_potential()) return max_norm_on_support(exterior_d(r));
  const MatrixForm& a = c.potential();
  return max_norm_on_support(exterior_d(r) - (wedge(r, a) - wedge(a, r)));
}

MatrixForm trace_power(const MatrixForm& r, int l) {
  if (l < 1) throw ConnectionError("trace power needs l >= 1");
  if (r.degree() * l > r.dim()) return MatrixForm(r.grid_ptr(), r.degree() * l, 1);
  return trace(wedge_power(r, l));
}

MatrixForm char_power(const Connection& c, int l) { return trace_power(curvature(c), l); }

std::vector<double> log_todd_coefficients(int kmax, ToddSign sign) {
  // (1 - e^{-x})/x = sum_k (-1)^k x^k/(k+1)!, and log td = -log of that.
  std::vector<double> g(kmax + 1);
  double fact = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    fact *= (k + 1);
    g[k] = ((k % 2) ? -1.0 : 1.0) / fact;
  }
  // log g via l' = g'/g, i.e. k l_k = k g_k - sum_{j=1}^{k-1} j l_j g_{k-j}.
  std::vector<double> l(kmax + 1, 0.0);
  for (int k = 1; k <= kmax; ++k) {
    double s = k * g[k];
    for (int j = 1; j < k; ++j) s -= j * l[j] * g[k - j];
    l[k] = s / k;
  }
  for (int k = 1; k <= kmax; ++k) {
    l[k] = -l[k];
    if (sign == ToddSign::Flipped && (k % 2)) l[k] = -l[k];
  }
  return l;
}

MixedForm chern_character(const Connection& c) {
  const GridPtr& g = c.grid_ptr();
  MixedForm out(MatrixForm::scalar(g, static_cast<double>(c.rank())));
  const int kmax = g->dim() / 2;
  if (kmax == 0) return out;
  const MatrixForm r = curvature(c);
  MatrixForm power = r;
  double fact = 1.0;
  Complex norm = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    if (k > 1) power = wedge(power, r);
    fact *= k;
    norm *= kChernNorm;
    out.add(trace(power) * (norm / fact));
  }
  return out;
}

MixedForm todd_form(const Connection& c, ToddSign sign) {
  const GridPtr& g = c.grid_ptr();
  const int kmax = g->dim() / 2;
  MixedForm log_td(g, 1);
  if (kmax > 0) {
    const auto coeff = log_todd_coefficients(kmax, sign);
    const MatrixForm r = curvature(c);
    MatrixForm power = r;
    Complex norm = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      if (k > 1) power = wedge(power, r);
      norm *= kChernNorm;
      if (coeff[k] != 0.0) log_td.add(trace(power) * (norm * coeff[k]));
    }
  }
  return exp_nilpotent(log_td);
}

Connection direct_sum(const Connection& a, const Connection& b) {
  if (!a.grid_ptr()->compatible(*b.grid_ptr())) {
    throw ConnectionError("direct_sum: grid mismatch");
  }
  const std::string name = a.name() + "+" + b.name();
  if (a.has_potential() && b.has_potential()) {
    MatrixForm pot = block_diag(a.potential(), b.potential());
    if (!a.analytic_curvature() && !b.analytic_curvature()) {
      return Connection::from_potential(name, std::move(pot));
    }
    return Connection::with_curvature(name, std::move(pot),
                                      block_diag(curvature(a), curvature(b)));
  }
  return Connection::from_curvature(name, block_diag(curvature(a), curvature(b)));
}

Connection tensor_product(const Connection& a, const Connection& b) {
  if (!a.grid_ptr()->compatible(*b.grid_ptr())) {
    throw ConnectionError("tensor_product: grid mismatch");
  }
  const std::string name = a.name() + "*" + b.name();
  const int na = a.rank();
  const int nb = b.rank();
  auto combine = [&](const MatrixForm& fa, const MatrixForm& fb) {
    return kron_sum(fa, nb, &fb, na);
  };
  MatrixForm curv = combine(curvature(a), curvature(b));
  if (a.has_potential() && b.has_potential()) {
    MatrixForm pot = combine(a.potential(), b.potential());
    if (!a.analytic_curvature() && !b.analytic_curvature()) {
      return Connection::from_potential(name, std::move(pot));
    }
    return Connection::with_curvature(name, std::move(pot), std::move(curv));
  }
  return Connection::from_curvature(name, std::move(curv));
}

namespace {

Connection pull_back_impl(const Connection& c, const GridPtr& product, bool first) {
  auto pb = [&](const MatrixForm& f) {
    return first ? pull_back_first(f, product) : pull_back_second(f, product);
  };
  if (c.has_potential()) {
    if (!c.analytic_curvature()) return Connection::from_potential(c.name(), pb(c.potential()));
    return Connection::with_curvature(c.name(), pb(c.potential()), pb(*c.analytic_curvature()));
  }
  return Connection::from_curvature(c.name(), pb(*c.analytic_curvature()));
}

}  // namespace

Connection pull_back_first(const Connection& c, const GridPtr& product) {
  return pull_back_impl(c, product, true);
}

Connection pull_back_second(const Connection& c, const GridPtr& product) {
  return pull_back_impl(c, product, false);
}

Connection rebind(const Connection& c, const GridPtr& grid) {
  if (c.has_potential()) {
    if (!c.analytic_curvature()) {
      return Connection::from_potential(c.name(), copy_to_grid(c.potential(), grid));
    }
    return Connection::with_curvature(c.name(), copy_to_grid(c.potential(), grid),
                                      copy_to_grid(*c.analytic_curvature(), grid));
  }
  return Connection::from_curvature(c.name(), copy_to_grid(*c.analytic_curvature(), grid));
}

// ---------------------------------------------------------------------------

ConnectionCurve::ConnectionCurve(Connection start, Connection end)
    : start_(std::move(start)), end_(std::move(end)),
      delta_(MatrixForm(start_.grid_ptr(), 1, start_.rank())) {
  require_potential(start_, "ConnectionCurve");
  require_potential(end_, "ConnectionCurve");
  if (start_.rank() != end_.rank()) throw ConnectionError("curve endpoints differ in rank");
  if (!start_.grid_ptr()->compatible(*end_.grid_ptr())) {
    throw ConnectionError("curve endpoints live on different grids");
  }
  delta_ = end_.potential() - start_.potential();
}

ConnectionCurve::ConnectionCurve(Connection start, Connection end, MatrixForm bend)
    : ConnectionCurve(std::move(start), std::move(end)) {
  if (bend.degree() != 1 || bend.rank() != rank()) {
    throw ConnectionError("curve bend must be a 1-form of the bundle rank");
  }
  bend_ = std::move(bend);
}

MatrixForm ConnectionCurve::potential(double t) const {
  if (t == 0.0) return start_.potential();
  if (t == 1.0) return end_.potential();
  MatrixForm a = start_.potential() + delta_ * Complex(t);
  if (bend_) a += *bend_ * Complex(t * (1.0 - t));
  return a;
}

MatrixForm ConnectionCurve::velocity(double t) const {
  MatrixForm b = delta_;
  if (bend_) b += *bend_ * Complex(1.0 - 2.0 * t);
  return b;
}

MatrixForm ConnectionCurve::curvature(double t) const {
  return curvature_from_potential(potential(t));
}

void gauss_legendre_01(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

// Gauss-Legendre nodes exact for the integrand's polynomial degree in t.
int node_count(const ConnectionCurve& curve, int total_l) {
  const int p = curve.degree();
  const int deg = (p - 1) + 2 * p * (total_l - 1);
  return deg / 2 + 1;
}

template <class Integrand>
MatrixForm integrate_t(const ConnectionCurve& curve, int total_l, int out_degree, Integrand f) {
  std::vector<double> ts;
  std::vector<double> ws;
  gauss_legendre_01(node_count(curve, total_l), ts, ws);
  MatrixForm acc(curve.start().grid_ptr(), out_degree, 1);
  for (std::size_t i = 0; i < ts.size(); ++i) acc += f(ts[i]) * Complex(ws[i]);
  return acc;
}

}  // namespace

MatrixForm transgression_integrand(const ConnectionCurve& curve, int l, double t) {
  if (l < 1) throw ConnectionError("transgression needs l >= 1");
  const MatrixForm b = curve.velocity(t);
  if (2 * l - 1 > b.dim()) return MatrixForm(b.grid_ptr(), 2 * l - 1, 1);
  MatrixForm prod = b;
  if (l > 1) prod = wedge(b, wedge_power(curve.curvature(t), l - 1));
  return trace(prod) * Complex(static_cast<double>(l));
}

MatrixForm transgression(const ConnectionCurve& curve, int l) {
  return integrate_t(curve, l, 2 * l - 1,
                     [&](double t) { return transgression_integrand(curve, l, t); });
}

double transgression_residual(const ConnectionCurve& curve, int l) {
  const MatrixForm tp = transgression(curve, l);
  const MatrixForm dp = char_power(curve.end(), l) - char_power(curve.start(), l);
  return max_norm_on_support(exterior_d(tp) - dp);
}

MatrixForm transgression_product(const ConnectionCurve& curve, int l1, int l2) {
  if (l1 < 1 || l2 < 1) throw ConnectionError("transgression_product needs l1, l2 >= 1");
  return integrate_t(curve, l1 + l2, 2 * (l1 + l2) - 1, [&](double t) {
    const MatrixForm r = curve.curvature(t);
    const MatrixForm tb1 = transgression_integrand(curve, l1, t);
    const MatrixForm tb2 = transgression_integrand(curve, l2, t);
    return wedge(tb1, trace_power(r, l2)) + wedge(trace_power(r, l1), tb2);
  });
}

double transgression_product_check(const ConnectionCurve& curve, int l1, int l2,
                                   const CycleBasis& cycles) {
  const MatrixForm lhs = transgression_product(curve, l1, l2);
  const MatrixForm rhs = wedge(transgression(curve, l1), char_power(curve.start(), l2)) +
                         wedge(char_power(curve.end(), l1), transgression(curve, l2));
  const MatrixForm diff = lhs - rhs;
  double worst = 0.0;
  for (const Cycle* c : cycles.of_dimension(diff.degree())) {
    worst = std::max(worst, std::abs(period(diff, *c)));
  }
  return worst;
}

CsReport cs_equivalent(const Connection& c0, const Connection& c1, const CycleBasis& cycles,
                       double tol) {
  if (c0.rank() != c1.rank()) throw ConnectionError("cs_equivalent: ranks differ");
  const ConnectionCurve curve(c0, c1);
  CsReport report;
  const int dim = c0.grid_ptr()->dim();
  for (int l = 1; l <= c0.rank() && 2 * l - 1 <= dim; ++l) {
    CsLevel lv;
    lv.l = l;
    Complex norm = 1.0;
    for (int k = 0; k < l; ++k) norm *= kChernNorm;
    const MatrixForm tp = transgression(curve, l) * norm;
    lv.closedness = max_norm_on_support(exterior_d(tp));
    for (const Cycle* c : cycles.of_dimension(2 * l - 1)) {
      lv.max_period = std::max(lv.max_period, std::abs(period(tp, *c)));
      ++lv.cycles_checked;
    }
    lv.exact = lv.closedness < tol && lv.max_period < tol;
    report.equivalent = report.equivalent && lv.exact;
    report.levels.push_back(lv);
  }
  return report;
}

}  // namespace cwcs
