#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "cwcs/connection.hpp"
#include "cwcs/cycles.hpp"

using namespace cwcs;
using cwcs::testing::kTwoPi;

namespace {

Connection random_connection(const GridPtr& g, int rank, double amp, std::mt19937& rng,
                             const char* name) {
  return Connection::from_potential(name, testing::random_form(g, 1, rank, amp, rng));
}

CycleBasis torus_cycles(const ChartGrid& g, int k) {
  CycleBasis basis;
  const int d = g.dim();
  for (IndexMask m = 0; m < (IndexMask{1} << d); ++m) {
    if (mask_degree(m) == k) basis.cycles.push_back(coordinate_cycle(g, m, {}, "c"));
  }
  return basis;
}

}  // namespace

TEST_CASE("log Todd coefficients") {
  auto c = log_todd_coefficients(6);
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(c[2] == doctest::Approx(-1.0 / 24.0));
  CHECK(std::abs(c[3]) < 1e-15);
  CHECK(c[4] == doctest::Approx(1.0 / 2880.0));
  CHECK(std::abs(c[5]) < 1e-15);
  CHECK(c[6] == doctest::Approx(-1.0 / 181440.0));
  auto f = log_todd_coefficients(4, ToddSign::Flipped);
  CHECK(f[1] == doctest::Approx(-0.5));
  CHECK(f[2] == doctest::Approx(-1.0 / 24.0));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int m = 1; m <= 6; ++m) {
    std::vector<double> t;
    std::vector<double> w;
    gauss_legendre_01(m, t, w);
    for (int p = 0; p <= 2 * m - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += w[i] * std::pow(t[i], p);
      CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("flat abelian connection has zero curvature and characteristic forms") {
  auto g = testing::torus(2, 16);
  MatrixForm a(g, 1, 1);
  a.fill(0b01, [](auto, auto m) { m[0] = Complex(0.0, -kTwoPi * 0.3); });
  auto c = Connection::from_potential("flat", a);
  CHECK(curvature(c).is_zero());
  CHECK(char_power(c, 1).is_zero());
  CHECK(char_power(c, 2).degree() == 4);
  CHECK(char_power(c, 2).is_zero());
  auto td = todd_form(c);
  CHECK(td.part(0).at(0, 0) == Complex(1.0));
  CHECK(td.part_or_zero(2).is_zero());
  auto ch = chern_character(Connection::trivial("triv", g, 3));
  CHECK(ch.part(0).at(0, 0) == Complex(3.0));
  CHECK(ch.part_or_zero(2).is_zero());
}

TEST_CASE("Bianchi residual is second order for random rank-2 potentials") {
  std::vector<double> res;
  for (int n : {16, 32}) {
    std::mt19937 rng(17);
    auto g = testing::torus(3, n);
    auto c = random_connection(g, 2, 0.1, rng, "A");
    const double h = 1.0 / n;
    res.push_back(bianchi_residual(c));
    CHECK(res.back() < 10.0 * h * h);
  }
  CHECK(std::log2(res[0] / res[1]) > 1.9);
}

TEST_CASE("analytic curvature is validated against dA + A^A") {
  auto g = testing::torus(2, 32);
  MatrixForm a(g, 1, 1);
  a.fill(0b10, [](auto x, auto m) { m[0] = Complex(0.0, std::sin(kTwoPi * x[0])); });
  MatrixForm f(g, 2, 1);
  f.fill(0b11, [](auto x, auto m) { m[0] = Complex(0.0, kTwoPi * std::cos(kTwoPi * x[0])); });
  CHECK_NOTHROW(Connection::with_curvature("ok", a, f));
  CHECK_THROWS_AS(Connection::with_curvature("bad", a, f * Complex(2.0)), ConnectionError);
}

TEST_CASE("closedness of trace powers") {
  std::mt19937 rng(4);
  const int n = 16;
  auto g = testing::torus(4, n);
  auto c = random_connection(g, 2, 0.1, rng, "A");
  const double h = 1.0 / n;
  for (int l = 1; l <= 2; ++l) CHECK(exterior_d(char_power(c, l)).max_norm() < 10.0 * h * h);
}

TEST_CASE("ch is additive and Todd multiplicative under direct sum") {
  std::mt19937 rng(8);
  auto g = testing::torus(4, 8);
  auto a = random_connection(g, 1, 0.2, rng, "a");
  auto b = random_connection(g, 1, 0.2, rng, "b");
  auto s = direct_sum(a, b);
  auto ch_sum = chern_character(a) + chern_character(b);
  for (int p = 0; p <= 4; p += 2) {
    CHECK((chern_character(s).part_or_zero(p) - ch_sum.part_or_zero(p)).max_norm() < 1e-13);
  }
  auto prod = wedge(todd_form(a), todd_form(b));
  auto ts = todd_form(s);
  for (int p = 0; p <= 4; p += 2) {
    CHECK((ts.part_or_zero(p) - prod.part_or_zero(p)).max_norm() < 1e-13);
  }
}

TEST_CASE("tensor product of line bundles adds curvatures") {
  std::mt19937 rng(12);
  auto g = testing::torus(2, 16);
  auto a = random_connection(g, 1, 0.3, rng, "a");
  auto b = random_connection(g, 1, 0.3, rng, "b");
  auto t = tensor_product(a, b);
  CHECK((curvature(t) - (curvature(a) + curvature(b))).max_norm() < 1e-13);
  auto r2 = random_connection(g, 2, 0.3, rng, "r2");
  auto t2 = tensor_product(r2, Connection::trivial("one", g, 3));
  CHECK(t2.rank() == 6);
  CHECK((char_power(t2, 1) - char_power(r2, 1) * Complex(3.0)).max_norm() < 1e-12);
}

TEST_CASE("trace-power products are the wedge of trace powers") {
  std::mt19937 rng(13);
  auto g = testing::torus(4, 8);
  auto c = random_connection(g, 2, 0.2, rng, "A");
  const auto r = curvature(c);
  // tr(R) tr(R) vs tr(R) ^ tr(R): the Chern-Weil map on the product P1 P1.
  auto lhs = wedge(char_power(c, 1), char_power(c, 1));
  auto tr = trace(r);
  CHECK((lhs - wedge(tr, tr)).max_norm() < 1e-13);
  CHECK((char_power(c, 2) - trace(wedge(r, r))).max_norm() < 1e-13);
}

TEST_CASE("transgression: trivial and abelian closed forms") {
  auto g = testing::torus(1, 64);
  auto zero = Connection::trivial("zero", g, 1);
  CHECK(transgression(ConnectionCurve(zero, zero), 1).is_zero());

  const double a = 0.3;
  MatrixForm pot(g, 1, 1);
  pot.fill(0b1, [&](auto, auto m) { m[0] = Complex(0.0, -kTwoPi * a); });
  auto flat = Connection::from_potential("flat", pot);
  auto tp = transgression(ConnectionCurve(zero, flat), 1);
  CHECK((tp - pot).max_norm() < 1e-14);
  auto circle = coordinate_cycle(*g, 0b1, {}, "S1");
  CHECK(std::abs(period(tp * kChernNorm, circle) - a) < 1e-14);
}

TEST_CASE("transgression residual on random rank-2 pairs") {
  for (int dim : {2, 4}) {
    const std::vector<int> ns = dim == 2 ? std::vector<int>{16, 32, 64} : std::vector<int>{12, 16};
    for (int l = 1; l <= 2; ++l) {
      for (int n : ns) {
        std::mt19937 rng(100 + dim);
        auto g = testing::torus(dim, n);
        auto c0 = random_connection(g, 2, 0.02, rng, "A0");
        auto c1 = random_connection(g, 2, 0.02, rng, "A1");
        const double h = 1.0 / n;
        const double res = transgression_residual(ConnectionCurve(c0, c1), l);
        CHECK(res < 10.0 * h * h);
        // Both sides are linear in A for l = 1.
        if (l == 1) CHECK(res < 1e-12);
      }
    }
  }
}

TEST_CASE("transgression is curve independent at the level of periods") {
  std::mt19937 rng(31);
  auto g = testing::torus(3, 16);
  auto c0 = random_connection(g, 2, 0.1, rng, "A0");
  auto c1 = random_connection(g, 2, 0.1, rng, "A1");
  auto bend = testing::random_form(g, 1, 2, 0.1, rng);
  auto cycles = torus_cycles(*g, 1);
  auto lin = transgression(ConnectionCurve(c0, c1), 1);
  auto bent = transgression(ConnectionCurve(c0, c1, bend), 1);
  for (const auto& c : cycles.cycles) CHECK(std::abs(period(lin - bent, c)) < 1e-12);

  auto g4 = testing::torus(4, 12);
  auto d0 = random_connection(g4, 2, 0.1, rng, "A0");
  auto d1 = random_connection(g4, 2, 0.1, rng, "A1");
  auto bend4 = testing::random_form(g4, 1, 2, 0.1, rng);
  auto lin2 = transgression(ConnectionCurve(d0, d1), 2);
  auto bent2 = transgression(ConnectionCurve(d0, d1, bend4), 2);
  for (const auto& c : torus_cycles(*g4, 3).cycles) {
    CHECK(std::abs(period(lin2 - bent2, c)) < 1e-6);
  }
}

TEST_CASE("product transgression identity") {
  std::mt19937 rng(41);
  auto g = testing::torus(4, 12);
  auto cycles = torus_cycles(*g, 3);
  auto c0 = random_connection(g, 2, 0.1, rng, "A0");
  auto c1 = random_connection(g, 2, 0.1, rng, "A1");
  CHECK(transgression_product_check(ConnectionCurve(c0, c0), 1, 1, cycles) == 0.0);
  CHECK(transgression_product_check(ConnectionCurve(c0, c1), 1, 1, cycles) < 1e-6);
  auto a0 = random_connection(g, 1, 0.1, rng, "a0");
  auto a1 = random_connection(g, 1, 0.1, rng, "a1");
  CHECK(transgression_product_check(ConnectionCurve(a0, a1), 1, 1, cycles) < 1e-8);
}

TEST_CASE("cs_equivalent") {
  auto g = testing::torus(1, 64);
  CycleBasis s1;
  s1.cycles.push_back(coordinate_cycle(*g, 0b1, {}, "S1"));
  auto zero = Connection::trivial("zero", g, 1);
  MatrixForm pot(g, 1, 1);
  pot.fill(0b1, [](auto, auto m) { m[0] = Complex(0.0, -kTwoPi * 0.5); });
  auto half = Connection::from_potential("half", pot);
  CHECK(cs_equivalent(zero, zero, s1).equivalent);
  auto rep = cs_equivalent(zero, half, s1);
  CHECK(!rep.equivalent);
  CHECK(rep.levels.at(0).max_period == doctest::Approx(0.5));

  std::mt19937 rng(55);
  auto t2 = testing::torus(2, 64);
  auto cyc = torus_cycles(*t2, 1);
  auto c = random_connection(t2, 1, 0.2, rng, "A");
  MatrixForm f(t2, 0, 1);
  f.fill(0, [](auto x, auto m) {
    m[0] = Complex(0.0, std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]) + 0.3 * std::cos(kTwoPi * x[1]));
  });
  auto shifted = Connection::from_potential("A+df", c.potential() + exterior_d(f));
  auto gauge = cs_equivalent(c, shifted, cyc);
  CHECK(gauge.equivalent);
  CHECK(gauge.levels.at(0).max_period < 1e-12);
}
