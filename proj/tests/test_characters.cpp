#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cwcs/characters.hpp"

using namespace cwcs;

TEST_CASE("angle values reduce mod 1") {
  CHECK(AngleValue::reduce({2.25, 0.5}).value == Complex(0.25, 0.5));
  CHECK(std::abs(AngleValue::reduce({-0.25, 0.0}).value.real() - 0.75) < 1e-15);
  CHECK(AngleValue::reduce({-1e-18, 0.0}).value.real() < 1.0);
  CHECK(mod1_distance(2.9) == doctest::Approx(0.1));
}

TEST_CASE("disk pairing equals the holonomy") {
  for (double a : {0.1, 0.25, 0.7}) {
    CAPTURE(a);
    const auto v = angle_pairing(disk_cycle(a, 32));
    CHECK(std::abs(v.value - Complex(a)) < 1e-10);
  }
}

TEST_CASE("pairing does not depend on the filling") {
  const auto ec = disk_cycle(0.3, 32);
  const auto alt = disk_cycle(0.3, 32, {.collar = 0.3, .bump = 0.6});
  auto r = filling_independence(ec, alt);
  CHECK(r.integer == 0);
  CHECK(r.deviation < 1e-10);
  const auto wound = disk_cycle(0.3, 32, {}, 2);
  r = filling_independence(ec, wound);
  CHECK(r.integer == -2);
  CHECK(r.deviation < 1e-10);
  CHECK_THROWS_AS(filling_independence(ec, disk_cycle(0.4, 32)), CharacterError);
}

TEST_CASE("variation formula on the cylinder") {
  const auto ec0 = disk_cycle(0.1, 32);
  const auto ec1 = disk_cycle(0.45, 32);
  const auto cyl = cylinder_bordism(0.1, 0.45, 32);
  const auto c = chern_character(cyl.connection("bundle"));
  const auto r = variation_check(ec0, ec1, cyl, c);
  CHECK(r.residual < 1e-10);
  CHECK(r.closedness < 1e-10);
  CHECK(std::abs(r.bordism_integral.value - Complex(0.35)) < 1e-10);
  // Swapped ends do not match.
  CHECK_THROWS_AS(variation_check(ec1, ec0, cyl, c), CharacterError);
}

TEST_CASE("integrality of Chern characters on closed probes") {
  std::vector<IntegralityProbe> probes;
  for (int k : {-1, 2}) {
    auto s = sphere2_monopole(k);
    probes.push_back({s, chern_character(s.connection("bundle"))});
  }
  auto t = torus(2, 32);
  probes.push_back({t, chern_character(t.connection("bundle"))});
  auto r = integrality_membership(probes);
  CHECK(r.member);
  CHECK(r.values.size() == 3);
  // ch(O(-1)) Todd = -1 + 1 = 0 and ch(O(2)) Todd = 3.
  CHECK(std::abs(r.values[0]) < 1e-6);
  CHECK(std::abs(r.values[1] - 3.0) < 1e-6);

  // Half of ch(O(2)) pairs to 3/2.
  auto s = sphere2_monopole(2);
  r = integrality_membership({{s, 0.5 * chern_character(s.connection("bundle"))}});
  CHECK_FALSE(r.member);
}

TEST_CASE("Z/n pairing has order dividing n") {
  for (int n : {2, 3, 5}) {
    for (int k : {1, 2}) {
      CAPTURE(n);
      CAPTURE(k);
      const auto r = zn_pairing(zn_pair(n, k));
      CHECK(r.order_residual < 1e-8);
      const double expected = std::fmod(1.0 - double(k % n) / n, 1.0);
      CHECK(mod1_distance(r.value.value.real() - expected) < 1e-8);
    }
  }
}

TEST_CASE("Z/n pairing: boundaries vanish, deformations do not change it") {
  CHECK(zn_boundary_vanishing(zn_bounding(3, 0.3)) < 1e-8);
  CHECK(zn_boundary_vanishing(zn_bounding(2, 0.7)) < 1e-8);
  const auto z = zn_pair(3, 1);
  const auto base = zn_pairing(z).value;
  for (double t : {0.3, 1.0}) {
    const auto moved = zn_pairing(deform_enrichment(z, t)).value;
    CHECK(mod1_distance(moved.value.real() - base.value.real()) < 1e-8);
  }
}

TEST_CASE("pushforward along the product fibration") {
  for (int m : {0, 1, -2}) {
    CAPTURE(m);
    const auto total = pushforward_example(0.25, m);
    const auto r = pushforward_character(total);
    CHECK(std::abs(r.total_space - 0.25 * (m + 1)) < 1e-6);
    CHECK(std::abs(r.base_route - r.total_space) < 1e-6);
    CHECK(r.chain_residual < 1e-10);
  }
  const auto odd = product(torus(2, 12), circle(16));
  CHECK_THROWS_AS(pushforward_character(odd), CharacterError);
}

TEST_CASE("product with a closed manifold multiplies by its Todd genus") {
  const auto z = zn_pair(3, 1, 24);
  const double base = zn_pairing(z).value.value.real();
  const auto on_cp1 = zn_pairing(multiply(cp1_tangent(24), z));
  CHECK(mod1_distance(on_cp1.value.value.real() - base) < 1e-6);
  CHECK(on_cp1.order_residual < 3e-6);  // n times the pairing error
  const auto on_torus = zn_pairing(multiply(torus(2, 12), z));
  CHECK(mod1_distance(on_torus.value.value.real()) < 1e-8);
}

TEST_CASE("stabilizing by a trivial line leaves the pairing unchanged") {
  auto ec = disk_cycle(0.35, 32);
  const auto before = angle_pairing(ec).value;
  for (auto* g : {&ec.filling, &ec.sigma}) {
    g->set_connection(
        direct_sum(g->connection("bundle"), Connection::trivial("line", g->grid, 1))
            .renamed("bundle"));
  }
  ec.filling.boundary->components.front().geometry = std::make_shared<GeometrySpec>(ec.sigma);
  const auto after = angle_pairing(ec).value;
  CHECK(std::abs(after - before) < 1e-12);
}

TEST_CASE("gauge transforms of the filling leave the angle unchanged") {
  const auto ec = disk_cycle(0.3, 32);
  auto bump = [](std::span<const double> x) {
    const double r = x[0];
    const double s = r < 0.7 ? std::pow(r * (0.7 - r), 3) * 400.0 : 0.0;
    return s * (1.0 + std::sin(2.0 * std::numbers::pi * x[1]));
  };
  const auto shifted = gauge_transform(ec, bump);
  CHECK(std::abs(angle_pairing(shifted).raw - angle_pairing(ec).raw) < 1e-8);
  // Constant across the collar: a boundary gauge transformation.
  auto edge = [](std::span<const double> x) { return 0.3 * std::sin(2.0 * std::numbers::pi * x[1]); };
  CHECK(std::abs(angle_pairing(gauge_transform(ec, edge)).raw - angle_pairing(ec).raw) < 1e-8);
  auto radial = [](std::span<const double> x) { return x[0] * std::sin(2.0 * std::numbers::pi * x[1]); };
  CHECK_THROWS_AS(gauge_transform(ec, radial), GeometryError);
}
