#include <cmath>

#include "doctest.h"

#include "cwcs/characters.hpp"
#include "cwcs/geometry.hpp"

using namespace cwcs;

TEST_CASE("catalog geometries validate") {
  for (const char* name : {"circle", "torus2", "sphere2_monopole(3)", "cp1_tangent",
                           "disk2_flat(0.25)", "zn_pair(3,1)", "hopf_s3_over_s2"}) {
    CAPTURE(name);
    CHECK_NOTHROW(validate(catalog(name)));
  }
  CHECK_NOTHROW(validate(catalog("torus4", {.resolution = 8})));
  CHECK_NOTHROW(validate(catalog("product(circle,torus2)", {.resolution = 12})));
  CHECK_THROWS_AS(catalog("klein_bottle"), GeometryError);
  CHECK_THROWS_AS(catalog("sphere2_monopole(1.5)"), GeometryError);
}

TEST_CASE("catalog default resolutions") {
  CHECK(catalog("circle").grid->resolution(0) == 256);
  CHECK(catalog("torus2").grid->resolution(1) == 64);
  CHECK(catalog("hopf_s3_over_s2").grid->resolution(2) == 24);
  CHECK(catalog("torus4").grid->resolution(3) == 16);
  CHECK(catalog("torus4").cycles.of_dimension(3).size() == 4);
}

TEST_CASE("monopole Chern numbers are integers") {
  for (int k : {-2, -1, 1, 3}) {
    auto g = sphere2_monopole(k);
    CHECK(std::abs(chern_number(g, "bundle") - k) < 1e-6);
  }
  CHECK(std::abs(chern_number(sphere2_monopole(1, 16), "bundle") - 1.0) < 1e-4);
}

TEST_CASE("Todd genus of CP1 pins the series convention") {
  auto g = cp1_tangent();
  const auto td = todd_form(g.connection("tangent"));
  CHECK(std::abs(integrate_chart(td.top()) - 1.0) < 1e-6);
  const auto flipped = todd_form(g.connection("tangent"), ToddSign::Flipped);
  CHECK(std::abs(integrate_chart(flipped.top()) + 1.0) < 1e-6);
  CHECK(td.part(0).at(0, 0) == Complex(1.0));
}

TEST_CASE("disk flux equals the boundary holonomy") {
  for (double a : {0.1, 0.25, 0.7}) {
    auto g = disk2_flat(a);
    CHECK(std::abs(chern_number(g, "bundle") - a) < 1e-12);
    auto alt = disk2_flat(a, 0, {.collar = 0.3, .bump = 0.5});
    CHECK(std::abs(chern_number(alt, "bundle") - a) < 1e-12);
    CHECK_NOTHROW(validate(alt));
  }
  auto wound = disk2_flat(0.25, 0, {}, 1);
  CHECK(std::abs(chern_number(wound, "bundle") - 1.25) < 1e-12);
}

TEST_CASE("boundary and collar checks") {
  auto g = disk2_flat(0.3);
  REQUIRE(g.boundary);
  const auto& comp = g.boundary->components.front();
  auto restricted = restrict_to_face(g.connection("bundle").potential(), 0, 1, comp.geometry->grid);
  CHECK((restricted - comp.geometry->connection("bundle").potential()).max_norm() < 1e-14);
  CHECK(collar_residual(g.connection("bundle").potential(), 0, 1, 0.2) < 1e-14);
  CHECK(collar_residual(g.connection("bundle").potential(), 0, 1, 0.5) > 1e-3);
}

TEST_CASE("cylinder bordism has two oppositely oriented ends") {
  auto c = cylinder_bordism(0.1, 0.4);
  REQUIRE(c.boundary);
  CHECK(c.boundary->components.size() == 2);
  CHECK_NOTHROW(validate(c));
  CHECK(std::abs(chern_number(c, "bundle") - 0.3) < 1e-12);
}

TEST_CASE("product geometry") {
  auto g = product(torus(2, 12), circle(16));
  CHECK(g.dim() == 3);
  REQUIRE(g.fibration);
  CHECK(g.fibration->fiber->dim() == 1);
  // 3 cycles of T^2 + 1 of S^1 + 3 products.
  CHECK(g.cycles.cycles.size() == 7);
  CHECK(g.cycles.of_dimension(3).size() == 1);
  CHECK(g.connection("tangent").rank() == 2);
  CHECK_NOTHROW(validate(g));

  auto pd = product(circle(16), disk2_flat(0.25, 16));
  REQUIRE(pd.boundary);
  CHECK(pd.boundary->components.front().normal_axis == 1);
  CHECK(pd.boundary->components.front().orientation == -1);
  CHECK_NOTHROW(validate(pd));
}

TEST_CASE("Z/n pair: boundary components and holonomies") {
  auto z = zn_pair(3, 1);
  CHECK(z.v_boundary.size() == 3);
  for (const auto& b : z.v_boundary) {
    CAPTURE(b.label);
    const double d = b.holonomy - 1.0 / 3.0;
    CHECK(std::abs(d - std::round(d)) < 1e-10);
  }
  CHECK(std::abs(z.v_boundary.front().holonomy - (1.0 / 3.0 - 1.0)) < 1e-10);
  CHECK_NOTHROW(validate(z));
  CHECK_NOTHROW(validate(zn_bounding(2, 0.3)));
  CHECK_NOTHROW(validate(deform_enrichment(z, 0.5)));
  auto bad = z;
  bad.v_boundary.pop_back();
  CHECK_THROWS_AS(validate(bad), GeometryError);
}

TEST_CASE("load_geometry: unit torus matches the catalog") {
  const char* text = R"(
# unit torus
[geometry]
name = "torus2"
[grid]
resolution = [32, 32]
periodic = [true, true]
[cycles]
x = [0]
y = [1]
T = [0, 1]
[connection.bundle]
kind = "flat"
holonomy = [0.25, 0.0]
)";
  auto g = load_geometry(text);
  auto c = torus(2, 32);
  CHECK(g.grid->compatible(*c.grid));
  CHECK(g.cycles.cycles.size() == c.cycles.cycles.size());
  auto hol = period(g.connection("bundle").potential() * kChernNorm, g.cycles.cycles.front());
  CHECK(std::abs(hol - 0.25) < 1e-14);
}

TEST_CASE("load_geometry: disk config gives the disk flux") {
  const char* text = R"(
[grid]
resolution = [64, 64]
periodic = [false, true]
chart = "polar"
[boundary]
normal_axis = 0
side = 1
collar_width = 0.2
[connection.bundle]
kind = "disk"
flux = 0.25
[connection.tangent]
kind = "flat"
)";
  auto g = load_geometry(text);
  CHECK(std::abs(chern_number(g, "bundle") - 0.25) < 1e-12);
  REQUIRE(g.boundary);
  CHECK(g.boundary->components.front().geometry->has_connection("bundle"));
}

TEST_CASE("load_geometry: diagnostics") {
  auto expect_line = [](const char* text, int line) {
    try {
      load_geometry(text);
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("[grid]\nresolution = [8, 8]\nperiodic = [true, true]\ncolour = 3\n", 4);
  expect_line("[grid]\nresolution = [8, 8\n", 2);
  expect_line("[grid]\nresolution = [8, 8]\nperiodic = [true, true]\n[nonsense]\n", 4);
  expect_line("[grid]\nresolution = 8 8\n", 2);
  expect_line("[grid]\nresolution = [8, 8]\nperiodic = [true]\n", 2);
  CHECK_THROWS_AS(load_geometry("[cycles]\nx = [0]\n"), ConfigError);

  try {
    load_geometry("[grid]\nresolution = [8, 8]\nperiodic = [true, true]\nvolume_factor = -1.0\n");
    FAIL("expected a GeometryError");
  } catch (const GeometryError& e) {
    CHECK(e.check() == "quad_weight_nonnegative");
  }
}

TEST_CASE("load_geometry: fibration frame table") {
  const char* text = R"(
[grid]
resolution = [8, 8, 8]
periodic = [true, true, true]
[fibration]
base_dim = 2
[fibration.frame]
vertical = 1
horizontal = 2
bracket = [0, 0, 0,  0, 0, 0,  0, 0, 0,
           0, 0, 0,  0, 0, 0,  0, 0, 0,
           0, 0, 0,  0, 0, 0,  0, 0, 0]
)";
  auto g = load_geometry(text);
  REQUIRE(g.frame);
  CHECK(g.frame->bracket.size() == 27);
  CHECK(g.fibration->base->dim() == 2);
}
