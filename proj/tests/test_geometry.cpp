#include <cmath>

#include "doctest.h"
#include "hicon/geometry.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::geometry;

TEST_CASE("default cell is a valid periodic mesh") {
  const auto mesh = test::default_mesh();
  CHECK(check_mesh(*mesh).empty());
  CHECK(min_angle_deg(*mesh) >= 20.0);
  double total = 0;
  for (Region r : kRegions) total += region_area(*mesh, r);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inner disc area and interface lengths match the inscribed polygons") {
  const auto mesh = test::default_mesh();
  const auto& s = mesh->spec;
  const int n = s.n_bnd;
  auto poly_area = [n](double r) { return 0.5 * n * r * r * std::sin(2 * kPi / n); };
  auto poly_len = [n](double r) { return 2 * n * r * std::sin(kPi / n); };
  CHECK(region_area(*mesh, Region::StiffInt) == doctest::Approx(poly_area(s.r_in)).epsilon(1e-12));
  CHECK(region_area(*mesh, Region::Soft) ==
        doctest::Approx(poly_area(s.r_out) - poly_area(s.r_in)).epsilon(1e-12));
  CHECK(interface_length(*mesh, Interface::Int) == doctest::Approx(poly_len(s.r_in)).epsilon(1e-12));
  CHECK(interface_length(*mesh, Interface::Ls) == doctest::Approx(poly_len(s.r_out)).epsilon(1e-12));

  // Polygon deficit against the circle is 2π³r²/(3n²) to leading order.
  const double deficit = kPi * s.r_in * s.r_in - region_area(*mesh, Region::StiffInt);
  CHECK(deficit == doctest::Approx(2 * std::pow(kPi, 3) * s.r_in * s.r_in / (3.0 * n * n)).epsilon(1e-2));
}

TEST_CASE("interface loops are counterclockwise, closed and on the circles") {
  const auto mesh = test::coarse_mesh();
  const auto& s = mesh->spec;
  for (Interface g : {Interface::Int, Interface::Ls}) {
    const auto& loop = trace_space(*mesh, g);
    const double r = g == Interface::Int ? s.r_in : s.r_out;
    REQUIRE(static_cast<int>(loop.size()) == s.n_bnd);
    double signed_area = 0;
    for (size_t k = 0; k < loop.size(); ++k) {
      const Vec2 a = mesh->vertices[loop[k]] - s.center;
      const Vec2 b = mesh->vertices[loop[(k + 1) % loop.size()]] - s.center;
      CHECK(a.norm() == doctest::Approx(r).epsilon(1e-12));
      signed_area += 0.5 * (a.x() * b.y() - a.y() * b.x());
    }
    CHECK(signed_area > 0);
  }
}

TEST_CASE("periodic map pairs opposite sides") {
  const auto mesh = test::coarse_mesh();
  int slaves = 0;
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    const int m = mesh->periodic_map[v];
    if (m == v) continue;
    ++slaves;
    CHECK(mesh->periodic_map[m] == m);
    const Vec2 d = mesh->vertices[v] - mesh->vertices[m];
    // one unit on side slaves, both units at the far corner
    const double shift = std::abs(d.x()) + std::abs(d.y());
    CHECK((std::abs(shift - 1.0) < 1e-12 || std::abs(shift - 2.0) < 1e-12));
    CHECK(std::abs(std::round(d.x()) - d.x()) < 1e-12);
    CHECK(std::abs(std::round(d.y()) - d.y()) < 1e-12);
  }
  CHECK(slaves > 0);
  CHECK(static_cast<int>(mesh->free_dofs.size()) == mesh->num_vertices() - slaves);
}

TEST_CASE("construction is deterministic and JSON round-trips byte for byte") {
  CellSpec s;
  s.h = 0.1;
  s.n_bnd = 32;
  const std::string a = to_json(build_period_cell(s));
  const std::string b = to_json(build_period_cell(s));
  CHECK(a == b);
  CHECK(to_json(from_json(a)) == a);
}

TEST_CASE("scaled copy carries eps^2 areas") {
  const auto mesh = test::coarse_mesh();
  const PeriodCellMesh sm = scaled(*mesh, 0.25);
  for (Region r : kRegions) CHECK(region_area(sm, r) == doctest::Approx(region_area(*mesh, r) / 16).epsilon(1e-12));
  CHECK(min_angle_deg(sm) == doctest::Approx(min_angle_deg(*mesh)).epsilon(1e-12));
}

TEST_CASE("refining h and n_bnd together keeps the angle bound") {
  CellSpec s;
  s.h = 0.025;
  s.n_bnd = 128;
  const PeriodCellMesh m = build_period_cell(s);
  CHECK(check_mesh(m).empty());
  CHECK(min_angle_deg(m) >= 20.0);
}

TEST_CASE("invalid specs are rejected") {
  CellSpec s;
  SUBCASE("r_out not above r_in") {
    s.r_out = 0.15;
    CHECK_THROWS_AS(validate_spec(s), GeometryError);
  }
  SUBCASE("outer circle too close to the cell boundary") {
    s.r_out = 0.49;
    CHECK_THROWS_AS(validate_spec(s), GeometryError);
  }
  SUBCASE("boundary too coarse for h") {
    s.h = 0.02;
    s.n_bnd = 16;
    CHECK_THROWS_AS(validate_spec(s), GeometryError);
  }
  SUBCASE("non-positive radius") {
    s.r_in = 0;
    CHECK_THROWS_AS(build_period_cell(s), GeometryError);
  }
}
