#include <cmath>

#include "doctest.h"
#include "hicon/asymptotics.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::asym;

TEST_CASE("corrector solves the cell problem with zero mean") {
  const auto mesh = test::coarse_mesh();
  for (const Vec2& th : {Vec2(1, 0), Vec2(0.6, 0.8)}) {
    const auto s = solve_u1(*mesh, th);
    CHECK(s.residual <= 1e-10);
    CHECK(std::abs(s.mean) <= 1e-12);
    CHECK(s.grad_energy > 0);
    // energy of u₁ equals minus the boundary flux pairing
    CHECK(s.grad_energy == doctest::Approx(-s.flux).epsilon(1e-10));
  }
}

TEST_CASE("corrector is linear in theta") {
  const auto mesh = test::coarse_mesh();
  const auto a = solve_u1(*mesh, Vec2(1, 0));
  const auto b = solve_u1(*mesh, Vec2(0, 1));
  const auto c = solve_u1(*mesh, Vec2(0.6, 0.8));
  CHECK((c.u1 - 0.6 * a.u1 - 0.8 * b.u1).norm() <= 1e-10 * c.u1.norm());
}

TEST_CASE("both alpha2 formulas agree") {
  const auto mesh = test::coarse_mesh();
  for (const Vec2& th : {Vec2(1, 0), Vec2(std::cos(1.0), std::sin(1.0))})
    CHECK(alpha2(*mesh, th) == doctest::Approx(alpha2_boundary_route(*mesh, th)).epsilon(1e-10));
}

TEST_CASE("effective matrix is negative definite and consistent under polarization") {
  const auto c = correctors(*test::coarse_mesh());
  CHECK(c.alpha[0] > 0);
  CHECK(c.alpha[1] > 0);
  CHECK(c.polarization_residual <= 1e-10);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.mu_star);
  CHECK(es.eigenvalues().maxCoeff() < 0);
  // square symmetry of the cell: isotropic
  CHECK(c.alpha[0] == doctest::Approx(c.alpha[1]).epsilon(1e-8));
  CHECK(std::abs(c.mu_star(0, 1)) <= 1e-8);
}

TEST_CASE("alpha2 is the curvature of the stiff-ls Steklov ground state") {
  const auto mesh = test::coarse_mesh();
  const Vec2 th(1, 0);
  const double a2 = alpha2(*mesh, th);
  const double t = 0.02;
  const double mu = mu1_stiff_ls(mesh, t * th);
  CHECK(-mu / (t * t) == doctest::Approx(a2).epsilon(1e-3));
}

TEST_CASE("quadratic expansion with a cubic remainder") {
  const auto mesh = test::coarse_mesh();
  const auto rep = verify_steklov_expansion(mesh, {Vec2(0.05, 0), Vec2(0.1, 0), Vec2(0.2, 0), Vec2(0, 0.4)});
  REQUIRE(rep.rows.size() == 4);
  CHECK(std::isfinite(rep.cubic_constant));
  CHECK(rep.cubic_constant < 1.0);
  const double ratio = mu1_stiff_ls(mesh, Vec2(0.1, 0)) / mu1_stiff_ls(mesh, Vec2(0.05, 0));
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
}
