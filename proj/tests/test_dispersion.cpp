#include "doctest.h"
#include "hicon/experiments.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::dispersion;

TEST_CASE("dispersion functions reproduce the stiff diagonal of the homogenized resolvent") {
  const auto mesh = test::coarse_mesh();
  for (const Vec2& tau : {Vec2(0, 0), Vec2(1, 0.5), Vec2(-2.5, 0.7)}) {
    const auto ctx = fem::assemble_fibre(mesh, tau);
    const auto sp = triple::spectral_projection(ctx);
    for (cd z : {cd(1, 1), cd(-1, 1), cd(0.5, 2)}) {
      const auto d = dispersion_sample(ctx, sp, 0.125, z);
      const MatXc st = hom::r_hom_full(ctx, sp, 0.125, z).stiff_block;
      CHECK(std::abs(1.0 / (d.K_int - z) - st(0, 0)) <= 1e-7 * std::abs(st(0, 0)));
      CHECK(std::abs(1.0 / (d.K_ls - z) - st(1, 1)) <= 1e-7 * std::abs(st(1, 1)));
    }
  }
}

TEST_CASE("dispersion functions are real-symmetric in z") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = triple::spectral_projection(ctx);
  const auto a = dispersion_sample(ctx, sp, 0.125, cd(1, 1));
  const auto b = dispersion_sample(ctx, sp, 0.125, cd(1, -1));
  CHECK(std::abs(b.K_int - std::conj(a.K_int)) <= 1e-10 * std::abs(a.K_int));
  CHECK(std::abs(b.K_ls - std::conj(a.K_ls)) <= 1e-10 * std::abs(a.K_ls));
}

TEST_CASE("K_ls is independent of eps at tau = 0") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(0, 0));
  const auto sp = triple::spectral_projection(ctx);
  std::vector<cd> v;
  for (const auto& d : dispersion_K_ls(ctx, sp, cd(1, 1), {0.25, 0.125, 1.0 / 16, 1.0 / 32})) v.push_back(d.K_ls);
  CHECK(relative_spread(v) <= 1e-10);
}

TEST_CASE("away from tau = 0 only the eps^-2 Steklov term of K_ls depends on eps") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = triple::spectral_projection(ctx);
  std::vector<cd> kb, reduced;
  for (const auto& d : dispersion_K_ls(ctx, sp, cd(1, 1), {0.25, 0.125, 1.0 / 16, 1.0 / 32})) {
    kb.push_back(d.K_b_ls);
    reduced.push_back(d.K_ls + sp.mu_ls / (d.eps * d.eps * sp.norm_ls * sp.norm_ls));
  }
  CHECK(relative_spread(kb) <= 1e-10);
  CHECK(relative_spread(reduced) <= 1e-10);
}

TEST_CASE("K_b_int decays like eps^2 at tau != 0") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(kPi / 2, kPi / 2));
  const auto sp = triple::spectral_projection(ctx);
  const std::vector<double> eps{0.25, 0.125, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  std::vector<double> kb;
  for (double e : eps) kb.push_back(std::abs(dispersion_sample(ctx, sp, e, cd(1, 1)).K_b_int));
  const auto fit = exp::fit_slope(eps, kb);
  CHECK(fit.slope >= 1.8);
  CHECK(fit.slope <= 2.2);
}

TEST_CASE("T matrix is Hermitian for real z and matches the operator rows") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = triple::spectral_projection(ctx);
  const MatXc T = T_matrix(ctx, sp, 0.125, cd(-3, 0));
  CHECK((T - T.adjoint()).norm() <= 1e-10 * T.norm());
  const auto d = dispersion_sample(ctx, sp, 0.125, cd(1, 1));
  const MatXc Tz = T_matrix(ctx, sp, 0.125, cd(1, 1));
  CHECK(std::abs(d.den_ls - (cd(1, 1) - Tz(0, 0))) <= 1e-10 * std::abs(d.den_ls));
  CHECK(std::abs(d.den_int - (cd(1, 1) - Tz(1, 1))) <= 1e-10 * std::abs(d.den_int));
}

TEST_CASE("relative spread") {
  CHECK(relative_spread({cd(2, 0), cd(2, 0)}) == 0.0);
  CHECK(relative_spread({cd(2, 0), cd(2, 1), cd(1, 0)}) == doctest::Approx(0.5));
}
