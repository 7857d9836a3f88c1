#include "doctest.h"
#include "hicon/experiments.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::krein;

TEST_CASE("Krein resolvent agrees with the direct solve") {
  const auto mesh = test::coarse_mesh();
  for (const Vec2& tau : {Vec2(0, 0), Vec2(1, 0.5)})
    for (double eps : {0.25, 1.0 / 64})
      for (cd z : {cd(1, 1), cd(-1, 1)}) {
        const auto ctx = fem::assemble_fibre(mesh, tau);
        const fem::WeightedSpace G = fem::broken_space(ctx);
        const MatXc Rk = resolvent_krein(ctx, eps, z);
        const MatXc Rd = resolvent_direct(ctx, eps, z);
        CHECK(fem::weighted_operator_norm(Rk - Rd, G, G) <= 1e-8 * fem::weighted_operator_norm(Rd, G, G));
      }
}

TEST_CASE("resolvent norm is bounded by 1/dist(z, R)") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const fem::WeightedSpace G = fem::broken_space(ctx);
  for (cd z : {cd(1, 1), cd(0.5, 2)}) {
    const double n = fem::weighted_operator_norm(resolvent_direct(ctx, 0.125, z), G, G);
    CHECK(n <= 1.0 / z.imag() * (1 + 1e-10));
  }
}

TEST_CASE("block decomposition reassembles M and splits off the Steklov directions") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = triple::spectral_projection(ctx);
  const MatXc M = triple::m_operator(ctx, 0.125, cd(1, 1));
  const BlockM b = block_decompose(M, ctx.B, sp.Ppsi);
  CHECK((b.reassemble() - M).norm() <= 1e-10 * M.norm());
  const MatXc B = ctx.B.cast<cd>();
  CHECK((b.U.adjoint() * B * b.U - MatXc::Identity(b.U.cols(), b.U.cols())).norm() <= 1e-10);
  // first two columns span the Steklov directions
  const MatXc Q = sp.Ppsi.adjoint() * B * b.U.leftCols(2);
  CHECK(std::abs(std::abs(Q.determinant()) - 1.0) <= 1e-10);
}

TEST_CASE("inverse of M via the Schur complement") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = triple::spectral_projection(ctx);
  const MatXc M = triple::m_operator(ctx, 0.125, cd(1, 1));
  const MInverse inv = invert_m(block_decompose(M, ctx.B, sp.Ppsi));
  const int n = static_cast<int>(M.rows());
  CHECK((inv.inverse * M - MatXc::Identity(n, n)).norm() <= 1e-9 * std::sqrt(double(n)));
  CHECK(inv.norm_A_inv > 0);
  CHECK(inv.norm_S_inv > 0);
  CHECK(inv.dist_Minv_diag > 0);
}

TEST_CASE("the two rank-2 boundary condition forms agree") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(kPi / 2, kPi / 2));
  const auto sp = triple::spectral_projection(ctx);
  const BlockM b = block_decompose(triple::m_operator(ctx, 0.25, cd(2, 1)), ctx.B, sp.Ppsi);
  const auto [lhs, rhs] = b0b1_check(b);
  CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("soft compression of the full resolvent is the generalized resolvent") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const cd z(1, 1);
  const MatXc a = soft_block(ctx, resolvent_direct(ctx, 0.125, z));
  const MatXc b = generalized_resolvent_soft(ctx, 0.125, z);
  CHECK((a - b).norm() <= 1e-9 * a.norm());
}
