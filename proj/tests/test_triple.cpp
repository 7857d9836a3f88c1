#include <cmath>

#include "doctest.h"
#include "hicon/experiments.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::triple;
using geometry::Region;

TEST_CASE("stiff-int Steklov ground state is the plane wave with eigenvalue 0") {
  for (const Vec2& tau : {Vec2(0, 0), Vec2(1, 0.5), Vec2(-kPi, kPi / 3)}) {
    const auto ctx = fem::assemble_fibre(test::coarse_mesh(), tau);
    const auto sp = steklov_eigs(ctx, Region::StiffInt, 3);
    CHECK(std::abs(sp.mu[0]) <= 1e-8);
    CHECK(sp.mu[1] < -1.0);
    // B-orthonormal
    const MatXc B = ctx.B_iface[0].cast<cd>();
    CHECK((sp.psi.adjoint() * B * sp.psi - MatXc::Identity(3, 3)).norm() <= 1e-10);
  }
}

TEST_CASE("disc DtN second eigenvalue approaches -1/r_in") {
  const auto ctx = fem::assemble_fibre(test::default_mesh(), Vec2(0, 0));
  const auto sp = steklov_eigs(ctx, Region::StiffInt, 3);
  const double target = -1.0 / ctx.mesh->spec.r_in;
  CHECK(std::abs(sp.mu[1] - target) <= 0.02 * std::abs(target));
  // the n=1 Steklov mode of the disc is double
  CHECK(sp.mu[2] == doctest::Approx(sp.mu[1]).epsilon(1e-6));
}

TEST_CASE("stiff-ls ground state: zero at tau = 0, negative elsewhere") {
  const auto mesh = test::coarse_mesh();
  CHECK(std::abs(steklov_eigs(fem::assemble_fibre(mesh, Vec2(0, 0)), Region::StiffLs, 1).mu[0]) <= 1e-8);
  for (const Vec2& tau : {Vec2(0.1, 0), Vec2(1, 0.5), Vec2(kPi / 2, kPi / 2), Vec2(-kPi, 0)})
    CHECK(steklov_eigs(fem::assemble_fibre(mesh, tau), Region::StiffLs, 1).mu[0] < 0);
}

TEST_CASE("DtN is Hermitian and nonpositive") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  for (Region r : geometry::kRegions) {
    const DtN d = dtn_matrix(ctx, r);
    CHECK((d.schur - d.schur.adjoint()).norm() <= 1e-10 * d.schur.norm());
    Eigen::SelfAdjointEigenSolver<MatXc> es(d.schur);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * d.schur.norm());
  }
}

TEST_CASE("harmonic lift is discrete-harmonic with identity trace") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(0.4, -1.1));
  for (Region r : geometry::kRegions) {
    const auto& blk = ctx.region(r);
    const MatXc P = harmonic_lift(ctx, r);
    const int nI = blk.n_interior;
    CHECK((P.bottomRows(blk.n_trace()) - MatXc::Identity(blk.n_trace(), blk.n_trace())).norm() == 0.0);
    CHECK((blk.K.topRows(nI) * P).norm() <= 1e-10 * blk.K.norm());
  }
}

TEST_CASE("triple identities hold on the coarse cell") {
  const auto mesh = test::coarse_mesh();
  for (const Vec2& tau : {Vec2(0, 0), Vec2(1, 0.5)}) {
    const auto ctx = fem::assemble_fibre(mesh, tau);
    for (double eps : {0.25, 1.0 / 32}) {
      const auto r = exp::triple_identities(ctx, eps, cd(1, 1), cd(0.5, 2), 0x5EED, 8);
      CHECK(r.s0_pi <= 1e-8);
      CHECK(r.m0_lambda <= 1e-8);
      CHECK(r.gamma0_s <= 1e-8);
      CHECK(r.m_adjoint <= 1e-8);
      CHECK(r.m_difference <= 1e-8);
      CHECK(r.im_m <= 1e-8);
      CHECK(r.green <= 1e-8);
      CHECK(r.lambda_gamma1 <= 1e-8);
      CHECK(r.pi_adjoint <= 1e-8);
    }
  }
}

TEST_CASE("M operator is Hermitian in the B inner product for real z") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const MatXc M = m_operator(ctx, 0.125, cd(-2.0, 0));
  const MatXc BM = ctx.B.cast<cd>() * M;
  CHECK((BM - BM.adjoint()).norm() <= 1e-10 * BM.norm());
}

TEST_CASE("spectral projection is a B-orthogonal rank-2 projector") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(1, 0.5));
  const auto sp = spectral_projection(ctx);
  const MatXc B = ctx.B.cast<cd>();
  CHECK((sp.Ppsi.adjoint() * B * sp.Ppsi - MatXc::Identity(2, 2)).norm() <= 1e-10);
  CHECK((sp.P * sp.P - sp.P).norm() <= 1e-10 * sp.P.norm());
  CHECK((B * sp.P - (B * sp.P).adjoint()).norm() <= 1e-10 * (B * sp.P).norm());
  CHECK(sp.mu_int == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(sp.mu_ls < 0);
  CHECK(sp.norm_int > 0);
  CHECK(sp.norm_ls > 0);
}

TEST_CASE("phase convention makes the leading eigenvector entry real positive") {
  VecXc v(4);
  v << cd(0.1, 0.2), cd(0, -3), cd(1, 1), cd(0.5, 0);
  fix_phase(v);
  CHECK(std::abs(v[1].imag()) <= 1e-15);
  CHECK(v[1].real() > 0);
}

TEST_CASE("degenerate stiff-ls ground state at the symmetric corner is refused") {
  const auto ctx = fem::assemble_fibre(test::coarse_mesh(), Vec2(-kPi, -kPi));
  CHECK_THROWS_AS(spectral_projection(ctx), DegenerateEigenvalue);
}
