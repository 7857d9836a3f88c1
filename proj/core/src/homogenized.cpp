#include "hicon/homogenized.hpp"

#include <cmath>

namespace hicon::hom {

using geometry::Region;

HomPieces hom_pieces(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z, double zero_tol) {
  HomPieces p;
  p.eps = eps;
  p.z = z;
  const auto& blk = ctx.region(Region::Soft);
  const triple::RegionShift s = triple::region_shift(ctx, Region::Soft, z);
  const triple::RegionShift sc = triple::region_shift(ctx, Region::Soft, std::conj(z));
  const int nI = blk.n_interior, nE = ctx.n_trace_total();

  MatXc S(blk.size(), nE), Sc(blk.size(), nE);
  S.topRows(nI) = s.X;
  S.bottomRows(nE).setIdentity();
  Sc.topRows(nI) = sc.X;
  Sc.bottomRows(nE).setIdentity();
  p.Spsi = S * sp.Ppsi;
  p.Spsi_c = Sc * sp.Ppsi;

  // B M^soft(z) = −Schur(z), so m = −Ppsiᴴ Schur Ppsi.
  p.m = -sp.Ppsi.adjoint() * s.schur * sp.Ppsi;

  const double mu_int = std::abs(sp.mu_int) <= zero_tol ? 0.0 : sp.mu_int;
  const double inv2 = 1.0 / (eps * eps);
  p.bracket = p.m;
  p.bracket(0, 0) += inv2 * mu_int + z * sp.norm_int * sp.norm_int;
  p.bracket(1, 1) += inv2 * sp.mu_ls + z * sp.norm_ls * sp.norm_ls;

  p.R0 = MatXc::Zero(blk.size(), blk.size());
  p.R0.topRows(nI) = s.lu.solve(blk.M.topRows(nI));
  return p;
}

namespace {

MatXc bracket_inverse(const MatXc& A) {
  Eigen::PartialPivLU<MatXc> lu(A);
  if (!(lu.rcond() > 1e-14)) throw BracketSingular("homogenized 2x2 bracket is singular");
  return lu.inverse();
}

}  // namespace

MatXc r_hom_soft(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z) {
  const HomPieces p = hom_pieces(ctx, sp, eps, z);
  const MatXc& Ms = ctx.region(Region::Soft).M;
  return p.R0 - p.Spsi * bracket_inverse(p.bracket) * p.Spsi_c.adjoint() * Ms;
}

HomResolvent r_hom_full(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z) {
  const HomPieces p = hom_pieces(ctx, sp, eps, z);
  const MatXc Ainv = bracket_inverse(p.bracket);
  const auto& bs = ctx.region(Region::Soft);
  const auto& bi = ctx.region(Region::StiffInt);
  const auto& bl = ctx.region(Region::StiffLs);

  MatXc W = MatXc::Zero(ctx.n_broken, 2), Wc = MatXc::Zero(ctx.n_broken, 2);
  W.middleRows(bs.offset, bs.size()) = p.Spsi;
  Wc.middleRows(bs.offset, bs.size()) = p.Spsi_c;
  W.col(0).segment(bi.offset, bi.size()) = sp.Psi_int;
  Wc.col(0).segment(bi.offset, bi.size()) = sp.Psi_int;
  W.col(1).segment(bl.offset, bl.size()) = sp.Psi_ls;
  Wc.col(1).segment(bl.offset, bl.size()) = sp.Psi_ls;

  MatXc WcG = Wc.adjoint();
  for (const auto& blk : ctx.regions) WcG.middleCols(blk.offset, blk.size()) = WcG.middleCols(blk.offset, blk.size()) * blk.M;

  HomResolvent h;
  h.full = -W * Ainv * WcG;
  h.full.block(bs.offset, bs.offset, bs.size(), bs.size()) += p.R0;

  const Eigen::DiagonalMatrix<cd, 2> D(cd(sp.norm_int), cd(sp.norm_ls));
  h.soft_block = h.full.block(bs.offset, bs.offset, bs.size(), bs.size());
  h.stiff_block = -(D * Ainv * D);
  h.stiff_to_soft = -(p.Spsi * Ainv * D);
  h.soft_to_stiff = -(D * Ainv * p.Spsi_c.adjoint() * bs.M);
  return h;
}

MatXc r_hom_full_literal(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z) {
  const auto& bs = ctx.region(Region::Soft);
  const auto& bi = ctx.region(Region::StiffInt);
  const auto& bl = ctx.region(Region::StiffLs);
  const int nE = ctx.n_trace_total();
  const MatXc Bc = ctx.B.cast<cd>();

  const HomPieces p = hom_pieces(ctx, sp, eps, z);
  const HomPieces pc = hom_pieces(ctx, sp, eps, std::conj(z));
  const MatXc Rh = r_hom_soft(ctx, sp, eps, z);
  const MatXc Rhc = r_hom_soft(ctx, sp, eps, std::conj(z));

  // k: P-coefficients of the soft trace.
  auto k = [&](const MatXc& X) { return MatXc(sp.Ppsi.adjoint() * Bc * X.bottomRows(nE)); };
  // Adjoint of a map soft L² -> C² (orthonormal coordinates).
  auto adj_to_soft = [&](const MatXc& Z) { return MatXc(bs.M.llt().solve(Z.adjoint())); };

  const MatXc kz = k(Rh - p.R0);
  const MatXc kzc = k(Rhc - pc.R0);
  const MatXc kzc_adj = adj_to_soft(kzc);
  const MatXc core = k(kzc_adj);

  // Y: columns Ψ_int, Ψ_ls in broken coordinates.
  MatXc Y = MatXc::Zero(ctx.n_broken, 2);
  Y.col(0).segment(bi.offset, bi.size()) = sp.Psi_int;
  Y.col(1).segment(bl.offset, bl.size()) = sp.Psi_ls;
  MatXc YG = Y.adjoint();
  YG.middleCols(bi.offset, bi.size()) = YG.middleCols(bi.offset, bi.size()) * bi.M;
  YG.middleCols(bl.offset, bl.size()) = YG.middleCols(bl.offset, bl.size()) * bl.M;
  YG.middleCols(bs.offset, bs.size()).setZero();

  MatXc R = MatXc::Zero(ctx.n_broken, ctx.n_broken);
  R.block(bs.offset, bs.offset, bs.size(), bs.size()) = Rh;
  MatXc a21 = Y * kz;  // broken rows, soft columns
  R.middleCols(bs.offset, bs.size()) += a21;
  MatXc a12 = kzc_adj * YG;  // soft rows, broken columns
  R.middleRows(bs.offset, bs.size()) += a12;
  R += Y * core * YG;
  return R;
}

std::vector<DistanceRow> norm_resolvent_distance(const FibreContext& ctx, const SpectralProjection& sp,
                                                 const std::vector<double>& eps_list, cd z) {
  const fem::WeightedSpace G = fem::broken_space(ctx);
  std::vector<DistanceRow> rows;
  for (double eps : eps_list) {
    const MatXc Rk = krein::resolvent_krein(ctx, eps, z);
    const HomResolvent h = r_hom_full(ctx, sp, eps, z);
    DistanceRow row;
    row.eps = eps;
    row.distance = fem::weighted_operator_norm(Rk - h.full, G, G);
    if (!rows.empty())
      row.slope_local = std::log(row.distance / rows.back().distance) / std::log(eps / rows.back().eps);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hicon::hom
