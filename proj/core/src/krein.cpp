#include "hicon/krein.hpp"

#include <string>

namespace hicon::krein {

using geometry::Region;

namespace {

double spectral_norm(const MatXc& A) {
  if (A.size() == 0) return 0.0;
  return Eigen::BDCSVD<MatXc>(A).singularValues()(0);
}

}  // namespace

MatXc BlockM::reassemble() const {
  const int n = static_cast<int>(U.rows());
  MatXc Mt(n, n);
  Mt.topLeftCorner(2, 2) = A;
  Mt.topRightCorner(2, n - 2) = Bblk;
  Mt.bottomLeftCorner(n - 2, 2) = Eblk;
  Mt.bottomRightCorner(n - 2, n - 2) = Dblk;
  return U * Mt * U.adjoint() * gram.cast<cd>();
}

BlockM block_decompose(const MatXc& M, const MatXd& B, const MatXc& Ppsi) {
  const int n = static_cast<int>(B.rows());
  const Eigen::LLT<MatXd> llt(B);
  if (llt.info() != Eigen::Success) throw NotSPD("boundary Gram is not positive definite");
  const MatXc L = llt.matrixL().toDenseMatrix().cast<cd>();
  const MatXc Y = L.adjoint() * Ppsi;
  Eigen::HouseholderQR<MatXc> qr(Y);
  const MatXc Q = qr.householderQ() * MatXc::Identity(n, n);
  BlockM b;
  b.gram = B;
  b.U = L.adjoint().triangularView<Eigen::Upper>().solve(Q);
  const MatXc Mt = b.U.adjoint() * B.cast<cd>() * M * b.U;
  b.A = Mt.topLeftCorner(2, 2);
  b.Bblk = Mt.topRightCorner(2, n - 2);
  b.Eblk = Mt.bottomLeftCorner(n - 2, 2);
  b.Dblk = Mt.bottomRightCorner(n - 2, n - 2);
  return b;
}

MInverse invert_m(const BlockM& b) {
  const int n = static_cast<int>(b.U.rows());
  Eigen::PartialPivLU<MatXc> luA(b.A);
  if (!(luA.rcond() > 1e-14)) throw BlockSingular("block A of M(z) is singular");
  const MatXc Ainv = luA.inverse();
  MInverse out;
  out.schur = b.Dblk - b.Eblk * Ainv * b.Bblk;
  Eigen::PartialPivLU<MatXc> luS(out.schur);
  if (!(luS.rcond() > 1e-14)) throw BlockSingular("Schur complement block of M(z) is singular");
  const MatXc Sinv = luS.inverse();
  MatXc Mt_inv(n, n);
  Mt_inv.topLeftCorner(2, 2) = Ainv + Ainv * b.Bblk * Sinv * b.Eblk * Ainv;
  Mt_inv.topRightCorner(2, n - 2) = -Ainv * b.Bblk * Sinv;
  Mt_inv.bottomLeftCorner(n - 2, 2) = -Sinv * b.Eblk * Ainv;
  Mt_inv.bottomRightCorner(n - 2, n - 2) = Sinv;
  out.inverse = b.U * Mt_inv * b.U.adjoint() * b.gram.cast<cd>();
  out.norm_A_inv = spectral_norm(Ainv);
  out.norm_S_inv = spectral_norm(Sinv);
  MatXc diff = Mt_inv;
  diff.topLeftCorner(2, 2) -= Ainv;
  out.dist_Minv_diag = spectral_norm(diff);
  return out;
}

std::pair<MatXc, MatXc> b0b1_check(const BlockM& b) {
  const int n = static_cast<int>(b.U.rows());
  MatXc Mt(n, n);
  Mt.topLeftCorner(2, 2) = b.A;
  Mt.topRightCorner(2, n - 2) = b.Bblk;
  Mt.bottomLeftCorner(n - 2, 2) = b.Eblk;
  Mt.bottomRightCorner(n - 2, n - 2) = b.Dblk;
  MatXc P = MatXc::Zero(n, n);
  P(0, 0) = P(1, 1) = 1.0;
  const MatXc Pperp = MatXc::Identity(n, n) - P;
  const MatXc lhs = -(Pperp + P * Mt).partialPivLu().solve(P);
  MatXc rhs = MatXc::Zero(n, n);
  rhs.topLeftCorner(2, 2) = -b.A.inverse();
  return {lhs, rhs};
}

MatXc resolvent_krein(const FibreContext& ctx, double eps, cd z) {
  const auto w = fem::contrast_weights(eps);
  const triple::TripleEval ev = triple::evaluate(ctx, w, z);
  const triple::TripleEval evc = triple::evaluate(ctx, w, std::conj(z));
  const MatXc G = fem::broken_gram(ctx);
  const MatXc Bc = ctx.B.cast<cd>();
  // S(z̄)* = B⁻¹ S(z̄)ᴴ G
  const MatXc Sc_adj = Bc.llt().solve(evc.S.adjoint() * G);
  Eigen::PartialPivLU<MatXc> lu(ev.M);
  if (!(lu.rcond() > 1e-15)) throw SingularSystem("M(z) is singular");
  return triple::decoupled_resolvent(ctx, ev) - ev.S * lu.solve(Sc_adj);
}

MatXc resolvent_direct(const FibreContext& ctx, double eps, cd z) {
  const SpMatc A = fem::assemble_direct_operator(ctx, eps) - z * fem::total_mass(ctx);
  Eigen::SparseLU<SpMatc> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("direct fibre pencil is singular");
  const SpMatc E = fem::broken_embedding(ctx).cast<cd>();
  const MatXc rhs = SpMatc(E.transpose()) * fem::broken_gram(ctx);
  const MatXc U = lu.solve(rhs);
  return E * U;
}

MatXc soft_block(const FibreContext& ctx, const MatXc& R) {
  const auto& blk = ctx.region(Region::Soft);
  return R.block(blk.offset, blk.offset, blk.size(), blk.size());
}

MatXc generalized_resolvent_soft(const FibreContext& ctx, double eps, cd z) {
  const auto w = fem::contrast_weights(eps);
  const auto& blk = ctx.region(Region::Soft);
  const triple::TripleEval ev = triple::evaluate(ctx, w, z);
  const MatXc Sc = triple::solution_operator(ctx, Region::Soft, 1.0, std::conj(z));
  const MatXc S = ev.S.middleRows(blk.offset, blk.size());
  const MatXc Sc_adj = ctx.B.cast<cd>().llt().solve(Sc.adjoint() * blk.M);
  const MatXc R0 = triple::decoupled_resolvent_region(ctx, ev, Region::Soft);
  Eigen::PartialPivLU<MatXc> lu(ev.M);
  if (!(lu.rcond() > 1e-15)) throw SingularSystem("M(z) is singular");
  return R0 - S * lu.solve(Sc_adj);
}

}  // namespace hicon::krein
