#include "hicon/boundary_triple.hpp"

#include <algorithm>
#include <cmath>

namespace hicon::triple {

namespace {

int idx(Region r) { return static_cast<int>(r); }

}  // namespace

RegionShift region_shift(const FibreContext& ctx, Region r, cd zeta) {
  const auto& blk = ctx.region(r);
  const int nI = blk.n_interior, nG = blk.n_trace();
  RegionShift s;
  s.region = r;
  s.zeta = zeta;
  const MatXc A = blk.K.topLeftCorner(nI, nI) - zeta * blk.M.topLeftCorner(nI, nI);
  const MatXc C = blk.K.topRightCorner(nI, nG) - zeta * blk.M.topRightCorner(nI, nG);
  const MatXc L = blk.K.bottomLeftCorner(nG, nI) - zeta * blk.M.bottomLeftCorner(nG, nI);
  const MatXc D = blk.K.bottomRightCorner(nG, nG) - zeta * blk.M.bottomRightCorner(nG, nG);
  s.lu.compute(A);
  const double rc = s.lu.rcond();
  if (!(rc > 1e-14)) throw SingularSystem(std::string("interior pencil singular in region ") + geometry::region_name(r));
  s.X = -s.lu.solve(C);
  s.schur = D + L * s.X;
  return s;
}

std::vector<int> trace_positions(const FibreContext& ctx, Region r) {
  const int n0 = static_cast<int>(ctx.B_iface[0].rows()), n1 = static_cast<int>(ctx.B_iface[1].rows());
  std::vector<int> p;
  if (r != Region::StiffLs)
    for (int k = 0; k < n0; ++k) p.push_back(k);
  if (r != Region::StiffInt)
    for (int k = 0; k < n1; ++k) p.push_back(n0 + k);
  return p;
}

MatXd region_boundary_gram(const FibreContext& ctx, Region r) {
  if (r == Region::StiffInt) return ctx.B_iface[0];
  if (r == Region::StiffLs) return ctx.B_iface[1];
  return ctx.B;
}

MatXc harmonic_lift(const FibreContext& ctx, Region r) { return solution_operator(ctx, r, 1.0, 0.0); }

VecXc harmonic_lift(const FibreContext& ctx, Region r, const VecXc& data) { return harmonic_lift(ctx, r) * data; }

MatXc DtN::op() const { return -MatXc(gram.cast<cd>()).llt().solve(schur); }

DtN dtn_matrix(const FibreContext& ctx, Region r, cd z) {
  const RegionShift s = region_shift(ctx, r, z);
  return {s.schur, region_boundary_gram(ctx, r)};
}

void fix_phase(VecXc& v) {
  const double mx = v.cwiseAbs().maxCoeff();
  if (mx == 0) return;
  for (int k = 0; k < v.size(); ++k)
    if (std::abs(v[k]) >= (1 - 1e-10) * mx) {
      v *= std::conj(v[k]) / std::abs(v[k]);
      v[k] = std::abs(v[k]);
      return;
    }
}

SteklovPairs steklov_eigs(const FibreContext& ctx, Region r, int k) {
  if (r == Region::Soft) throw HiconError("steklov_eigs is defined for the stiff regions");
  const DtN d = dtn_matrix(ctx, r, 0.0);
  const int n = static_cast<int>(d.gram.rows());
  if (k > n) throw HiconError("steklov_eigs: k exceeds the trace dimension");
  const MatXc S = -0.5 * (d.schur + d.schur.adjoint());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatXc> es(S, d.gram.cast<cd>());
  if (es.info() != Eigen::Success) throw EigSolverFailure("Steklov eigensolve failed");
  SteklovPairs out;
  out.mu.resize(k);
  out.psi.resize(n, k);
  for (int j = 0; j < k; ++j) {
    out.mu[j] = es.eigenvalues()[n - 1 - j];
    VecXc v = es.eigenvectors().col(n - 1 - j);
    v /= std::sqrt(std::real(v.dot(d.gram.cast<cd>() * v)));
    fix_phase(v);
    out.psi.col(j) = v;
  }
  return out;
}

MatXc solution_operator(const FibreContext& ctx, Region r, double weight, cd z) {
  const RegionShift s = region_shift(ctx, r, z / weight);
  const auto& blk = ctx.region(r);
  MatXc S(blk.size(), blk.n_trace());
  S.topRows(blk.n_interior) = s.X;
  S.bottomRows(blk.n_trace()).setIdentity();
  return S;
}

namespace {

MatXc m_from_shift(const FibreContext& ctx, const RegionShift& s, double weight) {
  const MatXd Br = region_boundary_gram(ctx, s.region);
  const Eigen::LLT<MatXd> llt(Br);
  const MatXc W = weight * s.schur;
  const MatXc local = -(llt.solve(W.real()).cast<cd>() + cd(0, 1) * llt.solve(W.imag()).cast<cd>());
  const auto pos = trace_positions(ctx, s.region);
  MatXc M = MatXc::Zero(ctx.n_trace_total(), ctx.n_trace_total());
  for (size_t j = 0; j < pos.size(); ++j)
    for (size_t i = 0; i < pos.size(); ++i) M(pos[i], pos[j]) = local(i, j);
  return M;
}

}  // namespace

MatXc m_component(const FibreContext& ctx, Region r, double weight, cd z) {
  return m_from_shift(ctx, region_shift(ctx, r, z / weight), weight);
}

MatXc m_operator(const FibreContext& ctx, double eps, cd z) {
  const RegionWeights w = fem::contrast_weights(eps);
  MatXc M = MatXc::Zero(ctx.n_trace_total(), ctx.n_trace_total());
  for (Region r : geometry::kRegions) M += m_component(ctx, r, w[r], z);
  return M;
}

TripleEval evaluate(const FibreContext& ctx, const RegionWeights& w, cd z) {
  TripleEval ev;
  ev.z = z;
  ev.w = w;
  const int nE = ctx.n_trace_total();
  ev.S = MatXc::Zero(ctx.n_broken, nE);
  ev.M = MatXc::Zero(nE, nE);
  for (Region r : geometry::kRegions) {
    const double wr = w[r];
    if (wr == 0) throw HiconError("evaluate: region weights must be nonzero");
    ev.shift[idx(r)] = region_shift(ctx, r, z / wr);
    const auto& s = ev.shift[idx(r)];
    const auto& blk = ctx.region(r);
    const auto pos = trace_positions(ctx, r);
    for (size_t j = 0; j < pos.size(); ++j) {
      ev.S.col(pos[j]).segment(blk.offset, blk.n_interior) = s.X.col(j);
      ev.S(blk.offset + blk.n_interior + static_cast<int>(j), pos[j]) = 1.0;
    }
    ev.M += m_from_shift(ctx, s, wr);
  }
  return ev;
}

MatXc decoupled_resolvent_region(const FibreContext& ctx, const TripleEval& ev, Region r) {
  const auto& blk = ctx.region(r);
  const auto& s = ev.shift[idx(r)];
  MatXc R = MatXc::Zero(blk.size(), blk.size());
  R.topRows(blk.n_interior) = s.lu.solve(blk.M.topRows(blk.n_interior)) / ev.w[r];
  return R;
}

MatXc decoupled_resolvent(const FibreContext& ctx, const TripleEval& ev) {
  MatXc R = MatXc::Zero(ctx.n_broken, ctx.n_broken);
  for (Region r : geometry::kRegions) {
    const auto& blk = ctx.region(r);
    R.block(blk.offset, blk.offset, blk.size(), blk.size()) = decoupled_resolvent_region(ctx, ev, r);
  }
  return R;
}

VecXc gamma0(const FibreContext& ctx, const VecXc& u) {
  const auto& blk = ctx.region(Region::Soft);
  return u.segment(blk.offset + blk.n_interior, blk.n_trace());
}

VecXc gamma1(const FibreContext& ctx, const RegionWeights& w, const VecXc& u, const VecXc& f) {
  VecXc g = VecXc::Zero(ctx.n_trace_total());
  for (Region r : geometry::kRegions) {
    const auto& blk = ctx.region(r);
    const VecXc ur = u.segment(blk.offset, blk.size());
    const VecXc fr = f.segment(blk.offset, blk.size());
    const VecXc res = (blk.M * fr - w[r] * (blk.K * ur)).tail(blk.n_trace());
    const Eigen::LLT<MatXd> llt(region_boundary_gram(ctx, r));
    const VecXc loc = llt.solve(res.real()).cast<cd>() + cd(0, 1) * llt.solve(res.imag()).cast<cd>();
    const auto pos = trace_positions(ctx, r);
    for (size_t k = 0; k < pos.size(); ++k) g[pos[k]] += loc[k];
  }
  return g;
}

MatXc weighted_adjoint(const MatXc& X, const MatXc& gram_domain, const MatXc& gram_codomain) {
  return gram_domain.llt().solve(X.adjoint() * gram_codomain);
}

SpectralProjection SpectralProjection::with_phases(double g_int, double g_ls) const {
  SpectralProjection p = *this;
  const cd a = std::exp(cd(0, g_int)), b = std::exp(cd(0, g_ls));
  p.psi_int *= a;
  p.Psi_int *= a;
  p.psi_ls *= b;
  p.Psi_ls *= b;
  p.Ppsi.col(0) *= a;
  p.Ppsi.col(1) *= b;
  return p;
}

SpectralProjection spectral_projection(const FibreContext& ctx, double gap_floor) {
  SpectralProjection sp;
  const SteklovPairs si = steklov_eigs(ctx, Region::StiffInt, 2);
  const SteklovPairs sl = steklov_eigs(ctx, Region::StiffLs, 2);
  auto check = [&](const SteklovPairs& s, const char* name) {
    if (s.mu[0] - s.mu[1] < gap_floor * std::abs(s.mu[1]))
      throw DegenerateEigenvalue(std::string("first Steklov eigenvalue not simple in ") + name);
  };
  check(si, "stiff-int");
  check(sl, "stiff-ls");
  sp.mu_int = si.mu[0];
  sp.mu2_int = si.mu[1];
  // Constants are τ-harmonic on stiff-ls at τ=0, so μ₁ is exactly 0 there; drop the round-off
  // so that it is not amplified by ε⁻².
  sp.mu_ls = (ctx.tau.squaredNorm() == 0 && std::abs(sl.mu[0]) <= 1e-8) ? 0.0 : sl.mu[0];
  sp.mu2_ls = sl.mu[1];
  sp.psi_int = si.psi.col(0);
  sp.psi_ls = sl.psi.col(0);
  sp.Psi_int = harmonic_lift(ctx, Region::StiffInt) * sp.psi_int;
  sp.Psi_ls = harmonic_lift(ctx, Region::StiffLs) * sp.psi_ls;
  sp.norm_int = std::sqrt(std::real(sp.Psi_int.dot(ctx.region(Region::StiffInt).M * sp.Psi_int)));
  sp.norm_ls = std::sqrt(std::real(sp.Psi_ls.dot(ctx.region(Region::StiffLs).M * sp.Psi_ls)));
  const int n0 = static_cast<int>(ctx.B_iface[0].rows()), n1 = static_cast<int>(ctx.B_iface[1].rows());
  sp.Ppsi = MatXc::Zero(n0 + n1, 2);
  sp.Ppsi.col(0).head(n0) = sp.psi_int;
  sp.Ppsi.col(1).tail(n1) = sp.psi_ls;
  sp.P = sp.Ppsi * sp.Ppsi.adjoint() * ctx.B.cast<cd>();
  return sp;
}

}  // namespace hicon::triple
