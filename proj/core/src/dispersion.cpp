#include "hicon/dispersion.hpp"

#include <cmath>
#include <sstream>

namespace hicon::dispersion {

using geometry::Region;

namespace {

double snapped_mu_int(const SpectralProjection& sp) { return std::abs(sp.mu_int) <= 1e-8 ? 0.0 : sp.mu_int; }

}  // namespace

std::pair<VecXc, VecXc> lifts_v_w(const FibreContext& ctx, const SpectralProjection& sp) {
  const MatXc Pi = triple::harmonic_lift(ctx, Region::Soft);
  return {Pi * sp.Ppsi.col(0), Pi * sp.Ppsi.col(1)};
}

std::pair<cd, cd> T_operators(const FibreContext& ctx, const SpectralProjection& sp, double eps, const VecXc& u,
                              const VecXc& f, cd beta_int, cd beta_ls) {
  const auto& blk = ctx.region(Region::Soft);
  // B Γ₁^soft u = (M f − K u) restricted to the trace rows.
  const VecXc Bg = (blk.M * f - blk.K * u).tail(blk.n_trace());
  const cd c_int = sp.Ppsi.col(0).dot(Bg);
  const cd c_ls = sp.Ppsi.col(1).dot(Bg);
  const double inv2 = 1.0 / (eps * eps);
  const cd t_int = -(c_int + inv2 * snapped_mu_int(sp) * beta_int / sp.norm_int) / sp.norm_int;
  const cd t_ls = -(c_ls + inv2 * sp.mu_ls * beta_ls / sp.norm_ls) / sp.norm_ls;
  return {t_int, t_ls};
}

MatXc T_matrix(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z) {
  const hom::HomPieces p = hom::hom_pieces(ctx, sp, eps, z);
  MatXc L = p.m;
  L(0, 0) += snapped_mu_int(sp) / (eps * eps);
  L(1, 1) += sp.mu_ls / (eps * eps);
  const Eigen::DiagonalMatrix<cd, 2> Dinv(1.0 / sp.norm_int, 1.0 / sp.norm_ls);
  return -(Dinv * L * Dinv);
}

DispersionSample dispersion_sample(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z,
                                   double den_floor) {
  const triple::RegionShift s = triple::region_shift(ctx, Region::Soft, z);
  const auto& blk = ctx.region(Region::Soft);
  const int nE = blk.n_trace();
  MatXc S(blk.size(), nE);
  S.topRows(blk.n_interior) = s.X;
  S.bottomRows(nE).setIdentity();
  // z(A₀^soft − z)⁻¹v + v = S^soft(z)(ψ₁^int, 0); likewise for w.
  const VecXc Sv = S * sp.Ppsi.col(0);
  const VecXc Sw = S * sp.Ppsi.col(1);
  const double ni = sp.norm_int, nl = sp.norm_ls;

  const auto [Ti_v, Tl_v0] = T_operators(ctx, sp, eps, Sv, z * Sv, ni, 0.0);
  const auto [Ti_w0, Tl_w] = T_operators(ctx, sp, eps, Sw, z * Sw, 0.0, nl);

  DispersionSample d;
  d.tau = ctx.tau;
  d.eps = eps;
  d.z = z;
  d.norm_int = ni;
  d.norm_ls = nl;

  d.K_a_int = Ti_v / ni;
  d.K_a_ls = Tl_w / nl;
  d.den_int = z - Tl_w / nl;
  d.den_ls = z - Ti_v / ni;
  const double floor = den_floor * std::max(1.0, std::abs(z));
  auto fail = [&](const char* which) {
    std::ostringstream os;
    os << "dispersion denominator (" << which << ") vanishes at tau=(" << ctx.tau.x() << "," << ctx.tau.y()
       << "), eps=" << eps << ", z=" << z;
    throw DenominatorVanishes(os.str());
  };
  if (std::abs(d.den_int) < floor) fail("stiff-int");
  if (std::abs(d.den_ls) < floor) fail("stiff-ls");
  // K_b = [T_ls(Sv) T_int(Sw) / (z ‖Ψi‖‖Ψl‖)] / [1 − T_•(S•)/(z‖Ψ•‖)]
  const cd cross = Tl_v0 * Ti_w0 / (z * ni * nl);
  d.K_b_int = cross / (1.0 - Tl_w / (z * nl));
  d.K_b_ls = cross / (1.0 - Ti_v / (z * ni));
  d.K_int = d.K_a_int + d.K_b_int;
  d.K_ls = d.K_a_ls + d.K_b_ls;
  return d;
}

DispersionSample dispersion_K_int(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z,
                                  double den_floor) {
  return dispersion_sample(ctx, sp, eps, z, den_floor);
}

std::vector<DispersionSample> dispersion_K_ls(const FibreContext& ctx, const SpectralProjection& sp, cd z,
                                              const std::vector<double>& eps_probe_list, double den_floor) {
  std::vector<DispersionSample> out;
  for (double eps : eps_probe_list) out.push_back(dispersion_sample(ctx, sp, eps, z, den_floor));
  return out;
}

double relative_spread(const std::vector<cd>& values) {
  if (values.empty()) return 0.0;
  double s = 0;
  for (const auto& v : values) s = std::max(s, std::abs(v - values[0]));
  return s / std::abs(values[0]);
}

}  // namespace hicon::dispersion
