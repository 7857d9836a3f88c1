#pragma once

#include <utility>
#include <vector>

#include "hicon/homogenized.hpp"

namespace hicon::dispersion {

using fem::FibreContext;
using triple::SpectralProjection;

struct DispersionSample {
  Vec2 tau{0, 0};
  double eps = 0;
  cd z;
  cd K_int, K_a_int, K_b_int;
  cd K_ls, K_a_ls, K_b_ls;
  // z − T_ls,ls for K_b_int and z − T_int,int for K_b_ls
  cd den_int, den_ls;
  double norm_int = 0, norm_ls = 0;
};

// v = Π^soft(ψ₁^int, 0), w = Π^soft(0, ψ₁^ls), soft-local.
std::pair<VecXc, VecXc> lifts_v_w(const FibreContext& ctx, const SpectralProjection& sp);

// Rows of −((jΠ̆)*)⁻¹(P Γ₁^soft u + Λ̆ β) for a soft field u with Â^soft u = f.
// β are coordinates in the normalized stiff basis Ψ/‖Ψ‖.
std::pair<cd, cd> T_operators(const FibreContext& ctx, const SpectralProjection& sp, double eps, const VecXc& u,
                              const VecXc& f, cd beta_int, cd beta_ls);

// T(z) = −D⁻¹(Λ̆ + m(z))D⁻¹ with D = diag(‖Ψ‖).
MatXc T_matrix(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z);

// Both dispersion functions assembled from T_operators; throws DenominatorVanishes
// when |den| < den_floor·max(1, |z|).
DispersionSample dispersion_sample(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z,
                                   double den_floor = 1e-8);

DispersionSample dispersion_K_int(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z,
                                  double den_floor = 1e-8);

// K_ls evaluated at every probe ε.
std::vector<DispersionSample> dispersion_K_ls(const FibreContext& ctx, const SpectralProjection& sp, cd z,
                                              const std::vector<double>& eps_probe_list, double den_floor = 1e-8);

// max |x_i − x_0| / |x_0|
double relative_spread(const std::vector<cd>& values);

}  // namespace hicon::dispersion
