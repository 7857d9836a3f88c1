#pragma once

#include "hicon/boundary_triple.hpp"

namespace hicon::krein {

using fem::FibreContext;
using triple::SpectralProjection;

// M̃ = UᴴBMU in a B-orthonormal basis U whose first two columns span P𝓔.
struct BlockM {
  MatXc A;     // 2×2
  MatXc Bblk;  // 2×(n−2)
  MatXc Eblk;  // (n−2)×2
  MatXc Dblk;  // (n−2)×(n−2)
  MatXc U;     // adapted basis, n×n
  MatXd gram;  // B

  MatXc reassemble() const;  // M = U M̃ UᴴB
};

// Ppsi: n×2 matrix whose columns are the B-orthonormal Steklov vectors.
BlockM block_decompose(const MatXc& M, const MatXd& B, const MatXc& Ppsi);

struct MInverse {
  MatXc inverse;  // M⁻¹ on 𝓔_h
  MatXc schur;    // 𝕊 = D − E A⁻¹ B
  double norm_A_inv = 0;
  double norm_S_inv = 0;
  double dist_Minv_diag = 0;  // ‖M⁻¹ − diag(A⁻¹, 0)‖ in the B-norm
};

MInverse invert_m(const BlockM& blocks);

// −(P_⊥ + P M)⁻¹P and −P(P M P)⁻¹P in adapted coordinates; equal by the block algebra.
std::pair<MatXc, MatXc> b0b1_check(const BlockM& blocks);

// R = (A₀ − z)⁻¹ − S(z) M(z)⁻¹ S(z̄)* on the broken space V_int ⊕ V_soft ⊕ V_ls.
MatXc resolvent_krein(const FibreContext& ctx, double eps, cd z);

// E (A_h − z M)⁻¹ Eᵀ G with a sparse LU on the conforming space.
MatXc resolvent_direct(const FibreContext& ctx, double eps, cd z);

// Soft block of a broken-space matrix.
MatXc soft_block(const FibreContext& ctx, const MatXc& R);

// (A₀^soft − z)⁻¹ − S^soft(z)(M_stiff(z) + M^soft(z))⁻¹ S^soft(z̄)*.
MatXc generalized_resolvent_soft(const FibreContext& ctx, double eps, cd z);

}  // namespace hicon::krein
