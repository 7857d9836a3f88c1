#pragma once

#include <vector>

#include "hicon/krein.hpp"

namespace hicon::hom {

using fem::FibreContext;
using triple::SpectralProjection;

// Rank-2 truncated pieces at one (ε, z).
struct HomPieces {
  double eps = 1;
  cd z;
  MatXc m;       // Ppsiᴴ B M^soft(z) Ppsi, 2×2
  MatXc bracket; // Λ̆ + z Π̆*Π̆ + m
  MatXc Spsi;    // S^soft(z) Ppsi, soft dofs × 2
  MatXc Spsi_c;  // S^soft(z̄) Ppsi
  MatXc R0;      // (A₀^soft − z)⁻¹, soft dofs
};

// μ₁^int is entered as exactly 0 when |μ₁^int| ≤ zero_tol.
HomPieces hom_pieces(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z, double zero_tol = 1e-8);

MatXc r_hom_soft(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z);

struct HomResolvent {
  MatXc soft_block;       // soft × soft
  MatXc soft_to_stiff;    // 2 × soft: rank-2 coordinates (β_int, β_ls) of the stiff output
  MatXc stiff_to_soft;    // soft × 2
  MatXc stiff_block;      // 2×2 in the orthonormal coordinates Ψ/‖Ψ‖
  MatXc full;             // on the broken space
};

// Compact assembly: 𝓡 = (R₀^soft ⊕ 0) − W(z) A(z)⁻¹ W(z̄)ᴴ G with W = [Spsi; Ψ_int e₁ᵀ; Ψ_ls e₂ᵀ].
HomResolvent r_hom_full(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z);

// Block-by-block assembly through k(z), used to cross-check the compact form.
MatXc r_hom_full_literal(const FibreContext& ctx, const SpectralProjection& sp, double eps, cd z);

struct DistanceRow {
  double eps = 0;
  double distance = 0;
  double slope_local = 0;  // log-log slope against the previous row (0 for the first)
};

std::vector<DistanceRow> norm_resolvent_distance(const FibreContext& ctx, const SpectralProjection& sp,
                                                 const std::vector<double>& eps_list, cd z);

}  // namespace hicon::hom
