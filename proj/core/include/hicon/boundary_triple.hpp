#pragma once

#include <array>
#include <vector>

#include "hicon/fem_assembly.hpp"

namespace hicon::triple {

using fem::FibreContext;
using fem::RegionWeights;
using geometry::Interface;
using geometry::Region;

// Elimination of the interior of one region for the pencil K_r − ζ M_r:
// X = −(K_II − ζM_II)⁻¹(K_IΓ − ζM_IΓ), schur = (K_ΓΓ − ζM_ΓΓ) + (K_ΓI − ζM_ΓI) X.
struct RegionShift {
  Region region = Region::Soft;
  cd zeta{0, 0};
  Eigen::PartialPivLU<MatXc> lu;
  MatXc X;
  MatXc schur;
};

RegionShift region_shift(const FibreContext& ctx, Region r, cd zeta);

// Positions of the region's trace dofs inside 𝓔_h = trace(Γ_int) ⊕ trace(Γ_ls).
std::vector<int> trace_positions(const FibreContext& ctx, Region r);
MatXd region_boundary_gram(const FibreContext& ctx, Region r);

// Π_r as a region-local matrix [X(0); I].
MatXc harmonic_lift(const FibreContext& ctx, Region r);
VecXc harmonic_lift(const FibreContext& ctx, Region r, const VecXc& data);

struct DtN {
  MatXc schur;
  MatXd gram;
  // −B⁻¹ schur
  MatXc op() const;
};

// Unweighted DtN of the region, optionally shifted: Schur complement of K_r − z M_r.
DtN dtn_matrix(const FibreContext& ctx, Region r, cd z = 0);

struct SteklovPairs {
  VecXd mu;   // descending
  MatXc psi;  // B-orthonormal columns, phase fixed
};

// −Schur(0)ψ = μ Bψ on a stiff region.
SteklovPairs steklov_eigs(const FibreContext& ctx, Region r, int k);

// Makes the first entry of (near) maximal modulus real positive.
void fix_phase(VecXc& v);

// S_r(z) for the region operator with weight w, region-local [X(z/w); I].
MatXc solution_operator(const FibreContext& ctx, Region r, double weight, cd z);

// w·(shifted DtN at z/w), i.e. −B_r⁻¹ w Schur(z/w), embedded into 𝓔_h.
MatXc m_component(const FibreContext& ctx, Region r, double weight, cd z);
MatXc m_operator(const FibreContext& ctx, double eps, cd z);

// All triple pieces at one (weights, z) on the broken space V_int ⊕ V_soft ⊕ V_ls.
struct TripleEval {
  cd z;
  RegionWeights w;
  std::array<RegionShift, 3> shift;
  MatXc S;  // n_broken × n_E
  MatXc M;  // n_E × n_E
};

TripleEval evaluate(const FibreContext& ctx, const RegionWeights& w, cd z);

// (A₀ − z)⁻¹ on the broken space (zero trace in every region).
MatXc decoupled_resolvent(const FibreContext& ctx, const TripleEval& ev);
MatXc decoupled_resolvent_region(const FibreContext& ctx, const TripleEval& ev, Region r);

// Γ₀: soft-region trace of a broken vector. Γ₁ via the residual of Âu = f.
VecXc gamma0(const FibreContext& ctx, const VecXc& u);
VecXc gamma1(const FibreContext& ctx, const RegionWeights& w, const VecXc& u, const VecXc& f);

// X* = G_dom⁻¹ Xᴴ G_cod.
MatXc weighted_adjoint(const MatXc& X, const MatXc& gram_domain, const MatXc& gram_codomain);

struct SpectralProjection {
  double mu_int = 0, mu_ls = 0;
  double mu2_int = 0, mu2_ls = 0;
  VecXc psi_int, psi_ls;  // on the Γ_int / Γ_ls loops
  VecXc Psi_int, Psi_ls;  // stiff lifts, region-local
  double norm_int = 0, norm_ls = 0;
  MatXc Ppsi;  // n_E × 2, columns (ψ_int, 0), (0, ψ_ls)
  MatXc P;     // Ppsi Ppsiᴴ B

  SpectralProjection with_phases(double g_int, double g_ls) const;
};

// Throws DegenerateEigenvalue if μ₁ − μ₂ < gap_floor·|μ₂| in either stiff region.
SpectralProjection spectral_projection(const FibreContext& ctx, double gap_floor = 1e-6);

}  // namespace hicon::triple
