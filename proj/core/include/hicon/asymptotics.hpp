#pragma once

#include <memory>
#include <vector>

#include "hicon/boundary_triple.hpp"

namespace hicon::asym {

using geometry::PeriodCellMesh;

struct U1Solution {
  Vec2 theta{1, 0};
  VecXd u1;        // stiff-ls local dofs of the τ=0 context
  double residual = 0;  // ‖K u₁ + λ m − b‖ / ‖b‖
  double mean = 0;      // ∫ u₁
  double grad_energy = 0;  // ‖∇u₁‖²
  double theta_grad = 0;   // ∫ θ·∇u₁
  double flux = 0;         // ∫_Γ (θ·n) u₁, n pointing out of Q_stiff-ls
};

// Cell problem on Q_stiff-ls: −Δu₁ = 0, −∂u₁/∂n = θ·n on Γ_ls, periodic, ∫u₁ = 0.
U1Solution solve_u1(const PeriodCellMesh& mesh, const Vec2& theta);

// Right-hand side b_i = −∫_Γls (θ·n) φ_i on the stiff-ls local dofs.
VecXd u1_load(const fem::FibreContext& ctx0, const Vec2& theta);

// (1/|Γ_ls|) ∫_Q_ls (θ·∇u₁ + 1)
double alpha2(const PeriodCellMesh& mesh, const Vec2& theta);
// (2∫θ·∇u₁ + |Q_ls| − ∫_Γ(θ·n)u₁)/|Γ_ls|
double alpha2_boundary_route(const PeriodCellMesh& mesh, const Vec2& theta);

struct CorrectorSet {
  std::array<double, 3> alpha{};  // α₂ at e₁, e₂, (e₁+e₂)/√2
  Eigen::Matrix2d mu_star;
  double polarization_residual = 0;  // |μ*θ·θ + α₂(θ)| at an extra direction
};

CorrectorSet correctors(const PeriodCellMesh& mesh);

struct ExpansionRow {
  double tau_norm = 0;
  Vec2 theta;
  double mu1 = 0;
  double model = 0;
  double remainder_over_tau3 = 0;
};

struct ExpansionReport {
  std::vector<ExpansionRow> rows;
  double cubic_constant = 0;  // max remainder/|τ|³
};

ExpansionReport verify_steklov_expansion(const std::shared_ptr<const PeriodCellMesh>& mesh,
                                         const std::vector<Vec2>& tau_list);

double mu1_stiff_ls(const std::shared_ptr<const PeriodCellMesh>& mesh, const Vec2& tau);

}  // namespace hicon::asym
