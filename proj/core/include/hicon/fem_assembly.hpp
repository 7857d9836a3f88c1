#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "hicon/geometry.hpp"
#include "hicon/types.hpp"

namespace hicon::fem {

using geometry::Interface;
using geometry::PeriodCellMesh;
using geometry::Region;

// Gauge: basis functions e^{-iτ·x}φ_j with quasi-periodic coefficients; the
// element matrices are those of τ=0 and τ enters only through the seam phases.
// Standard: plain P1 functions with the τ terms integrated exactly per element.
enum class Basis { Gauge, Standard };

struct RegionWeights {
  std::array<double, 3> w{1.0, 1.0, 1.0};
  double operator[](Region r) const { return w[static_cast<int>(r)]; }
};

// Stiff weight eps^-2 on both stiff regions, 1 on soft.
RegionWeights contrast_weights(double eps);

struct RegionBlock {
  Region region;
  // Global free-dof index of each local dof; interior first, then trace.
  std::vector<int> dofs;
  int n_interior = 0;
  // Unweighted stiffness and mass on the region, local numbering.
  MatXc K;
  MatXc M;
  // Offset of the block in the broken space V_int ⊕ V_soft ⊕ V_ls.
  int offset = 0;

  int size() const { return static_cast<int>(dofs.size()); }
  int n_trace() const { return size() - n_interior; }
};

struct FibreContext {
  std::shared_ptr<const PeriodCellMesh> mesh;
  Vec2 tau{0, 0};
  Basis basis = Basis::Gauge;

  int n_free = 0;
  // vertex -> free index of its master
  std::vector<int> free_index;
  // vertex -> coefficient factor relative to its master
  std::vector<cd> phase;

  std::array<RegionBlock, 3> regions;
  // Region matrices scattered to the global free-dof space.
  std::array<SpMatc, 3> K_global;
  std::array<SpMatc, 3> M_global;

  // 1D P1 Gram on Γ_int, Γ_ls (loop order), and their direct sum on 𝓔_h.
  std::array<MatXd, 2> B_iface;
  MatXd B;
  int n_broken = 0;

  const RegionBlock& region(Region r) const { return regions[static_cast<int>(r)]; }
  int n_trace_total() const { return static_cast<int>(B.rows()); }
  int trace_offset(Interface g) const { return g == Interface::Int ? 0 : static_cast<int>(B_iface[0].rows()); }
};

FibreContext assemble_fibre(std::shared_ptr<const PeriodCellMesh> mesh, const Vec2& tau, Basis basis = Basis::Gauge);

// Σ_r w_r K_r on the free-dof space.
SpMatc assemble_direct_operator(const FibreContext& ctx, double eps);
SpMatc assemble_weighted(const FibreContext& ctx, const RegionWeights& w);
SpMatc total_mass(const FibreContext& ctx);

// Solves (K_w − z M_w)u = M_w rhs over the regions of nonzero weight with u fixed
// on dirichlet_set. Vectors live on the free-dof space; inactive dofs are returned as 0.
VecXc solve_shifted(const FibreContext& ctx, const RegionWeights& w, cd z, const VecXc& rhs,
                    const std::vector<int>& dirichlet_set, const VecXc& dirichlet_values);

// Nodal coefficients of a function in the context's basis (gauge factor included).
VecXc interpolate(const FibreContext& ctx, const std::function<cd(const Vec2&)>& f);

// Broken-space Gram blockdiag(M_r), and the selection E: free dofs -> broken space.
MatXc broken_gram(const FibreContext& ctx);
SpMatd broken_embedding(const FibreContext& ctx);

// Cholesky-factored block-diagonal Gram defining a discrete L² space.
class WeightedSpace {
 public:
  explicit WeightedSpace(const std::vector<MatXc>& blocks);
  explicit WeightedSpace(const MatXc& gram);
  int dim() const { return n_; }
  VecXc apply_factor(const VecXc& x) const;        // C x with G = Cᴴ C
  VecXc apply_factor_adj(const VecXc& x) const;    // Cᴴ x
  VecXc solve_factor(const VecXc& x) const;        // C⁻¹ x
  VecXc solve_factor_adj(const VecXc& x) const;    // C⁻ᴴ x
  MatXc gram() const;

 private:
  int n_ = 0;
  std::vector<int> offsets_;
  std::vector<Eigen::LLT<MatXc>> llt_;
};

// ‖T‖ between the discrete L² spaces: largest singular value of C T D⁻¹.
double weighted_operator_norm(const MatXc& T, const WeightedSpace& dom, const WeightedSpace& cod);
double weighted_operator_norm(const MatXc& T, const MatXc& gram_domain, const MatXc& gram_codomain);
double weighted_vector_norm(const VecXc& x, const WeightedSpace& space);

// The broken space with its per-region mass Grams.
WeightedSpace broken_space(const FibreContext& ctx);

// Lowest m eigenvalues of the Hermitian pencil (K, M), ascending.
VecXd lowest_eigenvalues(const SpMatc& K, const SpMatc& M, int m);

struct RescalingReport {
  VecXd eig_scaled;  // on εQ with weights (1, ε², 1) and quasimomentum θ
  VecXd eig_cell;    // on Q with weights (ε⁻², 1, ε⁻²) and τ = εθ
  double max_rel_gap = 0;
};

RescalingReport fibre_rescaling_check(const PeriodCellMesh& mesh, double eps, const Vec2& theta, int m = 5,
                                      Basis basis = Basis::Gauge);

}  // namespace hicon::fem
