#include "hicon/fem_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hicon::fem {

namespace {

struct Element {
  std::array<Vec2, 3> grad;
  double area;
};

Element element(const PeriodCellMesh& mesh, const geometry::Triangle& t) {
  const Vec2& p0 = mesh.vertices[t.v[0]];
  const Vec2& p1 = mesh.vertices[t.v[1]];
  const Vec2& p2 = mesh.vertices[t.v[2]];
  const std::array<Vec2, 3> p{p0, p1, p2};
  Element e;
  e.area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x()));
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = p[(i + 1) % 3];
    const Vec2& b = p[(i + 2) % 3];
    e.grad[i] = Vec2(a.y() - b.y(), b.x() - a.x()) / (2 * e.area);
  }
  return e;
}

SpMatc scatter(const MatXc& A, const std::vector<int>& dofs, int n) {
  std::vector<Eigen::Triplet<cd>> trip;
  for (int j = 0; j < A.cols(); ++j)
    for (int i = 0; i < A.rows(); ++i)
      if (A(i, j) != cd(0)) trip.emplace_back(dofs[i], dofs[j], A(i, j));
  SpMatc S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

}  // namespace

RegionWeights contrast_weights(double eps) {
  const double s = 1.0 / (eps * eps);
  return RegionWeights{{s, 1.0, s}};
}

FibreContext assemble_fibre(std::shared_ptr<const PeriodCellMesh> mesh, const Vec2& tau, Basis basis) {
  FibreContext ctx;
  ctx.mesh = mesh;
  ctx.tau = tau;
  ctx.basis = basis;
  const int nv = mesh->num_vertices();

  ctx.free_index.assign(nv, -1);
  for (size_t k = 0; k < mesh->free_dofs.size(); ++k) ctx.free_index[mesh->free_dofs[k]] = static_cast<int>(k);
  ctx.n_free = static_cast<int>(mesh->free_dofs.size());
  ctx.phase.assign(nv, cd(1));
  for (int v = 0; v < nv; ++v) {
    const int m = mesh->periodic_map[v];
    ctx.free_index[v] = ctx.free_index[m];
    if (basis == Basis::Gauge && m != v) ctx.phase[v] = std::exp(cd(0, tau.dot(mesh->vertices[v] - mesh->vertices[m])));
  }

  const auto& loops = mesh->interface_loops;
  int offset = 0;
  for (Region r : geometry::kRegions) {
    RegionBlock& blk = ctx.regions[static_cast<int>(r)];
    blk.region = r;
    std::vector<int> trace;
    if (r != Region::StiffLs)
      for (int v : loops[0]) trace.push_back(ctx.free_index[v]);
    if (r != Region::StiffInt)
      for (int v : loops[1]) trace.push_back(ctx.free_index[v]);
    std::vector<char> in_region(ctx.n_free, 0), is_trace(ctx.n_free, 0);
    for (int f : trace) is_trace[f] = 1;
    for (const auto& t : mesh->triangles)
      if (t.region == r)
        for (int v : t.v) in_region[ctx.free_index[v]] = 1;
    for (int f = 0; f < ctx.n_free; ++f)
      if (in_region[f] && !is_trace[f]) blk.dofs.push_back(f);
    blk.n_interior = static_cast<int>(blk.dofs.size());
    blk.dofs.insert(blk.dofs.end(), trace.begin(), trace.end());
    blk.offset = offset;
    offset += blk.size();

    std::map<int, int> local;
    for (int k = 0; k < blk.size(); ++k) local[blk.dofs[k]] = k;
    blk.K = MatXc::Zero(blk.size(), blk.size());
    blk.M = MatXc::Zero(blk.size(), blk.size());
    for (const auto& t : mesh->triangles) {
      if (t.region != r) continue;
      const Element e = element(*mesh, t);
      for (int a = 0; a < 3; ++a) {
        const int la = local.at(ctx.free_index[t.v[a]]);
        const cd pa = std::conj(ctx.phase[t.v[a]]);
        for (int b = 0; b < 3; ++b) {
          const int lb = local.at(ctx.free_index[t.v[b]]);
          const cd pb = ctx.phase[t.v[b]];
          const double m = e.area / 12.0 * (a == b ? 2.0 : 1.0);
          cd k = e.area * e.grad[a].dot(e.grad[b]);
          if (basis == Basis::Standard)
            k += cd(0, e.area / 3.0 * tau.dot(e.grad[a] - e.grad[b])) + tau.squaredNorm() * m;
          blk.K(la, lb) += pa * k * pb;
          blk.M(la, lb) += pa * m * pb;
        }
      }
    }
    ctx.K_global[static_cast<int>(r)] = scatter(blk.K, blk.dofs, ctx.n_free);
    ctx.M_global[static_cast<int>(r)] = scatter(blk.M, blk.dofs, ctx.n_free);
  }
  ctx.n_broken = offset;

  for (int g = 0; g < 2; ++g) {
    const auto& loop = loops[g];
    const int n = static_cast<int>(loop.size());
    MatXd B = MatXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      const int k1 = (k + 1) % n;
      const double L = (mesh->vertices[loop[k]] - mesh->vertices[loop[k1]]).norm();
      B(k, k) += L / 3;
      B(k1, k1) += L / 3;
      B(k, k1) += L / 6;
      B(k1, k) += L / 6;
    }
    ctx.B_iface[g] = B;
  }
  const int n0 = static_cast<int>(ctx.B_iface[0].rows()), n1 = static_cast<int>(ctx.B_iface[1].rows());
  ctx.B = MatXd::Zero(n0 + n1, n0 + n1);
  ctx.B.topLeftCorner(n0, n0) = ctx.B_iface[0];
  ctx.B.bottomRightCorner(n1, n1) = ctx.B_iface[1];
  return ctx;
}

SpMatc assemble_weighted(const FibreContext& ctx, const RegionWeights& w) {
  SpMatc A(ctx.n_free, ctx.n_free);
  for (int r = 0; r < 3; ++r)
    if (w.w[r] != 0) A += w.w[r] * ctx.K_global[r];
  return A;
}

SpMatc assemble_direct_operator(const FibreContext& ctx, double eps) {
  return assemble_weighted(ctx, contrast_weights(eps));
}

SpMatc total_mass(const FibreContext& ctx) {
  SpMatc M(ctx.n_free, ctx.n_free);
  for (int r = 0; r < 3; ++r) M += ctx.M_global[r];
  return M;
}

VecXc solve_shifted(const FibreContext& ctx, const RegionWeights& w, cd z, const VecXc& rhs,
                    const std::vector<int>& dirichlet_set, const VecXc& dirichlet_values) {
  const int n = ctx.n_free;
  SpMatc Kw(n, n), Mw(n, n);
  std::vector<char> active(n, 0);
  for (int r = 0; r < 3; ++r) {
    if (w.w[r] == 0) continue;
    Kw += w.w[r] * ctx.K_global[r];
    Mw += ctx.M_global[r];
    for (int d : ctx.regions[r].dofs) active[d] = 1;
  }
  VecXc u = VecXc::Zero(n);
  std::vector<char> fixed(n, 0);
  for (size_t k = 0; k < dirichlet_set.size(); ++k) {
    fixed[dirichlet_set[k]] = 1;
    u[dirichlet_set[k]] = dirichlet_values[k];
  }
  std::vector<int> unk_index(n, -1);
  int nu = 0;
  for (int i = 0; i < n; ++i)
    if (active[i] && !fixed[i]) unk_index[i] = nu++;
  if (nu == 0) return u;

  const SpMatc A = Kw - z * Mw;
  VecXc b = Mw * rhs - A * u;
  std::vector<Eigen::Triplet<cd>> trip;
  for (int j = 0; j < A.outerSize(); ++j)
    for (SpMatc::InnerIterator it(A, j); it; ++it)
      if (unk_index[it.row()] >= 0 && unk_index[it.col()] >= 0)
        trip.emplace_back(unk_index[it.row()], unk_index[it.col()], it.value());
  SpMatc Au(nu, nu);
  Au.setFromTriplets(trip.begin(), trip.end());
  VecXc bu(nu);
  for (int i = 0; i < n; ++i)
    if (unk_index[i] >= 0) bu[unk_index[i]] = b[i];
  Eigen::SparseLU<SpMatc> lu;
  lu.compute(Au);
  if (lu.info() != Eigen::Success) throw SingularSystem("solve_shifted: factorization failed (z near a discrete eigenvalue)");
  const VecXc x = lu.solve(bu);
  for (int i = 0; i < n; ++i)
    if (unk_index[i] >= 0) u[i] = x[unk_index[i]];
  return u;
}

VecXc interpolate(const FibreContext& ctx, const std::function<cd(const Vec2&)>& f) {
  VecXc u(ctx.n_free);
  for (int k = 0; k < ctx.n_free; ++k) {
    const Vec2& x = ctx.mesh->vertices[ctx.mesh->free_dofs[k]];
    u[k] = f(x);
    if (ctx.basis == Basis::Gauge) u[k] *= std::exp(cd(0, ctx.tau.dot(x)));
  }
  return u;
}

MatXc broken_gram(const FibreContext& ctx) {
  MatXc G = MatXc::Zero(ctx.n_broken, ctx.n_broken);
  for (const auto& blk : ctx.regions) G.block(blk.offset, blk.offset, blk.size(), blk.size()) = blk.M;
  return G;
}

SpMatd broken_embedding(const FibreContext& ctx) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& blk : ctx.regions)
    for (int k = 0; k < blk.size(); ++k) trip.emplace_back(blk.offset + k, blk.dofs[k], 1.0);
  SpMatd E(ctx.n_broken, ctx.n_free);
  E.setFromTriplets(trip.begin(), trip.end());
  return E;
}

WeightedSpace::WeightedSpace(const std::vector<MatXc>& blocks) {
  for (const auto& b : blocks) {
    offsets_.push_back(n_);
    n_ += static_cast<int>(b.rows());
    llt_.emplace_back(b);
    if (llt_.back().info() != Eigen::Success) throw NotSPD("Gram block is not positive definite");
  }
}

WeightedSpace::WeightedSpace(const MatXc& gram) : WeightedSpace(std::vector<MatXc>{gram}) {}

#define HICON_BLOCKWISE(expr)                                   \
  VecXc y(x.size());                                            \
  for (size_t b = 0; b < llt_.size(); ++b) {                    \
    const auto& f = llt_[b];                                    \
    const int n = static_cast<int>(f.matrixLLT().rows());       \
    const auto xs = x.segment(offsets_[b], n);                  \
    y.segment(offsets_[b], n) = expr;                           \
  }                                                             \
  return y;

VecXc WeightedSpace::apply_factor(const VecXc& x) const { HICON_BLOCKWISE(f.matrixU() * xs) }
VecXc WeightedSpace::apply_factor_adj(const VecXc& x) const { HICON_BLOCKWISE(f.matrixL() * xs) }
VecXc WeightedSpace::solve_factor(const VecXc& x) const { HICON_BLOCKWISE(f.matrixU().solve(xs)) }
VecXc WeightedSpace::solve_factor_adj(const VecXc& x) const { HICON_BLOCKWISE(f.matrixL().solve(xs)) }

#undef HICON_BLOCKWISE

MatXc WeightedSpace::gram() const {
  MatXc G = MatXc::Zero(n_, n_);
  for (size_t b = 0; b < llt_.size(); ++b) {
    const int n = static_cast<int>(llt_[b].matrixLLT().rows());
    G.block(offsets_[b], offsets_[b], n, n) = llt_[b].reconstructedMatrix();
  }
  return G;
}

WeightedSpace broken_space(const FibreContext& ctx) {
  std::vector<MatXc> blocks;
  for (const auto& blk : ctx.regions) blocks.push_back(blk.M);
  return WeightedSpace(blocks);
}

double weighted_vector_norm(const VecXc& x, const WeightedSpace& space) { return space.apply_factor(x).norm(); }

double weighted_operator_norm(const MatXc& T, const WeightedSpace& dom, const WeightedSpace& cod) {
  if (T.rows() != cod.dim() || T.cols() != dom.dim()) throw HiconError("weighted_operator_norm: dimension mismatch");
  const int n = dom.dim();
  if (n == 0 || T.rows() == 0) return 0.0;
  auto apply = [&](const VecXc& v) {
    const VecXc y = cod.apply_factor(T * dom.solve_factor(v));
    return VecXc(dom.solve_factor_adj(T.adjoint() * cod.apply_factor_adj(y)));
  };
  const int kmax = std::min(n, 80);
  std::vector<VecXc> V;
  std::vector<double> alpha, beta;
  VecXc v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(1.0 + 0.5 * std::sin(1.0 + i), 0.25 * std::cos(0.7 * i));
  v.normalize();
  double prev = -1, lam = 0;
  for (int k = 0; k < kmax; ++k) {
    V.push_back(v);
    VecXc w = apply(v);
    alpha.push_back(std::real(v.dot(w)));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : V) w -= q * q.dot(w);
    const int m = static_cast<int>(alpha.size());
    MatXd Tm = MatXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      Tm(i, i) = alpha[i];
      if (i + 1 < m) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
    }
    lam = Eigen::SelfAdjointEigenSolver<MatXd>(Tm, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double b = w.norm();
    if (std::abs(lam - prev) <= 1e-13 * std::abs(lam) || b <= 1e-14 * std::max(std::abs(lam), 1e-300)) break;
    prev = lam;
    beta.push_back(b);
    v = w / b;
  }
  return std::sqrt(std::max(lam, 0.0));
}

double weighted_operator_norm(const MatXc& T, const MatXc& gram_domain, const MatXc& gram_codomain) {
  return weighted_operator_norm(T, WeightedSpace(gram_domain), WeightedSpace(gram_codomain));
}

VecXd lowest_eigenvalues(const SpMatc& K, const SpMatc& M, int m) {
  const MatXc Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatXc> es(Kd, Md, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EigSolverFailure("generalized Hermitian eigensolve failed");
  return es.eigenvalues().head(std::min<int>(m, static_cast<int>(es.eigenvalues().size())));
}

RescalingReport fibre_rescaling_check(const PeriodCellMesh& mesh, double eps, const Vec2& theta, int m, Basis basis) {
  if (eps * theta.cwiseAbs().maxCoeff() > kPi + 1e-12) throw HiconError("rescaling check requires eps*|theta|_inf <= pi");
  auto small = std::make_shared<const PeriodCellMesh>(geometry::scaled(mesh, eps));
  auto cell = std::make_shared<const PeriodCellMesh>(mesh);
  const FibreContext a = assemble_fibre(small, theta, basis);
  const FibreContext b = assemble_fibre(cell, eps * theta, basis);
  RescalingReport rep;
  rep.eig_scaled = lowest_eigenvalues(assemble_weighted(a, RegionWeights{{1.0, eps * eps, 1.0}}), total_mass(a), m);
  rep.eig_cell = lowest_eigenvalues(assemble_direct_operator(b, eps), total_mass(b), m);
  const double scale = rep.eig_cell.cwiseAbs().maxCoeff();
  for (int i = 0; i < rep.eig_cell.size(); ++i)
    rep.max_rel_gap = std::max(rep.max_rel_gap, std::abs(rep.eig_scaled[i] - rep.eig_cell[i]) /
                                                    std::max(std::abs(rep.eig_cell[i]), scale));
  return rep;
}

}  // namespace hicon::fem
