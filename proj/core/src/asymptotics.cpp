#include "hicon/asymptotics.hpp"

#include <cmath>
#include <map>

namespace hicon::asym {

using geometry::Region;

namespace {

std::shared_ptr<const PeriodCellMesh> share(const PeriodCellMesh& mesh) {
  return std::make_shared<const PeriodCellMesh>(mesh);
}

}  // namespace

VecXd u1_load(const fem::FibreContext& ctx0, const Vec2& theta) {
  const auto& blk = ctx0.region(Region::StiffLs);
  const auto& mesh = *ctx0.mesh;
  const auto& loop = mesh.interface_loops[1];
  const int n = static_cast<int>(loop.size());
  VecXd b = VecXd::Zero(blk.size());
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    const Vec2 d = mesh.vertices[loop[k1]] - mesh.vertices[loop[k]];
    const double L = d.norm();
    const Vec2 normal(-d.y() / L, d.x() / L);  // points into the soft annulus
    const double c = theta.dot(normal) * L / 2;
    b[blk.n_interior + k] -= c;
    b[blk.n_interior + k1] -= c;
  }
  return b;
}

U1Solution solve_u1(const PeriodCellMesh& mesh, const Vec2& theta) {
  const auto ctx = fem::assemble_fibre(share(mesh), Vec2(0, 0), fem::Basis::Standard);
  const auto& blk = ctx.region(Region::StiffLs);
  const int n = blk.size();
  const MatXd K = blk.K.real();
  const MatXd M = blk.M.real();
  const VecXd m = M * VecXd::Ones(n);
  const VecXd b = u1_load(ctx, theta);

  MatXd A = MatXd::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = K;
  A.col(n).head(n) = m;
  A.row(n).head(n) = m.transpose();
  VecXd rhs = VecXd::Zero(n + 1);
  rhs.head(n) = b;
  Eigen::PartialPivLU<MatXd> lu(A);
  if (!(lu.rcond() > 1e-14)) throw SingularSystem("u1 saddle-point system is singular");
  const VecXd x = lu.solve(rhs);

  U1Solution s;
  s.theta = theta;
  s.u1 = x.head(n);
  s.residual = (K * s.u1 + x[n] * m - b).norm() / std::max(b.norm(), 1e-300);
  s.mean = m.dot(s.u1);
  s.grad_energy = s.u1.dot(K * s.u1);
  s.flux = -b.dot(s.u1);

  std::map<int, int> local;
  for (int k = 0; k < n; ++k) local[blk.dofs[k]] = k;
  double tg = 0;
  for (const auto& t : mesh.triangles) {
    if (t.region != Region::StiffLs) continue;
    std::array<Vec2, 3> p;
    std::array<double, 3> u;
    for (int a = 0; a < 3; ++a) {
      p[a] = mesh.vertices[t.v[a]];
      u[a] = s.u1[local.at(ctx.free_index[t.v[a]])];
    }
    const double area2 = (p[1].x() - p[0].x()) * (p[2].y() - p[0].y()) - (p[1].y() - p[0].y()) * (p[2].x() - p[0].x());
    Vec2 g(0, 0);
    for (int a = 0; a < 3; ++a) {
      const Vec2& q1 = p[(a + 1) % 3];
      const Vec2& q2 = p[(a + 2) % 3];
      g += u[a] * Vec2(q1.y() - q2.y(), q2.x() - q1.x()) / area2;
    }
    tg += 0.5 * area2 * theta.dot(g);
  }
  s.theta_grad = tg;
  return s;
}

double alpha2(const PeriodCellMesh& mesh, const Vec2& theta) {
  const U1Solution s = solve_u1(mesh, theta);
  return (geometry::region_area(mesh, Region::StiffLs) + s.theta_grad) /
         geometry::interface_length(mesh, geometry::Interface::Ls);
}

double alpha2_boundary_route(const PeriodCellMesh& mesh, const Vec2& theta) {
  const U1Solution s = solve_u1(mesh, theta);
  return (2 * s.theta_grad + geometry::region_area(mesh, Region::StiffLs) - s.flux) /
         geometry::interface_length(mesh, geometry::Interface::Ls);
}

CorrectorSet correctors(const PeriodCellMesh& mesh) {
  CorrectorSet c;
  const Vec2 d = Vec2(1, 1) / std::sqrt(2.0);
  c.alpha = {alpha2(mesh, Vec2(1, 0)), alpha2(mesh, Vec2(0, 1)), alpha2(mesh, d)};
  const double m11 = -c.alpha[0], m22 = -c.alpha[1];
  const double m12 = -c.alpha[2] - 0.5 * (m11 + m22);
  c.mu_star << m11, m12, m12, m22;
  const Vec2 probe(std::cos(0.3), std::sin(0.3));
  c.polarization_residual = std::abs(probe.dot(c.mu_star * probe) + alpha2(mesh, probe));
  return c;
}

double mu1_stiff_ls(const std::shared_ptr<const PeriodCellMesh>& mesh, const Vec2& tau) {
  const auto ctx = fem::assemble_fibre(mesh, tau);
  return triple::steklov_eigs(ctx, Region::StiffLs, 1).mu[0];
}

ExpansionReport verify_steklov_expansion(const std::shared_ptr<const PeriodCellMesh>& mesh,
                                         const std::vector<Vec2>& tau_list) {
  const CorrectorSet c = correctors(*mesh);
  ExpansionReport rep;
  for (const Vec2& tau : tau_list) {
    const double t = tau.norm();
    if (t == 0) continue;
    ExpansionRow row;
    row.tau_norm = t;
    row.theta = tau / t;
    row.mu1 = mu1_stiff_ls(mesh, tau);
    row.model = tau.dot(c.mu_star * tau);
    row.remainder_over_tau3 = std::abs(row.mu1 - row.model) / (t * t * t);
    rep.cubic_constant = std::max(rep.cubic_constant, row.remainder_over_tau3);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hicon::asym
