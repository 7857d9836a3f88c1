#include "doctest.h"
#include "hicon/experiments.hpp"
#include "support.hpp"

using namespace hicon;
using namespace hicon::hom;

namespace {

struct Setup {
  fem::FibreContext ctx;
  triple::SpectralProjection sp;
  MatXc G;
  fem::WeightedSpace space;
  explicit Setup(const Vec2& tau)
      : ctx(fem::assemble_fibre(test::coarse_mesh(), tau)),
        sp(triple::spectral_projection(ctx)),
        G(fem::broken_gram(ctx)),
        space(fem::broken_space(ctx)) {}
  double rel(const MatXc& a, const MatXc& b) const {
    return fem::weighted_operator_norm(a - b, space, space) / fem::weighted_operator_norm(b, space, space);
  }
};

}  // namespace

TEST_CASE("compact and block-by-block homogenized resolvents coincide") {
  Setup s(Vec2(1, 0.5));
  for (double eps : {0.25, 1.0 / 32}) {
    const cd z(1, 1);
    CHECK(s.rel(r_hom_full(s.ctx, s.sp, eps, z).full, r_hom_full_literal(s.ctx, s.sp, eps, z)) <= 1e-10);
  }
}

TEST_CASE("homogenized resolvent is a self-adjoint resolvent") {
  Setup s(Vec2(kPi / 2, kPi / 2));
  const double eps = 0.125;
  const cd z(1, 1), zeta(0.5, 2);
  const MatXc Rz = r_hom_full(s.ctx, s.sp, eps, z).full;
  const MatXc Rzc = r_hom_full(s.ctx, s.sp, eps, std::conj(z)).full;
  const MatXc Rw = r_hom_full(s.ctx, s.sp, eps, zeta).full;
  CHECK(s.rel(triple::weighted_adjoint(Rz, s.G, s.G), Rzc) <= 1e-9);
  CHECK(s.rel(Rz - Rw, (z - zeta) * Rz * Rw) <= 1e-8);
  CHECK(fem::weighted_operator_norm(Rz, s.space, s.space) <= (1 + 1e-9) / z.imag());
}

TEST_CASE("soft block of the full form equals the soft formula") {
  Setup s(Vec2(1, 0.5));
  const cd z(2, 1);
  const MatXc a = krein::soft_block(s.ctx, r_hom_full(s.ctx, s.sp, 0.125, z).full);
  const MatXc b = r_hom_soft(s.ctx, s.sp, 0.125, z);
  CHECK((a - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("distance to the Krein resolvent decays like eps^2") {
  Setup s(Vec2(kPi / 2, kPi / 2));
  const std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  const auto rows = norm_resolvent_distance(s.ctx, s.sp, eps, cd(1, 1));
  REQUIRE(rows.size() == eps.size());
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].distance < rows[i - 1].distance);
    CHECK(rows[i].slope_local == doctest::Approx(2.0).epsilon(0.1));
  }
}
