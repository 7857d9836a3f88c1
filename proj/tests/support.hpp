#pragma once

#include <memory>

#include "hicon/geometry.hpp"

namespace hicon::test {

// Coarse cell used by the unit tests; 27 degree minimum angle, a few hundred dofs.
inline std::shared_ptr<const geometry::PeriodCellMesh> coarse_mesh() {
  static const auto mesh = [] {
    geometry::CellSpec s;
    s.h = 0.1;
    s.n_bnd = 32;
    return std::make_shared<const geometry::PeriodCellMesh>(geometry::build_period_cell(s));
  }();
  return mesh;
}

inline std::shared_ptr<const geometry::PeriodCellMesh> default_mesh() {
  static const auto mesh =
      std::make_shared<const geometry::PeriodCellMesh>(geometry::build_period_cell(geometry::CellSpec{}));
  return mesh;
}

}  // namespace hicon::test
