#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hicon {

using cd = std::complex<double>;
using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;
using MatXd = Eigen::MatrixXd;
using VecXd = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using SpMatc = Eigen::SparseMatrix<cd>;
using SpMatd = Eigen::SparseMatrix<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy shared by all modules. Each carries a human-readable message
// naming the offending parameter.
struct HiconError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : HiconError {
  using HiconError::HiconError;
};
struct SingularSystem : HiconError {
  using HiconError::HiconError;
};
struct NotSPD : HiconError {
  using HiconError::HiconError;
};
struct EigSolverFailure : HiconError {
  using HiconError::HiconError;
};
struct DegenerateEigenvalue : HiconError {
  using HiconError::HiconError;
};
struct BlockSingular : HiconError {
  using HiconError::HiconError;
};
struct BracketSingular : HiconError {
  using HiconError::HiconError;
};
struct DenominatorVanishes : HiconError {
  using HiconError::HiconError;
};
struct DegenerateFit : HiconError {
  using HiconError::HiconError;
};
struct ConfigError : HiconError {
  using HiconError::HiconError;
};

}  // namespace hicon
