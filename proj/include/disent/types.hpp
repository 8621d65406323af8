#pragma once

#include <complex>

#include <Eigen/Dense>

namespace disent {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;  // flat state, row-major over (k1, k2)
using StateMatrix = Eigen::MatrixXcd;  // coefficient matrix C, n1 x n2

inline constexpr const char* kVersion = "0.1.0";

// Tolerance for "this state must arrive normalized" preconditions.
inline constexpr double kNormCheckTol = 1e-8;

// Tolerance for unitarity / hermiticity checks on supplied operators.
inline constexpr double kOperatorTol = 1e-10;

}  // namespace disent
