#pragma once

// Shared oracles for the test suites. These deliberately take routes that are
// independent of the production code paths they are used to check.

#include <Eigen/Dense>

#include "disent/hilbert.hpp"
#include "disent/types.hpp"

namespace disent::testing {

// exp(-i H t) |psi> for constant Hermitian H via eigendecomposition.
inline StateVector propagate_exact(const Eigen::MatrixXcd& h,
                                   const StateVector& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (Complex(0, -1) * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() *
         (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi));
}

// H = h1 (x) 1 + 1 (x) h2.
inline Eigen::MatrixXcd decoupled_hamiltonian(const Eigen::MatrixXcd& h1,
                                              const Eigen::MatrixXcd& h2) {
  return kron(h1, Eigen::MatrixXcd::Identity(h2.rows(), h2.cols())) +
         kron(Eigen::MatrixXcd::Identity(h1.rows(), h1.cols()), h2);
}

// Closed-form solution of dx/dt = -2 gamma x (1 - x).
inline double logistic_population(double x0, double gamma, double t) {
  const double e = std::exp(-2.0 * gamma * t);
  return x0 * e / (1.0 - x0 + x0 * e);
}

}  // namespace disent::testing
