#pragma once

// Bipartite pure states |psi> = sum_{k1,k2} C(k1,k2) |k1>|k2> and local
// operations on them. The coefficient matrix C is the ground truth; the flat
// vector form (row-major, k1 major) is what the integrator consumes.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "disent/types.hpp"

namespace disent {

struct BipartiteState {
  StateMatrix c;

  Eigen::Index n1() const { return c.rows(); }
  Eigen::Index n2() const { return c.cols(); }
  double norm() const { return c.norm(); }
  bool is_normalized(double tol = 1e-12) const {
    return std::abs(c.squaredNorm() - 1.0) <= tol;
  }
};

template <typename Derived>
StateVector flatten(const Eigen::MatrixBase<Derived>& c) {
  return c.transpose().reshaped();
}

inline StateVector flatten(const BipartiteState& s) { return flatten(s.c); }

template <typename Derived>
StateMatrix unflatten(const Eigen::MatrixBase<Derived>& v, Eigen::Index n1,
                      Eigen::Index n2) {
  if (v.size() != n1 * n2)
    throw std::invalid_argument("unflatten: size mismatch");
  return v.reshaped(n2, n1).transpose();
}

// Kronecker product a (x) b in the (k1, k2) row-major index convention.
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXcd kron(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          Complex(a(i, j)) * b.template cast<Complex>();
  return out;
}

// C = u v^T, normalized. Entanglement vanishes: C has rank one.
template <typename DerivedU, typename DerivedV>
BipartiteState product_state(const Eigen::MatrixBase<DerivedU>& u,
                             const Eigen::MatrixBase<DerivedV>& v) {
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0)
    throw std::invalid_argument("product_state: degenerate factor");
  BipartiteState s;
  s.c = (u.template cast<Complex>() * v.template cast<Complex>().transpose()) /
        (nu * nv);
  return s;
}

// Deterministic standard normal stream built on the fully specified mt19937_64
// sequence (std::normal_distribution is implementation-defined).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Complex next_complex() {
    const double re = next();
    const double im = next();
    return {re, im};
  }

 private:
  double uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Haar-distributed pure state: i.i.d. complex Gaussian entries, normalized.
inline BipartiteState random_state(Eigen::Index n1, Eigen::Index n2,
                                   std::uint64_t seed) {
  if (n1 < 2 || n2 < 2)
    throw std::invalid_argument("random_state: dimensions must be >= 2");
  GaussianStream gs(seed);
  BipartiteState s;
  s.c.resize(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) s.c(i, j) = gs.next_complex();
  s.c /= s.c.norm();
  return s;
}

inline BipartiteState random_product_state(Eigen::Index n1, Eigen::Index n2,
                                           std::uint64_t seed) {
  GaussianStream gs(seed);
  Eigen::VectorXcd u(n1), v(n2);
  for (Eigen::Index i = 0; i < n1; ++i) u(i) = gs.next_complex();
  for (Eigen::Index j = 0; j < n2; ++j) v(j) = gs.next_complex();
  return product_state(u, v);
}

template <typename Derived>
double unitarity_deviation(const Eigen::MatrixBase<Derived>& u) {
  return (u.adjoint() * u -
          Eigen::MatrixXcd::Identity(u.cols(), u.cols()))
      .norm();
}

// |psi'> = (u1 (x) u2) |psi>, i.e. C' = u1 C u2^T.
template <typename DerivedU1, typename DerivedU2>
BipartiteState apply_local(const BipartiteState& s,
                           const Eigen::MatrixBase<DerivedU1>& u1,
                           const Eigen::MatrixBase<DerivedU2>& u2) {
  if (u1.rows() != s.n1() || u1.cols() != s.n1() || u2.rows() != s.n2() ||
      u2.cols() != s.n2())
    throw std::invalid_argument("apply_local: operator shape mismatch");
  const double d1 = unitarity_deviation(u1);
  const double d2 = unitarity_deviation(u2);
  if (d1 > kOperatorTol || d2 > kOperatorTol)
    throw std::invalid_argument(
        "apply_local: non-unitary input, ||u^H u - 1|| = " +
        std::to_string(std::max(d1, d2)));
  BipartiteState out;
  out.c = u1.template cast<Complex>() * s.c *
          u2.template cast<Complex>().transpose();
  return out;
}

// Haar-ish random unitary (QR of a Gaussian matrix with phase-fixed R).
inline Eigen::MatrixXcd random_unitary(Eigen::Index n, std::uint64_t seed) {
  GaussianStream gs(seed);
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gs.next_complex();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline Eigen::MatrixXcd random_hermitian(Eigen::Index n, std::uint64_t seed,
                                         double scale = 1.0) {
  GaussianStream gs(seed);
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gs.next_complex();
  return scale * 0.5 * (a + a.adjoint()).eval();
}

}  // namespace disent
