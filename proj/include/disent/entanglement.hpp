#pragma once

// Entanglement level Q of a bipartite pure state, computed two independent
// ways: as twice the summed squared overlaps with the witness vectors built
// from the 2x2 minors of C, and as 1 minus the purity of a reduced state.
// The purity route is the reference oracle for the witness-sum route.

#include <stdexcept>
#include <vector>

#include "disent/hilbert.hpp"
#include "disent/types.hpp"

namespace disent {

// One witness ket |Psi_{k1p,k1pp,k2p,k2pp}>. Stored as a ket: the entries are
// the conjugates of the bra coefficients, so witness.vec.dot(psi) is the
// overlap <Psi|psi> in the usual convention. Generally unnormalized; it may
// even be zero when the defining coefficients of C vanish.
struct Witness {
  int k1p = 0, k1pp = 0, k2p = 0, k2pp = 0;
  StateVector vec;

  double norm_sq() const { return vec.squaredNorm(); }
  Complex overlap(const StateVector& psi) const { return vec.dot(psi); }
};

// All C(n1,2)*C(n2,2) witnesses of a state, in lexicographic order of
// (k1p, k1pp, k2p, k2pp). Zero-norm witnesses are retained.
template <typename Derived>
std::vector<Witness> enumerate_witnesses(const Eigen::MatrixBase<Derived>& c) {
  const auto n1 = c.rows(), n2 = c.cols();
  std::vector<Witness> out;
  out.reserve(static_cast<std::size_t>(n1 * (n1 - 1) / 2 * n2 * (n2 - 1) / 2));
  for (Eigen::Index k1p = 0; k1p < n1; ++k1p)
    for (Eigen::Index k1pp = k1p + 1; k1pp < n1; ++k1pp)
      for (Eigen::Index k2p = 0; k2p < n2; ++k2p)
        for (Eigen::Index k2pp = k2p + 1; k2pp < n2; ++k2pp) {
          Witness w;
          w.k1p = static_cast<int>(k1p);
          w.k1pp = static_cast<int>(k1pp);
          w.k2p = static_cast<int>(k2p);
          w.k2pp = static_cast<int>(k2pp);
          w.vec = StateVector::Zero(n1 * n2);
          w.vec(k1p * n2 + k2p) = std::conj(Complex(c(k1pp, k2pp)));
          w.vec(k1p * n2 + k2pp) = -std::conj(Complex(c(k1pp, k2p)));
          out.push_back(std::move(w));
        }
  return out;
}

inline std::vector<Witness> enumerate_witnesses(const BipartiteState& s) {
  return enumerate_witnesses(s.c);
}

inline std::vector<Witness> enumerate_witnesses(const StateVector& psi,
                                                Eigen::Index n1,
                                                Eigen::Index n2) {
  return enumerate_witnesses(unflatten(psi, n1, n2));
}

namespace detail {

inline void require_normalized(const BipartiteState& s, const char* who) {
  if (std::abs(s.c.squaredNorm() - 1.0) > kNormCheckTol)
    throw std::invalid_argument(std::string(who) + ": state not normalized");
}

// Tr[(C C^H)^2] without the normalization precondition.
template <typename Derived>
double purity_from_matrix(const Eigen::MatrixBase<Derived>& c) {
  const Eigen::MatrixXcd gram = c * c.adjoint();
  return (gram * gram).trace().real();
}

// 2 * sum over ordered index quadruples of |2x2 minor of C|^2. Each minor is
// the overlap <Psi_w|psi> of the corresponding witness with the state.
template <typename Derived>
double q_from_matrix(const Eigen::MatrixBase<Derived>& c) {
  const auto n1 = c.rows(), n2 = c.cols();
  double q = 0.0;
  for (Eigen::Index k1p = 0; k1p < n1; ++k1p)
    for (Eigen::Index k1pp = k1p + 1; k1pp < n1; ++k1pp)
      for (Eigen::Index k2p = 0; k2p < n2; ++k2p)
        for (Eigen::Index k2pp = k2p + 1; k2pp < n2; ++k2pp)
          q += std::norm(Complex(c(k1pp, k2pp)) * Complex(c(k1p, k2p)) -
                         Complex(c(k1pp, k2p)) * Complex(c(k1p, k2pp)));
  return 2.0 * q;
}

}  // namespace detail

// Purity of either reduced state, P = Tr rho_1^2 = Tr rho_2^2, computed from
// the Gram matrix C C^H. Lies in [1/min(n1,n2), 1] for normalized states.
inline double reduced_purity(const BipartiteState& s) {
  detail::require_normalized(s, "reduced_purity");
  return detail::purity_from_matrix(s.c);
}

inline double q_purity(const BipartiteState& s) {
  return 1.0 - reduced_purity(s);
}

inline double q_witness(const BipartiteState& s) {
  detail::require_normalized(s, "q_witness");
  return detail::q_from_matrix(s.c);
}

}  // namespace disent
