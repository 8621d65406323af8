#pragma once

// The nonlinear generator that rotates a state away from its witness vectors.
// For a witness |W> with projector P = |W><W|/<W|W> and expectation
// <P> = |<W|psi>|^2 / (<W|W><psi|psi>), the per-witness term is
//
//   M |psi> = -sqrt(<W|W>/(1-<P>)) (P - <P>) |psi>.
//
// It annihilates product states, is orthogonal to |psi| (norm-preserving),
// and satisfies ||M psi||^2 = |<W|psi>|^2. The implementation evaluates the
// algebraically equivalent split along/against the witness direction,
//
//   M |psi> = -sqrt(<W|W>) [ sqrt(1-<P>) psi_par - (<P>/sqrt(1-<P>)) psi_perp ],
//
// where 1-<P> is computed as ||psi_perp||^2/||psi||^2 so the parallel limit
// loses no precision to cancellation.

#include <map>
#include <stdexcept>
#include <string>

#include "disent/entanglement.hpp"
#include "disent/types.hpp"

namespace disent {

struct DisentanglerConfig {
  double gamma_d = 0.0;        // rate, units of inverse time
  double eps_witness = 1e-14;  // skip threshold on <W|W>
  double eps_parallel = 1e-12; // fallback threshold on 1-<P>

  void validate() const {
    if (gamma_d < 0.0)
      throw std::invalid_argument("DisentanglerConfig: gamma_d must be >= 0");
    if (!(eps_witness > 0.0 && eps_witness < 1e-6) ||
        !(eps_parallel > 0.0 && eps_parallel < 1e-6))
      throw std::invalid_argument(
          "DisentanglerConfig: epsilons must lie in (0, 1e-6)");
  }
};

struct WarningCounters {
  long degenerate_direction = 0;
  long step_rejections = 0;

  std::map<std::string, long> as_map() const {
    return {{"degenerate_direction", degenerate_direction},
            {"step_rejections", step_rejections}};
  }
};

// <P> in [0, 1]; throws on a degenerate witness.
inline double expected_projection(const StateVector& psi, const Witness& w,
                                  double eps_witness = 1e-14) {
  const double wn2 = w.norm_sq();
  if (wn2 <= eps_witness)
    throw std::invalid_argument("expected_projection: degenerate witness");
  return std::norm(w.overlap(psi)) / (wn2 * psi.squaredNorm());
}

// One witness term applied to psi. Returns zero (and counts a warning) when
// psi is numerically parallel to the witness, where the direction of the
// result is undefined.
inline StateVector apply_m_d(const StateVector& psi, const Witness& w,
                             const DisentanglerConfig& cfg,
                             WarningCounters* warn = nullptr) {
  const double wn2 = w.norm_sq();
  if (wn2 <= cfg.eps_witness)
    throw std::invalid_argument("apply_m_d: degenerate witness");
  const double psi_n2 = psi.squaredNorm();
  const Complex ov = w.overlap(psi);
  const StateVector par = w.vec * (ov / wn2);
  const StateVector perp = psi - par;
  const double frac_par = par.squaredNorm() / psi_n2;    // <P>
  const double frac_perp = perp.squaredNorm() / psi_n2;  // 1 - <P>
  if (frac_perp < cfg.eps_parallel) {
    if (warn) ++warn->degenerate_direction;
    return StateVector::Zero(psi.size());
  }
  const double s = std::sqrt(frac_perp);
  return -std::sqrt(wn2) * (s * par - (frac_par / s) * perp);
}

// Sum of the witness terms over all witnesses of psi, skipping degenerate
// ones. Vanishes on product states and is orthogonal to psi.
inline StateVector total_generator(const StateVector& psi, Eigen::Index n1,
                                   Eigen::Index n2,
                                   const DisentanglerConfig& cfg,
                                   WarningCounters* warn = nullptr) {
  StateVector out = StateVector::Zero(psi.size());
  for (const Witness& w : enumerate_witnesses(psi, n1, n2)) {
    if (w.norm_sq() <= cfg.eps_witness) continue;
    out += apply_m_d(psi, w, cfg, warn);
  }
  return out;
}

template <typename Derived>
double hermiticity_deviation(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).norm();
}

// d|psi>/dt = -i H |psi> + gamma_d * sum of witness terms (hbar = 1).
inline StateVector modified_rhs(const StateVector& psi,
                                const Eigen::MatrixXcd& hamiltonian,
                                Eigen::Index n1, Eigen::Index n2,
                                const DisentanglerConfig& cfg,
                                WarningCounters* warn = nullptr) {
  const double dev = hermiticity_deviation(hamiltonian);
  if (!(dev <= kOperatorTol))
    throw std::invalid_argument("modified_rhs: non-Hermitian H, ||H-H^H|| = " +
                                std::to_string(dev));
  StateVector out = Complex(0.0, -1.0) * (hamiltonian * psi);
  if (cfg.gamma_d > 0.0)
    out += cfg.gamma_d * total_generator(psi, n1, n2, cfg, warn);
  return out;
}

}  // namespace disent
