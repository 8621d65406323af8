#include "disent/evolve.hpp"

#include <cmath>
#include <stdexcept>

#include "disent/runge_kutta.hpp"

namespace disent {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0 && rtol < 1e-3))
    throw std::invalid_argument("IntegratorConfig: rtol must lie in (0, 1e-3)");
  if (!(atol > 0.0))
    throw std::invalid_argument("IntegratorConfig: atol must be positive");
  if (!(t_final > 0.0))
    throw std::invalid_argument("IntegratorConfig: t_final must be positive");
  if (!(record_every > 0.0))
    throw std::invalid_argument(
        "IntegratorConfig: record_every must be positive");
}

namespace {

double summed_projection(const StateVector& psi, Eigen::Index n1,
                         Eigen::Index n2, double eps_witness) {
  double acc = 0.0;
  for (const Witness& w : enumerate_witnesses(psi, n1, n2)) {
    if (w.norm_sq() <= eps_witness) continue;
    acc += expected_projection(psi, w, eps_witness);
  }
  return acc;
}

}  // namespace

Trajectory evolve(const StateVector& initial, Eigen::Index n1, Eigen::Index n2,
                  const HamiltonianFn& hamiltonian,
                  const DisentanglerConfig& dcfg,
                  const IntegratorConfig& icfg) {
  if (initial.size() != n1 * n2)
    throw std::invalid_argument("evolve: initial state size mismatch");
  if (std::abs(initial.squaredNorm() - 1.0) > kNormCheckTol)
    throw std::invalid_argument("evolve: initial state not normalized");
  dcfg.validate();
  icfg.validate();

  Trajectory traj;
  traj.n1 = n1;
  traj.n2 = n2;
  WarningCounters warn;

  auto rhs = [&](double t, const StateVector& psi) {
    return modified_rhs(psi, hamiltonian(t), n1, n2, dcfg, &warn);
  };
  auto record = [&](double t, const StateVector& psi) {
    const double nrm = psi.norm();
    const StateVector unit = psi / nrm;
    traj.times.push_back(t);
    traj.norms.push_back(nrm);
    traj.states.push_back(icfg.renormalize ? unit : psi);
    traj.q_values.push_back(detail::q_from_matrix(unflatten(unit, n1, n2)));
    traj.exp_p.push_back(summed_projection(unit, n1, n2, dcfg.eps_witness));
  };

  StepperOptions opt;
  opt.rtol = icfg.rtol;
  opt.atol = icfg.atol;
  opt.h_init = icfg.dt_init;
  opt.renormalize = icfg.renormalize;
  opt.record_every = icfg.record_every;
  opt.rejections = &warn.step_rejections;
  long accepted = 0;
  opt.accepted = &accepted;

  integrate_dopri5(rhs, 0.0, icfg.t_final, StateVector(initial), opt, record);
  traj.warnings = warn.as_map();
  traj.warnings["accepted_steps"] = accepted;
  return traj;
}

double heisenberg_check(const Trajectory& traj, const Eigen::MatrixXcd& obs,
                        const HamiltonianFn& hamiltonian,
                        const DisentanglerConfig& dcfg) {
  if (traj.size() < 3)
    throw std::invalid_argument("heisenberg_check: need at least 3 samples");
  if (hermiticity_deviation(obs) > kOperatorTol)
    throw std::invalid_argument("heisenberg_check: observable not Hermitian");

  double max_resid = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double dt_m = traj.times[i] - traj.times[i - 1];
    const double dt_p = traj.times[i + 1] - traj.times[i];
    const StateVector& psi = traj.states[i];

    auto expect = [&](const StateVector& s) {
      return (s.dot(obs * s)).real() / s.squaredNorm();
    };
    const double lhs =
        (expect(traj.states[i + 1]) - expect(traj.states[i - 1])) /
        (dt_m + dt_p);

    const Eigen::MatrixXcd h = hamiltonian(traj.times[i]);
    const StateVector h_psi = h * psi;
    const StateVector o_psi = obs * psi;
    // <[O,H]>/i = 2 Im <psi|O H|psi>
    double rhs = 2.0 * o_psi.dot(h_psi).imag() / psi.squaredNorm();
    if (dcfg.gamma_d > 0.0) {
      const StateVector gen = total_generator(psi, traj.n1, traj.n2, dcfg);
      // <{O, M}> = 2 Re <O psi | M psi>
      rhs += dcfg.gamma_d * 2.0 * o_psi.dot(gen).real() / psi.squaredNorm();
    }
    max_resid = std::max(max_resid, std::abs(lhs - rhs));
  }
  return max_resid;
}

DecayCheckReport projection_decay_check(const Trajectory& traj,
                                        const Eigen::MatrixXcd& hamiltonian,
                                        const DisentanglerConfig& dcfg) {
  if (traj.size() < 3)
    throw std::invalid_argument(
        "projection_decay_check: need at least 3 samples");
  if (traj.n1 != 2 || traj.n2 != 2)
    throw std::invalid_argument(
        "projection_decay_check: requires the single-witness 2x2 system");
  if (hermiticity_deviation(hamiltonian) > kOperatorTol)
    throw std::invalid_argument("projection_decay_check: H not Hermitian");

  DecayCheckReport rep;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const StateVector& psi = traj.states[i];
    const Witness w = enumerate_witnesses(psi, 2, 2).front();
    const double wn2 = w.norm_sq();
    if (wn2 <= dcfg.eps_witness) continue;

    // |<W|s>|^2 / <W|W> with the witness frozen at sample i
    auto f = [&](const StateVector& s) { return std::norm(w.overlap(s)) / wn2; };
    const double dt = traj.times[i + 1] - traj.times[i - 1];
    const double lhs = (f(traj.states[i + 1]) - f(traj.states[i - 1])) / dt;

    const StateVector p_psi = w.vec * (w.overlap(psi) / wn2);
    const double comm =
        2.0 * p_psi.dot(hamiltonian * psi).imag();  // <[P,H]>/i
    const double exp_p = f(psi) / psi.squaredNorm();
    const double rhs =
        comm - 2.0 * dcfg.gamma_d * std::sqrt(wn2 * (1.0 - exp_p)) * f(psi);
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));

    const double mean_h = psi.dot(hamiltonian * psi).real();
    const double var_h =
        (hamiltonian * psi).squaredNorm() - mean_h * mean_h;
    rep.max_bound_excess = std::max(
        rep.max_bound_excess, std::abs(comm) - std::sqrt(std::max(var_h, 0.0)));
  }
  rep.max_bound_excess = std::max(rep.max_bound_excess, 0.0);
  return rep;
}

}  // namespace disent
