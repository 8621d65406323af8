#include "disent/verify.hpp"

#include <cmath>

#include "disent/disentangler.hpp"
#include "disent/entanglement.hpp"
#include "disent/evolve.hpp"
#include "disent/hilbert.hpp"
#include "disent/twospin.hpp"

namespace disent {

namespace {

// Direct evaluation of the generator definition, kept as an independent
// reference for the rearranged production formula.
StateVector m_d_reference(const StateVector& psi, const Witness& w) {
  const double wn2 = w.norm_sq();
  const Complex ov = w.overlap(psi);
  const double exp_p = std::norm(ov) / (wn2 * psi.squaredNorm());
  const StateVector proj = w.vec * (ov / wn2);
  return -std::sqrt(wn2 / (1.0 - exp_p)) * (proj - exp_p * psi);
}

TwoSpinParams random_params(GaussianStream& gs) {
  TwoSpinParams p;
  p.omega_a = 0.5 + std::abs(gs.next());
  p.omega_b = 1.0 + std::abs(gs.next());
  p.omega_1 = 0.3 + 0.3 * std::abs(gs.next());
  p.delta = 0.4 + 0.3 * std::abs(gs.next());
  p.g = 0.2 + 0.2 * std::abs(gs.next());
  return p;
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed, bool quick) {
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, double residual, double tol) {
    out.push_back({name, residual, tol, residual <= tol});
  };
  const int n_states = quick ? 100 : 1000;
  const int max_dim = quick ? 4 : 6;
  const DisentanglerConfig dcfg_unit{1.0, 1e-14, 1e-12};

  // two-route entanglement equivalence
  {
    double r = 0.0;
    std::uint64_t s = seed;
    for (int n1 = 2; n1 <= max_dim; ++n1)
      for (int n2 = 2; n2 <= max_dim; ++n2)
        for (int k = 0; k < n_states / 4 + 1; ++k) {
          const auto st = random_state(n1, n2, ++s);
          r = std::max(r, std::abs(q_witness(st) - q_purity(st)));
        }
    add("q_two_route_equivalence", r, 1e-12);
  }

  // product states carry no entanglement and kill every witness overlap
  {
    double rq = 0.0, rov = 0.0, rgen = 0.0;
    std::uint64_t s = seed + 1000;
    for (int n1 = 2; n1 <= 4; ++n1)
      for (int n2 = 2; n2 <= 4; ++n2)
        for (int k = 0; k < (quick ? 20 : 100); ++k) {
          const auto st = random_product_state(n1, n2, ++s);
          rq = std::max(rq, q_witness(st));
          const StateVector psi = flatten(st);
          for (const auto& w : enumerate_witnesses(st))
            rov = std::max(rov, std::abs(w.overlap(psi)));
          rgen = std::max(
              rgen, total_generator(psi, n1, n2, dcfg_unit).norm());
        }
    add("q_product_state_zero", rq, 1e-14);
    add("witness_product_orthogonality", rov, 1e-14);
    add("generator_product_annihilation", rgen, 1e-13);
  }

  // generator identities on random (state, witness) pairs
  {
    double r11 = 0.0, r12 = 0.0, r13 = 0.0, rnaive = 0.0, rortho = 0.0;
    std::uint64_t s = seed + 2000;
    for (int k = 0; k < n_states; ++k) {
      const int n1 = 2 + static_cast<int>((k / 3) % 3);
      const int n2 = 2 + static_cast<int>(k % 3);
      const auto st = random_state(n1, n2, ++s);
      const StateVector psi = flatten(st);
      for (const auto& w : enumerate_witnesses(st)) {
        if (w.norm_sq() <= dcfg_unit.eps_witness) continue;
        const StateVector m = apply_m_d(psi, w, dcfg_unit);
        const Complex ov = w.overlap(psi);
        const double exp_p = expected_projection(psi, w);
        r11 = std::max(r11, std::abs(psi.dot(m)));
        r12 = std::max(
            r12, std::abs(w.vec.dot(m) +
                          std::sqrt(w.norm_sq() * (1.0 - exp_p)) * ov));
        r13 = std::max(r13, std::abs(m.squaredNorm() - std::norm(ov)));
        if (1.0 - exp_p > 1e-6)
          rnaive = std::max(rnaive, (m - m_d_reference(psi, w)).norm());
      }
      rortho = std::max(
          rortho, std::abs(psi.dot(total_generator(psi, n1, n2, dcfg_unit))));
    }
    add("generator_psi_orthogonality", r11, 1e-13);
    add("generator_witness_overlap_identity", r12, 1e-12);
    add("generator_norm_identity", r13, 1e-12);
    add("generator_total_orthogonality", rortho, 1e-12);
    add("generator_stabilized_vs_reference", rnaive, 1e-10);
  }

  // local unitaries leave Q unchanged
  {
    double r = 0.0;
    std::uint64_t s = seed + 3000;
    for (int k = 0; k < (quick ? 20 : 100); ++k) {
      const int n1 = 2 + k % 3, n2 = 2 + (k / 3) % 3;
      const auto st = random_state(n1, n2, ++s);
      const auto u1 = random_unitary(n1, s + 90001);
      const auto u2 = random_unitary(n2, s + 90002);
      r = std::max(r,
                   std::abs(q_witness(apply_local(st, u1, u2)) - q_witness(st)));
    }
    add("q_local_unitary_invariance", r, 1e-12);
  }

  // frame consistency of the three two-spin pictures at gamma_d = 0
  {
    double r = 0.0;
    GaussianStream gs(seed + 4000);
    const double t_final = quick ? 2.0 : 5.0;
    IntegratorConfig ic;
    ic.rtol = 1e-10;
    ic.atol = 1e-13;
    ic.t_final = t_final;
    ic.record_every = t_final;
    DisentanglerConfig dc;  // gamma_d = 0
    for (int k = 0; k < (quick ? 3 : 10); ++k) {
      const TwoSpinParams p = random_params(gs);
      const auto st = random_state(2, 2, seed + 4100 + k);
      const StateVector psi0 = flatten(st);
      const auto lab = evolve(
          psi0, 2, 2, [&](double t) { return omega_lab(t, p); }, dc, ic);
      const Eigen::Matrix4d hr = omega_rotating(p);
      const auto rot = evolve(
          psi0, 2, 2, [&](double) { return hr.cast<Complex>(); }, dc, ic);
      const Eigen::Matrix4d hd = omega_double(p);
      const Eigen::Matrix4cd big_u2 =
          kron(Eigen::Matrix2d::Identity(), u_b2(p));
      const StateVector psi0d = big_u2.adjoint() * psi0;
      const auto dbl = evolve(
          psi0d, 2, 2, [&](double) { return hd.cast<Complex>(); }, dc, ic);
      const Eigen::Matrix4cd big_u1 =
          kron(Eigen::Matrix2cd::Identity(), u_b1(t_final, p));
      r = std::max(r, (big_u1.adjoint() * lab.states.back() -
                       rot.states.back()).norm());
      r = std::max(r, (big_u2.adjoint() * rot.states.back() -
                       dbl.states.back()).norm());
    }
    add("frame_consistency", r, 1e-8);
  }

  // Bloch sphere preservation and the |V_D|^2 = 2Q identity
  {
    double rs = 0.0, rv = 0.0;
    GaussianStream gs(seed + 5000);
    for (int k = 0; k < (quick ? 3 : 10); ++k) {
      Eigen::Vector3d om(0.2 + std::abs(gs.next()), 0.0, gs.next());
      const double gamma = 0.3 + 0.3 * std::abs(gs.next());
      Eigen::Vector3d p0(gs.next(), gs.next(), gs.next());
      p0.normalize();
      IntegratorConfig ic;
      ic.t_final = 10.0;
      ic.record_every = 0.05;
      ic.renormalize = false;
      const auto traj = bloch_evolve(p0, om, gamma, ic);
      for (std::size_t i = 0; i < traj.points.size(); ++i) {
        const Eigen::Vector3d& pt = traj.points[i];
        rs = std::max(rs, std::abs(pt.norm() - 1.0));
        const Eigen::Vector3d vd =
            pt.z() * pt.normalized() - Eigen::Vector3d::UnitZ();
        rv = std::max(rv,
                      std::abs(vd.squaredNorm() - 2.0 * traj.q_values[i]));
      }
    }
    add("bloch_sphere_preservation", rs, 1e-9);
    add("bloch_damping_norm_identity", rv, 1e-10);
  }

  // unitarity of the full equation without renormalization
  {
    GaussianStream gs(seed + 6000);
    const TwoSpinParams p = random_params(gs);
    IntegratorConfig ic;
    ic.t_final = quick ? 2.0 : 5.0;
    ic.record_every = 0.5;
    ic.renormalize = false;
    DisentanglerConfig dc;
    dc.gamma_d = 1.0;
    const auto st = random_state(2, 2, seed + 6001);
    const auto traj = evolve(
        flatten(st), 2, 2, [&](double t) { return omega_lab(t, p); }, dc, ic);
    double r = 0.0;
    for (double nrm : traj.norms) r = std::max(r, std::abs(nrm - 1.0));
    add("norm_drift_without_renormalization", r, 1e-9 * ic.t_final);
  }

  // logistic decay of the truncated model at gamma_d = 1, H = 0
  {
    const double x0 = 0.5;
    Eigen::Vector2cd a0(std::sqrt(x0), std::sqrt(1 - x0));
    IntegratorConfig ic;
    ic.rtol = 1e-10;
    ic.atol = 1e-13;
    ic.t_final = 5.0;
    ic.record_every = 0.25;
    const auto traj =
        evolve_truncated(a0, Eigen::Matrix2d::Zero(), 1.0, ic);
    double r = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.times[i];
      const double xr =
          x0 * std::exp(-2 * t) / (1 - x0 + x0 * std::exp(-2 * t));
      r = std::max(r, std::abs(std::norm(traj.states[i](0)) - xr));
    }
    add("truncated_logistic_decay", r, 1e-8);
  }

  return out;
}

}  // namespace disent
