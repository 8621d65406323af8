#include <doctest.h>

#include <cmath>

#include "disent/evolve.hpp"
#include "disent/hilbert.hpp"
#include "disent/twospin.hpp"
#include "test_support.hpp"

using namespace disent;
using disent::testing::decoupled_hamiltonian;
using disent::testing::logistic_population;
using disent::testing::propagate_exact;

namespace {

HamiltonianFn constant(const Eigen::MatrixXcd& h) {
  return [h](double) { return h; };
}

const DisentanglerConfig kOff{0.0, 1e-14, 1e-12};
const DisentanglerConfig kUnit{1.0, 1e-14, 1e-12};

}  // namespace

TEST_CASE("free evolution matches the eigensolver propagator") {
  for (int k = 0; k < 3; ++k) {
    const int n1 = 2, n2 = 2 + k;
    const Eigen::MatrixXcd h = random_hermitian(n1 * n2, 100 + k);
    const StateVector psi0 = flatten(random_state(n1, n2, 200 + k));
    IntegratorConfig ic;
    ic.t_final = 10.0;
    ic.record_every = 2.5;
    ic.rtol = 1e-10;
    ic.atol = 1e-13;
    const auto traj = evolve(psi0, n1, n2, constant(h), kOff, ic);
    const StateVector ref = propagate_exact(h, psi0, 10.0);
    CHECK(traj.times.back() == 10.0);
    CHECK((traj.states.back() - ref).norm() <= 1e-8);
  }
}

TEST_CASE("decoupled evolution keeps Q constant") {
  const Eigen::MatrixXcd h =
      decoupled_hamiltonian(random_hermitian(2, 1), random_hermitian(3, 2));
  const StateVector psi0 = flatten(random_state(2, 3, 3));
  IntegratorConfig ic;
  ic.t_final = 10.0;
  ic.record_every = 0.25;
  const auto traj = evolve(psi0, 2, 3, constant(h), kOff, ic);
  const double q0 = traj.q_values.front();
  for (double q : traj.q_values) CHECK(std::abs(q - q0) <= 1e-8);
}

TEST_CASE("pure disentanglement follows the logistic law") {
  for (double x0 : {0.1, 0.5, 0.9}) {
    StateVector psi0(4);
    psi0 << std::sqrt(x0), 0, 0, std::sqrt(1 - x0);
    IntegratorConfig ic;
    ic.t_final = 5.0;
    ic.record_every = 0.125;
    ic.rtol = 1e-10;
    ic.atol = 1e-13;
    const auto traj =
        evolve(psi0, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kUnit, ic);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double xr = logistic_population(x0, 1.0, traj.times[i]);
      CHECK(std::abs(std::norm(traj.states[i](0)) - xr) <= 1e-8);
    }
  }
  // spot value: x0 = 1/2 at t = ln(2)/2 gives Q = 4/9
  StateVector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  IntegratorConfig ic;
  ic.t_final = 0.5 * std::log(2.0);
  ic.record_every = ic.t_final / 4;
  ic.rtol = 1e-11;
  ic.atol = 1e-14;
  const auto traj =
      evolve(bell, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kUnit, ic);
  CHECK(std::abs(traj.q_values.back() - 4.0 / 9.0) <= 1e-9);
}

TEST_CASE("norm drift without renormalization stays within budget") {
  const Eigen::MatrixXcd h = random_hermitian(4, 55);
  const StateVector psi0 = flatten(random_state(2, 2, 56));
  IntegratorConfig ic;
  ic.t_final = 10.0;
  ic.record_every = 0.5;
  ic.renormalize = false;
  DisentanglerConfig dc = kUnit;
  dc.gamma_d = 0.7;
  const auto traj = evolve(psi0, 2, 2, constant(h), dc, ic);
  for (std::size_t i = 0; i < traj.size(); ++i)
    CHECK(std::abs(traj.norms[i] - 1.0) <= 1e-9 * std::max(1.0, traj.times[i]));
}

TEST_CASE("observed convergence order is at least 4") {
  const Eigen::MatrixXcd h = random_hermitian(4, 77);
  const StateVector psi0 = flatten(random_state(2, 2, 78));
  IntegratorConfig ref_cfg;
  ref_cfg.t_final = 5.0;
  ref_cfg.record_every = 5.0;
  ref_cfg.rtol = 1e-12;
  ref_cfg.atol = 1e-15;
  DisentanglerConfig dc = kUnit;
  dc.gamma_d = 0.4;
  const auto ref = evolve(psi0, 2, 2, constant(h), dc, ref_cfg);

  std::vector<double> log_h, log_e;
  double prev_err = 1e9;
  for (double rtol : {1e-5, 2.5e-6, 6.25e-7}) {
    IntegratorConfig ic = ref_cfg;
    ic.rtol = rtol;
    ic.atol = rtol * 1e-3;
    const auto traj = evolve(psi0, 2, 2, constant(h), dc, ic);
    const double err = (traj.states.back() - ref.states.back()).norm();
    CHECK(err < prev_err);  // tightening rtol reduces the deviation
    prev_err = err;
    const double mean_h = 5.0 / traj.warnings.at("accepted_steps");
    log_h.push_back(std::log(mean_h));
    log_e.push_back(std::log(std::max(err, 1e-300)));
  }
  const double slope = (log_e.back() - log_e.front()) /
                       (log_h.back() - log_h.front());
  CHECK(slope >= 4.0);
}

TEST_CASE("entanglement dies out under the bare generator") {
  for (int k = 0; k < 10; ++k) {
    const StateVector psi0 = flatten(random_state(2, 2, 9200 + k));
    IntegratorConfig ic;
    ic.t_final = 20.0;
    ic.record_every = 5.0;
    const auto traj =
        evolve(psi0, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kUnit, ic);
    // monotone nonincreasing and gone by t = 20/gamma_d
    for (std::size_t i = 1; i < traj.size(); ++i)
      CHECK(traj.q_values[i] <= traj.q_values[i - 1] + 1e-12);
    CHECK(traj.q_values.back() < 1e-6);
  }
}

TEST_CASE("identical configuration reproduces bitwise-identical records") {
  const Eigen::MatrixXcd h = random_hermitian(4, 31);
  const StateVector psi0 = flatten(random_state(2, 2, 32));
  IntegratorConfig ic;
  ic.t_final = 3.0;
  ic.record_every = 0.25;
  DisentanglerConfig dc = kUnit;
  const auto a = evolve(psi0, 2, 2, constant(h), dc, ic);
  const auto b = evolve(psi0, 2, 2, constant(h), dc, ic);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK(a.states[i] == b.states[i]);
    CHECK(a.norms[i] == b.norms[i]);
    CHECK(a.q_values[i] == b.q_values[i]);
  }
}

TEST_CASE("heisenberg check: identity observable conserves the norm") {
  const Eigen::MatrixXcd h = random_hermitian(4, 41);
  const StateVector psi0 = flatten(random_state(2, 2, 42));
  IntegratorConfig ic;
  ic.t_final = 2.0;
  ic.record_every = 1e-2;
  DisentanglerConfig dc = kUnit;
  dc.gamma_d = 0.8;
  const auto traj = evolve(psi0, 2, 2, constant(h), dc, ic);
  CHECK(heisenberg_check(traj, Eigen::MatrixXcd::Identity(4, 4), constant(h),
                         dc) <= 1e-10);
}

TEST_CASE("heisenberg check: Ehrenfest residual scales as the sampling step") {
  const Eigen::MatrixXcd h = random_hermitian(4, 43);
  const StateVector psi0 = flatten(random_state(2, 2, 44));
  const Witness w0 = enumerate_witnesses(psi0, 2, 2).front();
  const Eigen::MatrixXcd proj =
      (w0.vec * w0.vec.adjoint()) / w0.norm_sq();  // frozen initial projector

  auto residual_at = [&](double h_rec) {
    IntegratorConfig ic;
    ic.t_final = 2.0;
    ic.record_every = h_rec;
    ic.rtol = 1e-11;
    ic.atol = 1e-14;
    const auto traj = evolve(psi0, 2, 2, constant(h), kOff, ic);
    return heisenberg_check(traj, proj, constant(h), kOff);
  };
  const double r1 = residual_at(1e-2);
  const double r2 = residual_at(5e-3);
  CHECK(r1 <= 1e-3);
  CHECK(r2 <= r1 / 2.5);  // second-order central differences
}

TEST_CASE("heisenberg check: population operator on a driven run") {
  TwoSpinParams p;  // modest frequencies keep the difference error third-order
  p.omega_a = 0.8;
  p.omega_b = 1.2;
  p.omega_1 = 0.4;
  p.delta = 0.2;
  p.g = 0.3;
  Eigen::MatrixXcd pop = Eigen::MatrixXcd::Zero(4, 4);
  pop.diagonal() << 1, 1, -1, -1;  // spin-a population difference
  const StateVector psi0 = flatten(random_state(2, 2, 45));
  IntegratorConfig ic;
  ic.t_final = 2.0;
  ic.record_every = 1e-3;
  ic.rtol = 1e-11;
  ic.atol = 1e-14;
  DisentanglerConfig dc = kUnit;
  dc.gamma_d = 0.5;
  HamiltonianFn h = [p](double t) -> Eigen::MatrixXcd {
    return omega_lab(t, p);
  };
  const auto traj = evolve(psi0, 2, 2, h, dc, ic);
  CHECK(heisenberg_check(traj, pop, h, dc) <= 1e-6);
}

TEST_CASE("projection decay: bare generator is monotone") {
  const StateVector psi0 = flatten(random_state(2, 2, 61));
  IntegratorConfig ic;
  ic.t_final = 4.0;
  ic.record_every = 1e-2;
  const auto traj =
      evolve(psi0, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kUnit, ic);
  for (std::size_t i = 1; i < traj.size(); ++i)
    CHECK(traj.exp_p[i] <= traj.exp_p[i - 1] + 1e-10);
  const auto rep =
      projection_decay_check(traj, Eigen::MatrixXcd::Zero(4, 4), kUnit);
  CHECK(rep.max_residual <= 1e-5);
  CHECK(rep.max_bound_excess <= 1e-10);
}

TEST_CASE("projection decay: commuting Hamiltonian freezes the overlap") {
  // h_a (x) 1 acts as one scalar on the witness support, so [P(t), H] = 0
  Eigen::MatrixXcd ha = Eigen::MatrixXcd::Zero(2, 2);
  ha.diagonal() << 0.7, -0.4;
  const Eigen::MatrixXcd h =
      decoupled_hamiltonian(ha, Eigen::MatrixXcd::Zero(2, 2));
  const StateVector psi0 = flatten(random_state(2, 2, 62));
  IntegratorConfig ic;
  ic.t_final = 5.0;
  ic.record_every = 0.05;
  const auto traj = evolve(psi0, 2, 2, constant(h), kOff, ic);
  const double f0 = traj.exp_p.front();
  for (double f : traj.exp_p) CHECK(std::abs(f - f0) <= 1e-8);
  const auto rep = projection_decay_check(traj, h, kOff);
  CHECK(rep.max_residual <= 1e-6);
}

TEST_CASE("projection decay: random driven runs satisfy the decay law") {
  double resid = 0.0, excess = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::MatrixXcd h = random_hermitian(4, 8800 + k, 0.5);
    const StateVector psi0 = flatten(random_state(2, 2, 8900 + k));
    IntegratorConfig ic;
    ic.t_final = 1.0;
    ic.record_every = 1e-3;
    ic.rtol = 1e-10;
    ic.atol = 1e-13;
    DisentanglerConfig dc = kUnit;
    dc.gamma_d = 0.3 + 0.1 * k;
    const auto traj = evolve(psi0, 2, 2, constant(h), dc, ic);
    const auto rep = projection_decay_check(traj, h, dc);
    resid = std::max(resid, rep.max_residual);
    excess = std::max(excess, rep.max_bound_excess);
  }
  CHECK(resid <= 1e-5);
  CHECK(excess <= 1e-10);
}

TEST_CASE("evolve input validation and failure paths") {
  StateVector bad(4);
  bad << 1, 1, 0, 0;  // unnormalized
  IntegratorConfig ic;
  ic.t_final = 1.0;
  CHECK_THROWS_AS(
      evolve(bad, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kOff, ic),
      std::invalid_argument);

  IntegratorConfig bad_cfg;
  bad_cfg.t_final = -1.0;
  CHECK_THROWS_AS(bad_cfg.validate(), std::invalid_argument);

  // non-finite Hamiltonian entries are caught by the hermiticity guard
  const StateVector psi0 = flatten(random_state(2, 2, 70));
  HamiltonianFn h_nan = [](double) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return m;
  };
  IntegratorConfig ic2;
  ic2.t_final = 1.0;
  CHECK_THROWS_AS(evolve(psi0, 2, 2, h_nan, kOff, ic2), std::invalid_argument);

  // an exploding (but Hermitian) Hamiltonian forces a step underflow
  HamiltonianFn h_stiff = [](double t) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    if (t > 0.5) m.diagonal().setConstant(1e30);
    return m;
  };
  CHECK_THROWS_WITH_AS(evolve(psi0, 2, 2, h_stiff, kOff, ic2),
                       doctest::Contains("underflow"), std::runtime_error);

  const auto traj =
      evolve(psi0, 2, 2, constant(Eigen::MatrixXcd::Zero(4, 4)), kOff,
             [] { IntegratorConfig c; c.t_final = 0.1; c.record_every = 0.1; return c; }());
  CHECK_THROWS_AS(projection_decay_check(traj, Eigen::MatrixXcd::Zero(4, 4), kOff),
                  std::invalid_argument);  // too few samples
}
