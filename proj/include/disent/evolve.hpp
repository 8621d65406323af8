#pragma once

// Time integration of the modified Schroedinger equation with trajectory
// recording, plus finite-difference cross-checks of the modified Heisenberg
// equation and of the witness-projection decay law.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "disent/disentangler.hpp"
#include "disent/types.hpp"

namespace disent {

using HamiltonianFn = std::function<Eigen::MatrixXcd(double)>;

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double dt_init = 1e-4;  // <= 0 selects a heuristic first step
  double t_final = 0.0;
  bool renormalize = true;
  double record_every = 1e-2;

  void validate() const;
};

struct Trajectory {
  Eigen::Index n1 = 0, n2 = 0;
  std::vector<double> times;
  std::vector<StateVector> states;  // unit norm when renormalize was on
  std::vector<double> norms;        // raw interpolant norm, pre-renormalization
  std::vector<double> q_values;
  std::vector<double> exp_p;        // summed <P_w> over nondegenerate witnesses
  std::map<std::string, long> warnings;

  std::size_t size() const { return times.size(); }
};

Trajectory evolve(const StateVector& initial, Eigen::Index n1, Eigen::Index n2,
                  const HamiltonianFn& hamiltonian,
                  const DisentanglerConfig& dcfg, const IntegratorConfig& icfg);

// Max residual over interior samples of the central-difference d<O>/dt against
// <[O,H]>/i + gamma_d <{O, M}> with the generator summed over witnesses.
double heisenberg_check(const Trajectory& traj, const Eigen::MatrixXcd& obs,
                        const HamiltonianFn& hamiltonian,
                        const DisentanglerConfig& dcfg);

struct DecayCheckReport {
  double max_residual = 0.0;        // decay-law finite-difference residual
  double max_bound_excess = 0.0;    // |<[P,H]>| - sqrt(Var H), clamped at 0
};

// Decay-law check for the single-witness (2x2) system with constant H. The
// witness is frozen at each interior sample before differencing; its drift
// along the trajectory would otherwise contaminate the derivative.
DecayCheckReport projection_decay_check(const Trajectory& traj,
                                        const Eigen::MatrixXcd& hamiltonian,
                                        const DisentanglerConfig& dcfg);

}  // namespace disent
