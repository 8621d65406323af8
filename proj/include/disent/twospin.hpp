#pragma once

// Driven two-spin-1/2 system: Hamiltonian matrices in the lab, rotating and
// doubly-rotated frames (basis order --, -+, +-, ++), the two-level truncation
// near Hartmann-Hahn matching, Bloch-vector dynamics with the disentangling
// term, and fixed-point analysis on the sphere.

#include <string>
#include <vector>

#include "disent/evolve.hpp"
#include "disent/types.hpp"

namespace disent {

struct TwoSpinParams {
  double omega_a = 0.0;  // TLS a angular frequency
  double omega_b = 0.0;  // TLS b angular frequency
  double omega_1 = 0.0;  // driving amplitude
  double delta = 0.0;    // driving detuning; pump frequency = omega_b + delta
  double g = 0.0;        // coupling coefficient
  double gamma_d = 0.0;

  double omega_p() const { return omega_b + delta; }
};

double rabi_frequency(const TwoSpinParams& p);  // sqrt(omega_1^2 + delta^2)

// Rotation angle of the second frame transformation, atan2(-omega_1, delta).
double rotation_angle(const TwoSpinParams& p);

Eigen::Matrix4cd omega_lab(double t, const TwoSpinParams& p);
Eigen::Matrix4d omega_rotating(const TwoSpinParams& p);
Eigen::Matrix4d omega_double(const TwoSpinParams& p);

// Frame transformations acting on TLS b alone.
Eigen::Matrix2cd u_b1(double t, const TwoSpinParams& p);
Eigen::Matrix2d u_b2(const TwoSpinParams& p);

struct TruncatedModel {
  Eigen::Matrix2d matrix;  // 2x2 block of the double-rotated matrix
  Eigen::Vector3d omega;   // effective field: matrix = omega . sigma
};

TruncatedModel truncated_model(const TwoSpinParams& p);

// Truncated disentangler diag(-|d|^2, |a|^2) for a normalized (a, d) pair.
Eigen::Matrix2d m_dt(Complex a, Complex d);

// dP/dt = 2 omega x P + gamma_d (P_z P - z_hat); tangent to the sphere.
Eigen::Vector3d bloch_rhs(const Eigen::Vector3d& p,
                          const Eigen::Vector3d& omega, double gamma_d);

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> points;
  std::vector<double> q_values;  // (1 - P_z^2)/2
  long step_rejections = 0;
};

BlochTrajectory bloch_evolve(const Eigen::Vector3d& p0,
                             const Eigen::Vector3d& omega, double gamma_d,
                             const IntegratorConfig& icfg);

// Two-amplitude integration of the truncated model (same record grid and
// tolerances as evolve); states are the (a, d) pairs.
Trajectory evolve_truncated(const Eigen::Vector2cd& initial,
                            const Eigen::Matrix2d& hamiltonian, double gamma_d,
                            const IntegratorConfig& icfg);

enum class Stability { stable, unstable, marginal };

const char* to_string(Stability s);

struct BlochFixedPoint {
  double theta = 0.0;
  double phi = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double residual = 0.0;        // ||dP/dt|| at the point
  double eq_residual = 0.0;     // scalar fixed-point-angle equation residual
  double max_re_eigenvalue = 0.0;
  Stability stability = Stability::marginal;
};

// All fixed points of the Bloch flow, found by Newton iteration from a dense
// spherical grid and deduplicated. omega must lie in the x-z plane.
std::vector<BlochFixedPoint> fixed_points(const Eigen::Vector3d& omega,
                                          double gamma_d);

// tan(theta_h) = omega_x / omega_z, the field direction angle.
double field_angle(const Eigen::Vector3d& omega);

struct SweepRow {
  double delta = 0.0;
  double omega_1 = 0.0;
  double omega_r = 0.0;
  double omega_x = 0.0;
  double omega_z = 0.0;
  double theta_h = 0.0;
  std::vector<BlochFixedPoint> roots;
  std::string error;  // empty on success
};

struct SweepGrid {
  double delta_min = 0.0, delta_max = 0.0;
  int delta_count = 0;
  double omega1_min = 0.0, omega1_max = 0.0;
  int omega1_count = 0;
};

// Grid scan over (delta, omega_1), row-major (delta outer). Per-point solver
// failures are recorded in the row, not thrown. Rows are computed in parallel
// (capped by the DISENT_THREADS environment variable) and returned in grid
// order.
std::vector<SweepRow> hh_sweep(const TwoSpinParams& base,
                               const SweepGrid& grid);

// Worker cap: DISENT_THREADS if set, hardware concurrency otherwise.
int worker_count();

}  // namespace disent
