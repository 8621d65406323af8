#include "disent/twospin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "disent/runge_kutta.hpp"

namespace disent {

double rabi_frequency(const TwoSpinParams& p) {
  return std::hypot(p.omega_1, p.delta);
}

double rotation_angle(const TwoSpinParams& p) {
  if (p.omega_1 == 0.0 && p.delta == 0.0)
    throw std::invalid_argument("rotation_angle: rotation angle undefined");
  return std::atan2(-p.omega_1, p.delta);
}

Eigen::Matrix4cd omega_lab(double t, const TwoSpinParams& p) {
  const Complex e = std::polar(1.0, p.omega_p() * t);
  const double wa = p.omega_a, wb = p.omega_b, w1 = p.omega_1, g = p.g;
  Eigen::Matrix4cd m;
  m << (-wa - wb) / 2, w1 / 2 * e, -g / 2, 0,                //
      w1 / 2 * std::conj(e), (-wa + wb) / 2, 0, g / 2,       //
      -g / 2, 0, (wa - wb) / 2, w1 / 2 * e,                  //
      0, g / 2, w1 / 2 * std::conj(e), (wa + wb) / 2;
  return m;
}

Eigen::Matrix4d omega_rotating(const TwoSpinParams& p) {
  const double wa = p.omega_a, d = p.delta, w1 = p.omega_1, g = p.g;
  Eigen::Matrix4d m;
  m << (-wa + d) / 2, w1 / 2, -g / 2, 0,   //
      w1 / 2, (-wa - d) / 2, 0, g / 2,     //
      -g / 2, 0, (wa + d) / 2, w1 / 2,     //
      0, g / 2, w1 / 2, (wa - d) / 2;
  return m;
}

Eigen::Matrix4d omega_double(const TwoSpinParams& p) {
  if (p.omega_1 == 0.0 && p.delta == 0.0)
    throw std::invalid_argument("omega_double: rotation angle undefined");
  const double wa = p.omega_a, wr = rabi_frequency(p);
  const double cd = p.g * p.delta / (2 * wr);   // coupling, detuning part
  const double cx = p.g * p.omega_1 / (2 * wr); // coupling, drive part
  Eigen::Matrix4d m;
  m << (-wa + wr) / 2, 0, -cd, cx,   //
      0, (-wa - wr) / 2, cx, cd,     //
      -cd, cx, (wa + wr) / 2, 0,     //
      cx, cd, 0, (wa - wr) / 2;
  return m;
}

Eigen::Matrix2cd u_b1(double t, const TwoSpinParams& p) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::polar(1.0, p.omega_p() * t / 2);
  u(1, 1) = std::polar(1.0, -p.omega_p() * t / 2);
  return u;
}

Eigen::Matrix2d u_b2(const TwoSpinParams& p) {
  const double th = rotation_angle(p);
  Eigen::Matrix2d u;
  u << std::cos(th / 2), std::sin(th / 2),  //
      -std::sin(th / 2), std::cos(th / 2);
  return u;
}

TruncatedModel truncated_model(const TwoSpinParams& p) {
  if (p.omega_1 == 0.0 && p.delta == 0.0)
    throw std::invalid_argument("truncated_model: rotation angle undefined");
  const double wr = rabi_frequency(p);
  TruncatedModel tm;
  tm.omega =
      Eigen::Vector3d(p.g * p.omega_1 / (2 * wr), 0.0, (wr - p.omega_a) / 2);
  tm.matrix << tm.omega.z(), tm.omega.x(),  //
      tm.omega.x(), -tm.omega.z();
  return tm;
}

Eigen::Matrix2d m_dt(Complex a, Complex d) {
  const double n2 = std::norm(a) + std::norm(d);
  if (std::abs(n2 - 1.0) > 1e-10)
    throw std::invalid_argument("m_dt: (a, d) not normalized");
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = -std::norm(d);
  m(1, 1) = std::norm(a);
  return m;
}

Eigen::Vector3d bloch_rhs(const Eigen::Vector3d& p,
                          const Eigen::Vector3d& omega, double gamma_d) {
  Eigen::Vector3d v = 2.0 * omega.cross(p);
  v += gamma_d * (p.z() * p - Eigen::Vector3d::UnitZ());
  return v;
}

BlochTrajectory bloch_evolve(const Eigen::Vector3d& p0,
                             const Eigen::Vector3d& omega, double gamma_d,
                             const IntegratorConfig& icfg) {
  if (std::abs(p0.norm() - 1.0) > kNormCheckTol)
    throw std::invalid_argument("bloch_evolve: p0 not on the unit sphere");
  icfg.validate();

  BlochTrajectory traj;
  auto rhs = [&](double, const Eigen::Vector3d& p) {
    return bloch_rhs(p, omega, gamma_d);
  };
  auto record = [&](double t, const Eigen::Vector3d& p) {
    const Eigen::Vector3d unit = p / p.norm();
    traj.times.push_back(t);
    traj.points.push_back(icfg.renormalize ? unit : p);
    traj.q_values.push_back(0.5 * (1.0 - unit.z() * unit.z()));
  };

  StepperOptions opt;
  opt.rtol = icfg.rtol;
  opt.atol = icfg.atol;
  opt.h_init = icfg.dt_init;
  opt.renormalize = icfg.renormalize;
  opt.record_every = icfg.record_every;
  opt.rejections = &traj.step_rejections;
  integrate_dopri5(rhs, 0.0, icfg.t_final, Eigen::Vector3d(p0), opt, record);
  return traj;
}

Trajectory evolve_truncated(const Eigen::Vector2cd& initial,
                            const Eigen::Matrix2d& hamiltonian, double gamma_d,
                            const IntegratorConfig& icfg) {
  if (std::abs(initial.squaredNorm() - 1.0) > kNormCheckTol)
    throw std::invalid_argument("evolve_truncated: initial not normalized");
  if (gamma_d < 0.0)
    throw std::invalid_argument("evolve_truncated: gamma_d must be >= 0");
  icfg.validate();

  Trajectory traj;
  auto rhs = [&](double, const Eigen::Vector2cd& psi) {
    // truncated generator diag(-|d|^2, |a|^2)/||psi|| applied to psi
    const double n = psi.norm();
    Eigen::Vector2cd out = Complex(0.0, -1.0) * (hamiltonian * psi);
    out(0) += gamma_d * (-std::norm(psi(1)) / n) * psi(0);
    out(1) += gamma_d * (std::norm(psi(0)) / n) * psi(1);
    return out;
  };
  auto record = [&](double t, const Eigen::Vector2cd& psi) {
    const double nrm = psi.norm();
    const Eigen::Vector2cd unit = psi / nrm;
    traj.times.push_back(t);
    traj.norms.push_back(nrm);
    StateVector s(2);
    s << (icfg.renormalize ? unit : Eigen::Vector2cd(psi));
    traj.states.push_back(s);
    traj.q_values.push_back(2.0 * std::norm(unit(0)) * std::norm(unit(1)));
    traj.exp_p.push_back(std::norm(unit(0)));
  };

  StepperOptions opt;
  opt.rtol = icfg.rtol;
  opt.atol = icfg.atol;
  opt.h_init = icfg.dt_init;
  opt.renormalize = icfg.renormalize;
  opt.record_every = icfg.record_every;
  long rej = 0;
  opt.rejections = &rej;
  integrate_dopri5(rhs, 0.0, icfg.t_final, Eigen::Vector2cd(initial), opt,
                   record);
  traj.warnings["step_rejections"] = rej;
  return traj;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    default: return "marginal";
  }
}

double field_angle(const Eigen::Vector3d& omega) {
  return std::atan2(omega.x(), omega.z());
}

namespace {

// Orthonormal tangent basis at p.
void tangent_basis(const Eigen::Vector3d& p, Eigen::Vector3d& t1,
                   Eigen::Vector3d& t2) {
  t1 = p.cross(Eigen::Vector3d::UnitX());
  if (t1.norm() < 0.5) t1 = p.cross(Eigen::Vector3d::UnitY());
  t1.normalize();
  t2 = p.cross(t1);
}

// Scalar fixed-point-angle equation residual; the polynomial form
// gamma^2 s^2 c^2 / 4 - (wx^2 c^2 - wz^2 s^2) = 0 (scaled back by s^2 c^2)
// is used where the quotient form is indeterminate.
double scalar_angle_residual(double theta, const Eigen::Vector3d& omega,
                             double gamma_d) {
  const double wx = omega.x(), wz = omega.z();
  const double s = std::sin(theta), c = std::cos(theta);
  const double th_h = std::atan2(wx, wz);
  const double denom = s * s * c * c;
  if (denom > 1e-12) {
    const double lhs = gamma_d * gamma_d / (4.0 * (wx * wx + wz * wz));
    const double rhs = std::sin(th_h - theta) * std::sin(th_h + theta) / denom;
    return std::abs(lhs - rhs);
  }
  return std::abs(gamma_d * gamma_d * denom / 4.0 -
                  (wx * wx * c * c - wz * wz * s * s)) /
         (wx * wx + wz * wz);
}

// Analytic Jacobian of the Bloch field.
Eigen::Matrix3d bloch_jacobian(const Eigen::Vector3d& p,
                               const Eigen::Vector3d& omega, double gamma_d) {
  Eigen::Matrix3d cross;
  cross << 0, -omega.z(), omega.y(),  //
      omega.z(), 0, -omega.x(),       //
      -omega.y(), omega.x(), 0;
  Eigen::Matrix3d j = 2.0 * cross;
  j += gamma_d * p.z() * Eigen::Matrix3d::Identity();
  j.col(2) += gamma_d * p;
  return j;
}

}  // namespace

std::vector<BlochFixedPoint> fixed_points(const Eigen::Vector3d& omega,
                                          double gamma_d) {
  if (omega.x() * omega.x() + omega.z() * omega.z() <= 0.0)
    throw std::invalid_argument("fixed_points: omega_x^2 + omega_z^2 must be positive");
  if (omega.y() != 0.0)
    throw std::invalid_argument("fixed_points: omega must lie in the x-z plane");
  if (gamma_d < 0.0)
    throw std::invalid_argument("fixed_points: gamma_d must be >= 0");

  const double scale = std::max(gamma_d, 2.0 * omega.norm());
  std::vector<Eigen::Vector3d> roots;

  auto newton = [&](Eigen::Vector3d p) {
    for (int it = 0; it < 60; ++it) {
      const Eigen::Vector3d f = bloch_rhs(p, omega, gamma_d);
      if (f.norm() <= 1e-14 * scale) return std::make_pair(p, true);
      Eigen::Vector3d t1, t2;
      tangent_basis(p, t1, t2);
      const Eigen::Matrix3d j = bloch_jacobian(p, omega, gamma_d);
      Eigen::Matrix2d jt;
      jt << t1.dot(j * t1), t1.dot(j * t2),  //
          t2.dot(j * t1), t2.dot(j * t2);
      const Eigen::Vector2d b(-t1.dot(f), -t2.dot(f));
      const Eigen::Vector2d d = jt.fullPivLu().solve(b);
      if (!d.allFinite()) return std::make_pair(p, false);
      double step = std::min(1.0, 0.5 / std::max(1e-12, d.norm()));
      p = (p + step * (d(0) * t1 + d(1) * t2)).normalized();
    }
    const bool ok = bloch_rhs(p, omega, gamma_d).norm() <= 1e-12 * scale;
    return std::make_pair(p, ok);
  };

  const int n_theta = 10, n_phi = 12;
  std::vector<Eigen::Vector3d> starts;
  starts.emplace_back(0, 0, 1);
  starts.emplace_back(0, 0, -1);
  for (int i = 1; i <= n_theta; ++i) {
    const double th = M_PI * i / (n_theta + 1);
    for (int k = 0; k < n_phi; ++k) {
      const double ph = 2 * M_PI * k / n_phi - M_PI;
      starts.emplace_back(std::sin(th) * std::cos(ph),
                          std::sin(th) * std::sin(ph), std::cos(th));
    }
  }
  for (const auto& s : starts) {
    auto [p, ok] = newton(s);
    if (!ok) continue;
    bool dup = false;
    for (const auto& r : roots)
      if ((r - p).norm() < 1e-7) { dup = true; break; }
    if (!dup) roots.push_back(p);
  }
  if (roots.empty())
    throw std::runtime_error(
        "fixed_points: no convergent roots (gamma_d = " +
        std::to_string(gamma_d) + ", |omega| = " + std::to_string(omega.norm()) +
        ")");

  std::vector<BlochFixedPoint> out;
  for (const auto& p : roots) {
    BlochFixedPoint fp;
    fp.p = p;
    fp.theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
    fp.phi = std::atan2(p.y(), p.x());
    fp.residual = bloch_rhs(p, omega, gamma_d).norm();
    fp.eq_residual = scalar_angle_residual(fp.theta, omega, gamma_d);

    // stability from the numerically differenced tangent-plane Jacobian
    Eigen::Vector3d t1, t2;
    tangent_basis(p, t1, t2);
    const double eps = 1e-6;
    Eigen::Matrix2d jt;
    const Eigen::Vector3d tv[2] = {t1, t2};
    for (int col = 0; col < 2; ++col) {
      const Eigen::Vector3d pp = (p + eps * tv[col]).normalized();
      const Eigen::Vector3d pm = (p - eps * tv[col]).normalized();
      const Eigen::Vector3d df =
          (bloch_rhs(pp, omega, gamma_d) - bloch_rhs(pm, omega, gamma_d)) /
          (2 * eps);
      jt(0, col) = t1.dot(df);
      jt(1, col) = t2.dot(df);
    }
    const Eigen::EigenSolver<Eigen::Matrix2d> es(jt);
    fp.max_re_eigenvalue = es.eigenvalues().real().maxCoeff();
    const double margin = 1e-6 * scale;
    if (fp.max_re_eigenvalue < -margin)
      fp.stability = Stability::stable;
    else if (fp.max_re_eigenvalue > margin)
      fp.stability = Stability::unstable;
    else
      fp.stability = Stability::marginal;
    out.push_back(std::move(fp));
  }
  std::sort(out.begin(), out.end(),
            [](const BlochFixedPoint& a, const BlochFixedPoint& b) {
              return a.theta < b.theta;
            });
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("DISENT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::vector<SweepRow> hh_sweep(const TwoSpinParams& base,
                               const SweepGrid& grid) {
  if (grid.delta_count < 2 || grid.omega1_count < 2)
    throw std::invalid_argument("hh_sweep: grid must be at least 2x2");
  if (!std::isfinite(grid.delta_min) || !std::isfinite(grid.delta_max) ||
      !std::isfinite(grid.omega1_min) || !std::isfinite(grid.omega1_max))
    throw std::invalid_argument("hh_sweep: ranges must be finite");

  const int nd = grid.delta_count, nw = grid.omega1_count;
  std::vector<SweepRow> rows(static_cast<std::size_t>(nd) * nw);

  auto run_point = [&](int idx) {
    const int i = idx / nw, j = idx % nw;
    SweepRow& row = rows[idx];
    row.delta = grid.delta_min +
                (grid.delta_max - grid.delta_min) * i / (nd - 1);
    row.omega_1 = grid.omega1_min +
                  (grid.omega1_max - grid.omega1_min) * j / (nw - 1);
    TwoSpinParams p = base;
    p.delta = row.delta;
    p.omega_1 = row.omega_1;
    try {
      const TruncatedModel tm = truncated_model(p);
      row.omega_r = rabi_frequency(p);
      row.omega_x = tm.omega.x();
      row.omega_z = tm.omega.z();
      row.theta_h = field_angle(tm.omega);
      row.roots = fixed_points(tm.omega, p.gamma_d);
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  };

  const int total = nd * nw;
  const int workers = std::min(worker_count(), total);
  if (workers <= 1) {
    for (int idx = 0; idx < total; ++idx) run_point(idx);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int idx = w; idx < total; idx += workers) run_point(idx);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace disent
