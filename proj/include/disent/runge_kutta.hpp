#pragma once

// Adaptive Dormand-Prince 5(4) embedded pair over any dense Eigen vector type
// (complex state vectors, Bloch 3-vectors). Recording happens at multiples of
// a fixed interval; steps are clipped to land on the record times exactly, so
// recorded samples carry full step-end accuracy instead of interpolant
// accuracy.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace disent {

struct StepperOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 1e-4;        // <= 0 selects a heuristic first step
  bool renormalize = false;    // rescale y to unit norm after accepted steps
  double record_every = 0.0;   // <= 0 disables recording
  long* rejections = nullptr;
  long* accepted = nullptr;
};

namespace detail {

template <typename Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol,
                  double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = std::abs(err[i]) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace detail

// Integrates dy/dt = rhs(t, y) from t0 to t1. record(t, y) is invoked at
// t = k * record_every with the raw pre-renormalization state (callers
// normalize copies as needed); the final y is returned. Throws on step
// underflow and on non-finite states.
template <typename Vec, typename Rhs, typename Record>
Vec integrate_dopri5(Rhs&& rhs, double t0, double t1, Vec y,
                     const StepperOptions& opt, Record&& record) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");

  const bool recording = opt.record_every > 0.0;
  long next_sample = 1;
  if (recording) record(t0, y);

  double t = t0;
  double h = opt.h_init;
  Vec k1 = rhs(t, y);
  if (h <= 0.0) {
    const double r = k1.norm();
    h = 0.01 * std::max(y.norm(), 1.0) / std::max(r, 1e-8);
  }

  const double eps_t = 16.0 * std::numeric_limits<double>::epsilon();
  auto near = [eps_t](double a, double b) {
    return std::abs(a - b) <= eps_t * std::max({1.0, std::abs(a), std::abs(b)});
  };

  while (t < t1 - eps_t * std::max(1.0, std::abs(t1))) {
    double h_used = std::min(h, t1 - t);
    if (recording) {
      const double ts = next_sample * opt.record_every;
      if (ts < t1 + eps_t && t + h_used > ts - eps_t * std::max(1.0, ts))
        h_used = ts - t;
    }
    if (h_used < 1e-14 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("integrate: step size underflow at t = " +
                               std::to_string(t));

    const Vec k2 = rhs(t + c2 * h_used, y + h_used * (a21 * k1));
    const Vec k3 = rhs(t + c3 * h_used, y + h_used * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(t + c4 * h_used,
                       y + h_used * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 =
        rhs(t + c5 * h_used,
            y + h_used * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = rhs(t + h_used, y + h_used * (a61 * k1 + a62 * k2 +
                                                 a63 * k3 + a64 * k4 +
                                                 a65 * k5));
    const Vec y1 =
        y + h_used * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(t + h_used, y1);
    const Vec err = h_used *
                    (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = detail::error_norm(err, y, y1, opt.rtol, opt.atol);
    if (!std::isfinite(en) || !y1.allFinite())
      throw std::runtime_error("integrate: non-finite state at t = " +
                               std::to_string(t + h_used));

    const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
    if (en <= 1.0) {
      t += h_used;
      y = y1;
      if (opt.accepted) ++(*opt.accepted);
      if (recording && near(t, next_sample * opt.record_every)) {
        record(t, y);
        ++next_sample;
      }
      if (opt.renormalize) {
        y /= y.norm();
        k1 = rhs(t, y);
      } else {
        k1 = k7;
      }
      h = h_used * fac;
    } else {
      if (opt.rejections) ++(*opt.rejections);
      h = h_used * std::min(1.0, fac);
    }
  }
  return y;
}

}  // namespace disent
