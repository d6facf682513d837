#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

namespace ctrig::detail {

// Adaptive Dormand-Prince 5(4) step for a scalar autonomous ODE x' = f(x).
// Advances (x) by one accepted step, updating the suggested h; returns the
// step actually taken.
inline double rk45_scalar_step(const std::function<double(double)>& f, double& x, double& h,
                               double abs_tol, double rel_tol) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                      e6 = 22.0 / 525, e7 = -1.0 / 40;
  for (int it = 0; it < 60; ++it) {
    const double k1 = f(x);
    const double k2 = f(x + h * a21 * k1);
    const double k3 = f(x + h * (a31 * k1 + a32 * k2));
    const double k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = f(x5);
    const double err_raw = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double scale = abs_tol + rel_tol * std::max(std::abs(x), std::abs(x5));
    const double err = std::abs(err_raw) / scale;
    if (err <= 1.0 || h < 1e-14) {
      const double taken = h;
      x = x5;
      const double grow = err > 1e-30 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
      return taken;
    }
    h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
  }
  return 0;
}

// Integrate x' = f(x) from t = 0 to T, invoking emit(t, x) exactly at the
// uniform grid times k * dt (including 0 and T when aligned).
inline void rk45_scalar_drive(const std::function<double(double)>& f, double x0, double T, double dt,
                              const std::function<void(double, double)>& emit, double abs_tol = 1e-10,
                              double rel_tol = 1e-10) {
  double t = 0, x = x0;
  double next = 0;
  double h = dt;
  long guard = 0;
  while (t < T) {
    if (++guard > 50000000) break;
    while (next <= t + 1e-12 && next <= T + 1e-15) {
      emit(next, x);
      next += dt;
    }
    const double cap = std::min(T - t, next - t);
    double hstep = std::max(std::min(h, cap), 1e-15);
    const double taken = rk45_scalar_step(f, x, hstep, abs_tol, rel_tol);
    if (taken <= 0) break;
    if (hstep > taken || taken >= cap - 1e-15) h = hstep;
    t += taken;
  }
  while (next <= t + 1e-12 && next <= T + 1e-15) {
    emit(next, x);
    next += dt;
  }
}

}  // namespace ctrig::detail
