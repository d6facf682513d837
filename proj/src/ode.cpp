#include "ctrig/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctrig {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ScalarField2
// ---------------------------------------------------------------------------

ScalarField2 ScalarField2::from_quadratic(const Mat2& M, const Vec2& b, double c) {
  ScalarField2 f;
  f.quadratic = Quadratic{M, b, c};
  f.value = [M, b, c](const Vec2& x) { return 0.5 * x.dot(M * x) + b.dot(x) + c; };
  f.grad = [M, b](const Vec2& x) -> Vec2 { return M * x + b; };
  return f;
}

ScalarField2 ScalarField2::linear(const Vec2& b, double c) {
  return from_quadratic(Mat2::Zero(), b, c);
}

// ---------------------------------------------------------------------------
// Potential
// ---------------------------------------------------------------------------

Potential::Potential(TrigPair pair, ScalarField2 f) : pair_(std::move(pair)), f_(std::move(f)) {
  const int n = 8192;
  double m = kInf;
  for (int i = 0; i < n; ++i) m = std::min(m, U(period() * i / n));
  umin_ = m;
}

double Potential::U(double tp) const { return f_.value(pair_.polar().cos_sin(tp)); }

double Potential::Uprime_left(double tp) const {
  const Vec2 df = grad_at(tp);
  const Vec2 P = pair_.primal().cos_sin(pair_.theta_primal_interval(tp).lo);
  return cross2(P, df);
}

double Potential::Uprime_right(double tp) const {
  const Vec2 df = grad_at(tp);
  const Vec2 P = pair_.primal().cos_sin(pair_.theta_primal_interval(tp).hi);
  return cross2(P, df);
}

Interval Potential::Uprime(double tp) const {
  const Vec2 df = grad_at(tp);
  const Interval it = pair_.theta_primal_interval(tp);
  const double a = cross2(pair_.primal().cos_sin(it.lo), df);
  const double b = cross2(pair_.primal().cos_sin(it.hi), df);
  return {std::min(a, b), std::max(a, b)};
}

double energy(const Potential& pot, double tp, double v) { return pot.energy(tp, v); }

// ---------------------------------------------------------------------------
// Double-exponential quadrature (integrable endpoint singularities)
// ---------------------------------------------------------------------------

namespace {

double de_quadrature(const std::function<double(double)>& f, double a, double b) {
  const double r = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  if (r <= 0) return 0;
  auto node_sum = [&](double h, bool odd_only) {
    double acc = 0;
    const int kmax = static_cast<int>(std::ceil(6.5 / h));  // cover the tails at every level
    for (int k = odd_only ? 1 : 0; k <= kmax; k += odd_only ? 2 : 1) {
      const double tk = k * h;
      const double s = std::sinh(tk);
      const double ch = std::cosh(M_PI / 2 * s);
      const double w = (M_PI / 2) * std::cosh(tk) / (ch * ch);
      if (w < 1e-18 && k > 2) break;
      const double e = std::exp(-M_PI * s);
      const double dm = 2 * e / (1 + e);  // 1 - tanh(pi/2 sinh t)
      const double xk = 1 - dm;
      acc += w * f(c + r * xk);
      if (k > 0) acc += w * f(c - r * xk);
    }
    return acc;
  };
  double h = 1.0;
  double sum = node_sum(h, false);
  double prev = r * h * sum;
  for (int level = 0; level < 8; ++level) {
    h *= 0.5;
    sum += node_sum(h, true);
    const double cur = r * h * sum;
    if (level >= 2 && std::abs(cur - prev) < 1e-10 * (1 + std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

namespace {

// Integral of 1/sqrt(2(E-U)) over [a, b] with the energy level touched at
// endpoint `sing_at_b ? b : a`. Substituting the square root of the distance
// regularizes a linear (corner) touch completely and softens power-type ones;
// below the cancellation floor of E-U the one-sided slope asymptote is used.
double singular_end_time(const Potential& pot, double E, double a, double b, bool sing_at_b) {
  const double W = std::sqrt(b - a);
  const double end = sing_at_b ? b : a;
  const double dir = sing_at_b ? -1.0 : 1.0;
  const double noise = 1e-12 * (1 + std::abs(E));
  const double slope =
      std::abs(sing_at_b ? pot.Uprime_left(end) : pot.Uprime_right(end));
  return de_quadrature(
      [&](double w) {
        const double d = w * w;
        const double g = 2 * (E - pot.U(end + dir * d));
        if (g > noise) return 2 * w / std::sqrt(g);
        if (slope > 1e-12) return std::sqrt(2.0 / slope);
        return 0.0;  // flatter-than-linear touch below resolution
      },
      0, W);
}

}  // namespace

double travel_time(const Potential& pot, double E, double from, double to) {
  if (to == from) return 0;
  const double sign = to > from ? 1.0 : -1.0;
  const double a = std::min(from, to), b = std::max(from, to);
  const double touch_tol = 1e-10 * (1 + std::abs(E));
  const bool sing_a = E - pot.U(a) <= touch_tol;
  const bool sing_b = E - pot.U(b) <= touch_tol;
  double val;
  if (sing_a && sing_b) {
    const double mid = 0.5 * (a + b);
    val = singular_end_time(pot, E, a, mid, false) + singular_end_time(pot, E, mid, b, true);
  } else if (sing_a || sing_b) {
    val = singular_end_time(pot, E, a, b, sing_b);
  } else {
    val = de_quadrature(
        [&](double psi) {
          const double g = 2 * (E - pot.U(psi));
          return 1.0 / std::sqrt(std::max(g, 1e-300));
        },
        a, b);
  }
  return sign * val;
}

// ---------------------------------------------------------------------------
// Stationary classification
// ---------------------------------------------------------------------------

std::string to_string(StationaryKind k) {
  switch (k) {
    case StationaryKind::not_stationary: return "not_stationary";
    case StationaryKind::center: return "center";
    case StationaryKind::saddle_slow: return "saddle_slow";
    case StationaryKind::saddle_finite_time: return "saddle_finite_time";
    case StationaryKind::general_singular: return "general_singular";
    case StationaryKind::special_singular: return "special_singular";
    case StationaryKind::flat: return "flat";
    case StationaryKind::indeterminate: return "indeterminate";
  }
  return "?";
}

std::string to_string(ArcLabel label) {
  switch (label) {
    case ArcLabel::bang: return "bang";
    case ArcLabel::general_singular: return "general_singular";
    case ArcLabel::special_singular: return "special_singular";
  }
  return "?";
}

namespace {

struct SideChar {
  bool up = false, down = false, flat = false, convergent = false, confident = true;
};

// One side of a stationary point: does the potential rise, fall, or stay flat,
// and when it falls, is the entry-time integral finite?
SideChar probe_side(const Potential& pot, double tp, int dir, double E, const ClassifyOptions& opt,
                    double fscale) {
  SideChar sc;
  const double P = pot.period();
  const double slope = dir > 0 ? pot.Uprime_right(tp) : pot.Uprime_left(tp);
  const double ztol = opt.zero_tol * fscale;
  // rising to the right means U'(+0) > 0; rising to the left means U'(-0) < 0
  const double rise = dir > 0 ? slope : -slope;
  if (std::abs(rise) > ztol) {
    sc.up = rise > 0;
    sc.down = !sc.up;
    sc.convergent = sc.down;  // linear one-sided drop: finite entry time
    return sc;
  }
  // zero one-sided slope: probe values at shrinking offsets
  const double d0 = opt.probe_frac * P;
  int sign_seen = 0;
  bool consistent = true, all_flat = true;
  for (double d : {d0, d0 / 8, d0 / 64}) {
    const double du = pot.U(tp + dir * d) - E;
    if (std::abs(du) > 1e-12 * fscale) {
      all_flat = false;
      const int s = du > 0 ? 1 : -1;
      if (sign_seen == 0)
        sign_seen = s;
      else if (s != sign_seen)
        consistent = false;
    }
  }
  if (all_flat) {
    sc.flat = true;
    return sc;
  }
  if (!consistent) {
    sc.confident = false;
    return sc;
  }
  sc.up = sign_seen > 0;
  sc.down = !sc.up;
  if (!sc.down) return sc;

  // downhill with zero one-sided slope: convergence from local regularity
  const Regularity reg = pot.pair().polar().regularity_at(tp);
  const Vec2 Q = pot.host_point(tp);
  const Vec2 df = pot.grad_at(tp);
  if (reg.kind == Regularity::Kind::power && reg.exponent < 2) {
    const double ce = df.dot(Q) / reg.exponent;
    if (ce > 1e-10 * fscale) {
      sc.convergent = true;
      return sc;
    }
    if (ce < -1e-10 * fscale) {
      sc.convergent = false;
      return sc;
    }
    if (pot.field().quadratic) {
      // leading power coefficient vanishes; the quadratic term decides
      const Vec2 T(-Q.y(), Q.x());
      const double c2 = -0.5 * T.dot(pot.field().quadratic->M * T);
      if (c2 > 1e-10 * fscale) {
        sc.convergent = false;
        return sc;
      }
    }
  } else if (reg.kind == Regularity::Kind::smooth || reg.kind == Regularity::Kind::curvature_jump) {
    sc.convergent = false;  // C^1 with bounded curvature: quadratic well
    return sc;
  }
  // composite corners with vanishing slope and other leftovers: fit the
  // drop exponent numerically
  const double dfit = opt.probe_frac * P;
  double sigma_acc = 0;
  int sigma_n = 0;
  for (double d : {dfit, dfit / 2, dfit / 4}) {
    const double g1 = E - pot.U(tp + dir * d);
    const double g2 = E - pot.U(tp + dir * d / 2);
    if (g1 > 0 && g2 > 0) {
      sigma_acc += std::log2(g1 / g2);
      ++sigma_n;
    }
  }
  if (sigma_n == 0) {
    sc.confident = false;
    return sc;
  }
  const double sigma = sigma_acc / sigma_n;
  sc.convergent = sigma < 1.95;
  sc.confident = std::abs(sigma - 2) > 0.05;
  return sc;
}

}  // namespace

StationaryInfo classify_stationary(const Potential& pot, double tp, const ClassifyOptions& opt) {
  StationaryInfo info;
  const Vec2 Q = pot.host_point(tp);
  const Vec2 df = pot.grad_at(tp);
  const double fscale = 1 + df.norm() * Q.norm();
  const Interval up = pot.Uprime(tp);
  const double ztol = opt.zero_tol * fscale;
  info.stationary = up.lo <= ztol && up.hi >= -ztol;
  info.host_smooth = pot.pair().polar().regularity_at(tp).kind == Regularity::Kind::smooth;
  if (!info.stationary) {
    info.primary = StationaryKind::not_stationary;
    return info;
  }
  const double E = pot.U(tp);
  const SideChar left = probe_side(pot, tp, -1, E, opt, fscale);
  const SideChar right = probe_side(pot, tp, +1, E, opt, fscale);
  info.up_left = left.up;
  info.up_right = right.up;
  info.flat_left = left.flat;
  info.flat_right = right.flat;
  info.convergent_left = left.down && left.convergent;
  info.convergent_right = right.down && right.convergent;
  info.confident = left.confident && right.confident;

  // constant-control solution: the unique solution of
  //   [cos° sin°; f_q -f_p] u = (1, 0)
  // lying on the control-body boundary
  const double det = -df.dot(Q);
  if (std::abs(det) > 1e-12 * fscale) {
    Mat2 A;
    A << Q.x(), Q.y(), df.y(), -df.x();
    const Vec2 u = A.colPivHouseholderQr().solve(Vec2(1, 0));
    info.general_control = u;
    info.singular_general = std::abs(gauge(pot.pair().primal().body(), u) - 1) <= opt.boundary_tol;
  }
  const bool host_corner = pot.pair().is_polar_corner(tp, opt.corner_tol_scale);
  if (df.norm() <= 1e-10 * fscale && host_corner) {
    info.singular_special = true;
    info.special_theta_range = pot.pair().theta_primal_interval(tp);
  }

  const bool any_finite = info.convergent_left || info.convergent_right;
  if (info.singular_special)
    info.primary = StationaryKind::special_singular;
  else if (any_finite)
    info.primary = StationaryKind::saddle_finite_time;
  else if (left.down && right.down)
    info.primary = StationaryKind::saddle_slow;
  else if (!info.confident)
    info.primary = StationaryKind::indeterminate;
  else if (info.singular_general && !info.host_smooth)
    info.primary = StationaryKind::general_singular;
  else if (left.up && right.up)
    info.primary = StationaryKind::center;
  else if (left.flat || right.flat)
    info.primary = StationaryKind::flat;
  else
    info.primary = StationaryKind::indeterminate;
  return info;
}

// ---------------------------------------------------------------------------
// Strip flows
// ---------------------------------------------------------------------------

namespace {

// Exact flow for a quadratic potential U = A x^2 + B x + C: x'' = -(2A x + B).
struct QuadFlow {
  double A = 0, B = 0;
  double x0 = 0, v0 = 0;
  int flavor = 0;  // 0 parabolic, 1 oscillator (A>0), 2 hyperbolic (A<0)
  double om = 0, xs = 0, rho = 0, phi = 0, alpha = 0, beta = 0;

  void init(double a, double b, double x, double v) {
    A = a;
    B = b;
    x0 = x;
    v0 = v;
    if (std::abs(A) < 1e-14) {
      flavor = 0;
    } else if (A > 0) {
      flavor = 1;
      om = std::sqrt(2 * A);
      xs = -B / (2 * A);
      rho = std::hypot(x0 - xs, v0 / om);
      phi = std::atan2(v0 / om, x0 - xs);
    } else {
      flavor = 2;
      om = std::sqrt(-2 * A);
      xs = -B / (2 * A);
      alpha = 0.5 * ((x0 - xs) + v0 / om);
      beta = 0.5 * ((x0 - xs) - v0 / om);
    }
  }

  double value(double t) const {
    switch (flavor) {
      case 0: return x0 + v0 * t - 0.5 * B * t * t;
      case 1: return xs + rho * std::cos(om * t - phi);
      default: return xs + alpha * std::exp(om * t) + beta * std::exp(-om * t);
    }
  }

  double vel(double t) const {
    switch (flavor) {
      case 0: return v0 - B * t;
      case 1: return -rho * om * std::sin(om * t - phi);
      default: return om * (alpha * std::exp(om * t) - beta * std::exp(-om * t));
    }
  }

  // Earliest t in (tmin, tmax] with x(t) = X, if any.
  std::optional<double> first_hit(double X, double tmin, double tmax) const {
    double best = kInf;
    auto consider = [&](double t) {
      if (t > tmin && t <= tmax && t < best) best = t;
    };
    switch (flavor) {
      case 0: {
        if (std::abs(B) < 1e-300) {
          if (v0 != 0) consider((X - x0) / v0);
        } else {
          const double disc = v0 * v0 - 2 * B * (X - x0);
          if (disc >= 0) {
            const double sq = std::sqrt(disc);
            consider((v0 - sq) / B);
            consider((v0 + sq) / B);
          }
        }
        break;
      }
      case 1: {
        const double cc = (X - xs) / rho;
        if (std::abs(cc) <= 1) {
          const double psi = std::acos(std::clamp(cc, -1.0, 1.0));
          for (int k = -2; k <= 3; ++k) {
            consider((phi + psi + 2 * M_PI * k) / om);
            consider((phi - psi + 2 * M_PI * k) / om);
          }
        }
        break;
      }
      default: {
        const double D = X - xs;
        if (std::abs(alpha) < 1e-300) {
          if (D != 0 && beta / D > 1e-300) consider(-std::log(beta / D) / om);
        } else {
          const double disc = D * D - 4 * alpha * beta;
          if (disc >= 0) {
            const double sq = std::sqrt(disc);
            for (double z : {(D - sq) / (2 * alpha), (D + sq) / (2 * alpha)})
              if (z > 1e-300) consider(std::log(z) / om);
          }
        }
        break;
      }
    }
    if (best == kInf) return std::nullopt;
    return best;
  }
};

// Dormand-Prince 5(4) adaptive step for x'' = -U'(x).
struct RkFlow {
  std::function<double(double)> uprime;
  double abs_tol = 1e-10, rel_tol = 1e-10;

  // One adaptive step from (x, v); h is updated in place; returns the step taken.
  double step(double& x, double& v, double& h) const {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    auto f = [&](double xx, double vv, double& dx, double& dv) {
      dx = vv;
      dv = -uprime(xx);
    };
    for (int it = 0; it < 60; ++it) {
      double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v, k5x, k5v, k6x, k6v, k7x, k7v;
      f(x, v, k1x, k1v);
      f(x + h * a21 * k1x, v + h * a21 * k1v, k2x, k2v);
      f(x + h * (a31 * k1x + a32 * k2x), v + h * (a31 * k1v + a32 * k2v), k3x, k3v);
      f(x + h * (a41 * k1x + a42 * k2x + a43 * k3x), v + h * (a41 * k1v + a42 * k2v + a43 * k3v),
        k4x, k4v);
      f(x + h * (a51 * k1x + a52 * k2x + a53 * k3x + a54 * k4x),
        v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v), k5x, k5v);
      f(x + h * (a61 * k1x + a62 * k2x + a63 * k3x + a64 * k4x + a65 * k5x),
        v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v), k6x, k6v);
      const double x5 = x + h * (b1 * k1x + b3 * k3x + b4 * k4x + b5 * k5x + b6 * k6x);
      const double v5 = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
      f(x5, v5, k7x, k7v);
      const double ex = h * (e1 * k1x + e3 * k3x + e4 * k4x + e5 * k5x + e6 * k6x + e7 * k7x);
      const double ev = h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v);
      const double sx = abs_tol + rel_tol * std::max(std::abs(x), std::abs(x5));
      const double sv = abs_tol + rel_tol * std::max(std::abs(v), std::abs(v5));
      const double err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ev / sv) * (ev / sv)));
      if (err <= 1.0 || h < 1e-14) {
        const double taken = h;
        x = x5;
        v = v5;
        const double grow = err > 1e-30 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        return taken;
      }
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Integration engine
// ---------------------------------------------------------------------------

struct Engine {
  const Potential& pot;
  IntegrateOptions opt;
  double T;
  ExtremalTrajectory out;

  double E = 0;
  double t = 0, x = 0, v = 0;
  double next_grid = 0;
  std::vector<double> bps;
  double period = 0;
  bool finished = false;
  int stationary_visits = 0;

  Engine(const Potential& p, const IntegrateOptions& o, double horizon) : pot(p), opt(o), T(horizon) {
    period = pot.period();
    bps = pot.pair().polar().breakpoints();
    std::sort(bps.begin(), bps.end());
  }

  double stall_tol() const { return std::max(1e-12, 1e-9 * (1 + std::abs(E))); }

  // --- emission -------------------------------------------------------------

  void push_sample(double tt, double xx, double vv, ArcLabel label, const StationaryInfo* info) {
    TrajectorySample s;
    s.t = tt;
    s.theta_polar = xx;
    s.v = vv;
    s.label = label;
    if (label == ArcLabel::general_singular && info) {
      s.u = info->general_control;
      s.theta = pot.pair().primal().angle_of_point(s.u);
    } else if (label == ArcLabel::special_singular && info) {
      const Interval range = info->special_theta_range;
      s.theta = opt.selection ? opt.selection(tt, range) : range.mid();
      s.u = pot.pair().primal().cos_sin(s.theta);
    } else {
      s.theta = pot.pair().theta_primal(xx);
      s.u = pot.pair().primal().cos_sin(s.theta);
    }
    s.energy_residual = std::abs(pot.energy(xx, vv) - E);
    out.samples.push_back(s);
  }

  template <class F>
  void emit_range(double t_end, F state, ArcLabel label, const StationaryInfo* info = nullptr) {
    while (next_grid <= t_end + 1e-15) {
      const auto [xx, vv] = state(next_grid);
      push_sample(next_grid, xx, vv, label, info);
      next_grid += opt.dt_out;
    }
  }

  void event(double tt, const std::string& kind, double xx) { out.events.push_back({tt, kind, xx}); }

  // --- strips ---------------------------------------------------------------

  // Unreduced strip [lo, hi] around x for motion direction dir; when x sits on
  // a breakpoint the strip ahead of the motion is returned.
  std::pair<double, double> strip_around(double xx, int dir) const {
    const double k = std::floor(xx / period);
    const double r = xx - k * period;
    const double off = k * period;
    const double snap = 1e-9 * period;
    const int n = static_cast<int>(bps.size());
    auto bp_at = [&](int j) {
      const int jm = ((j % n) + n) % n;
      const double wraps = std::floor(static_cast<double>(j) / n);
      return off + bps[jm] + wraps * period;
    };
    int i = static_cast<int>(std::upper_bound(bps.begin(), bps.end(), r) - bps.begin()) - 1;
    if (i < 0) i = 0;
    // snap to the nearest junction on either side (r can land one ulp short)
    int base = -1;
    if (std::abs(r - bps[i]) <= snap) {
      base = i;
    } else {
      const double above = (i + 1 < n) ? bps[i + 1] : period;
      if (std::abs(above - r) <= snap) base = i + 1;
    }
    if (base >= 0) {
      if (dir >= 0) return {bp_at(base), bp_at(base + 1)};
      return {bp_at(base - 1), bp_at(base)};
    }
    return {bp_at(i), bp_at(i + 1)};
  }

  bool quadratic_strip(double lo, double hi, double* A, double* B) const {
    if (!pot.field().quadratic) return false;
    const auto span = pot.pair().polar().linear_span(0.5 * (lo + hi));
    if (!span.linear) return false;
    const auto& q = *pot.field().quadratic;
    *A = 0.5 * span.slope.dot(q.M * span.slope);
    *B = span.slope.dot(q.M * span.origin) + q.b.dot(span.slope);
    return true;
  }

  // --- legs -----------------------------------------------------------------

  // Advances until horizon (finished = true) or a stationary arrival
  // (returns true with the state at rest there).
  bool moving_leg() {
    while (t < T) {
      int dir;
      if (v > 0)
        dir = 1;
      else if (v < 0)
        dir = -1;
      else {
        const Interval up = pot.Uprime(x);
        dir = (up.lo + up.hi) < 0 ? 1 : -1;  // fall downhill
      }
      const auto [lo, hi] = strip_around(x, dir);
      bool keep;
      double A, B;
      if (quadratic_strip(lo, hi, &A, &B))
        keep = advance_quadratic(lo, hi, A, B);
      else
        keep = advance_rk(lo, hi);
      if (!keep) return !finished;
    }
    finished = true;
    return false;
  }

  bool advance_quadratic(double lo, double hi, double A, double B) {
    QuadFlow flow;
    flow.init(A, B, x, v);
    const double tmax = T - t;
    const double tmin = 1e-13 * std::max(1.0, tmax);
    auto hit_lo = flow.first_hit(lo, tmin, tmax);
    auto hit_hi = flow.first_hit(hi, tmin, tmax);
    double t_exit = kInf;
    double target = 0;
    if (hit_lo && *hit_lo < t_exit) {
      t_exit = *hit_lo;
      target = lo;
    }
    if (hit_hi && *hit_hi < t_exit) {
      t_exit = *hit_hi;
      target = hi;
    }
    const double t0 = t;
    auto state = [&](double tt) {
      return std::pair<double, double>(flow.value(tt - t0), flow.vel(tt - t0));
    };
    if (t_exit == kInf) {
      emit_range(T, state, ArcLabel::bang);
      t = T;
      finished = true;
      return false;
    }
    emit_range(t0 + t_exit - 1e-15, state, ArcLabel::bang);
    t = t0 + t_exit;
    x = target;
    v = flow.vel(t_exit);
    return at_boundary();
  }

  bool advance_rk(double lo, double hi) {
    RkFlow rk;
    rk.abs_tol = opt.abs_tol;
    rk.rel_tol = opt.rel_tol;
    rk.uprime = [this](double xx) {
      const Interval up = pot.Uprime(xx);
      return 0.5 * (up.lo + up.hi);
    };
    double h = std::min(opt.dt_out, 0.5 * (T - t) + 1e-12);
    long steps = 0;
    while (t < T) {
      if (++steps > 50000000) throw NumericError("adaptive integration stalled");
      while (next_grid <= t + 1e-12 && next_grid <= T + 1e-15) {
        push_sample(next_grid, x, v, ArcLabel::bang, nullptr);
        next_grid += opt.dt_out;
      }
      const double xp = x, vp = v, tp = t;
      // land exactly on output-grid times so samples are true solver states
      double cap = std::min(T - t, next_grid - t);
      double hstep = std::max(std::min(h, cap), 1e-15);
      const double taken = rk.step(x, v, hstep);
      if (taken <= 0) throw NumericError("adaptive step failed");
      const bool outside = x < lo - 1e-14 || x > hi + 1e-14;
      if (outside && vp != 0 && v * vp < 0) {
        // the step both turned and exited: halve until the turn is resolved
        x = xp;
        v = vp;
        h = 0.5 * taken;
        continue;
      }
      if (hstep > taken || taken >= cap - 1e-15) h = hstep;  // keep the suggestion
      t = tp + taken;
      if (outside) {
        // monotone exit: crossing time from the energy quadrature, velocity
        // from the energy shell
        const double target = x < lo ? lo : hi;
        const int dir_exit = x < lo ? -1 : 1;
        const double dt_cross = std::abs(travel_time(pot, E, xp, target));
        t = tp + std::min(dt_cross, taken);
        x = target;
        v = dir_exit * std::sqrt(std::max(2 * (E - pot.U(target)), 0.0));
        return at_boundary();
      }
      const double eu = E - pot.U(x);
      if (eu >= 0 && std::abs(v) > 1e-8) v = (v >= 0 ? 1 : -1) * std::sqrt(2 * eu);
    }
    while (next_grid <= t + 1e-12 && next_grid <= T + 1e-15) {
      push_sample(next_grid, x, v, ArcLabel::bang, nullptr);
      next_grid += opt.dt_out;
    }
    finished = true;
    return false;
  }

  // Arrival at a strip boundary. Returns true when the motion continues.
  bool at_boundary() {
    const double eu = E - pot.U(x);
    if (eu > stall_tol()) {
      const int dir = v >= 0 ? 1 : -1;
      v = dir * std::sqrt(2 * eu);
      event(t, "corner", x);
      return true;
    }
    v = 0;
    const Interval up = pot.Uprime(x);
    const double fscale = 1 + pot.grad_at(x).norm() * pot.host_point(x).norm();
    if (up.lo <= 1e-10 * fscale && up.hi >= -1e-10 * fscale) {
      event(t, "stationary", x);
      return false;
    }
    event(t, "turn", x);
    return true;
  }

  // --- stationary handling ----------------------------------------------------

  ArcLabel dwell_label(const StationaryInfo& info) const {
    if (info.singular_special) return ArcLabel::special_singular;
    if (info.singular_general && !info.host_smooth) return ArcLabel::general_singular;
    return ArcLabel::bang;
  }

  void constant_until(double t_end, const StationaryInfo& info) {
    const double xx = x;
    emit_range(std::min(t_end, T), [&](double) { return std::pair<double, double>(xx, 0.0); },
               dwell_label(info), &info);
    t = std::min(t_end, T);
    if (t >= T) finished = true;
  }

  void depart(int dir, const StationaryInfo& info) {
    const bool ok = dir > 0 ? info.convergent_right : info.convergent_left;
    if (!ok) throw std::invalid_argument("departure direction not admissible at this stationary point");
    out.branched = true;
    out.departure_sign = dir;
    event(t, "depart", x);

    // guaranteed departure window: distance to the next point of the energy
    // level over the global speed bound
    const double M = std::sqrt(2 * std::max(E - pot.U_min(), 0.0)) + 1e-300;
    double dist = period;
    {
      const double step = period / 2048;
      for (int i = 1; i <= 2048; ++i) {
        if (E - pot.U(x + dir * step * i) <= 0) {
          dist = step * (i - 1);
          break;
        }
      }
    }
    out.tau_lower_bound = std::max(dist, 0.0) / M;

    // handoff point: inside the strip, clear of the next turning point, and
    // within a couple of output steps so grid emission stays exact
    const auto [slo, shi] = strip_around(x, dir);
    const double strip_w = dir > 0 ? shi - x : x - slo;
    double delta = 0.45 * strip_w;
    {
      const double step = strip_w / 512;
      for (int i = 1; i <= 512; ++i) {
        const double probe = x + dir * step * i;
        if (E - pot.U(probe) <= 0) {
          delta = std::min(delta, std::max(0.45 * step * (i - 1), step * 0.5));
          break;
        }
      }
    }
    double t_leg = 0;
    for (int shrink = 0; shrink < 60; ++shrink) {
      t_leg = travel_time(pot, E, x, x + dir * delta);
      if (t_leg <= 2 * opt.dt_out || delta < 1e-12 * period) break;
      delta *= 0.5;
    }
    const double x0 = x;
    const double t0 = t;
    const double t1 = t0 + t_leg;
    while (next_grid <= std::min(t1, T) + 1e-15) {
      const double target_dt = next_grid - t0;
      double alo = 0, ahi = delta;
      for (int it = 0; it < 50; ++it) {
        const double am = 0.5 * (alo + ahi);
        if (travel_time(pot, E, x0, x0 + dir * am) < target_dt)
          alo = am;
        else
          ahi = am;
      }
      const double xx = x0 + dir * 0.5 * (alo + ahi);
      const double vv = dir * std::sqrt(std::max(2 * (E - pot.U(xx)), 0.0));
      push_sample(next_grid, xx, vv, ArcLabel::bang, nullptr);
      next_grid += opt.dt_out;
    }
    if (t1 >= T) {
      t = T;
      finished = true;
      return;
    }
    t = t1;
    x = x0 + dir * delta;
    v = dir * std::sqrt(std::max(2 * (E - pot.U(x)), 0.0));
  }

  void stationary_leg() {
    ++stationary_visits;
    const StationaryInfo info = classify_stationary(pot, x, opt.classify);
    const bool can_branch = info.convergent_left || info.convergent_right;
    switch (opt.policy) {
      case BranchPolicy::fail_on_branch:
        if (can_branch) throw BranchingError("trajectory reached a branching stationary point");
        constant_until(T, info);
        return;
      case BranchPolicy::stay:
        constant_until(T, info);
        return;
      case BranchPolicy::depart_left:
      case BranchPolicy::depart_right: {
        const int dir = opt.policy == BranchPolicy::depart_right ? 1 : -1;
        // the dwell parametrizes the first branching only; later arrivals
        // depart immediately so branches differ by a pure time shift
        if (opt.dwell > 0 && stationary_visits == 1) {
          constant_until(t + opt.dwell, info);
          out.dwell_time += opt.dwell;
          if (finished) return;
        }
        depart(dir, info);
        return;
      }
    }
  }

  void run(double tp0, double v0) {
    E = pot.energy(tp0, v0);
    out.energy = E;
    t = 0;
    x = tp0;
    v = v0;
    next_grid = 0;
    if (v0 == 0) {
      const Interval up = pot.Uprime(x);
      const double fscale = 1 + pot.grad_at(x).norm() * pot.host_point(x).norm();
      if (up.lo <= 1e-10 * fscale && up.hi >= -1e-10 * fscale) stationary_leg();
    }
    while (!finished && t < T) {
      if (moving_leg()) stationary_leg();
    }
  }
};

}  // namespace

ExtremalTrajectory integrate(const Potential& pot, double tp0, double v0, double T,
                             const IntegrateOptions& opt) {
  if (!(T > 0)) throw std::invalid_argument("horizon must be positive");
  Engine eng(pot, opt, T);
  eng.run(tp0, v0);
  return std::move(eng.out);
}

ExtremalTrajectory branch_enumerate(const Potential& pot, double tp0, double dwell, int direction,
                                    double T, const IntegrateOptions& opt) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +1 or -1");
  if (dwell < 0) throw std::invalid_argument("dwell must be nonnegative");
  const StationaryInfo info = classify_stationary(pot, tp0, opt.classify);
  const bool ok = direction > 0 ? info.convergent_right : info.convergent_left;
  if (!ok) throw std::invalid_argument("departure direction not admissible at this stationary point");
  IntegrateOptions o = opt;
  o.policy = direction > 0 ? BranchPolicy::depart_right : BranchPolicy::depart_left;
  o.dwell = dwell;
  ExtremalTrajectory traj = integrate(pot, tp0, 0, T, o);
  traj.dwell_time = std::min(dwell, T);
  return traj;
}

void recover_control(const Potential& pot, ExtremalTrajectory& traj, const SelectionPolicy& selection) {
  for (auto& s : traj.samples) {
    if (s.energy_residual > 1e-6 * (1 + std::abs(traj.energy)))
      throw NumericError("trajectory energy residual too large for control recovery");
    if (s.label == ArcLabel::special_singular) {
      const Interval range = pot.pair().theta_primal_interval(s.theta_polar);
      s.theta = selection ? selection(s.t, range) : range.mid();
      s.u = pot.pair().primal().cos_sin(s.theta);
    } else if (s.label == ArcLabel::general_singular) {
      const StationaryInfo info = classify_stationary(pot, s.theta_polar);
      s.u = info.general_control;
      s.theta = pot.pair().primal().angle_of_point(s.u);
    } else {
      s.theta = pot.pair().theta_primal(s.theta_polar);
      s.u = pot.pair().primal().cos_sin(s.theta);
    }
  }
}

}  // namespace ctrig
