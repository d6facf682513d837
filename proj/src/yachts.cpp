#include "ctrig/yachts.hpp"

#include <algorithm>
#include <cmath>

namespace ctrig::yachts {

namespace {

// Angles in [0, period) where the boundary x-coordinate crosses `level`.
std::vector<double> level_crossings(const TrigTable& table, double level) {
  const double P = table.period();
  const int n = 4096;
  std::vector<double> out;
  double prev = table.cos(0) - level;
  for (int i = 1; i <= n; ++i) {
    const double th = P * i / n;
    const double cur = table.cos(th) - level;
    if ((prev < 0) != (cur < 0)) {
      double lo = P * (i - 1) / n, hi = th, flo = prev;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = table.cos(mid) - level;
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double cyc_ahead(double from, double to, double period, int dir) {
  // distance from `from` to `to` moving in direction dir, in (0, period]
  double d = dir > 0 ? to - from : from - to;
  d = std::fmod(d, period);
  if (d <= 1e-12) d += period;
  return d;
}

Mat2 heading_frame(double alpha) { return rotation2(alpha); }

}  // namespace

std::string to_string(Problem p) {
  switch (p) {
    case Problem::elastica: return "elastica";
    case Problem::markov_dubins: return "markov_dubins";
    case Problem::reeds_shepp: return "reeds_shepp";
    case Problem::sr_se2: return "sr_se2";
  }
  return "?";
}

Reduction yacht_reduce(const YachtSpec& spec) {
  const double n2 = spec.psi1 * spec.psi1 + spec.psi2 * spec.psi2;
  if (n2 == 0) throw std::invalid_argument("zero adjoint pair: use the degenerate family");
  const double alpha = std::atan2(spec.psi2, spec.psi1);
  Reduction red{alpha, 0, 0, TrigPair::build(rotated(spec.body, -alpha), spec.resolution)};
  const auto original = TrigTable::build(spec.body, spec.resolution);
  const auto original_polar = TrigTable::build(polar(spec.body), spec.resolution);
  red.alpha_tilde = original->angle_at_direction(alpha);
  red.alpha_tilde_polar = original_polar->angle_at_direction(alpha);
  return red;
}

Classification yacht_classify(const YachtSpec& spec, double H) {
  const Reduction red = yacht_reduce(spec);
  const TrigPair& pair = red.rotated;
  Classification cls;
  const auto smax = pair.support_set(Vec2(1, 0));
  const auto smin = pair.support_set(Vec2(-1, 0));
  cls.m2 = smax.value;
  cls.m1 = -smin.value;
  cls.theta_max_set = smax.theta;
  cls.theta_min_set = smin.theta;
  const double P = pair.primal().period();
  cls.max_is_edge = cls.theta_max_set.length() > 1e-9 * P;
  cls.min_is_edge = cls.theta_min_set.length() > 1e-9 * P;
  cls.theta5 = pair.primal().angle_at_direction(M_PI / 2);
  cls.theta6 = pair.primal().angle_at_direction(3 * M_PI / 2);
  if (H > 0) {
    cls.cross_pos = level_crossings(pair.primal(), H);
    cls.cross_neg = level_crossings(pair.primal(), -H);
  }
  const double tol = 1e-9 * (1 + std::abs(cls.m1) + std::abs(cls.m2));
  auto near = [&](double x, double y) { return std::abs(x - y) <= tol; };
  switch (spec.problem) {
    case Problem::elastica:
    case Problem::markov_dubins:
      if (H < cls.m1 - tol)
        cls.case_id = 0;
      else if (near(H, cls.m1))
        cls.case_id = 1;
      else if (H < cls.m2 - tol)
        cls.case_id = 2;
      else if (near(H, cls.m2))
        cls.case_id = 3;
      else
        cls.case_id = 4;
      break;
    case Problem::reeds_shepp: {
      const double lo = std::min(std::abs(cls.m1), cls.m2);
      const double hi = std::max(std::abs(cls.m1), cls.m2);
      if (near(H, 0))
        cls.case_id = 1;
      else if (H < lo - tol)
        cls.case_id = 2;
      else if (near(H, lo))
        cls.case_id = 3;
      else if (H < hi - tol)
        cls.case_id = 4;
      else if (near(H, hi))
        cls.case_id = 5;
      else
        cls.case_id = 6;
      break;
    }
    case Problem::sr_se2: {
      const double lo = std::min(cls.m1 * cls.m1, cls.m2 * cls.m2);
      const double hi = std::max(cls.m1 * cls.m1, cls.m2 * cls.m2);
      if (near(H, 0))
        cls.case_id = 1;
      else if (H < lo - tol)
        cls.case_id = 2;
      else if (near(H, lo))
        cls.case_id = 3;
      else if (H < hi - tol)
        cls.case_id = 4;
      else if (near(H, hi))
        cls.case_id = 5;
      else
        cls.case_id = 6;
      break;
    }
  }
  return cls;
}

namespace {

// Common frame for the second-order problems (bending energy / sub-Riemannian):
// run the inclusion on the rotated body's own angle and integrate the planar
// state by Simpson on the output grid.
YachtTrajectory second_order_extremal(const YachtSpec& spec, const ScalarField2& field,
                                      double theta_tilde0, double dtheta0, double T, double dt,
                                      bool u1_is_cos) {
  const Reduction red = yacht_reduce(spec);
  // the dynamic angle lives on the rotated body itself: swap the pair roles
  Potential pot(red.rotated.swapped(), field);
  IntegrateOptions opt;
  opt.dt_out = dt;
  auto traj = integrate(pot, theta_tilde0, dtheta0, T, opt);

  YachtTrajectory out;
  out.cls = yacht_classify(spec, traj.energy);
  out.hamiltonian = traj.energy;
  const Mat2 frame = heading_frame(red.alpha);
  out.t.reserve(traj.samples.size());
  Vec2 xy = Vec2::Zero();
  Vec2 prev_vel = Vec2::Zero();
  bool have_prev = false;
  for (const auto& s : traj.samples) {
    const Vec2 dir = red.rotated.primal().cos_sin(s.theta_polar);
    const double u1 = u1_is_cos ? dir.x() : 1.0;
    const Vec2 vel = u1 * (frame * dir);
    if (have_prev) xy += 0.5 * (prev_vel + vel) * dt;
    prev_vel = vel;
    have_prev = true;
    out.t.push_back(s.t);
    out.xy.push_back(xy);
    out.theta_tilde.push_back(s.theta_polar);
    out.heading.push_back(s.theta_polar + red.alpha_tilde);
    out.u.emplace_back(u1, s.v);
  }
  return out;
}

}  // namespace

YachtTrajectory elastica_extremal(const YachtSpec& spec, double theta_tilde0, double dtheta0, double T,
                                  double dt) {
  return second_order_extremal(spec, ScalarField2::linear(Vec2(1, 0)), theta_tilde0, dtheta0, T, dt,
                               /*u1_is_cos=*/false);
}

YachtTrajectory sr_extremal(const YachtSpec& spec, double theta_tilde0, double dtheta0, double T,
                            double dt) {
  Mat2 M;
  M << 1, 0, 0, 0;
  return second_order_extremal(spec, ScalarField2::from_quadratic(M, Vec2::Zero()), theta_tilde0,
                               dtheta0, T, dt, /*u1_is_cos=*/true);
}

namespace {

// Piecewise-constant-turn march shared by the bounded-turn problems.
// `u1_of(theta)` gives the drive sign; events are angle sets where the turn
// or the drive flips. Positions integrate exactly from the table.
struct March {
  const YachtSpec& spec;
  const Reduction red;
  const double P;
  YachtTrajectory out;
  double t = 0;
  double theta;  // rotated-body angle
  int u2;
  Vec2 xy = Vec2::Zero();
  double dt;
  double next_grid = 0;

  March(const YachtSpec& s, double theta0, int u2_0, double dt_)
      : spec(s), red(yacht_reduce(s)), P(red.rotated.primal().period()), theta(theta0), u2(u2_0), dt(dt_) {}

  double u1_at(double th) const {
    if (spec.problem == Problem::reeds_shepp) {
      const double c = red.rotated.primal().cos(th);
      return c >= 0 ? 1.0 : -1.0;
    }
    return 1.0;
  }

  Vec2 velocity(double th) const {
    return u1_at(th) * (heading_frame(red.alpha) * red.rotated.primal().cos_sin(th));
  }

  // advance along a straight segment of the angle (theta moves at rate u2)
  void advance_to(double t_end, const std::string& /*label*/) {
    while (next_grid <= t_end + 1e-12) {
      const double th = theta + u2 * (next_grid - t);
      // exact displacement over [t, next_grid]
      const Vec2 disp = segment_displacement(theta, th);
      out.t.push_back(next_grid);
      out.xy.push_back(xy + disp);
      out.theta_tilde.push_back(th);
      out.heading.push_back(th + red.alpha_tilde);
      out.u.emplace_back(u1_at(th), u2);
      next_grid += dt;
    }
    const double th_end = theta + u2 * (t_end - t);
    xy += segment_displacement(theta, th_end);
    theta = th_end;
    t = t_end;
  }

  // displacement while theta sweeps [a, b] at unit rate (sign via u2), with
  // the drive sign constant over the sweep
  Vec2 segment_displacement(double a, double b) const {
    // integral of u1 * R cos_sin over theta; u1 may flip at cos = 0 angles,
    // but event marching splits segments there, so u1 is constant here
    const Vec2 raw = red.rotated.primal().integral_cos_sin(std::min(a, b), std::max(a, b));
    const double sgn = (b >= a ? 1.0 : -1.0) * u1_at(0.5 * (a + b));
    return sgn * (heading_frame(red.alpha) * raw);
  }

  void record_switch(const Vec2& before, const Vec2& after, const std::string& label) {
    out.switches.push_back({t, before, after, label});
  }
};

}  // namespace

YachtTrajectory dubins_extremal(const YachtSpec& spec, double H, double theta_tilde0, int u2_sign0,
                                double T, double dt) {
  if (u2_sign0 != 1 && u2_sign0 != -1) throw std::invalid_argument("turn sign must be +-1");
  const Classification cls = yacht_classify(spec, H);
  if (cls.case_id == 0) throw std::invalid_argument("no extremal below the minimum of the drive");
  March m(spec, theta_tilde0, u2_sign0, dt);
  m.out.cls = cls;
  m.out.hamiltonian = H;
  if (cls.case_id == 1 || cls.case_id == 3) {
    // level set pinned to an extremum of the drive: canonical representative
    // keeps the heading constant
    m.u2 = 0;
    m.advance_to(T, "pinned");
    return std::move(m.out);
  }
  if (cls.case_id == 4) {
    m.advance_to(T, "free turn");
    return std::move(m.out);
  }
  // case 2: turn flips at the crossings of the drive level H around the
  // minimum set
  const auto& cross = cls.cross_pos;
  if (cross.size() < 2) throw NumericError("level crossings not found");
  // the band of admissible angles is the component of {cos <= H} containing
  // the minimum set
  const double mid = cls.theta_min_set.mid();
  double cl = 0, cu = 0;
  {
    double best = 1e300;
    for (double c : cross) {
      const double d = cyc_ahead(c, mid, m.P, +1);
      if (d < best) {
        best = d;
        cl = c;
      }
    }
    best = 1e300;
    for (double c : cross) {
      const double d = cyc_ahead(mid, c, m.P, +1);
      if (d < best) {
        best = d;
        cu = c;
      }
    }
  }
  // place theta0 inside the band
  while (m.theta < cl - 1e-12) m.theta += m.P;
  while (m.theta > cl + m.P + 1e-12) m.theta -= m.P;
  double band_lo = cl, band_hi = cl + cyc_ahead(cl, cu, m.P, +1);
  if (m.theta > band_hi + 1e-9) throw std::invalid_argument("initial heading outside the admissible band");
  while (m.t < T) {
    const double target = m.u2 > 0 ? band_hi : band_lo;
    const double dist = std::abs(target - m.theta);
    const double t_hit = m.t + dist;  // |dtheta/dt| = 1
    if (t_hit >= T) {
      m.advance_to(T, "turn");
      break;
    }
    m.advance_to(t_hit, "turn");
    const Vec2 before(1, m.u2);
    m.u2 = -m.u2;
    m.record_switch(before, Vec2(1, m.u2), "turn flip");
  }
  return std::move(m.out);
}

YachtTrajectory dubins_degenerate(const YachtSpec& spec, int u2_sign, double theta0, double T,
                                  double dt) {
  if (u2_sign != 1 && u2_sign != -1) throw std::invalid_argument("turn sign must be +-1");
  const auto table = TrigTable::build(spec.body, spec.resolution);
  YachtTrajectory out;
  out.hamiltonian = 0;
  const int n = static_cast<int>(std::ceil(T / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(T, i * dt);
    const double th = theta0 + u2_sign * t;
    out.t.push_back(t);
    out.heading.push_back(th);
    out.theta_tilde.push_back(th);
    out.u.emplace_back(1.0, u2_sign);
    // x(t) = integral of the boundary point over the swept angle range
    out.xy.push_back(u2_sign > 0 ? table->integral_cos_sin(theta0, th)
                                 : table->integral_cos_sin(th, theta0));
  }
  return out;
}

YachtTrajectory reeds_shepp_extremal(const YachtSpec& spec, double H, double theta_tilde0, int u2_sign0,
                                     double T, double dt) {
  if (u2_sign0 != 1 && u2_sign0 != -1) throw std::invalid_argument("turn sign must be +-1");
  const Classification cls = yacht_classify(spec, H);
  March m(spec, theta_tilde0, u2_sign0, dt);
  m.out.cls = cls;
  m.out.hamiltonian = H;
  if (cls.case_id == 1) {
    m.u2 = 0;
    m.advance_to(T, "pinned");
    return std::move(m.out);
  }
  // event angles: turn flips where |cos| rises through H; drive flips at the
  // vertical-axis angles
  std::vector<std::pair<double, int>> events;  // (angle, kind: 0 drive flip, 1 turn flip)
  auto beyond_exceeds = [&](double c, int dir) {
    const double probe = c + dir * 1e-7 * m.P;
    return std::abs(m.red.rotated.primal().cos(probe)) > H;
  };
  for (double c : cls.cross_pos) events.emplace_back(c, 1);
  for (double c : cls.cross_neg) events.emplace_back(c, 1);
  events.emplace_back(cls.theta5, 0);
  events.emplace_back(cls.theta6, 0);
  std::sort(events.begin(), events.end());
  while (m.t < T) {
    // nearest event strictly ahead in the current turn direction
    double best = 1e300;
    int kind = -1;
    double target = 0;
    for (const auto& [ang, k] : events) {
      const double d = cyc_ahead(std::fmod(m.theta, m.P) + (std::fmod(m.theta, m.P) < 0 ? m.P : 0), ang,
                                 m.P, m.u2);
      if (k == 1 && !beyond_exceeds(ang, m.u2)) continue;  // tangency: passes through
      if (d < best) {
        best = d;
        kind = k;
        target = ang;
      }
    }
    (void)target;
    if (kind < 0 || m.t + best >= T) {
      m.advance_to(T, "run");
      break;
    }
    const double th_before = m.theta + m.u2 * best;
    m.advance_to(m.t + best, "run");
    const Vec2 before(m.u1_at(th_before - m.u2 * 1e-9), m.u2);
    if (kind == 1) {
      m.u2 = -m.u2;
      m.record_switch(before, Vec2(m.u1_at(m.theta - m.u2 * 1e-9), m.u2), "turn flip");
    } else {
      m.record_switch(before, Vec2(m.u1_at(m.theta + m.u2 * 1e-9), m.u2), "drive flip");
    }
  }
  return std::move(m.out);
}

}  // namespace ctrig::yachts
