#include "ctrig/plane_dynamics.hpp"

#include "ctrig/detail/rk45.hpp"

#include <cmath>

namespace ctrig::plane_dyn {

namespace {

void append_sample(Trace& out, const TrigPair& pair, double t, const Vec2& pos, const Vec2& vel,
                   double tp, double R) {
  Sample s;
  s.t = t;
  s.position = pos;
  s.velocity = vel;
  s.theta_polar = tp;
  s.R = R;
  s.q = R * pair.polar().cos_sin(tp);
  s.theta = pair.theta_primal(tp);
  s.u = pair.primal().cos_sin(s.theta);
  out.samples.push_back(s);
}

}  // namespace

Trace plane_dyn_extremal(const PlaneSpec& spec, const Vec2& x0, const Vec2& y0, const Vec2& p,
                         const Vec2& q0, double T, double dt) {
  const TrigPair pair = TrigPair::build(spec.body, spec.resolution);
  Trace out;
  out.p = p;
  out.E = cross2(p, q0);
  const double scale = std::max({1.0, p.norm(), q0.norm()});

  if (std::abs(out.E) <= 1e-14 * scale * scale) {
    out.E = 0;
    if (p.norm() <= 1e-14 * scale) {
      // constant adjoint: constant support control
      if (q0.norm() == 0) throw std::invalid_argument("adjoint pair cannot vanish identically");
      const auto [R0, tp] = pair.polar_decompose(q0);
      const int n = static_cast<int>(std::ceil(T / dt));
      const double th = pair.theta_primal(tp);
      const Vec2 u = pair.primal().cos_sin(th);
      for (int i = 0; i <= n; ++i) {
        const double t = std::min(T, i * dt);
        append_sample(out, pair, t, x0 + t * y0 + 0.5 * t * t * u, y0 + t * u, tp, R0);
      }
      return out;
    }
    // q stays parallel to p and crosses zero once: the control takes two values
    out.two_valued = true;
    out.t_split = q0.dot(p) / p.squaredNorm();
    const int n = static_cast<int>(std::ceil(T / dt));
    Vec2 pos = x0, vel = y0;
    double prev_t = 0;
    for (int i = 0; i <= n; ++i) {
      const double t = std::min(T, i * dt);
      const Vec2 q = q0 - t * p;
      const Vec2 dirv = t < out.t_split ? q0 : Vec2(-q0);
      Vec2 usel;
      double tp, R;
      if (dirv.norm() < 1e-14 * scale) {
        // starting exactly at the split: use the outgoing direction -p side
        const auto [Rr, tpp] = pair.polar_decompose(-p);
        tp = tpp;
        R = q.norm() == 0 ? 0 : q.norm() / pair.polar().cos_sin(tpp).norm();
        usel = pair.primal().cos_sin(pair.theta_primal(tpp));
      } else {
        const auto [Rr, tpp] = pair.polar_decompose(dirv);
        tp = tpp;
        R = q.norm() / (pair.polar().cos_sin(tpp).norm());
        usel = pair.primal().cos_sin(pair.theta_primal(tpp));
      }
      if (i > 0) {
        const double h = t - prev_t;
        pos += h * vel + 0.5 * h * h * usel;
        vel += h * usel;
      }
      append_sample(out, pair, t, pos, vel, tp, R);
      out.samples.back().q = q;  // exact affine adjoint
      prev_t = t;
    }
    return out;
  }

  // generic level: the polar angle of q obeys E * dtheta° = (p x Q)^2 with
  // Q the unit polar point
  const auto [R0, tp0] = pair.polar_decompose(q0);
  auto rhs = [&](double tp) {
    const Vec2 Q = pair.polar().cos_sin(tp);
    const double c = cross2(p, Q);  // p1 sin° - p2 cos°
    return c * c / out.E;
  };
  Vec2 pos = x0, vel = y0;
  double prev_t = 0;
  Vec2 prev_u = Vec2::Zero();
  bool have_prev = false;
  detail::rk45_scalar_drive(rhs, tp0, T, dt, [&](double t, double tp) {
    const Vec2 Q = pair.polar().cos_sin(tp);
    const double denom = cross2(p, Q);
    const double R = out.E / denom;
    const double th = pair.theta_primal(tp);
    const Vec2 u = pair.primal().cos_sin(th);
    if (have_prev) {
      const double h = t - prev_t;
      // trapezoid in the control: second order in the grid step
      pos += h * vel + h * h * (prev_u / 3 + u / 6);
      vel += 0.5 * h * (prev_u + u);
    }
    append_sample(out, pair, t, pos, vel, tp, R);
    prev_t = t;
    prev_u = u;
    have_prev = true;
  });
  return out;
}

}  // namespace ctrig::plane_dyn
