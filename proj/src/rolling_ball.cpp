#include "ctrig/rolling_ball.hpp"

#include <cmath>

namespace ctrig::rolling_ball {

namespace {

using Quat = Eigen::Vector4d;  // (w, x, y, z)

Quat quat_mul(const Quat& a, const Quat& b) {
  return Quat(a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3),
              a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2),
              a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1),
              a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0));
}

Quat quat_exp_pure(const Vec2& ij) {  // exp of (0, ij.x, ij.y, 0)
  const double n = ij.norm();
  if (n < 1e-300) return Quat(1, 0, 0, 0);
  const double s = std::sin(n) / n;
  return Quat(std::cos(n), s * ij.x(), s * ij.y(), 0);
}

}  // namespace

BallSystem::BallSystem(BallSpec spec)
    : spec_(std::move(spec)), pot_([&] {
        if (!(spec_.H > 0)) throw std::invalid_argument("Hamiltonian level must be positive");
        // f(P) = |P|^2/2 - (p/H, q/H) . P : half squared distance to (p/H, q/H)
        // up to a constant
        return Potential(TrigPair::build(spec_.body, spec_.resolution),
                         ScalarField2::from_quadratic(Mat2::Identity(),
                                                      Vec2(-spec_.p / spec_.H, -spec_.q / spec_.H)));
      }()) {}

BallTrace ball_integrate(const BallSystem& sys, double theta_polar0, double h30, double T,
                         const IntegrateOptions& opt) {
  BallTrace out;
  const double H = sys.spec().H;
  out.vertical = integrate(sys.vertical(), theta_polar0, h30 / H, T, opt);
  out.energy_full = H * out.vertical.energy;
  out.samples.reserve(out.vertical.samples.size());
  Vec2 xy = Vec2::Zero();
  Quat z(1, 0, 0, 0);
  for (size_t i = 0; i < out.vertical.samples.size(); ++i) {
    const auto& s = out.vertical.samples[i];
    if (i > 0) {
      const auto& sp = out.vertical.samples[i - 1];
      const double dt = s.t - sp.t;
      const Vec2 u = 0.5 * (sp.u + s.u);
      xy += dt * u;
      // dz/dt = z * (u2 i - u1 j) / 2 with the control frozen over the step
      z = quat_mul(z, quat_exp_pure(0.5 * dt * Vec2(u.y(), -u.x())));
      z /= z.norm();
    }
    BallSample bs;
    bs.t = s.t;
    bs.xy = xy;
    bs.orientation = z;
    bs.theta_polar = s.theta_polar;
    bs.v = s.v;
    bs.theta = s.theta;
    bs.u = s.u;
    bs.label = s.label;
    out.samples.push_back(bs);
  }
  return out;
}

BallTrace ball_abnormal(const ConvexBody& body, double p, double q, double T, double dt) {
  if (p == 0 && q == 0) throw std::invalid_argument("abnormal extremal needs a nonzero direction");
  BallTrace out;
  const Vec2 dir(p, q);
  const Vec2 u = boundary_point(body, std::atan2(q, p));  // support point of (p, q)
  (void)dir;
  Quat z(1, 0, 0, 0);
  const int n = static_cast<int>(std::ceil(T / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(T, i * dt);
    BallSample bs;
    bs.t = t;
    bs.xy = t * u;
    if (i > 0) {
      const double step = t - out.samples.back().t;
      z = quat_mul(z, quat_exp_pure(0.5 * step * Vec2(u.y(), -u.x())));
      z /= z.norm();
    }
    bs.orientation = z;
    bs.u = u;
    out.samples.push_back(bs);
  }
  return out;
}

}  // namespace ctrig::rolling_ball
