#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctrig/ode.hpp"

#include <cmath>
#include <random>

using namespace ctrig;

namespace {

ConvexBody unit_square() { return ConvexBody::polygon({{1, -1}, {1, 1}, {-1, 1}, {-1, -1}}); }
ConvexBody unit_diamond() { return ConvexBody::polygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}); }

// Potential of the left-invariant vertical flow with structure signs (a, b):
// f(p, q) = (a q^2 - b p^2) / 2 on the polar of the control set.
Potential structure_potential(const ConvexBody& control_body, int a, int b) {
  Mat2 M;
  M << -static_cast<double>(b), 0, 0, static_cast<double>(a);
  return Potential(TrigPair::build(control_body), ScalarField2::from_quadratic(M, Vec2::Zero()));
}

// Pendulum as the classic-trig sanity case: U(x) = -cos(x) on the unit disc.
Potential pendulum_potential() {
  return Potential(TrigPair::build(ConvexBody::disc(1)), ScalarField2::linear(Vec2(-1, 0)));
}

}  // namespace

TEST_CASE("potential values reproduce the piecewise-quadratic profiles") {
  // square control set, signs (-1, 1): U(x + k) = -(2x^2 - 2x + 1)/2 on [0, 1]
  {
    Potential pot = structure_potential(unit_square(), -1, 1);
    for (int i = 0; i <= 50; ++i) {
      const double x = i / 50.0;
      const double expect = -(2 * x * x - 2 * x + 1) / 2;
      CHECK(pot.U(x) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(pot.U(x + 1) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  // square control set, signs (0, 1): U(x + 2k) = -(x - 1)^2 / 2 on [0, 2]
  {
    Potential pot = structure_potential(unit_square(), 0, 1);
    for (int i = 0; i <= 50; ++i) {
      const double x = 2.0 * i / 50.0;
      CHECK(pot.U(x) == doctest::Approx(-(x - 1) * (x - 1) / 2).epsilon(1e-12));
    }
  }
  // diamond control set, signs (-1, 1): U = -(1 + x^2)/2 on [-1, 1]
  {
    Potential pot = structure_potential(unit_diamond(), -1, 1);
    for (int i = 0; i <= 50; ++i) {
      const double x = -1 + 2.0 * i / 50.0;
      CHECK(pot.U(x) == doctest::Approx(-(1 + x * x) / 2).epsilon(1e-12));
    }
  }
  // disc control set, signs (1, 0): pendulum-type sin^2 potential
  {
    Potential pot = structure_potential(ConvexBody::disc(1), 1, 0);
    for (int i = 0; i <= 50; ++i) {
      const double x = 2 * M_PI * i / 50.0;
      CHECK(pot.U(x) == doctest::Approx(0.5 * std::sin(x) * std::sin(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy operation") {
  Potential pot = pendulum_potential();
  CHECK(energy(pot, 0.3, 0.7) == doctest::Approx(0.5 * 0.49 - std::cos(0.3)).epsilon(1e-13));
  CHECK(energy(pot, 1.2, 0) == doctest::Approx(pot.U(1.2)).epsilon(1e-14));
}

TEST_CASE("derivative interval endpoints are the one-sided slopes") {
  Potential pot = structure_potential(unit_square(), 1, 0);  // U = sin°^2 / 2 on the diamond
  // on the diamond edge x in (0,1): U = x^2/2, so U' = x; at the corner x=1
  // the interval spans the adjacent one-sided slopes [-1, 1]
  CHECK(pot.Uprime_left(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pot.Uprime_right(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  const Interval at_corner = pot.Uprime(1.0);
  CHECK(at_corner.lo == doctest::Approx(-1).epsilon(1e-12));
  CHECK(at_corner.hi == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("classification across the square/diamond structure cases") {
  // square, (1,1): corner maxima entered in finite time
  {
    Potential pot = structure_potential(unit_square(), 1, 1);
    const StationaryInfo info = classify_stationary(pot, 1.0);
    CHECK(info.primary == StationaryKind::saddle_finite_time);
    CHECK(info.convergent_left);
    CHECK(info.convergent_right);
    CHECK(info.singular_general);
  }
  // square, (0,1): zero-gradient corner -> free control family
  {
    Potential pot = structure_potential(unit_square(), 0, 1);
    const StationaryInfo info = classify_stationary(pot, 1.0);
    CHECK(info.primary == StationaryKind::special_singular);
    CHECK(info.singular_special);
    CHECK(info.special_theta_range.length() > 0.5);
  }
  // square, (1,0): corner minima are zero-gradient free families, corner
  // maxima are finite-time junctions with a constant-control solution
  {
    Potential pot = structure_potential(unit_square(), 1, 0);
    CHECK(classify_stationary(pot, 0.0).primary == StationaryKind::special_singular);
    const StationaryInfo info = classify_stationary(pot, 1.0);
    CHECK(info.primary == StationaryKind::saddle_finite_time);
    CHECK(info.singular_general);
    CHECK((info.general_control - Vec2(0, 1)).norm() < 1e-10);
  }
  // diamond, (-1,1): corner minima carry the unique constant control
  {
    Potential pot = structure_potential(unit_diamond(), -1, 1);
    const StationaryInfo info = classify_stationary(pot, 1.0);
    CHECK(info.primary == StationaryKind::general_singular);
    CHECK((info.general_control - Vec2(0.5, 0.5)).norm() < 1e-10);
    // interior smooth maximum of the edge parabola: slow saddle
    CHECK(classify_stationary(pot, 0.0).primary == StationaryKind::saddle_slow);
    CHECK(classify_stationary(pot, 0.5).primary == StationaryKind::not_stationary);
  }
  // diamond, (0,1): flat stretches of the potential
  {
    Potential pot = structure_potential(unit_diamond(), 0, 1);
    const StationaryInfo info = classify_stationary(pot, 0.5);
    CHECK(info.stationary);
    CHECK(info.flat_left);
    CHECK(info.flat_right);
    CHECK(info.primary == StationaryKind::flat);
    CHECK(classify_stationary(pot, 1.0).primary == StationaryKind::general_singular);
  }
}

TEST_CASE("classification on smooth and power-type boundaries") {
  // pendulum: smooth host, strict min at 0, strict max at pi
  {
    Potential pot = pendulum_potential();
    CHECK(classify_stationary(pot, 0.0).primary == StationaryKind::center);
    const StationaryInfo info = classify_stationary(pot, M_PI);
    CHECK(info.primary == StationaryKind::saddle_slow);
    CHECK(!info.convergent_left);
    CHECK(!info.convergent_right);
  }
  // control set lp(3): polar exponent 1.5 < 2; with a = 1 the axis maxima
  // are entered in finite time
  {
    Potential pot = structure_potential(ConvexBody::lp_ball(3), 1, 1);
    const StationaryInfo info = classify_stationary(pot, pot.period() / 4);  // top axis point
    CHECK(info.primary == StationaryKind::saddle_finite_time);
  }
  // with a = 0 the quadratic term dominates at the same point: slow
  {
    Potential pot = structure_potential(ConvexBody::lp_ball(3), 0, 1);
    const StationaryInfo info = classify_stationary(pot, pot.period() / 4);
    CHECK(info.primary == StationaryKind::saddle_slow);
  }
  // with a = -1 the maxima sit at the smooth diagonal: slow
  {
    Potential pot = structure_potential(ConvexBody::lp_ball(3), -1, 1);
    const StationaryInfo info = classify_stationary(pot, pot.period() / 8);
    CHECK(info.stationary);
    CHECK(info.primary == StationaryKind::saddle_slow);
  }
  // polar exponent >= 2 (control set lp(1.5)): every stationary max is slow
  {
    Potential pot = structure_potential(ConvexBody::lp_ball(1.5), 1, 1);
    const StationaryInfo info = classify_stationary(pot, pot.period() / 4);
    CHECK(info.primary == StationaryKind::saddle_slow);
  }
}

TEST_CASE("closed-form strips: hyperbolic flow on the square case (-1,1)") {
  Potential pot = structure_potential(unit_square(), -1, 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.15, 0.85), uv(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const double x0 = ux(rng), v0 = uv(rng);
    IntegrateOptions opt;
    opt.dt_out = 0.002;
    auto traj = integrate(pot, x0, v0, 3.0, opt);
    const double c1 = x0 - 0.5, c2 = v0 / std::sqrt(2.0);
    double worst = 0;
    for (const auto& s : traj.samples) {
      if (s.theta_polar <= 1e-9 || s.theta_polar >= 1 - 1e-9) break;  // left the strip
      const double expect =
          c1 * std::cosh(std::sqrt(2.0) * s.t) + c2 * std::sinh(std::sqrt(2.0) * s.t) + 0.5;
      worst = std::max(worst, std::abs(s.theta_polar - expect));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("closed-form strips: circular flow on the diamond case (1,-1)") {
  Potential pot = structure_potential(unit_diamond(), 1, -1);
  const double x0 = 0.2, v0 = 0.3;
  IntegrateOptions opt;
  opt.dt_out = 0.002;
  auto traj = integrate(pot, x0, v0, 2.0, opt);
  double worst = 0;
  for (const auto& s : traj.samples) {
    if (std::abs(s.theta_polar) >= 1 - 1e-9) break;
    const double expect = x0 * std::cos(s.t) + v0 * std::sin(s.t);
    worst = std::max(worst, std::abs(s.theta_polar - expect));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("pendulum: energy conservation and oracle comparison") {
  Potential pot = pendulum_potential();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-3, 3), uv(0.3, 2.5);
  for (int trial = 0; trial < 5; ++trial) {
    const double x0 = ux(rng), v0 = uv(rng);
    IntegrateOptions opt;
    opt.dt_out = 0.01;
    auto traj = integrate(pot, x0, v0, 20.0, opt);
    double drift = 0;
    for (const auto& s : traj.samples) drift = std::max(drift, s.energy_residual);
    CHECK(drift < 1e-8 * (1 + std::abs(traj.energy)) * 20);

    // independent fixed-step RK4 oracle of the classic pendulum
    double x = x0, v = v0;
    const double h = 1e-4;
    const int per_out = 100;  // h * per_out = dt_out
    size_t idx = 0;
    double worst = 0;
    for (int step = 0; step <= 200000; ++step) {
      if (step % per_out == 0 && idx < traj.samples.size()) {
        worst = std::max(worst, std::abs(traj.samples[idx].theta_polar - x));
        ++idx;
      }
      auto acc = [](double xx) { return -std::sin(xx); };
      const double k1x = v, k1v = acc(x);
      const double k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x);
      const double k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x);
      const double k4x = v + h * k3v, k4v = acc(x + h * k3x);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("stationary start at a center stays constant") {
  Potential pot = pendulum_potential();
  auto traj = integrate(pot, 0.0, 0.0, 5.0);
  REQUIRE(!traj.samples.empty());
  for (const auto& s : traj.samples) {
    CHECK(s.theta_polar == 0.0);
    CHECK(s.v == 0.0);
    CHECK(s.label == ArcLabel::bang);
  }
}

TEST_CASE("uniqueness promise: moving starts never branch") {
  // strictly convex control set with C^2 polar boundary
  Potential pot = structure_potential(ConvexBody::lp_ball(1.5), 1, 1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0, pot.period());
  std::uniform_real_distribution<double> uv(0.05, 1.5);
  for (int trial = 0; trial < 25; ++trial) {
    IntegrateOptions opt;
    opt.policy = BranchPolicy::fail_on_branch;
    opt.dt_out = 0.05;
    CHECK_NOTHROW(integrate(pot, ux(rng), (trial % 2 ? 1 : -1) * uv(rng), 10.0, opt));
  }
}

TEST_CASE("separatrix reaching a corner junction branches") {
  // square control set, signs (1,0): U = x^2/2 on [0,1], corner max at 1
  Potential pot = structure_potential(unit_square(), 1, 0);
  const double E = pot.U(1.0);
  const double x0 = 0.5;
  const double v0 = std::sqrt(2 * (E - pot.U(x0)));
  IntegrateOptions opt;
  opt.policy = BranchPolicy::fail_on_branch;
  CHECK_THROWS_AS(integrate(pot, x0, v0, 5.0, opt), BranchingError);

  // under "stay" the trajectory dwells there with the constant-control label
  IntegrateOptions stay;
  auto traj = integrate(pot, x0, v0, 5.0, stay);
  bool saw_dwell = false;
  for (const auto& s : traj.samples) {
    if (s.t > 2.0) {
      saw_dwell = true;
      CHECK(s.theta_polar == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(s.label == ArcLabel::general_singular);
      CHECK((s.u - Vec2(0, 1)).norm() < 1e-9);
    }
  }
  CHECK(saw_dwell);
}

TEST_CASE("branch enumeration at a finite-time junction") {
  // square control set, signs (1,0), junction at x = 1 with E = 1/2;
  // departing right the exact branch is x(t) = 2 - cos(t - t_plus)
  Potential pot = structure_potential(unit_square(), 1, 0);
  std::vector<double> dwells = {0.0, 0.5, 1.0};
  std::vector<ExtremalTrajectory> trajs;
  IntegrateOptions opt;
  opt.dt_out = 0.01;
  for (double d : dwells) trajs.push_back(branch_enumerate(pot, 1.0, d, +1, 4.0, opt));

  for (size_t k = 0; k < trajs.size(); ++k) {
    const auto& tr = trajs[k];
    CHECK(tr.branched);
    CHECK(tr.departure_sign == 1);
    CHECK(tr.tau_lower_bound > 0);
    double worst_quad = 0, worst_exact = 0;
    for (const auto& s : tr.samples) {
      if (s.t <= dwells[k] + 1e-12) {
        CHECK(s.theta_polar == doctest::Approx(1.0).epsilon(1e-10));
        continue;
      }
      if (s.theta_polar >= 3 - 1e-9) break;  // next junction
      const double ti = travel_time(pot, tr.energy, 1.0, s.theta_polar);
      worst_quad = std::max(worst_quad, std::abs(ti - (s.t - dwells[k])));
      const double expect = 2 - std::cos(s.t - dwells[k]);
      worst_exact = std::max(worst_exact, std::abs(s.theta_polar - expect));
    }
    CHECK(worst_quad < 1e-7);
    CHECK(worst_exact < 1e-7);
  }
  // time-shift alignment: the three branches are shifts of one another
  for (size_t k = 1; k < trajs.size(); ++k) {
    const double shift = dwells[k] - dwells[0];
    double worst = 0;
    for (const auto& s : trajs[k].samples) {
      if (s.t <= dwells[k] || s.t - shift > 4.0 - 1e-9) continue;
      const size_t idx = static_cast<size_t>(std::llround((s.t - shift) / 0.01));
      if (idx >= trajs[0].samples.size()) continue;
      worst = std::max(worst, std::abs(trajs[0].samples[idx].theta_polar - s.theta_polar));
    }
    CHECK(worst < 1e-7);
  }
  // dwell zero reduces to plain integration with the same initial data
  IntegrateOptions right;
  right.policy = BranchPolicy::depart_right;
  right.dt_out = 0.01;
  auto plain = integrate(pot, 1.0, 0.0, 4.0, right);
  double worst = 0;
  for (size_t i = 0; i < std::min(plain.samples.size(), trajs[0].samples.size()); ++i)
    worst = std::max(worst, std::abs(plain.samples[i].theta_polar - trajs[0].samples[i].theta_polar));
  CHECK(worst < 1e-10);

  CHECK_THROWS_AS(branch_enumerate(pendulum_potential(), M_PI, 0.0, +1, 2.0), std::invalid_argument);
}

TEST_CASE("quadrature consistency on monotone segments") {
  Potential pot = structure_potential(ConvexBody::lp_ball(3), 1, 1);
  IntegrateOptions opt;
  opt.dt_out = 0.01;
  auto traj = integrate(pot, 0.1, 1.1, 3.0, opt);
  double worst = 0;
  int checked = 0;
  for (size_t i = 10; i + 10 < traj.samples.size(); i += 25) {
    const auto& s0 = traj.samples[i];
    const auto& s1 = traj.samples[i + 10];
    if (s0.v <= 0.05 || s1.v <= 0.05) continue;
    const double ti = travel_time(pot, traj.energy, s0.theta_polar, s1.theta_polar);
    worst = std::max(worst, std::abs(ti - (s1.t - s0.t)));
    ++checked;
  }
  CHECK(checked > 0);
  CHECK(worst < 1e-7);
}

TEST_CASE("control recovery: self-dual disc and acceleration identity") {
  // disc: theta(t) = theta_polar(t)
  {
    Potential pot = pendulum_potential();
    IntegrateOptions opt;
    opt.dt_out = 0.01;
    auto traj = integrate(pot, 0.4, 1.3, 5.0, opt);
    for (const auto& s : traj.samples) {
      const double diff = std::remainder(s.theta - s.theta_polar, 2 * M_PI);
      CHECK(std::abs(diff) < 1e-9);
    }
  }
  // second finite difference of theta_polar equals f_p sin - f_q cos on
  // moving arcs
  {
    Potential pot = structure_potential(ConvexBody::lp_ball(1.5), 1, 1);
    IntegrateOptions opt;
    opt.dt_out = 0.002;
    auto traj = integrate(pot, 0.3, 0.9, 2.0, opt);
    double worst = 0;
    for (size_t i = 1; i + 1 < traj.samples.size(); ++i) {
      const auto& sm = traj.samples[i - 1];
      const auto& s = traj.samples[i];
      const auto& sp = traj.samples[i + 1];
      if (std::abs(s.v) < 0.1) continue;
      const double acc = (sp.theta_polar - 2 * s.theta_polar + sm.theta_polar) / (0.002 * 0.002);
      const Vec2 df = pot.grad_at(s.theta_polar);
      const double rhs = df.x() * s.u.y() - df.y() * s.u.x();  // f_p sin - f_q cos
      worst = std::max(worst, std::abs(acc - rhs));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("recover_control with a custom selection on free-family arcs") {
  Potential pot = structure_potential(unit_square(), 0, 1);  // special at x = 1
  IntegrateOptions opt;
  opt.dt_out = 0.05;
  auto traj = integrate(pot, 1.0, 0.0, 2.0, opt);
  REQUIRE(!traj.samples.empty());
  for (const auto& s : traj.samples) CHECK(s.label == ArcLabel::special_singular);
  const Interval range = pot.pair().theta_primal_interval(1.0);
  for (const auto& s : traj.samples) CHECK(s.theta == doctest::Approx(range.mid()).epsilon(1e-12));
  recover_control(pot, traj, [](double, const Interval& r) { return r.lo; });
  for (const auto& s : traj.samples) CHECK(s.theta == doctest::Approx(range.lo).epsilon(1e-12));
}

TEST_CASE("travel_time handles the inverse-square-root endpoint") {
  // harmonic strip of the diamond case (1,-1): U = (1+x^2)/2 on [-1,1];
  // from rest at amplitude x0 the time to reach x is acos(x/x0)
  Potential pot = structure_potential(unit_diamond(), 1, -1);
  const double amp = 0.8;
  const double E = pot.U(amp);
  const double t = travel_time(pot, E, amp, 0.3);
  CHECK(std::abs(t) == doctest::Approx(std::acos(0.3 / amp)).epsilon(1e-9));
}
