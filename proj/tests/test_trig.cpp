#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctrig/trig.hpp"

#include <cmath>
#include <random>

using namespace ctrig;

namespace {

ConvexBody unit_square() { return ConvexBody::polygon({{1, -1}, {1, 1}, {-1, 1}, {-1, -1}}); }
ConvexBody unit_diamond() { return ConvexBody::polygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}); }

std::vector<ConvexBody> sample_bodies() {
  return {unit_square(),          unit_diamond(),           ConvexBody::disc(1),
          ConvexBody::ellipse(2, 1), ConvexBody::lp_ball(3), ConvexBody::lp_ball(1.5),
          ConvexBody::cut_disc(1, 0.6)};
}

// Shoelace sector area of a densely sampled boundary from angle 0 to theta --
// an oracle for the sector-area definition that bypasses the table's own
// area accumulation.
double sector_area_oracle(const TrigTable& t, double theta, int n = 20000) {
  double acc = 0;
  Vec2 prev = t.cos_sin(0);
  for (int i = 1; i <= n; ++i) {
    const Vec2 cur = t.cos_sin(theta * i / n);
    acc += 0.5 * cross2(prev, cur);
    prev = cur;
  }
  return acc;
}

}  // namespace

TEST_CASE("disc table reproduces classic trig") {
  auto t = TrigTable::build(ConvexBody::disc(1));
  CHECK(t->period() == doctest::Approx(2 * M_PI).epsilon(1e-14));
  for (int i = 0; i < 1000; ++i) {
    const double th = -8 + 16.0 * i / 1000;
    const Vec2 p = t->cos_sin(th);
    CHECK(p.x() == doctest::Approx(std::cos(th)).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(std::sin(th)).epsilon(1e-12));
  }
}

TEST_CASE("square and diamond tables: known values") {
  auto sq = TrigTable::build(unit_square());
  CHECK(sq->period() == doctest::Approx(8).epsilon(1e-14));
  CHECK((sq->cos_sin(0) - Vec2(1, 0)).norm() < 1e-14);
  CHECK((sq->cos_sin(1) - Vec2(1, 1)).norm() < 1e-13);  // vertex after half a quadrant
  CHECK((sq->cos_sin(4) - Vec2(-1, 0)).norm() < 1e-13);

  auto di = TrigTable::build(unit_diamond());
  CHECK(di->period() == doctest::Approx(4).epsilon(1e-14));
  CHECK(di->sin(1) == doctest::Approx(1).epsilon(1e-13));  // top vertex at sector area 1/2
  // piecewise-linear sine of the diamond
  for (int i = 0; i < 500; ++i) {
    const double th = 4.0 * i / 500;
    const double expected = 1 - std::abs(std::fmod(th, 2.0) - 1);
    const double s2 = di->sin(th) * di->sin(th);
    CHECK(s2 == doctest::Approx(expected * expected).epsilon(1e-10));
  }
}

TEST_CASE("periodicity and boundary membership") {
  std::mt19937_64 rng(3);
  for (const auto& body : sample_bodies()) {
    auto t = TrigTable::build(body);
    std::uniform_real_distribution<double> u(-3 * t->period(), 3 * t->period());
    for (int i = 0; i < 360; ++i) {
      const double th = u(rng);
      CHECK((t->cos_sin(th) - t->cos_sin(th + t->period())).norm() < 1e-12);
      CHECK(std::abs(gauge(body, t->cos_sin(th)) - 1) < 1e-10);
    }
  }
}

TEST_CASE("sector-area consistency against shoelace oracle") {
  for (const auto& body : sample_bodies()) {
    auto t = TrigTable::build(body);
    for (double frac : {0.13, 0.5, 0.78, 0.999}) {
      const double th = frac * t->period();
      CHECK(sector_area_oracle(*t, th) == doctest::Approx(th / 2).epsilon(1e-6));
    }
  }
}

TEST_CASE("angle_of_point round trip") {
  std::mt19937_64 rng(5);
  for (const auto& body : sample_bodies()) {
    auto t = TrigTable::build(body);
    std::uniform_real_distribution<double> u(0, t->period());
    for (int i = 0; i < 200; ++i) {
      const double th = u(rng);
      const double back = t->angle_of_point(t->cos_sin(th));
      const double diff = std::remainder(back - th, t->period());
      CHECK(std::abs(diff) < 1e-10 * t->period());
    }
  }
}

TEST_CASE("correspondence: disc is self-dual") {
  auto pair = TrigPair::build(ConvexBody::disc(1));
  for (int i = 0; i <= 100; ++i) {
    const double th = -7 + 14.0 * i / 100;
    const Interval ip = pair.theta_polar_interval(th);
    CHECK(ip.length() < 1e-12);
    CHECK(std::abs(ip.lo - th) < 1e-10);
  }
}

TEST_CASE("correspondence: square vertices map onto diamond edges") {
  auto pair = TrigPair::build(unit_square());
  // vertex (1,1) of the square sits at theta = 1; its dual edge spans the
  // diamond edge from (1,0) to (0,1), i.e. polar angles 0..1
  const Interval ip = pair.theta_polar_interval(1.0);
  CHECK(ip.lo == doctest::Approx(0).epsilon(1e-12));
  CHECK(ip.hi == doctest::Approx(1).epsilon(1e-12));
  CHECK(pair.is_corner(1.0));
  CHECK(!pair.is_corner(0.5));
  // edge interiors map to diamond vertices
  const Interval mid = pair.theta_polar_interval(0.5);
  CHECK(mid.length() < 1e-12);
  CHECK((pair.polar().cos_sin(mid.lo) - Vec2(1, 0)).norm() < 1e-12);
  // quasiperiodicity: two primal periods (2S = 8) shift by two polar periods (2S° = 4)
  for (double th : {0.3, 1.0, 2.7, 3.0}) {
    const Interval base = pair.theta_polar_interval(th);
    const Interval shifted = pair.theta_polar_interval(th + 2 * 8);
    CHECK(shifted.lo == doctest::Approx(base.lo + 2 * 4).epsilon(1e-12));
    CHECK(shifted.hi == doctest::Approx(base.hi + 2 * 4).epsilon(1e-12));
  }
}

TEST_CASE("generalized Pythagorean identity across body families") {
  std::mt19937_64 rng(9);
  for (const auto& body : sample_bodies()) {
    auto pair = TrigPair::build(body);
    std::uniform_real_distribution<double> u(-pair.primal().period(), 2 * pair.primal().period());
    std::uniform_real_distribution<double> w(0, 1);
    double worst = 0;
    for (int i = 0; i < 2000; ++i) {
      const double th = u(rng);
      const Interval ip = pair.theta_polar_interval(th);
      const double tp = ip.lo + w(rng) * ip.length();
      const Vec2 P = pair.primal().cos_sin(th);
      const Vec2 Q = pair.polar().cos_sin(tp);
      worst = std::max(worst, std::abs(P.dot(Q) - 1));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("inverse correspondence") {
  std::mt19937_64 rng(11);
  for (const auto& body : sample_bodies()) {
    auto pair = TrigPair::build(body);
    std::uniform_real_distribution<double> u(-pair.primal().period(), 2 * pair.primal().period());
    for (int i = 0; i < 300; ++i) {
      const double th = u(rng);
      const Interval ip = pair.theta_polar_interval(th);
      if (ip.length() > 1e-9) continue;  // corner: inverse is an interval
      const Interval back = pair.theta_primal_interval(ip.lo);
      CHECK(back.contains(th, 1e-8 * pair.primal().period()));
    }
  }
}

TEST_CASE("derivative formula vs central finite differences") {
  std::mt19937_64 rng(13);
  const std::vector<ConvexBody> smooth = {ConvexBody::disc(1), ConvexBody::ellipse(2, 1),
                                          ConvexBody::lp_ball(3), ConvexBody::lp_ball(1.5)};
  for (const auto& body : smooth) {
    auto pair = TrigPair::build(body);
    std::uniform_real_distribution<double> u(0, pair.primal().period());
    const double h = 1e-5;
    const auto bps = pair.primal().breakpoints();
    auto near_breakpoint = [&](double th) {
      const double period = pair.primal().period();
      for (double b : bps)
        if (std::abs(std::remainder(th - b, period)) < 1e-3 * period) return true;
      return false;
    };
    for (int i = 0; i < 1000; ++i) {
      const double th = u(rng);
      if (near_breakpoint(th)) continue;  // C^2 fails at the lp axis points
      const auto [dlo, dhi] = pair.derivative(th);
      CHECK((dlo - dhi).norm() < 1e-9);
      const Vec2 fd = (pair.primal().cos_sin(th + h) - pair.primal().cos_sin(th - h)) / (2 * h);
      CHECK((fd - dlo).norm() < 1e-6);
    }
  }
}

TEST_CASE("derivative on square edges is the constant dual vertex") {
  auto pair = TrigPair::build(unit_square());
  for (double th : {0.2, 0.5, 0.8}) {
    const auto [dlo, dhi] = pair.derivative(th);  // right edge, dual vertex (1,0) of diamond
    CHECK((dlo - Vec2(0, 1)).norm() < 1e-12);     // (-sin°, cos°) with (cos°,sin°)=(1,0)
    CHECK((dhi - Vec2(0, 1)).norm() < 1e-12);
  }
  // at the vertex theta=1 the interval endpoints are the adjacent dual vertices
  const auto [dlo, dhi] = pair.derivative(1.0);
  CHECK((dlo - Vec2(0, 1)).norm() < 1e-14);   // from edge dual (1,0)
  CHECK((dhi - Vec2(-1, 0)).norm() < 1e-14);  // from edge dual (0,1)
}

TEST_CASE("curvature") {
  auto disc = TrigPair::build(ConvexBody::disc(1));
  for (double th : {0.1, 1.0, 3.0, 6.0}) CHECK(disc.curvature(th) == doctest::Approx(1).epsilon(1e-10));

  // classical ellipse curvature ab/(a^2 sin^2 s + b^2 cos^2 s)^{3/2}
  auto ell = TrigPair::build(ConvexBody::ellipse(2, 1));
  auto kappa_classical = [](double a, double b, double s) {
    return a * b / std::pow(a * a * std::sin(s) * std::sin(s) + b * b * std::cos(s) * std::cos(s), 1.5);
  };
  const double S2 = ell.primal().period();
  for (int i = 0; i < 32; ++i) {
    const double th = S2 * i / 32;
    const Vec2 P = ell.primal().cos_sin(th);
    const double s = std::atan2(P.y() / 1.0, P.x() / 2.0);
    CHECK(ell.curvature(th) == doctest::Approx(kappa_classical(2, 1, s)).epsilon(1e-9));
  }
  CHECK(ell.curvature(ell.primal().angle_of_point(Vec2(2, 0))) == doctest::Approx(2).epsilon(1e-9));
  CHECK(ell.curvature(ell.primal().angle_of_point(Vec2(0, 1))) == doctest::Approx(0.25).epsilon(1e-9));

  // monotone correspondence: dtheta_polar/dtheta >= 0 wherever defined
  auto lp = TrigPair::build(ConvexBody::lp_ball(3));
  for (int i = 1; i < 64; ++i) {
    const double th = lp.primal().period() * i / 64;
    if (lp.primal().regularity_at(th).kind != Regularity::Kind::smooth) continue;
    CHECK(lp.dtheta_polar_dtheta(th) >= 0);
  }

  auto sq = TrigPair::build(unit_square());
  CHECK_THROWS_AS(sq.curvature(1.0), NumericError);  // vertex
  CHECK(sq.curvature(0.5) == doctest::Approx(0));    // edge interior is flat
}

TEST_CASE("polar_decompose") {
  auto disc = TrigPair::build(ConvexBody::disc(1));
  {
    const auto [r, th] = disc.polar_decompose(Vec2(3, 4));
    CHECK(r == doctest::Approx(5).epsilon(1e-12));
    CHECK(th == doctest::Approx(std::atan2(4, 3)).epsilon(1e-10));
  }
  auto sq = TrigPair::build(unit_square());
  {
    const auto [r, th] = sq.polar_decompose(Vec2(2, 2));
    CHECK(r == doctest::Approx(2).epsilon(1e-12));
    CHECK(th == doctest::Approx(1).epsilon(1e-12));  // vertex (1,1) at sector area 1/2
  }
  CHECK_THROWS_AS(disc.polar_decompose(Vec2(0, 0)), NumericError);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const auto& body : sample_bodies()) {
    auto pair = TrigPair::build(body);
    for (int i = 0; i < 500; ++i) {
      const Vec2 x(u(rng), u(rng));
      if (x.norm() < 1e-6) continue;
      const auto [r, th] = pair.polar_decompose(x);
      CHECK((r * pair.primal().cos_sin(th) - x).norm() < 1e-10 * std::max(1.0, x.norm()));
    }
  }
}

TEST_CASE("area law: integral of the sector form over one period") {
  for (const auto& body : sample_bodies()) {
    auto pair = TrigPair::build(body);
    const double S2 = pair.primal().period();
    const int n = 4000;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const double th = S2 * (i + 0.5) / n;
      const Vec2 P = pair.primal().cos_sin(th);
      const auto [dlo, dhi] = pair.derivative(th);
      const Vec2 d = 0.5 * (dlo + dhi);
      acc += 0.5 * (P.x() * d.y() - d.x() * P.y()) * S2 / n;
    }
    CHECK(acc == doctest::Approx(pair.primal().area()).epsilon(1e-6));
  }
}

TEST_CASE("corner detection") {
  auto sq = TrigPair::build(unit_square());
  auto corners = sq.primal().corner_angles();
  REQUIRE(corners.size() == 4);
  CHECK(corners[0] == doctest::Approx(1).epsilon(1e-13));
  CHECK(corners[1] == doctest::Approx(3).epsilon(1e-13));

  auto lp15 = TrigTable::build(ConvexBody::lp_ball(1.5));
  CHECK(lp15->corner_angles().empty());
  const auto reg = lp15->regularity_at(0);  // axis point
  CHECK(reg.kind == Regularity::Kind::power);
  CHECK(reg.exponent == doctest::Approx(1.5));
  auto lp3 = TrigTable::build(ConvexBody::lp_ball(3));
  CHECK(lp3->regularity_at(0).kind == Regularity::Kind::smooth);

  auto cd = TrigTable::build(ConvexBody::cut_disc(1, 0.6));
  CHECK(cd->corner_angles().size() == 2);
}

TEST_CASE("integral_cos_sin") {
  auto disc = TrigTable::build(ConvexBody::disc(1));
  const Vec2 full = disc->integral_cos_sin(0, disc->period());
  CHECK(full.norm() < 1e-10);
  const Vec2 quarter = disc->integral_cos_sin(0, M_PI / 2);
  CHECK((quarter - Vec2(1, 1)).norm() < 1e-10);

  // against a dense Riemann sum on a mixed body
  auto cd = TrigTable::build(ConvexBody::cut_disc(1, 0.6));
  const double t1 = 0.7 * cd->period();
  Vec2 riemann = Vec2::Zero();
  const int n = 200000;
  for (int i = 0; i < n; ++i) riemann += cd->cos_sin(t1 * (i + 0.5) / n) * t1 / n;
  CHECK((cd->integral_cos_sin(0, t1) - riemann).norm() < 1e-7);
}

TEST_CASE("support set through the inverse correspondence") {
  auto sq = TrigPair::build(unit_square());
  // direction (1,0): the whole right edge attains the maximum
  const Interval right = sq.theta_primal_interval(sq.polar().angle_of_point(Vec2(1, 0)));
  CHECK(right.lo == doctest::Approx(-1).epsilon(1e-12));
  CHECK(right.hi == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("resolution validation") {
  CHECK_THROWS_AS(TrigTable::build(ConvexBody::disc(1), 32), std::invalid_argument);
}

TEST_CASE("rotated body tables stay exact") {
  auto pair = TrigPair::build(rotated(unit_square(), 0.3));
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, pair.primal().period());
  for (int i = 0; i < 500; ++i) {
    const double th = u(rng);
    const Interval ip = pair.theta_polar_interval(th);
    const Vec2 P = pair.primal().cos_sin(th);
    const Vec2 Q = pair.polar().cos_sin(ip.lo);
    CHECK(std::abs(P.dot(Q) - 1) < 1e-10);
  }
}
