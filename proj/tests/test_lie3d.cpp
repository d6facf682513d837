#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ctrig/lie3d.hpp"

#include <cmath>
#include <random>

using namespace ctrig;
using namespace ctrig::lie3d;

namespace {

ConvexBody unit_square() { return ConvexBody::polygon({{1, -1}, {1, 1}, {-1, 1}, {-1, -1}}); }
ConvexBody unit_diamond() { return ConvexBody::polygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}); }

LieSystem make(int a, int b, const ConvexBody& body, double H = 1) {
  return LieSystem(LieSpec{{a, b}, body, H});
}

const std::vector<StructurePair> kPairs = {{-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, 0}};

}  // namespace

TEST_CASE("invariant reduction to structure signs") {
  {
    const Reduction r = reduce_chi_kappa(0, 0);
    CHECK(r.ab.a == 0);
    CHECK(r.ab.b == 0);
    CHECK(r.algebra == Algebra::heisenberg);
  }
  {
    const double c = 1 / std::sqrt(2.0);
    const Reduction r = reduce_chi_kappa(c, c);  // chi - kappa = 0
    CHECK(r.ab.a == 1);
    CHECK(r.ab.b == 0);
    CHECK(r.algebra == Algebra::se2);
  }
  {
    const Reduction r = reduce_chi_kappa(0, 1);  // chi + kappa > 0, chi - kappa < 0
    CHECK(r.ab.a == 1);
    CHECK(r.ab.b == -1);
    CHECK(r.algebra == Algebra::su2);
  }
  {
    const Reduction r = reduce_chi_kappa(0, -1);  // chi + kappa < 0, chi - kappa > 0
    CHECK(r.ab.a == -1);
    CHECK(r.ab.b == 1);
    CHECK(r.algebra == Algebra::sl2);
  }
  CHECK_THROWS_AS(reduce_chi_kappa(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(reduce_chi_kappa(-1, 0), std::invalid_argument);
}

TEST_CASE("matrix generators satisfy the bracket normalization") {
  for (const StructurePair ab : kPairs) {
    LieSystem sys = make(ab.a, ab.b, unit_square());
    const auto& X = sys.generators();
    auto comm = [](const GroupMat& u, const GroupMat& v) { return (u * v - v * u).eval(); };
    CHECK((comm(X[0], X[1]) - X[2]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((comm(X[2], X[0]) - double(ab.a) * X[1]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((comm(X[2], X[1]) - double(ab.b) * X[0]).cwiseAbs().maxCoeff() < 1e-14);
    // X1, X2, X3 linearly independent
    Eigen::MatrixXcd flat(X[0].size(), 3);
    for (int k = 0; k < 3; ++k)
      flat.col(k) = Eigen::Map<const Eigen::VectorXcd>(X[k].data(), X[k].size());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(flat);
    CHECK(qr.rank() == 3);
  }
}

TEST_CASE("vertical potential profiles per case") {
  // square control, (0,1): U(x + 2k) = -(x-1)^2/2
  {
    LieSystem sys = make(0, 1, unit_square());
    for (int i = 0; i <= 40; ++i) {
      const double x = 2.0 * i / 40;
      CHECK(sys.vertical().U(x) == doctest::Approx(-(x - 1) * (x - 1) / 2).epsilon(1e-12));
      CHECK(sys.vertical().U(x + 2) == doctest::Approx(-(x - 1) * (x - 1) / 2).epsilon(1e-12));
    }
  }
  // diamond control, (-1,1): U = -(1 + x^2)/2 on [-1,1]
  {
    LieSystem sys = make(-1, 1, unit_diamond());
    for (int i = 0; i <= 40; ++i) {
      const double x = -1 + 2.0 * i / 40;
      CHECK(sys.vertical().U(x) == doctest::Approx(-(1 + x * x) / 2).epsilon(1e-12));
    }
  }
  // disc control, (1,0): pendulum potential sin^2/2
  {
    LieSystem sys = make(1, 0, ConvexBody::disc(1));
    for (int i = 0; i <= 40; ++i) {
      const double x = 2 * M_PI * i / 40;
      CHECK(sys.vertical().U(x) == doctest::Approx(0.5 * std::sin(x) * std::sin(x)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(make(1, 1, unit_square(), -1), std::invalid_argument);
  CHECK_THROWS_AS(LieSystem(LieSpec{{-1, -1}, unit_square(), 1}), std::invalid_argument);
}

TEST_CASE("adjoint scaling, Casimir, Hamiltonian level") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const StructurePair ab : kPairs) {
    for (double H : {1.0, 2.5}) {
      LieSystem sys = make(ab.a, ab.b, unit_diamond(), H);
      for (int i = 0; i < 50; ++i) {
        const double tp = u(rng), v = u(rng);
        const Eigen::Vector3d h = sys.adjoint(tp, v);
        CHECK(h(2) == doctest::Approx(H * v).epsilon(1e-14));
        // the Casimir equals H^2 times the normalized vertical energy
        CHECK(sys.casimir(tp, v) ==
              doctest::Approx(H * H * sys.vertical().energy(tp, v)).epsilon(1e-11));
        CHECK(std::abs(sys.hamiltonian_residual(tp)) < 1e-10 * H);
      }
    }
  }
}

TEST_CASE("singular classification per case") {
  // square control, (0,1): special at odd integers, general at even
  {
    LieSystem sys = make(0, 1, unit_square());
    const SingularInfo odd = singular_classify(sys, 1.0);
    CHECK(odd.type == SingularType::special);
    CHECK(odd.control_theta.length() > 0.5);
    CHECK(singular_classify(sys, 3.0).type == SingularType::special);
    const SingularInfo even = singular_classify(sys, 0.0);
    CHECK(even.type == SingularType::general);
    CHECK((even.control - Vec2(1, 0)).norm() < 1e-10);
  }
  // square control, (1,0): special at even, general at odd
  {
    LieSystem sys = make(1, 0, unit_square());
    CHECK(singular_classify(sys, 0.0).type == SingularType::special);
    CHECK(singular_classify(sys, 2.0).type == SingularType::special);
    const SingularInfo odd = singular_classify(sys, 1.0);
    CHECK(odd.type == SingularType::general);
    CHECK((odd.control - Vec2(0, 1)).norm() < 1e-10);
  }
  // square control, (-1,1) and (1,1) and (1,-1): no special anywhere
  for (int kase : {0, 1, 2}) {
    const StructurePair ab = kase == 0 ? StructurePair{-1, 1}
                            : kase == 1 ? StructurePair{1, 1}
                                        : StructurePair{1, -1};
    LieSystem sys = make(ab.a, ab.b, unit_square());
    for (double tp : {0.0, 1.0, 2.0, 3.0})
      CHECK(singular_classify(sys, tp).type != SingularType::special);
    CHECK(singular_classify(sys, 1.0).type == SingularType::general);
  }
  // diamond control: square polar has no horizontal/vertical supporting edge
  // of the diamond, so singular extremals are general only
  for (const StructurePair ab : kPairs) {
    if (ab.a == 0 && ab.b == 0) continue;
    LieSystem sys = make(ab.a, ab.b, unit_diamond());
    for (double tp : {1.0, 3.0, 5.0, 7.0})
      CHECK(singular_classify(sys, tp).type != SingularType::special);
  }
  // disc control: smooth polar boundary, no singular extremals at all
  {
    LieSystem sys = make(1, 0, ConvexBody::disc(1));
    for (int i = 0; i < 32; ++i)
      CHECK(singular_classify(sys, 2 * M_PI * i / 32).type == SingularType::none);
  }
}

TEST_CASE("phase portraits of the square cases") {
  // (1,0): centers with a free control family at even integers, finite-time
  // junctions carrying the constant control at odd integers
  {
    LieSystem sys = make(1, 0, unit_square());
    const PhasePortrait pp = phase_portrait(sys, {0.2, 0.5, 1.0});
    REQUIRE(pp.equilibria.size() == 4);
    for (const auto& eq : pp.equilibria) {
      const long n = std::lround(eq.theta_polar);
      CHECK(std::abs(eq.theta_polar - n) < 1e-9);
      if (n % 2 == 0) {
        CHECK(eq.singular == SingularType::special);
        CHECK(!eq.finite_time);
      } else {
        CHECK(eq.singular == SingularType::general);
        CHECK(eq.finite_time);
        CHECK(eq.kind == StationaryKind::saddle_finite_time);
      }
    }
    CHECK(pp.levels.size() == 3);
    for (const auto& level : pp.levels) CHECK(!level.branches.empty());
    // level sets satisfy the energy relation exactly
    for (const auto& br : pp.levels[2].branches)
      for (const Vec2& pt : br) {
        const double e = 0.5 * pt.y() * pt.y() + sys.vertical().U(pt.x());
        CHECK(e == doctest::Approx(1.0).epsilon(1e-10));
      }
  }
  // disc control (1,0): the classic pendulum portrait; the sin^2 potential has
  // two equilibria per potential period (four over the full angle period)
  {
    LieSystem sys = make(1, 0, ConvexBody::disc(1));
    const PhasePortrait pp = phase_portrait(sys, {});
    REQUIRE(pp.equilibria.size() == 4);
    int centers = 0, saddles = 0;
    for (const auto& eq : pp.equilibria) {
      if (eq.kind == StationaryKind::center) ++centers;
      if (eq.kind == StationaryKind::saddle_slow) ++saddles;
      CHECK(!eq.finite_time);
      CHECK(eq.singular == SingularType::none);
    }
    CHECK(centers == 2);
    CHECK(saddles == 2);
  }
  // lp control p = 1.5 (polar exponent 3 >= 2), case (-1,1): smooth maxima at
  // 0 and half period, center at quarter period
  {
    LieSystem sys = make(-1, 1, ConvexBody::lp_ball(1.5));
    const PhasePortrait pp = phase_portrait(sys, {});
    const double P = sys.vertical().period();
    int saddle0 = 0, center_quarter = 0;
    for (const auto& eq : pp.equilibria) {
      if (eq.kind == StationaryKind::saddle_slow &&
          (std::abs(eq.theta_polar) < 1e-6 * P ||
           std::abs(eq.theta_polar - P / 4) < 1e-6 * P ||
           std::abs(eq.theta_polar - P / 2) < 1e-6 * P || std::abs(eq.theta_polar - 3 * P / 4) < 1e-6 * P))
        ++saddle0;
      if (eq.kind == StationaryKind::center && std::abs(eq.theta_polar - P / 8) < 1e-6 * P)
        ++center_quarter;
      CHECK(!eq.finite_time);
    }
    CHECK(saddle0 >= 2);
    CHECK(center_quarter == 1);
  }
  // square control, (0,1): flat runs do not appear (potential strictly curved)
  // but diamond control (0,1) has flat stretches
  {
    LieSystem sys = make(0, 1, unit_diamond());
    const PhasePortrait pp = phase_portrait(sys, {});
    CHECK(!pp.flat_runs.empty());
  }
}

TEST_CASE("taxonomy report agrees with scans") {
  const std::vector<StructurePair> cases = {{-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}};
  // lp exponent 3: nonuniqueness and mixed exactly when a = 1
  for (const StructurePair ab : cases) {
    LieSystem sys = make(ab.a, ab.b, ConvexBody::lp_ball(3));
    const TypeReport rep = extremal_type_report(sys);
    CHECK(rep.theorem_applies);
    CHECK(rep.family == "lp");
    CHECK(rep.obs_singular);
    CHECK(rep.obs_nonuniqueness == (ab.a == 1));
    CHECK(rep.obs_mixed == (ab.a == 1));
    CHECK(rep.agree);
  }
  // lp exponent 1.5: all bang
  for (const StructurePair ab : cases) {
    LieSystem sys = make(ab.a, ab.b, ConvexBody::lp_ball(1.5));
    const TypeReport rep = extremal_type_report(sys);
    CHECK(rep.theorem_applies);
    CHECK(!rep.obs_singular);
    CHECK(!rep.obs_nonuniqueness);
    CHECK(!rep.obs_mixed);
    CHECK(rep.agree);
  }
  // polygons: within {bang-bang, singular, mixed}
  for (const StructurePair ab : cases) {
    LieSystem sys = make(ab.a, ab.b, unit_square());
    const TypeReport rep = extremal_type_report(sys);
    CHECK(rep.theorem_applies);
    CHECK(rep.family == "polygon");
    CHECK(rep.agree);
  }
  // disc: bang only
  {
    LieSystem sys = make(1, 1, ConvexBody::disc(1));
    const TypeReport rep = extremal_type_report(sys);
    CHECK(rep.family == "strictly_convex_smooth_polar");
    CHECK(!rep.obs_singular);
    CHECK(!rep.obs_mixed);
    CHECK(rep.agree);
  }
  // composite: no theorem
  {
    LieSystem sys = make(1, 1, ConvexBody::cut_disc(1, 0.6));
    CHECK(!extremal_type_report(sys).theorem_applies);
  }
}

TEST_CASE("group integration") {
  // zero control: identity forever
  {
    LieSystem sys = make(1, 0, unit_square());
    ExtremalTrajectory traj;
    for (int i = 0; i <= 100; ++i) {
      TrajectorySample s;
      s.t = 0.01 * i;
      s.u = Vec2::Zero();
      traj.samples.push_back(s);
    }
    const auto gs = integrate_group(sys, traj);
    for (const auto& smp : gs)
      CHECK((smp.g - GroupMat::Identity(smp.g.rows(), smp.g.cols())).cwiseAbs().maxCoeff() < 1e-14);
  }
  // se2 with the translation generator active: straight line in the affine part
  {
    LieSystem sys = make(1, 0, unit_square());
    ExtremalTrajectory traj;
    for (int i = 0; i <= 100; ++i) {
      TrajectorySample s;
      s.t = 0.02 * i;
      s.u = Vec2(0, 1);  // activates X2 = P1 only
      traj.samples.push_back(s);
    }
    const auto gs = integrate_group(sys, traj);
    const auto& last = gs.back().g;
    CHECK(std::abs(last(0, 2).real() - 2.0) < 1e-12);  // translated by t
    CHECK(std::abs(last(1, 2).real()) < 1e-12);
    CHECK(std::abs(last(0, 0).real() - 1) < 1e-12);    // no rotation part
  }
  // sl2 determinant and su2 unitarity over long traces
  for (const StructurePair ab : {StructurePair{-1, 1}, StructurePair{1, -1}}) {
    LieSystem sys = make(ab.a, ab.b, unit_diamond());
    IntegrateOptions opt;
    opt.dt_out = 0.001;
    auto traj = integrate(sys.vertical(), 0.3, 0.8, 10.0, opt);  // 10^4 steps
    const auto gs = integrate_group(sys, traj);
    CHECK(gs.size() == traj.samples.size());
    double worst = 0;
    for (const auto& smp : gs) worst = std::max(worst, group_constraint_residual(sys, smp.g));
    CHECK(worst < 1e-9);
  }
  // flatten size: re/im pairs for the unitary case
  {
    LieSystem su = make(1, -1, unit_square());
    CHECK(flatten(su, GroupMat::Identity(2, 2)).size() == 8);
    LieSystem se = make(1, 0, unit_square());
    CHECK(flatten(se, GroupMat::Identity(3, 3)).size() == 9);
  }
}

TEST_CASE("closed-form vertical flows through the Lie interface") {
  // square control, case (-1,1): hyperbolic strip solution
  LieSystem sys = make(-1, 1, unit_square());
  IntegrateOptions opt;
  opt.dt_out = 0.002;
  const double x0 = 0.3, h30 = 0.2;  // H = 1, so v = h3
  auto traj = integrate(sys.vertical(), x0, h30, 2.0, opt);
  double worst = 0;
  for (const auto& s : traj.samples) {
    if (s.theta_polar <= 1e-9 || s.theta_polar >= 1 - 1e-9) break;
    const double c1 = x0 - 0.5, c2 = h30 / std::sqrt(2.0);
    const double expect = c1 * std::cosh(std::sqrt(2.0) * s.t) + c2 * std::sinh(std::sqrt(2.0) * s.t) + 0.5;
    worst = std::max(worst, std::abs(s.theta_polar - expect));
  }
  CHECK(worst < 1e-8);
  // Casimir constant along the trajectory
  double cworst = 0;
  const double c0 = sys.casimir(x0, h30);
  for (const auto& s : traj.samples) cworst = std::max(cworst, std::abs(sys.casimir(s.theta_polar, s.v) - c0));
  CHECK(cworst < 1e-8);
}
