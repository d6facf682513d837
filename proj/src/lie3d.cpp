#include "ctrig/lie3d.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>

namespace ctrig::lie3d {

namespace {

using Cplx = std::complex<double>;

bool valid_pair(StructurePair ab) {
  return (ab.a == -1 && ab.b == 1) || (ab.a == 0 && ab.b == 1) || (ab.a == 1 && ab.b == 1) ||
         (ab.a == 1 && ab.b == 0) || (ab.a == 1 && ab.b == -1) || (ab.a == 0 && ab.b == 0);
}

std::array<GroupMat, 3> make_generators(StructurePair ab) {
  std::array<GroupMat, 3> g;
  auto real3 = [] {
    GroupMat m(3, 3);
    m.setZero();
    return m;
  };
  const Algebra alg = algebra_of(ab);
  switch (alg) {
    case Algebra::heisenberg: {
      GroupMat x1 = real3(), x2 = real3(), x3 = real3();
      x1(0, 1) = 1;
      x2(1, 2) = 1;
      x3(0, 2) = 1;
      g = {x1, x2, x3};
      break;
    }
    case Algebra::su2: {
      GroupMat x1(2, 2), x2(2, 2), x3(2, 2);
      const Cplx i(0, 1);
      x1 << 0, -i / 2.0, -i / 2.0, 0;        // -(i/2) sigma_x
      x2 << 0, -1 / 2.0, 1 / 2.0, 0;         // -(i/2) sigma_y
      x3 << -i / 2.0, 0, 0, i / 2.0;         // -(i/2) sigma_z
      g = {x1, x2, x3};
      break;
    }
    case Algebra::sl2: {
      GroupMat H2(2, 2), S2(2, 2), J2(2, 2);
      H2 << 0.5, 0, 0, -0.5;
      S2 << 0, 0.5, 0.5, 0;
      J2 << 0, 0.5, -0.5, 0;
      if (ab.a == -1)
        g = {H2, S2, J2};  // (-1, 1)
      else
        g = {J2, S2, H2};  // (1, 1)
      break;
    }
    case Algebra::se2: {
      GroupMat R = real3(), P1 = real3(), P2 = real3();
      R(0, 1) = -1;
      R(1, 0) = 1;
      P1(0, 2) = 1;
      P2(1, 2) = 1;
      g = {-R, P1, -P2};  // (1, 0)
      break;
    }
    case Algebra::sh2: {
      GroupMat B = real3(), P1 = real3(), P2 = real3();
      B(0, 1) = 1;
      B(1, 0) = 1;
      P1(0, 2) = 1;
      P2(1, 2) = 1;
      g = {P1, -B, P2};  // (0, 1)
      break;
    }
  }
  return g;
}

}  // namespace

std::string to_string(Algebra alg) {
  switch (alg) {
    case Algebra::heisenberg: return "heisenberg";
    case Algebra::su2: return "su2";
    case Algebra::sl2: return "sl2";
    case Algebra::se2: return "se2";
    case Algebra::sh2: return "sh2";
  }
  return "?";
}

std::string to_string(SingularType t) {
  switch (t) {
    case SingularType::none: return "none";
    case SingularType::general: return "general";
    case SingularType::special: return "special";
  }
  return "?";
}

std::string to_string(Presence p) {
  switch (p) {
    case Presence::no: return "no";
    case Presence::yes: return "yes";
    case Presence::allowed: return "allowed";
  }
  return "?";
}

Algebra algebra_of(StructurePair ab) {
  if (ab.a == 0 && ab.b == 0) return Algebra::heisenberg;
  if (ab.a == 1 && ab.b == -1) return Algebra::su2;
  if (ab.a == 1 && ab.b == 0) return Algebra::se2;
  if (ab.a == 0 && ab.b == 1) return Algebra::sh2;
  return Algebra::sl2;  // (-1,1) and (1,1)
}

Reduction reduce_chi_kappa(double chi, double kappa) {
  const bool trivial = chi == 0 && kappa == 0;
  if (!trivial) {
    if (std::abs(chi * chi + kappa * kappa - 1) > 1e-12 || chi < 0)
      throw std::invalid_argument("invariants must satisfy chi = kappa = 0 or chi^2+kappa^2 = 1, chi >= 0");
  }
  auto sgn = [](double x) { return x > 1e-15 ? 1 : (x < -1e-15 ? -1 : 0); };
  StructurePair ab{trivial ? 0 : sgn(chi + kappa), trivial ? 0 : sgn(chi - kappa)};
  return {ab, algebra_of(ab)};
}

LieSystem::LieSystem(LieSpec spec)
    : spec_(std::move(spec)),
      algebra_(algebra_of(spec_.ab)),
      pot_([&] {
        if (!valid_pair(spec_.ab)) throw std::invalid_argument("invalid structure signs");
        if (!(spec_.H > 0)) throw std::invalid_argument("Hamiltonian level must be positive");
        Mat2 M;
        M << -static_cast<double>(spec_.ab.b), 0, 0, static_cast<double>(spec_.ab.a);
        return Potential(TrigPair::build(spec_.body, spec_.resolution),
                         ScalarField2::from_quadratic(M, Vec2::Zero()));
      }()),
      gens_(make_generators(spec_.ab)) {}

Eigen::Vector3d LieSystem::adjoint(double theta_polar, double v) const {
  const Vec2 q = pot_.host_point(theta_polar);
  return Eigen::Vector3d(spec_.H * q.x(), spec_.H * q.y(), spec_.H * v);
}

double LieSystem::casimir(double theta_polar, double v) const {
  const Eigen::Vector3d h = adjoint(theta_polar, v);
  return 0.5 * (h(2) * h(2) - spec_.ab.b * h(0) * h(0) + spec_.ab.a * h(1) * h(1));
}

double LieSystem::hamiltonian_residual(double theta_polar) const {
  const Eigen::Vector3d h = adjoint(theta_polar, 0);
  return support(spec_.body, Vec2(h(0), h(1))) - spec_.H;
}

// ---------------------------------------------------------------------------

SingularInfo singular_classify(const LieSystem& sys, double theta_polar, double boundary_tol) {
  SingularInfo info;
  const auto& pair = sys.pair();
  const Vec2 q = sys.vertical().host_point(theta_polar);
  const double a = sys.ab().a, b = sys.ab().b;
  const bool second_order_singular =
      pair.polar().regularity_at(theta_polar).kind != Regularity::Kind::smooth;
  const double det = b * q.x() * q.x() - a * q.y() * q.y();
  if (std::abs(det) > 1e-12) {
    if (!second_order_singular) return info;
    Mat2 A;
    A << q.x(), q.y(), a * q.y(), b * q.x();
    const Vec2 u = A.colPivHouseholderQr().solve(Vec2(1, 0));
    if (std::abs(gauge(sys.spec().body, u) - 1) <= boundary_tol) {
      info.type = SingularType::general;
      info.control = u;
    }
    return info;
  }
  // rank 1: solvable only when the second row vanishes
  if (std::abs(a * q.y()) > 1e-10 || std::abs(b * q.x()) > 1e-10) return info;
  switch (sys.algebra()) {
    case Algebra::su2:
    case Algebra::sl2:
      return info;  // |a| = |b| = 1: the second row cannot vanish on the polar boundary
    case Algebra::sh2:
      if (std::abs(q.x()) > 1e-10) return info;
      break;
    case Algebra::se2:
      if (std::abs(q.y()) > 1e-10) return info;
      break;
    case Algebra::heisenberg:
      break;
  }
  if (!second_order_singular) return info;
  info.type = SingularType::special;
  info.control_theta = pair.theta_primal_interval(theta_polar);
  info.segment_lo = pair.primal().cos_sin(info.control_theta.lo);
  info.segment_hi = pair.primal().cos_sin(info.control_theta.hi);
  return info;
}

// ---------------------------------------------------------------------------
// Phase portrait
// ---------------------------------------------------------------------------

namespace {

// Stationary angles of the potential over one period: junction angles whose
// derivative interval straddles zero plus interior roots of U'.
std::vector<double> stationary_scan(const Potential& pot, int resolution,
                                    std::vector<Interval>* flat_runs) {
  const double P = pot.period();
  std::vector<double> out;
  auto stationary_at = [&](double tp) {
    const Interval up = pot.Uprime(tp);
    const Vec2 df = pot.grad_at(tp);
    const double tol = 1e-10 * (1 + df.norm());
    return up.lo <= tol && up.hi >= -tol;
  };
  auto already = [&](double tp) {
    for (double b : out)
      if (std::abs(std::remainder(b - tp, P)) < 1e-7 * P) return true;
    return false;
  };
  std::vector<double> bps = pot.pair().polar().breakpoints();
  std::sort(bps.begin(), bps.end());
  for (double b : bps)
    if (stationary_at(b) && !already(b)) out.push_back(b);
  // interior roots between scan samples
  double prev_tp = 0, prev_up = pot.Uprime_right(0);
  for (int i = 1; i <= resolution; ++i) {
    const double tp = P * i / resolution;
    const double up = pot.Uprime_left(tp);
    if (std::abs(up) <= 1e-12 && stationary_at(tp) && !already(tp)) out.push_back(tp);
    if ((prev_up < 0) != (up < 0) && std::abs(prev_up) > 1e-12 && std::abs(up) > 1e-12) {
      double lo = prev_tp, hi = tp, flo = prev_up;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Interval um = pot.Uprime(mid);
        const double fm = 0.5 * (um.lo + um.hi);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (!already(root) && stationary_at(root)) out.push_back(root);
    }
    prev_tp = tp;
    prev_up = pot.Uprime_right(tp);
  }
  // flat stretches: maximal runs of stationary samples
  if (flat_runs) {
    const int m = resolution;
    int run_start = -1;
    for (int i = 0; i <= m; ++i) {
      const double tp = P * (i + 0.5) / m;
      const bool flat = i < m && stationary_at(tp) && pot.Uprime(tp).length() < 1e-10;
      if (flat && run_start < 0) run_start = i;
      if (!flat && run_start >= 0) {
        if (i - run_start >= 2)
          flat_runs->push_back({P * (run_start + 0.5) / m, P * (i - 0.5) / m});
        run_start = -1;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

PhasePortrait phase_portrait(const LieSystem& sys, const std::vector<double>& energies,
                             int scan_resolution, int threads) {
  PhasePortrait pp;
  const Potential& pot = sys.vertical();
  const double P = pot.period();
  std::vector<Interval> flats;
  const std::vector<double> stats = stationary_scan(pot, scan_resolution, &flats);
  for (const Interval& r : flats) pp.flat_runs.push_back({r});
  for (double tp : stats) {
    Equilibrium eq;
    eq.theta_polar = tp;
    eq.detail = classify_stationary(pot, tp);
    eq.kind = eq.detail.primary;
    eq.singular = singular_classify(sys, tp).type;
    eq.finite_time = eq.detail.convergent_left || eq.detail.convergent_right;
    pp.equilibria.push_back(eq);
  }
  const int prof_n = std::max(scan_resolution, 256);
  pp.profile_theta.reserve(prof_n + 1);
  pp.profile_U.reserve(prof_n + 1);
  for (int i = 0; i <= prof_n; ++i) {
    const double tp = P * i / prof_n;
    pp.profile_theta.push_back(tp);
    pp.profile_U.push_back(pot.U(tp));
  }
  // level sets h3 = +- H sqrt(2 (E - U)) sampled on the profile grid
  pp.levels.resize(energies.size());
  auto fill_level = [&](size_t k) {
    PhasePortrait::Level level;
    level.energy = energies[k];
    std::vector<Vec2> upper, lower;
    for (int i = 0; i <= prof_n; ++i) {
      const double tp = pp.profile_theta[i];
      const double g = 2 * (level.energy - pp.profile_U[i]);
      if (g >= 0) {
        const double h3 = sys.H() * std::sqrt(g);
        upper.emplace_back(tp, h3);
        lower.emplace_back(tp, -h3);
      } else {
        if (!upper.empty()) level.branches.push_back(std::move(upper));
        if (!lower.empty()) level.branches.push_back(std::move(lower));
        upper.clear();
        lower.clear();
      }
    }
    if (!upper.empty()) level.branches.push_back(std::move(upper));
    if (!lower.empty()) level.branches.push_back(std::move(lower));
    pp.levels[k] = std::move(level);
  };
  if (threads > 1 && energies.size() > 1) {
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    const int nt = std::min<int>(threads, static_cast<int>(energies.size()));
    for (int w = 0; w < nt; ++w)
      futs.push_back(std::async(std::launch::async, [&] {
        for (size_t k = next.fetch_add(1); k < energies.size(); k = next.fetch_add(1)) fill_level(k);
      }));
    for (auto& f : futs) f.get();
  } else {
    for (size_t k = 0; k < energies.size(); ++k) fill_level(k);
  }
  return pp;
}

// ---------------------------------------------------------------------------
// Type report
// ---------------------------------------------------------------------------

TypeReport extremal_type_report(const LieSystem& sys, int scan_resolution) {
  TypeReport rep;
  const ConvexBody& body = sys.spec().body;
  const double a = sys.ab().a;
  const auto* lp = body.get_if<LpBall>();
  const bool is_polygon = body.get_if<Polygon>() || (lp && (lp->p == 1 || std::isinf(lp->p)));
  const bool is_smooth_lp = lp && lp->p > 1 && !std::isinf(lp->p);
  const bool is_round = body.get_if<Disc>() || body.get_if<Ellipse>();
  if (is_polygon) {
    rep.theorem_applies = true;
    rep.family = "polygon";
    rep.bang_bang = Presence::yes;
    rep.singular = Presence::allowed;
    rep.mixed = Presence::allowed;
    rep.nonuniqueness = Presence::allowed;
  } else if (is_smooth_lp && lp->p != 2) {
    rep.theorem_applies = true;
    rep.family = "lp";
    rep.bang_bang = Presence::yes;
    if (lp->p < 2) {
      rep.singular = Presence::no;
      rep.mixed = Presence::no;
      rep.nonuniqueness = Presence::no;
    } else {
      rep.singular = Presence::yes;
      rep.mixed = a == 1 ? Presence::yes : Presence::no;
      rep.nonuniqueness = a == 1 ? Presence::yes : Presence::no;
    }
  } else if (is_round || (lp && lp->p == 2)) {
    rep.theorem_applies = true;
    rep.family = "strictly_convex_smooth_polar";
    rep.bang_bang = Presence::yes;
    rep.singular = Presence::no;
    rep.mixed = Presence::no;
    rep.nonuniqueness = Presence::no;
  } else {
    rep.theorem_applies = false;
    rep.family = "unclassified";
    rep.bang_bang = Presence::yes;
    rep.singular = Presence::allowed;
    rep.mixed = Presence::allowed;
    rep.nonuniqueness = Presence::allowed;
  }

  // observation scan
  const PhasePortrait pp = phase_portrait(sys, {}, scan_resolution);
  rep.obs_bang_bang = true;  // generic energies always produce moving arcs
  for (const auto& eq : pp.equilibria) {
    if (eq.singular != SingularType::none) rep.obs_singular = true;
    if (eq.finite_time) {
      rep.obs_nonuniqueness = true;
      if (eq.singular != SingularType::none ||
          singular_classify(sys, eq.theta_polar).type != SingularType::none)
        rep.obs_mixed = true;
    }
  }
  auto ok = [](Presence p, bool obs) {
    if (p == Presence::yes) return obs;
    if (p == Presence::no) return !obs;
    return true;
  };
  rep.agree = ok(rep.bang_bang, rep.obs_bang_bang) && ok(rep.singular, rep.obs_singular) &&
              ok(rep.mixed, rep.obs_mixed) && ok(rep.nonuniqueness, rep.obs_nonuniqueness);
  return rep;
}

// ---------------------------------------------------------------------------
// Group integration
// ---------------------------------------------------------------------------

namespace {

GroupMat identity_like(const GroupMat& gen) {
  return GroupMat::Identity(gen.rows(), gen.cols());
}

GroupMat project_structure(Algebra alg, const GroupMat& g) {
  GroupMat out = g;
  switch (alg) {
    case Algebra::su2: {
      const Cplx al = 0.5 * (g(0, 0) + std::conj(g(1, 1)));
      const Cplx be = 0.5 * (g(0, 1) - std::conj(g(1, 0)));
      const double n = std::sqrt(std::norm(al) + std::norm(be));
      out.resize(2, 2);
      out << al / n, be / n, -std::conj(be) / n, std::conj(al) / n;
      break;
    }
    case Algebra::sl2: {
      const Cplx det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
      out = g / std::sqrt(det);
      break;
    }
    default: {
      // affine 3x3 reps: exact bottom row, real entries
      for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = Cplx(out(i, j).real(), 0);
      out(2, 0) = 0;
      out(2, 1) = 0;
      out(2, 2) = 1;
      if (alg == Algebra::heisenberg) {
        out(0, 0) = 1;
        out(1, 1) = 1;
        out(1, 0) = 0;
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<GroupSample> integrate_group(const LieSystem& sys, const ExtremalTrajectory& traj) {
  std::vector<GroupSample> out;
  if (traj.samples.empty()) return out;
  const auto& gen = sys.generators();
  GroupMat g = identity_like(gen[0]);
  out.push_back({traj.samples.front().t, g});
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& s0 = traj.samples[i - 1];
    const auto& s1 = traj.samples[i];
    const double dt = s1.t - s0.t;
    if (dt <= 0) {
      out.push_back({s1.t, g});
      continue;
    }
    const Vec2 u = 0.5 * (s0.u + s1.u);  // frozen midpoint control over the step
    const GroupMat xi = dt * (u.x() * gen[0] + u.y() * gen[1]);
    g = g * xi.exp();
    g = project_structure(sys.algebra(), g);
    out.push_back({s1.t, g});
  }
  return out;
}

double group_constraint_residual(const LieSystem& sys, const GroupMat& g) {
  switch (sys.algebra()) {
    case Algebra::su2: {
      const GroupMat r = g.adjoint() * g - identity_like(g);
      return r.cwiseAbs().maxCoeff();
    }
    case Algebra::sl2: {
      const Cplx det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
      return std::abs(det - Cplx(1, 0));
    }
    default: {
      double r = std::abs(g(2, 0)) + std::abs(g(2, 1)) + std::abs(g(2, 2) - Cplx(1, 0));
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) r += std::abs(g(i, j).imag());
      return r;
    }
  }
}

std::vector<double> flatten(const LieSystem& sys, const GroupMat& g) {
  std::vector<double> out;
  const bool cplx = sys.algebra() == Algebra::su2;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) {
      out.push_back(g(i, j).real());
      if (cplx) out.push_back(g(i, j).imag());
    }
  return out;
}

}  // namespace ctrig::lie3d
