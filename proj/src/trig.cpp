#include "ctrig/trig.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

namespace ctrig {

namespace {

// stay in double precision; the long-double promotion path is far too slow
// for per-query boundary evaluations
using FastPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

constexpr double kSplitTol = 1e-12;

Vec2 rot90(const Vec2& v) { return Vec2(-v.y(), v.x()); }

double ccw_angle(const Vec2& from, const Vec2& to) {
  return std::atan2(cross2(from, to), from.dot(to));
}

// One smooth piece of the compiled boundary. The intrinsic parameter u is
// piece-specific: segment fraction, classic angle, ellipse parameter, or the
// superellipse angle of an lp quadrant.
struct PieceGeom {
  enum class Kind { line, circ, ell, lp };
  Kind kind = Kind::line;

  Vec2 A = Vec2::Zero(), B = Vec2::Zero();  // line endpoints (rotated)
  double R = 0;                             // circ radius / lp scale
  double a = 0, b = 0;                      // ellipse semi-axes
  Vec2 center = Vec2::Zero();               // ellipse center (base frame)
  double rot = 0;                           // extra rotation (ell, lp)
  double p = 0;                             // lp exponent (finite, > 1)
  int quadrant = 0;                         // lp quadrant 0..3

  double u0 = 0, u1 = 0;
  double theta0 = 0, theta_len = 0;
  int origin_id = 0;

  // cached lp constants
  double lp_alpha = 0, lp_beta_complete = 0, lp_tau0 = 0;

  Mat2 frame() const {
    Mat2 m = rotation2(rot);
    if (kind == Kind::lp) m = m * rotation2(quadrant * M_PI / 2);
    return m;
  }

  Vec2 point_base(double u) const {
    switch (kind) {
      case Kind::line:
        return A + u * (B - A);
      case Kind::circ:
        return R * Vec2(std::cos(u), std::sin(u));
      case Kind::ell:
        return Vec2(a * std::cos(u) + center.x(), b * std::sin(u) + center.y());
      case Kind::lp: {
        double c = std::cos(u), s = std::sin(u);
        if (std::abs(c) < 1e-14) c = 0;  // pow would amplify the trig roundoff
        if (std::abs(s) < 1e-14) s = 0;
        return R * Vec2(std::pow(std::max(c, 0.0), 2 / p), std::pow(std::max(s, 0.0), 2 / p));
      }
    }
    return Vec2::Zero();
  }

  Vec2 point(double u) const {
    switch (kind) {
      case Kind::line:
      case Kind::circ:
        return point_base(u);
      default:
        return frame() * point_base(u);
    }
  }

  Vec2 dual(double u) const {
    switch (kind) {
      case Kind::line: {
        const Vec2 e = B - A;
        const Vec2 n(e.y(), -e.x());
        return n / n.dot(A);
      }
      case Kind::circ:
        return Vec2(std::cos(u), std::sin(u)) / R;
      case Kind::ell: {
        const double h = a * b + center.x() * b * std::cos(u) + center.y() * a * std::sin(u);
        return frame() * (Vec2(b * std::cos(u), a * std::sin(u)) / h);
      }
      case Kind::lp: {
        const double e = 2 * (p - 1) / p;
        double c = std::cos(u), s = std::sin(u);
        if (std::abs(c) < 1e-14) c = 0;
        if (std::abs(s) < 1e-14) s = 0;
        return frame() * (Vec2(std::pow(std::max(c, 0.0), e), std::pow(std::max(s, 0.0), e)) / R);
      }
    }
    return Vec2::Zero();
  }

  // Generalized-angle offset (twice the swept sector area) from u0 to u.
  double tau(double u) const {
    switch (kind) {
      case Kind::line:
        return (u - u0) * cross2(A, B);
      case Kind::circ:
        return R * R * (u - u0);
      case Kind::ell:
        return a * b * (u - u0) + center.x() * b * (std::sin(u) - std::sin(u0)) -
               center.y() * a * (std::cos(u) - std::cos(u0));
      case Kind::lp: {
        const double w = std::sin(u) * std::sin(u);
        const double cum = boost::math::ibeta(lp_alpha, lp_alpha, std::clamp(w, 0.0, 1.0), FastPolicy());
        return (R * R / p) * lp_beta_complete * cum - lp_tau0;
      }
    }
    return 0;
  }

  double theta_prime(double u) const {  // d tau / d u
    switch (kind) {
      case Kind::line:
        return cross2(A, B);
      case Kind::circ:
        return R * R;
      case Kind::ell:
        return a * b + center.x() * b * std::cos(u) + center.y() * a * std::sin(u);
      case Kind::lp: {
        const double c = std::cos(u), s = std::sin(u);
        return (2 * R * R / p) * std::pow(std::max(c * s, 0.0), 2 / p - 1);
      }
    }
    return 0;
  }

  double u_from_tau(double t) const {
    switch (kind) {
      case Kind::line:
        return u0 + t / cross2(A, B);
      case Kind::circ:
        return u0 + t / (R * R);
      case Kind::ell: {
        // Newton with bisection safeguard on the monotone area map.
        double lo = u0, hi = u1;
        double u = std::clamp(u0 + t / (a * b), lo, hi);
        for (int it = 0; it < 100; ++it) {
          const double f = tau(u) - t;
          if (f > 0)
            hi = u;
          else
            lo = u;
          double un = u - f / theta_prime(u);
          if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
          if (std::abs(un - u) < 1e-15 * std::max(1.0, std::abs(u))) return un;
          u = un;
        }
        return u;
      }
      case Kind::lp: {
        // safeguarded Newton on the monotone area map (the library inverse of
        // the incomplete beta is prohibitively slow near the endpoints)
        double lo = u0, hi = u1;
        double u = u0 + (u1 - u0) * std::clamp(t / std::max(theta_len, 1e-300), 0.0, 1.0);
        for (int it = 0; it < 80; ++it) {
          const double fval = tau(u) - t;
          if (fval > 0)
            hi = u;
          else
            lo = u;
          const double d = theta_prime(u);
          double un = (d > 1e-300) ? u - fval / d : 0.5 * (lo + hi);
          if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
          if (std::abs(un - u) < 1e-16 * std::max(1.0, std::abs(u))) return un;
          u = un;
        }
        return u;
      }
    }
    return 0;
  }

  void finalize() {
    if (kind == Kind::lp) {
      lp_alpha = 1 / p;
      lp_beta_complete = boost::math::beta(lp_alpha, lp_alpha, FastPolicy());
      lp_tau0 = 0;
      lp_tau0 = (R * R / p) * lp_beta_complete *
                boost::math::ibeta(lp_alpha, lp_alpha, std::clamp(std::sin(u0) * std::sin(u0), 0.0, 1.0),
                                   FastPolicy());
    }
    theta_len = tau(u1);
  }

  // Intrinsic parameter where the boundary crosses the ray along d (assumed
  // to cross within [u0, u1]).
  double u_at_ray(const Vec2& d) const {
    if (kind == Kind::line) {
      const double denom = cross2(d, A - B);
      if (std::abs(denom) < 1e-300) return u0;
      return std::clamp(cross2(d, A) / denom, 0.0, 1.0);
    }
    if (kind == Kind::circ) {
      double phi = std::atan2(d.y(), d.x());
      while (phi < u0 - 1e-12) phi += 2 * M_PI;
      return std::clamp(phi, u0, u1);
    }
    // A piece may subtend up to a full turn (whole ellipse), so the ray line
    // can cross it twice; scan for brackets and keep the root on the ray side.
    auto g = [&](double u) { return cross2(d, point(u)); };
    auto bisect = [&](double lo, double hi, double glo) {
      for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) <= 0) == (glo <= 0))
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    };
    const int m = 16;
    double best_u = u0, best_err = std::numeric_limits<double>::infinity();
    double prev_u = u0, prev_g = g(u0);
    for (int i = 0; i <= m; ++i) {
      const double u = (i == 0) ? u0 : u0 + (u1 - u0) * i / m;
      const double gu = (i == 0) ? prev_g : g(u);
      double cand = u;
      if (i > 0 && (gu <= 0) != (prev_g <= 0)) cand = bisect(prev_u, u, prev_g);
      const Vec2 P = point(cand);
      double err = std::abs(cross2(d.normalized(), P));
      if (d.dot(P) <= 0) err += 1e9;
      if (err < best_err) {
        best_err = err;
        best_u = cand;
      }
      prev_u = u;
      prev_g = gu;
    }
    return best_u;
  }

  // Classic-angle span covered by the piece (total winding over the loop is 2*pi).
  double phi_span() const {
    if (kind == Kind::circ) return u1 - u0;
    if (kind == Kind::line) return ccw_angle(A, B);
    double span = 0;
    Vec2 prev = point(u0);
    for (int i = 1; i <= 64; ++i) {
      const Vec2 cur = point(u0 + (u1 - u0) * i / 64.0);
      span += ccw_angle(prev, cur);
      prev = cur;
    }
    return span;
  }
};

struct Junction {
  double theta = 0;
  bool corner = false;
  Regularity reg;
  Vec2 dual_prev = Vec2::Zero(), dual_next = Vec2::Zero();
};

std::vector<PieceGeom> compile_loop(const ConvexBody& body) {
  std::vector<PieceGeom> out;
  int next_id = 0;
  auto add_line = [&](const Vec2& a, const Vec2& b) {
    PieceGeom g;
    g.kind = PieceGeom::Kind::line;
    g.A = a;
    g.B = b;
    g.u0 = 0;
    g.u1 = 1;
    g.origin_id = next_id++;
    out.push_back(g);
  };
  if (const auto* poly = body.get_if<Polygon>()) {
    const int n = static_cast<int>(poly->vertices.size());
    for (int i = 0; i < n; ++i) add_line(poly->vertices[i], poly->vertices[(i + 1) % n]);
  } else if (const auto* d = body.get_if<Disc>()) {
    PieceGeom g;
    g.kind = PieceGeom::Kind::circ;
    g.R = d->radius;
    g.u0 = 0;
    g.u1 = 2 * M_PI;
    g.origin_id = next_id++;
    out.push_back(g);
  } else if (const auto* e = body.get_if<Ellipse>()) {
    PieceGeom g;
    g.kind = PieceGeom::Kind::ell;
    g.a = e->a;
    g.b = e->b;
    g.center = e->center;
    g.rot = e->rotation;
    g.u0 = 0;
    g.u1 = 2 * M_PI;
    g.origin_id = next_id++;
    out.push_back(g);
  } else if (const auto* lp = body.get_if<LpBall>()) {
    if (lp->p == 1.0 || std::isinf(lp->p)) {
      const Mat2 r = rotation2(lp->rotation);
      std::vector<Vec2> vs;
      if (lp->p == 1.0)
        vs = {{lp->scale, 0}, {0, lp->scale}, {-lp->scale, 0}, {0, -lp->scale}};
      else
        vs = {{lp->scale, -lp->scale}, {lp->scale, lp->scale}, {-lp->scale, lp->scale}, {-lp->scale, -lp->scale}};
      for (auto& v : vs) v = r * v;
      for (int i = 0; i < 4; ++i) add_line(vs[i], vs[(i + 1) % 4]);
    } else {
      for (int k = 0; k < 4; ++k) {
        PieceGeom g;
        g.kind = PieceGeom::Kind::lp;
        g.R = lp->scale;
        g.p = lp->p;
        g.rot = lp->rotation;
        g.quadrant = k;
        g.u0 = 0;
        g.u1 = M_PI / 2;
        g.origin_id = next_id++;
        out.push_back(g);
      }
    }
  } else if (const auto* c = body.get_if<Composite>()) {
    const Mat2 r = rotation2(c->rotation);
    for (const Arc& arc : c->arcs) {
      if (arc.kind == Arc::Kind::circle) {
        PieceGeom g;
        g.kind = PieceGeom::Kind::circ;
        g.R = arc.radius;
        g.u0 = arc.phi0 + c->rotation;
        g.u1 = arc.phi1 + c->rotation;
        g.origin_id = next_id++;
        out.push_back(g);
      } else {
        add_line(r * arc.a, r * arc.b);
      }
    }
  }
  for (auto& g : out) g.finalize();
  return out;
}

}  // namespace

struct TrigTable::Impl {
  std::vector<PieceGeom> pieces;
  std::vector<Junction> junctions;  // junction k sits at the start of piece k
  std::vector<double> phi_starts;   // unwrapped; phi_starts[0] = 0, size n+1
  double period = 0;

  double reduce(double theta, long* cycles = nullptr) const {
    double k = std::floor(theta / period);
    double r = theta - k * period;
    if (r >= period) {
      r -= period;
      k += 1;
    }
    if (r < 0) r = 0;
    if (cycles) *cycles = static_cast<long>(k);
    return r;
  }

  int piece_at_theta(double tr) const {
    int lo = 0, hi = static_cast<int>(pieces.size()) - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (pieces[mid].theta0 <= tr)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  int junction_near(double tr, double tol) const {
    const int n = static_cast<int>(pieces.size());
    const int k = piece_at_theta(tr);
    if (tr - pieces[k].theta0 <= tol) return k;
    const double next_theta = (k + 1 < n) ? pieces[k + 1].theta0 : period;
    if (next_theta - tr <= tol) return (k + 1) % n;
    return -1;
  }

  int piece_at_phi(double phi) const {
    const double two_pi = 2 * M_PI;
    double pr = std::fmod(phi, two_pi);
    if (pr < 0) pr += two_pi;
    int lo = 0, hi = static_cast<int>(pieces.size()) - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (phi_starts[mid] <= pr)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }
};

TrigTable::TrigTable(ConvexBody body, int resolution) : body_(std::move(body)), resolution_(resolution) {
  impl_ = std::make_shared<Impl>();
  auto loop = compile_loop(body_);

  // Locate the positive-x-axis crossing and rebase the loop there.
  std::vector<double> spans;
  double phi0 = std::atan2(loop[0].point(loop[0].u0).y(), loop[0].point(loop[0].u0).x());
  for (auto& g : loop) spans.push_back(g.phi_span());
  const double target = phi0 <= 0 ? 0.0 : 2 * M_PI;
  double cursor = phi0;
  size_t crossing = 0;
  for (size_t i = 0; i < loop.size(); ++i) {
    if (cursor <= target && target < cursor + spans[i] + 1e-15) {
      crossing = i;
      break;
    }
    cursor += spans[i];
  }
  PieceGeom& cp = loop[crossing];
  const double ustar = cp.u_at_ray(Vec2(1, 0));
  std::vector<PieceGeom> pieces;
  const size_t n0 = loop.size();
  const double urel = (ustar - cp.u0) / std::max(cp.u1 - cp.u0, 1e-300);
  if (urel <= kSplitTol) {
    for (size_t i = 0; i < n0; ++i) pieces.push_back(loop[(crossing + i) % n0]);
  } else if (urel >= 1 - kSplitTol) {
    for (size_t i = 0; i < n0; ++i) pieces.push_back(loop[(crossing + 1 + i) % n0]);
  } else {
    PieceGeom head = cp, tail = cp;
    head.u0 = ustar;
    tail.u1 = ustar;
    head.finalize();
    tail.finalize();
    pieces.push_back(head);
    for (size_t i = 1; i < n0; ++i) pieces.push_back(loop[(crossing + i) % n0]);
    pieces.push_back(tail);
  }

  // Generalized-angle accumulation; the total is twice the enclosed area.
  double theta = 0;
  for (auto& g : pieces) {
    g.theta0 = theta;
    theta += g.theta_len;
  }
  impl_->period = theta;
  period_ = theta;
  area_ = theta / 2;

  impl_->phi_starts.assign(pieces.size() + 1, 0.0);
  for (size_t i = 0; i < pieces.size(); ++i)
    impl_->phi_starts[i + 1] = impl_->phi_starts[i] + pieces[i].phi_span();

  const int n = static_cast<int>(pieces.size());
  impl_->junctions.resize(n);
  for (int k = 0; k < n; ++k) {
    const PieceGeom& prev = pieces[(k + n - 1) % n];
    const PieceGeom& cur = pieces[k];
    Junction j;
    j.theta = cur.theta0;
    j.dual_prev = prev.dual(prev.u1);
    j.dual_next = cur.dual(cur.u0);
    const double gap = ccw_angle(j.dual_prev, j.dual_next);
    j.corner = gap > 1e-9;
    if (j.corner) {
      j.reg.kind = Regularity::Kind::corner;
    } else if (prev.origin_id == cur.origin_id) {
      j.reg.kind = Regularity::Kind::smooth;
    } else if (prev.kind == PieceGeom::Kind::lp && cur.kind == PieceGeom::Kind::lp && prev.p == cur.p) {
      if (cur.p < 2) {
        j.reg.kind = Regularity::Kind::power;
        j.reg.exponent = cur.p;
      } else {
        j.reg.kind = Regularity::Kind::smooth;
      }
    } else if (prev.kind == PieceGeom::Kind::circ && cur.kind == PieceGeom::Kind::circ &&
               std::abs(prev.R - cur.R) < 1e-12) {
      j.reg.kind = Regularity::Kind::smooth;
    } else {
      j.reg.kind = Regularity::Kind::curvature_jump;
    }
    impl_->junctions[k] = j;
  }
  impl_->pieces = std::move(pieces);
}

std::shared_ptr<const TrigTable> TrigTable::build(const ConvexBody& body, int resolution) {
  if (resolution < 64) throw std::invalid_argument("trig table resolution must be at least 64");
  return std::shared_ptr<const TrigTable>(new TrigTable(body, resolution));
}

Vec2 TrigTable::cos_sin(double theta) const {
  const Impl& im = *impl_;
  const double tr = im.reduce(theta);
  const PieceGeom& g = im.pieces[im.piece_at_theta(tr)];
  return g.point(g.u_from_tau(tr - g.theta0));
}

Vec2 TrigTable::dual_below(double theta) const {
  const Impl& im = *impl_;
  const double tr = im.reduce(theta);
  const int j = im.junction_near(tr, 1e-12 * period_);
  if (j >= 0) return im.junctions[j].dual_prev;
  const PieceGeom& g = im.pieces[im.piece_at_theta(tr)];
  return g.dual(g.u_from_tau(tr - g.theta0));
}

Vec2 TrigTable::dual_above(double theta) const {
  const Impl& im = *impl_;
  const double tr = im.reduce(theta);
  const int j = im.junction_near(tr, 1e-12 * period_);
  if (j >= 0) return im.junctions[j].dual_next;
  const PieceGeom& g = im.pieces[im.piece_at_theta(tr)];
  return g.dual(g.u_from_tau(tr - g.theta0));
}

double TrigTable::angle_at_direction(const Vec2& dir) const {
  const Impl& im = *impl_;
  const int k = im.piece_at_phi(std::atan2(dir.y(), dir.x()));
  const int n = static_cast<int>(im.pieces.size());
  const Vec2 d = dir.normalized();
  double best_theta = 0, best_err = std::numeric_limits<double>::infinity();
  for (int off : {0, 1, -1}) {
    const PieceGeom& g = im.pieces[((k + off) % n + n) % n];
    const double u = g.u_at_ray(dir);
    const Vec2 P = g.point(u);
    double err = std::abs(cross2(d, P));
    if (d.dot(P) <= 0) err += 1e9;
    if (err < best_err) {
      best_err = err;
      best_theta = g.theta0 + g.tau(u);
    }
  }
  return im.reduce(best_theta);
}

double TrigTable::angle_at_direction(double phi) const {
  return angle_at_direction(Vec2(std::cos(phi), std::sin(phi)));
}

double TrigTable::angle_of_point(const Vec2& pt) const {
  if (pt.squaredNorm() == 0) throw NumericError("angle_of_point: origin has no angle");
  return angle_at_direction(pt);
}

std::vector<double> TrigTable::breakpoints() const {
  std::vector<double> out;
  for (const auto& j : impl_->junctions) out.push_back(j.theta);
  return out;
}

std::vector<double> TrigTable::corner_angles() const {
  std::vector<double> out;
  for (const auto& j : impl_->junctions)
    if (j.corner) out.push_back(j.theta);
  return out;
}

Regularity TrigTable::regularity_at(double theta) const {
  const Impl& im = *impl_;
  const double tr = im.reduce(theta);
  const int j = im.junction_near(tr, 1e-9 * period_);
  if (j >= 0) return im.junctions[j].reg;
  return Regularity{};
}

TrigTable::LinearSpan TrigTable::linear_span(double theta) const {
  const Impl& im = *impl_;
  const double tr = im.reduce(theta);
  const int n = static_cast<int>(im.pieces.size());
  int k = im.piece_at_theta(tr);
  if (im.pieces[k].kind != PieceGeom::Kind::line) return {};
  // merge pieces split from the same original edge (only across the seam)
  int klo = k, khi = k;
  double lo_shift = 0, hi_shift = 0;
  while (n > 1) {
    const int prev = (klo + n - 1) % n;
    if (prev == khi || im.junctions[klo].corner || im.pieces[prev].origin_id != im.pieces[klo].origin_id ||
        im.pieces[prev].kind != PieceGeom::Kind::line)
      break;
    klo = prev;
    if (klo > k) lo_shift = -period_;
    if (klo == k) break;
  }
  while (n > 1) {
    const int next = (khi + 1) % n;
    if (next == klo || im.junctions[next].corner || im.pieces[next].origin_id != im.pieces[khi].origin_id ||
        im.pieces[next].kind != PieceGeom::Kind::line)
      break;
    khi = next;
    if (khi < k) hi_shift = period_;
    if (khi == k) break;
  }
  const PieceGeom& g = im.pieces[k];
  const Vec2 slope = (g.point(g.u1) - g.point(g.u0)) / g.theta_len;
  LinearSpan span;
  span.linear = true;
  span.slope = slope;
  span.origin = g.point(g.u0) - g.theta0 * slope;
  span.theta0 = im.pieces[klo].theta0 + lo_shift;
  span.theta1 = (khi + 1 < n ? im.pieces[khi + 1].theta0 : period_) + hi_shift;
  // express in the caller's unreduced coordinate
  const double offset = theta - tr;
  span.theta0 += offset;
  span.theta1 += offset;
  span.origin -= offset * slope;
  return span;
}

namespace {

Vec2 adaptive_piece_integral(const PieceGeom& g, double ua, double ub) {
  auto f = [&](double u) -> Vec2 { return g.point(u) * g.theta_prime(u); };
  std::function<Vec2(double, double, const Vec2&, const Vec2&, const Vec2&, const Vec2&, int)> rec =
      [&](double a, double b, const Vec2& va, const Vec2& vm, const Vec2& vb, const Vec2& whole,
          int depth) -> Vec2 {
    const double m = 0.5 * (a + b);
    const Vec2 vlm = f(0.5 * (a + m)), vrm = f(0.5 * (m + b));
    const Vec2 left = (m - a) / 6.0 * (va + 4 * vlm + vm);
    const Vec2 right = (b - m) / 6.0 * (vm + 4 * vrm + vb);
    if (depth <= 0 || (left + right - whole).norm() < 1e-13 * (1 + whole.norm()))
      return left + right + (left + right - whole) / 15.0;
    return rec(a, m, va, vlm, vm, left, depth - 1) + rec(m, b, vm, vrm, vb, right, depth - 1);
  };
  const double um = 0.5 * (ua + ub);
  const Vec2 fa = f(ua), fm = f(um), fb = f(ub);
  const Vec2 whole = (ub - ua) / 6.0 * (fa + 4 * fm + fb);
  return rec(ua, ub, fa, fm, fb, whole, 30);
}

Vec2 piece_integral(const PieceGeom& g, double ta, double tb) {
  // integral of the boundary point over local generalized angle [ta, tb]
  const double ua = g.u_from_tau(ta), ub = g.u_from_tau(tb);
  switch (g.kind) {
    case PieceGeom::Kind::line:
      return (0.5 * (g.point(ua) + g.point(ub)) * (tb - ta)).eval();
    case PieceGeom::Kind::circ:
      return g.R * g.R * g.R * Vec2(std::sin(ub) - std::sin(ua), std::cos(ua) - std::cos(ub));
    default:
      return adaptive_piece_integral(g, ua, ub);
  }
}

}  // namespace

Vec2 TrigTable::integral_cos_sin(double t0, double t1) const {
  if (t1 < t0) return (-integral_cos_sin(t1, t0)).eval();
  const Impl& im = *impl_;
  Vec2 acc = Vec2::Zero();
  const double n_per = std::floor((t1 - t0) / period_);
  if (n_per > 0) {
    Vec2 full = Vec2::Zero();
    for (const auto& g : im.pieces) full += piece_integral(g, 0, g.theta_len);
    acc += n_per * full;
    t1 -= n_per * period_;
  }
  const double r0 = im.reduce(t0);
  double r1 = r0 + (t1 - t0);
  if (r1 > period_) {
    acc += integral_cos_sin(r0, period_);
    acc += integral_cos_sin(0, r1 - period_);
    return acc;
  }
  const int k0 = im.piece_at_theta(r0);
  const int k1 = im.piece_at_theta(std::min(r1, period_ * (1 - 1e-16)));
  for (int k = k0; k <= k1; ++k) {
    const PieceGeom& g = im.pieces[k];
    const double a = std::max(r0, g.theta0) - g.theta0;
    const double b = std::min(r1, g.theta0 + g.theta_len) - g.theta0;
    if (b > a) acc += piece_integral(g, a, b);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// TrigPair
// ---------------------------------------------------------------------------

TrigPair TrigPair::build(const ConvexBody& body, int resolution) {
  TrigPair pair;
  pair.primal_ = TrigTable::build(body, resolution);
  pair.polar_ = TrigTable::build(ctrig::polar(body, std::max(resolution, 4096)), resolution);
  pair.build_chain();
  return pair;
}

TrigPair TrigPair::from_tables(TrigTablePtr primal, TrigTablePtr polar) {
  TrigPair pair;
  pair.primal_ = std::move(primal);
  pair.polar_ = std::move(polar);
  pair.build_chain();
  return pair;
}

TrigPair TrigPair::swapped() const {
  TrigPair pair;
  pair.primal_ = polar_;
  pair.polar_ = primal_;
  pair.build_chain();
  return pair;
}

void TrigPair::build_chain() {
  chain_.clear();
  const auto& im = primal_->impl();
  const double Sp2 = polar_->period();
  const int n = static_cast<int>(im.pieces.size());

  auto polar_angle = [&](const Vec2& q) { return polar_->angle_of_point(q); };

  // anchor at theta = 0: lower interval end of the dual angle
  const Junction& j0 = im.junctions[0];
  const double b0 = polar_angle(j0.dual_next);
  double a0 = b0;
  if (j0.corner) {
    const double raw_prev = polar_angle(j0.dual_prev);
    double gap = b0 - raw_prev;
    gap -= Sp2 * std::floor(gap / Sp2);
    a0 = b0 - gap;
  }
  anchor_polar_ = a0;
  if (j0.corner) {
    Node node;
    node.theta = {0, 0};
    node.theta_polar = {a0, b0};
    node.primal_corner = true;
    chain_.push_back(node);
  }

  double W = b0;
  for (int k = 0; k < n; ++k) {
    const PieceGeom& g = im.pieces[k];
    Node node;
    node.theta = {g.theta0, g.theta0 + g.theta_len};
    if (g.kind == PieceGeom::Kind::line) {
      node.theta_polar = {W, W};
      node.linear_span = true;
    } else {
      // march anchors along the piece, refining until consecutive polar-angle
      // gaps are small enough to make the unwrap unambiguous
      int m = 16;
      std::vector<std::pair<double, double>> anchors;
      for (;; m *= 2) {
        anchors.clear();
        anchors.emplace_back(g.theta0, W);
        double prev = W;
        double max_gap = 0;
        for (int i = 1; i <= m; ++i) {
          const double u = g.u0 + (g.u1 - g.u0) * i / m;
          const double th = g.theta0 + g.tau(u);
          const double raw = polar_angle(g.dual(u));
          double v = raw + Sp2 * std::ceil((prev - raw) / Sp2 - 1e-12);
          if (v < prev) v += Sp2;
          max_gap = std::max(max_gap, v - prev);
          anchors.emplace_back(th, v);
          prev = v;
        }
        if (max_gap <= Sp2 / 4 || m >= 4096) break;
      }
      node.anchors = std::move(anchors);
      node.theta_polar = {W, node.anchors.back().second};
      W = node.theta_polar.hi;
    }
    chain_.push_back(node);
    if (k + 1 < n) {
      const Junction& jn = im.junctions[k + 1];
      if (jn.corner) {
        double gap = polar_angle(jn.dual_next) - polar_angle(jn.dual_prev);
        gap -= Sp2 * std::floor(gap / Sp2);
        Node cn;
        cn.theta = {jn.theta, jn.theta};
        cn.theta_polar = {W, W + gap};
        cn.primal_corner = true;
        chain_.push_back(cn);
        W += gap;
      }
    }
  }
}

namespace {
double snap_tol(const TrigTable& t) { return 1e-11 * t.period(); }
}  // namespace

Interval TrigPair::theta_polar_interval(double theta) const {
  const auto& im = primal_->impl();
  long cycles;
  const double tr = im.reduce(theta, &cycles);
  const double shift = cycles * polar_->period();
  const double tol = snap_tol(*primal_);

  for (const Node& node : chain_) {
    if (node.primal_corner && std::abs(node.theta.lo - tr) <= tol)
      return {node.theta_polar.lo + shift, node.theta_polar.hi + shift};
  }
  if (primal_->period() - tr <= tol && !chain_.empty() && chain_.front().primal_corner) {
    const Node& node = chain_.front();
    return {node.theta_polar.lo + shift + polar_->period(), node.theta_polar.hi + shift + polar_->period()};
  }
  for (const Node& node : chain_) {
    if (node.primal_corner) continue;
    if (tr >= node.theta.lo - tol && tr <= node.theta.hi + tol) {
      if (node.linear_span) return {node.theta_polar.lo + shift, node.theta_polar.lo + shift};
      const double v = polar_raw_unwrapped(tr, node) + shift;
      return {v, v};
    }
  }
  throw NumericError("correspondence lookup failed");
}

double TrigPair::polar_raw_unwrapped(double tr, const Node& node) const {
  const double raw = polar_->angle_of_point(primal_->dual_above(tr));
  const double Sp2 = polar_->period();
  // bracket by anchors; their gaps are < Sp2/2 so the unwrap is unique
  const auto& an = node.anchors;
  auto it = std::upper_bound(an.begin(), an.end(), tr,
                             [](double x, const std::pair<double, double>& a) { return x < a.first; });
  const size_t hi = std::min<size_t>(std::max<ptrdiff_t>(it - an.begin(), 1), an.size() - 1);
  const auto& a0 = an[hi - 1];
  const auto& a1 = an[hi];
  const double frac = (tr - a0.first) / std::max(a1.first - a0.first, 1e-300);
  const double est = a0.second + std::clamp(frac, 0.0, 1.0) * (a1.second - a0.second);
  const double v = raw + Sp2 * std::round((est - raw) / Sp2);
  return std::clamp(v, node.theta_polar.lo, node.theta_polar.hi);
}

double TrigPair::theta_polar(double theta) const { return theta_polar_interval(theta).lo; }

Interval TrigPair::theta_primal_interval(double theta_polar) const {
  const double Sp2 = polar_->period();
  const double S2 = primal_->period();
  const double c = std::floor((theta_polar - anchor_polar_) / Sp2);
  const double tpr = theta_polar - c * Sp2;  // within [anchor, anchor + Sp2)
  const double shift = c * S2;
  const double tol = snap_tol(*polar_);

  // Edges produce a constant polar angle; prefer them (they carry the full
  // interval) and try both period representatives to cover window-boundary ties.
  for (int rep = 0; rep < 3; ++rep) {
    const double probe = tpr + (rep == 1 ? Sp2 : rep == 2 ? -Sp2 : 0.0);
    const double rep_shift = shift + (rep == 1 ? -S2 : rep == 2 ? S2 : 0.0);
    for (const Node& node : chain_) {
      if (node.primal_corner || !node.linear_span) continue;
      if (std::abs(node.theta_polar.lo - probe) > tol) continue;
      double lo = node.theta.lo;
      double hi = node.theta.hi;
      // an edge split by the seam at theta = 0 continues as the last node
      const Node& back = chain_.back();
      if (lo == 0 && &node != &back && back.linear_span &&
          std::abs(back.theta_polar.lo - (probe + Sp2)) <= tol)
        lo = back.theta.lo - S2;
      const Node& front = chain_.front();
      if (hi == primal_->period() && &node != &front && front.linear_span &&
          std::abs(front.theta_polar.lo - (probe - Sp2)) <= tol)
        hi = front.theta.hi + S2;
      return {lo + rep_shift, hi + rep_shift};
    }
  }
  for (const Node& node : chain_) {
    if (tpr >= node.theta_polar.lo - tol && tpr <= node.theta_polar.hi + tol) {
      if (node.primal_corner) return {node.theta.lo + shift, node.theta.lo + shift};
      if (node.linear_span) return {node.theta.lo + shift, node.theta.hi + shift};
      const double v = primal_raw_unwrapped(tpr, node) + shift;
      return {v, v};
    }
  }
  throw NumericError("inverse correspondence lookup failed");
}

double TrigPair::primal_raw_unwrapped(double tpr, const Node& node) const {
  // supporting covector of the polar at tpr is a primal boundary point
  const Vec2 P = polar_->dual_above(tpr);
  const double raw = primal_->angle_of_point(P);
  const double S2 = primal_->period();
  const auto& an = node.anchors;
  auto it = std::upper_bound(an.begin(), an.end(), tpr,
                             [](double x, const std::pair<double, double>& a) { return x < a.second; });
  const size_t hi = std::min<size_t>(std::max<ptrdiff_t>(it - an.begin(), 1), an.size() - 1);
  const auto& a0 = an[hi - 1];
  const auto& a1 = an[hi];
  const double frac = (tpr - a0.second) / std::max(a1.second - a0.second, 1e-300);
  const double est = a0.first + std::clamp(frac, 0.0, 1.0) * (a1.first - a0.first);
  const double v = raw + S2 * std::round((est - raw) / S2);
  return std::clamp(v, node.theta.lo, node.theta.hi);
}

double TrigPair::theta_primal(double theta_polar) const { return theta_primal_interval(theta_polar).lo; }

bool TrigPair::is_corner(double theta, double tol_scale) const {
  return theta_polar_interval(theta).length() > tol_scale * polar_->period();
}

bool TrigPair::is_polar_corner(double theta_polar, double tol_scale) const {
  return theta_primal_interval(theta_polar).length() > tol_scale * primal_->period();
}

std::pair<Vec2, Vec2> TrigPair::derivative(double theta) const {
  const Interval ip = theta_polar_interval(theta);
  return {rot90(polar_->cos_sin(ip.lo)), rot90(polar_->cos_sin(ip.hi))};
}

double TrigPair::dtheta_polar_dtheta(double theta) const {
  if (is_corner(theta)) throw NumericError("correspondence not differentiable at a corner");
  const auto& im = primal_->impl();
  const double tr = im.reduce(theta);
  const PieceGeom& g = im.pieces[im.piece_at_theta(tr)];
  switch (g.kind) {
    case PieceGeom::Kind::line:
      return 0;
    case PieceGeom::Kind::circ:
      return 1.0 / (g.R * g.R * g.R * g.R);
    case PieceGeom::Kind::ell:
      if (g.center.squaredNorm() == 0) return 1.0 / (g.a * g.a * g.b * g.b);
      break;
    default:
      break;
  }
  const double h = 1e-6 * primal_->period();
  return (theta_polar_interval(theta + h).lo - theta_polar_interval(theta - h).hi) / (2 * h);
}

double TrigPair::curvature(double theta) const {
  const double d = dtheta_polar_dtheta(theta);
  const Vec2 q = polar_->cos_sin(theta_polar(theta));
  return std::pow(q.squaredNorm(), -1.5) * d;
}

std::pair<double, double> TrigPair::polar_decompose(const Vec2& point) const {
  if (point.squaredNorm() == 0) throw NumericError("polar_decompose: origin");
  const double r = gauge(primal_->body(), point);
  const double theta = primal_->angle_of_point(point / r);
  return {r, theta};
}

TrigPair::SupportSet TrigPair::support_set(const Vec2& dir) const {
  SupportSet out;
  out.value = support(primal_->body(), dir);
  // dir / value lies on the polar boundary; its correspondence interval is
  // exactly the argmax set on the primal boundary
  const double tp = polar_->angle_of_point(dir / out.value);
  out.theta = theta_primal_interval(tp);
  return out;
}

}  // namespace ctrig
