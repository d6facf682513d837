#include "ctrig/geometry.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace ctrig {

namespace {

constexpr double kJoinTol = 1e-9;

double wrap_angle(double phi) {
  const double two_pi = 2 * M_PI;
  double w = std::fmod(phi, two_pi);
  if (w < 0) w += two_pi;
  return w;
}

bool is_inf(double p) { return std::isinf(p); }

// Exponent conjugate to p, with 1 <-> inf.
double conjugate_exponent(double p) {
  if (is_inf(p)) return 1.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double lp_dual_norm(const Vec2& d, double p) {
  const double q = conjugate_exponent(p);
  const double ax = std::abs(d.x()), ay = std::abs(d.y());
  if (is_inf(q)) return std::max(ax, ay);
  if (q == 1.0) return ax + ay;
  return std::pow(std::pow(ax, q) + std::pow(ay, q), 1.0 / q);
}

double lp_norm(const Vec2& x, double p) {
  const double ax = std::abs(x.x()), ay = std::abs(x.y());
  if (is_inf(p)) return std::max(ax, ay);
  if (p == 1.0) return ax + ay;
  return std::pow(std::pow(ax, p) + std::pow(ay, p), 1.0 / p);
}

std::vector<Vec2> drop_collinear(std::vector<Vec2> v) {
  std::vector<Vec2> out;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& prev = v[(i + n - 1) % n];
    const Vec2& cur = v[i];
    const Vec2& next = v[(i + 1) % n];
    const double c = cross2(cur - prev, next - cur);
    const double scale = (cur - prev).norm() * (next - cur).norm();
    if (c > 1e-14 * std::max(1.0, scale)) out.push_back(cur);
  }
  return out;
}

void validate_polygon(const Polygon& poly) {
  if (poly.vertices.size() < 3) throw BodyError("polygon needs at least 3 vertices");
  const int n = static_cast<int>(poly.vertices.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    const Vec2& c = poly.vertices[(i + 2) % n];
    if (cross2(b - a, c - b) <= 0) throw BodyError("polygon vertices must be strictly convex counterclockwise");
    // origin strictly inside every edge half-plane
    if (cross2(b - a, -a) <= 0) throw BodyError("origin not strictly inside polygon");
  }
}

void validate_ellipse(const Ellipse& e) {
  if (!(e.a > 0) || !(e.b > 0)) throw BodyError("ellipse semi-axes must be positive");
  const double r2 = (e.center.x() / e.a) * (e.center.x() / e.a) + (e.center.y() / e.b) * (e.center.y() / e.b);
  if (!(r2 < 1)) throw BodyError("origin not strictly inside ellipse");
}

Vec2 arc_point(const Arc& arc, bool end) {
  if (arc.kind == Arc::Kind::circle) {
    const double phi = end ? arc.phi1 : arc.phi0;
    return arc.radius * Vec2(std::cos(phi), std::sin(phi));
  }
  return end ? arc.b : arc.a;
}

void validate_composite(const Composite& comp) {
  if (comp.arcs.size() < 2) throw BodyError("composite needs at least 2 arcs");
  const int n = static_cast<int>(comp.arcs.size());
  for (int i = 0; i < n; ++i) {
    const Arc& arc = comp.arcs[i];
    if (arc.kind == Arc::Kind::circle) {
      if (!(arc.radius > 0)) throw BodyError("composite circle arc needs positive radius");
      if (!(arc.phi1 > arc.phi0)) throw BodyError("composite circle arc must run counterclockwise");
    } else {
      if ((arc.b - arc.a).norm() < kJoinTol) throw BodyError("composite segment is degenerate");
      if (cross2(arc.a, arc.b) <= 0) throw BodyError("composite segment not counterclockwise around origin");
    }
    const Vec2 e = arc_point(arc, true);
    const Vec2 s = arc_point(comp.arcs[(i + 1) % n], false);
    if ((e - s).norm() > kJoinTol * std::max(1.0, e.norm()))
      throw BodyError("composite arcs do not join into a closed curve");
  }
  // Convexity: outward tangent direction must rotate monotonically CCW across
  // junctions; within circle arcs it does by construction.
  auto tangent_end = [](const Arc& a) -> Vec2 {
    if (a.kind == Arc::Kind::circle) return Vec2(-std::sin(a.phi1), std::cos(a.phi1));
    return (a.b - a.a).normalized();
  };
  auto tangent_start = [](const Arc& a) -> Vec2 {
    if (a.kind == Arc::Kind::circle) return Vec2(-std::sin(a.phi0), std::cos(a.phi0));
    return (a.b - a.a).normalized();
  };
  for (int i = 0; i < n; ++i) {
    const Vec2 t0 = tangent_end(comp.arcs[i]);
    const Vec2 t1 = tangent_start(comp.arcs[(i + 1) % n]);
    if (cross2(t0, t1) < -kJoinTol) throw BodyError("composite boundary is not convex at a junction");
  }
}

}  // namespace

Vec2 Arc::start() const { return arc_point(*this, false); }
Vec2 Arc::end() const { return arc_point(*this, true); }

ConvexBody::ConvexBody(Variant v) : v_(std::move(v)) {
  if (auto* poly = std::get_if<Polygon>(&v_)) {
    poly->vertices = drop_collinear(std::move(poly->vertices));
    validate_polygon(*poly);
  } else if (auto* e = std::get_if<Ellipse>(&v_)) {
    validate_ellipse(*e);
  } else if (auto* lp = std::get_if<LpBall>(&v_)) {
    if (!(lp->p >= 1)) throw BodyError("lp exponent must be in [1, inf]");
    if (!(lp->scale > 0)) throw BodyError("lp scale must be positive");
  } else if (auto* d = std::get_if<Disc>(&v_)) {
    if (!(d->radius > 0)) throw BodyError("disc radius must be positive");
  } else if (auto* c = std::get_if<Composite>(&v_)) {
    validate_composite(*c);
  }
}

std::string ConvexBody::kind() const {
  struct V {
    std::string operator()(const Polygon&) const { return "polygon"; }
    std::string operator()(const Ellipse&) const { return "ellipse"; }
    std::string operator()(const LpBall&) const { return "lp"; }
    std::string operator()(const Disc&) const { return "disc"; }
    std::string operator()(const Composite&) const { return "composite"; }
  };
  return std::visit(V{}, v_);
}

ConvexBody ConvexBody::polygon(std::vector<Vec2> vertices) { return ConvexBody(Polygon{std::move(vertices)}); }
ConvexBody ConvexBody::ellipse(double a, double b, Vec2 center, double rotation) {
  return ConvexBody(Ellipse{a, b, center, rotation});
}
ConvexBody ConvexBody::lp_ball(double p, double scale, double rotation) {
  return ConvexBody(LpBall{p, scale, rotation});
}
ConvexBody ConvexBody::disc(double radius) { return ConvexBody(Disc{radius}); }
ConvexBody ConvexBody::composite(std::vector<Arc> arcs, double rotation) {
  return ConvexBody(Composite{std::move(arcs), rotation});
}

ConvexBody ConvexBody::cut_disc(double radius, double cut) {
  if (!(radius > 0) || !(cut > 0) || !(cut < radius)) throw BodyError("cut_disc needs 0 < cut < radius");
  const double phi = std::acos(cut / radius);
  const double y = radius * std::sin(phi);
  std::vector<Arc> arcs;
  Arc circ;
  circ.kind = Arc::Kind::circle;
  circ.radius = radius;
  circ.phi0 = phi;
  circ.phi1 = 2 * M_PI - phi;
  Arc chord;
  chord.kind = Arc::Kind::segment;
  chord.a = Vec2(cut, -y);
  chord.b = Vec2(cut, y);
  arcs.push_back(chord);
  arcs.push_back(circ);
  return composite(std::move(arcs));
}

// ---------------------------------------------------------------------------

double support(const ConvexBody& body, const Vec2& direction) {
  struct V {
    const Vec2& d;
    double operator()(const Polygon& poly) const {
      double best = -std::numeric_limits<double>::infinity();
      for (const Vec2& v : poly.vertices) best = std::max(best, d.dot(v));
      return best;
    }
    double operator()(const Ellipse& e) const {
      const Vec2 dl = rotation2(-e.rotation) * d;
      return d.dot(rotation2(e.rotation) * e.center) +
             std::sqrt(e.a * e.a * dl.x() * dl.x() + e.b * e.b * dl.y() * dl.y());
    }
    double operator()(const LpBall& lp) const {
      const Vec2 dl = rotation2(-lp.rotation) * d;
      return lp.scale * lp_dual_norm(dl, lp.p);
    }
    double operator()(const Disc& disc) const { return disc.radius * d.norm(); }
    double operator()(const Composite& c) const {
      const Vec2 dl = rotation2(-c.rotation) * d;
      double best = -std::numeric_limits<double>::infinity();
      for (const Arc& arc : c.arcs) {
        if (arc.kind == Arc::Kind::segment) {
          best = std::max(best, std::max(dl.dot(arc.a), dl.dot(arc.b)));
        } else {
          const double phid = std::atan2(dl.y(), dl.x());
          // direction inside the arc's angular range (mod 2pi)?
          double rel = wrap_angle(phid - arc.phi0);
          if (rel <= arc.phi1 - arc.phi0)
            best = std::max(best, arc.radius * dl.norm());
          else
            best = std::max(best, std::max(dl.dot(arc.start()), dl.dot(arc.end())));
        }
      }
      return best;
    }
  };
  if (direction.squaredNorm() == 0) return 0;
  return std::visit(V{direction}, body.variant());
}

double gauge(const ConvexBody& body, const Vec2& point) {
  struct V {
    const Vec2& x;
    double operator()(const Polygon& poly) const {
      double g = 0;
      const int n = static_cast<int>(poly.vertices.size());
      for (int i = 0; i < n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& b = poly.vertices[(i + 1) % n];
        const Vec2 e = b - a;
        const Vec2 nrm(e.y(), -e.x());  // outward for CCW
        g = std::max(g, nrm.dot(x) / nrm.dot(a));
      }
      return std::max(g, 0.0);
    }
    double operator()(const Ellipse& e) const {
      const Vec2 xl = rotation2(-e.rotation) * x;
      // Solve |u*xl - center|_ellipse = 1 for u = 1/t, picking the positive root.
      const double A = (xl.x() / e.a) * (xl.x() / e.a) + (xl.y() / e.b) * (xl.y() / e.b);
      const double B = xl.x() * e.center.x() / (e.a * e.a) + xl.y() * e.center.y() / (e.b * e.b);
      const double C =
          (e.center.x() / e.a) * (e.center.x() / e.a) + (e.center.y() / e.b) * (e.center.y() / e.b) - 1.0;
      if (A == 0) return 0;
      const double disc = B * B - A * C;  // C < 0, so disc > 0
      const double u = (B + std::sqrt(disc)) / A;
      return u <= 0 ? 0 : 1.0 / u;
    }
    double operator()(const LpBall& lp) const {
      const Vec2 xl = rotation2(-lp.rotation) * x;
      return lp_norm(xl, lp.p) / lp.scale;
    }
    double operator()(const Disc& d) const { return x.norm() / d.radius; }
    double operator()(const Composite& c) const {
      if (x.squaredNorm() == 0) return 0;
      const Vec2 xl = rotation2(-c.rotation) * x;
      const double phi = std::atan2(xl.y(), xl.x());
      for (const Arc& arc : c.arcs) {
        if (arc.kind == Arc::Kind::circle) {
          const double rel = wrap_angle(phi - arc.phi0);
          if (rel <= arc.phi1 - arc.phi0 + 1e-12) return xl.norm() / arc.radius;
        } else {
          // ray through xl hits the chord iff xl lies in the cone spanned by a, b
          if (cross2(arc.a, xl) >= -1e-12 * arc.a.norm() * xl.norm() &&
              cross2(xl, arc.b) >= -1e-12 * arc.b.norm() * xl.norm()) {
            const Vec2 e = arc.b - arc.a;
            const Vec2 nrm(e.y(), -e.x());
            const double h = nrm.dot(arc.a);
            return nrm.dot(xl) / h;
          }
        }
      }
      // rounding at a junction ray: retry with looser cone tolerance
      for (const Arc& arc : c.arcs) {
        if (arc.kind == Arc::Kind::circle) {
          const double rel = wrap_angle(phi - arc.phi0);
          if (rel <= arc.phi1 - arc.phi0 + 1e-6) return xl.norm() / arc.radius;
        } else if (cross2(arc.a, xl) >= -1e-6 * arc.a.norm() * xl.norm() &&
                   cross2(xl, arc.b) >= -1e-6 * arc.b.norm() * xl.norm()) {
          const Vec2 e = arc.b - arc.a;
          const Vec2 nrm(e.y(), -e.x());
          return nrm.dot(xl) / nrm.dot(arc.a);
        }
      }
      throw NumericError("composite gauge: ray lookup failed");
    }
  };
  return std::visit(V{point}, body.variant());
}

double area(const ConvexBody& body) {
  struct V {
    double operator()(const Polygon& poly) const {
      double s = 0;
      const int n = static_cast<int>(poly.vertices.size());
      for (int i = 0; i < n; ++i) s += cross2(poly.vertices[i], poly.vertices[(i + 1) % n]);
      return 0.5 * s;
    }
    double operator()(const Ellipse& e) const { return M_PI * e.a * e.b; }
    double operator()(const LpBall& lp) const {
      if (is_inf(lp.p)) return 4 * lp.scale * lp.scale;
      const double ip = 1.0 / lp.p;
      return 4 * lp.scale * lp.scale * boost::math::tgamma(1 + ip) * boost::math::tgamma(1 + ip) /
             boost::math::tgamma(1 + 2 * ip);
    }
    double operator()(const Disc& d) const { return M_PI * d.radius * d.radius; }
    double operator()(const Composite& c) const {
      double s = 0;
      for (const Arc& arc : c.arcs) {
        if (arc.kind == Arc::Kind::circle)
          s += 0.5 * arc.radius * arc.radius * (arc.phi1 - arc.phi0);
        else
          s += 0.5 * cross2(arc.a, arc.b);
      }
      return s;
    }
  };
  return std::visit(V{}, body.variant());
}

bool contains(const ConvexBody& body, const Vec2& point, double tol) { return gauge(body, point) <= 1 + tol; }

Vec2 boundary_point(const ConvexBody& body, double phi) {
  const Vec2 dir(std::cos(phi), std::sin(phi));
  const double g = gauge(body, dir);
  return dir / g;
}

ConvexBody rotated(const ConvexBody& body, double angle) {
  struct V {
    double ang;
    ConvexBody operator()(const Polygon& poly) const {
      const Mat2 r = rotation2(ang);
      std::vector<Vec2> vs;
      vs.reserve(poly.vertices.size());
      for (const Vec2& v : poly.vertices) vs.push_back(r * v);
      return ConvexBody::polygon(std::move(vs));
    }
    ConvexBody operator()(const Ellipse& e) const {
      return ConvexBody::ellipse(e.a, e.b, e.center, e.rotation + ang);
    }
    ConvexBody operator()(const LpBall& lp) const {
      return ConvexBody::lp_ball(lp.p, lp.scale, lp.rotation + ang);
    }
    ConvexBody operator()(const Disc& d) const { return ConvexBody::disc(d.radius); }
    ConvexBody operator()(const Composite& c) const {
      Composite out = c;
      out.rotation += ang;
      return ConvexBody(out);
    }
  };
  return std::visit(V{angle}, body.variant());
}

namespace {

// Supporting covector of the body at the boundary point hit by direction phi;
// lies on the polar boundary. Used for sampled polar duals.
Vec2 dual_point_at(const ConvexBody& body, double phi) {
  // Dual point q satisfies <q, x> = 1 with q normal to the boundary at x.
  const double h = 1e-6;
  const Vec2 x = boundary_point(body, phi);
  const Vec2 x1 = boundary_point(body, phi + h);
  const Vec2 x0 = boundary_point(body, phi - h);
  const Vec2 tang = (x1 - x0).normalized();
  const Vec2 nrm(tang.y(), -tang.x());
  return nrm / nrm.dot(x);
}

ConvexBody sampled_polar(const ConvexBody& body, int samples) {
  std::vector<Vec2> duals;
  duals.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double phi = 2 * M_PI * (i + 0.5) / samples;
    duals.push_back(dual_point_at(body, phi));
  }
  return ConvexBody::polygon(std::move(duals));
}

ConvexBody composite_polar(const Composite& c) {
  // Walk arcs CCW. Circle arc (radius R) dualizes to a circle arc of radius
  // 1/R over the same angular range; a segment dualizes to the single covector
  // n/h (a polar vertex); a junction with a normal-cone gap dualizes to a
  // segment of the line <P, z> = 1 joining the adjacent duals.
  const int n = static_cast<int>(c.arcs.size());
  struct Piece {
    bool is_arc;
    Arc arc;   // dual circle arc
    Vec2 pt;   // dual vertex for segments
  };
  std::vector<Piece> pieces;
  for (const Arc& arc : c.arcs) {
    Piece p;
    if (arc.kind == Arc::Kind::circle) {
      p.is_arc = true;
      p.arc.kind = Arc::Kind::circle;
      p.arc.radius = 1.0 / arc.radius;
      p.arc.phi0 = arc.phi0;
      p.arc.phi1 = arc.phi1;
    } else {
      p.is_arc = false;
      const Vec2 e = arc.b - arc.a;
      const Vec2 nrm(e.y(), -e.x());
      p.pt = nrm / nrm.dot(arc.a);
    }
    pieces.push_back(p);
  }
  std::vector<Arc> out;
  auto piece_end = [](const Piece& p) { return p.is_arc ? p.arc.end() : p.pt; };
  auto piece_start = [](const Piece& p) { return p.is_arc ? p.arc.start() : p.pt; };
  for (int i = 0; i < n; ++i) {
    const Piece& cur = pieces[i];
    const Piece& nxt = pieces[(i + 1) % n];
    if (cur.is_arc) out.push_back(cur.arc);
    const Vec2 e0 = piece_end(cur);
    const Vec2 s1 = piece_start(nxt);
    if ((e0 - s1).norm() > kJoinTol) {
      Arc seg;
      seg.kind = Arc::Kind::segment;
      seg.a = e0;
      seg.b = s1;
      out.push_back(seg);
    }
  }
  Composite result{std::move(out), c.rotation};
  return ConvexBody(result);
}

}  // namespace

ConvexBody polar(const ConvexBody& body, int samples) {
  struct V {
    const ConvexBody& self;
    int samples;
    ConvexBody operator()(const Polygon& poly) const {
      std::vector<Vec2> duals;
      const int n = static_cast<int>(poly.vertices.size());
      duals.reserve(n);
      for (int i = 0; i < n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& b = poly.vertices[(i + 1) % n];
        const Vec2 e = b - a;
        const Vec2 nrm(e.y(), -e.x());
        duals.push_back(nrm / nrm.dot(a));
      }
      return ConvexBody::polygon(std::move(duals));
    }
    ConvexBody operator()(const Ellipse& e) const {
      if (e.center.squaredNorm() == 0)
        return ConvexBody::ellipse(1.0 / e.a, 1.0 / e.b, Vec2::Zero(), e.rotation);
      return sampled_polar(self, samples);
    }
    ConvexBody operator()(const LpBall& lp) const {
      return ConvexBody::lp_ball(conjugate_exponent(lp.p), 1.0 / lp.scale, lp.rotation);
    }
    ConvexBody operator()(const Disc& d) const { return ConvexBody::disc(1.0 / d.radius); }
    ConvexBody operator()(const Composite& c) const { return composite_polar(c); }
  };
  return std::visit(V{body, samples}, body.variant());
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Vec2 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw BodyError("expected [x, y]");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

json vec_to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

ConvexBody body_from_json_text(const std::string& text) {
  json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  const double rot = j.value("rotation", 0.0);
  if (kind == "polygon") {
    std::vector<Vec2> vs;
    for (const auto& v : j.at("vertices")) vs.push_back(vec_from_json(v));
    ConvexBody b = ConvexBody::polygon(std::move(vs));
    return rot != 0 ? rotated(b, rot) : b;
  }
  if (kind == "ellipse") {
    Vec2 center = Vec2::Zero();
    if (j.contains("center")) center = vec_from_json(j.at("center"));
    return ConvexBody::ellipse(j.at("a").get<double>(), j.at("b").get<double>(), center, rot);
  }
  if (kind == "lp") {
    double p;
    if (j.at("p").is_string())
      p = std::numeric_limits<double>::infinity();
    else
      p = j.at("p").get<double>();
    return ConvexBody::lp_ball(p, j.value("scale", 1.0), rot);
  }
  if (kind == "disc") return ConvexBody::disc(j.at("radius").get<double>());
  if (kind == "composite") {
    if (j.contains("cut_disc")) {
      const auto& cd = j.at("cut_disc");
      ConvexBody b = ConvexBody::cut_disc(cd.at("radius").get<double>(), cd.at("cut").get<double>());
      return rot != 0 ? rotated(b, rot) : b;
    }
    std::vector<Arc> arcs;
    for (const auto& ja : j.at("arcs")) {
      Arc arc;
      const std::string t = ja.at("type").get<std::string>();
      if (t == "circle") {
        arc.kind = Arc::Kind::circle;
        arc.radius = ja.at("radius").get<double>();
        arc.phi0 = ja.at("phi0").get<double>();
        arc.phi1 = ja.at("phi1").get<double>();
      } else if (t == "segment") {
        arc.kind = Arc::Kind::segment;
        arc.a = vec_from_json(ja.at("from"));
        arc.b = vec_from_json(ja.at("to"));
      } else {
        throw BodyError("unknown composite arc type: " + t);
      }
      arcs.push_back(arc);
    }
    return ConvexBody::composite(std::move(arcs), rot);
  }
  throw BodyError("unknown body kind: " + kind);
}

std::string body_to_json_text(const ConvexBody& body) {
  struct V {
    json operator()(const Polygon& poly) const {
      json j;
      j["kind"] = "polygon";
      json vs = json::array();
      for (const Vec2& v : poly.vertices) vs.push_back(vec_to_json(v));
      j["vertices"] = vs;
      return j;
    }
    json operator()(const Ellipse& e) const {
      json j;
      j["kind"] = "ellipse";
      j["a"] = e.a;
      j["b"] = e.b;
      j["center"] = vec_to_json(e.center);
      if (e.rotation != 0) j["rotation"] = e.rotation;
      return j;
    }
    json operator()(const LpBall& lp) const {
      json j;
      j["kind"] = "lp";
      if (std::isinf(lp.p))
        j["p"] = "inf";
      else
        j["p"] = lp.p;
      j["scale"] = lp.scale;
      if (lp.rotation != 0) j["rotation"] = lp.rotation;
      return j;
    }
    json operator()(const Disc& d) const {
      json j;
      j["kind"] = "disc";
      j["radius"] = d.radius;
      return j;
    }
    json operator()(const Composite& c) const {
      json j;
      j["kind"] = "composite";
      json arcs = json::array();
      for (const Arc& arc : c.arcs) {
        json ja;
        if (arc.kind == Arc::Kind::circle) {
          ja["type"] = "circle";
          ja["radius"] = arc.radius;
          ja["phi0"] = arc.phi0;
          ja["phi1"] = arc.phi1;
        } else {
          ja["type"] = "segment";
          ja["from"] = vec_to_json(arc.a);
          ja["to"] = vec_to_json(arc.b);
        }
        arcs.push_back(ja);
      }
      j["arcs"] = arcs;
      if (c.rotation != 0) j["rotation"] = c.rotation;
      return j;
    }
  };
  return std::visit(V{}, body.variant()).dump(2);
}

}  // namespace ctrig
