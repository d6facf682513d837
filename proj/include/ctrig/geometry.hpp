#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ctrig {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Mat2 rotation2(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Raised when a body description violates its validity invariants
/// (origin not strictly interior, non-convex vertex chain, open composite loop, ...).
struct BodyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Body variants. All bodies are convex, compact, with 0 strictly interior.
// ---------------------------------------------------------------------------

struct Polygon {
  std::vector<Vec2> vertices;  // strictly convex, counterclockwise, no collinear triples
};

struct Ellipse {
  double a = 1;  // semi-axis along (rotated) x
  double b = 1;  // semi-axis along (rotated) y
  Vec2 center = Vec2::Zero();
  double rotation = 0;  // counterclockwise, radians
};

struct LpBall {
  double p = 2;  // exponent in [1, inf]; use INFINITY for the sup-norm ball
  double scale = 1;
  double rotation = 0;
};

struct Disc {
  double radius = 1;
};

// One smooth piece of a composite boundary. Circle arcs are centered at the
// origin; segments are straight chords. Consecutive arcs must share endpoints.
struct Arc {
  enum class Kind { circle, segment };
  Kind kind = Kind::segment;
  double radius = 0, phi0 = 0, phi1 = 0;   // circle: radius and CCW angular extent
  Vec2 a = Vec2::Zero(), b = Vec2::Zero(); // segment endpoints
  Vec2 start() const;
  Vec2 end() const;
};

struct Composite {
  std::vector<Arc> arcs;  // ordered CCW, closed
  double rotation = 0;
};

class ConvexBody {
 public:
  using Variant = std::variant<Polygon, Ellipse, LpBall, Disc, Composite>;

  explicit ConvexBody(Variant v);  // validates and normalizes

  const Variant& variant() const { return v_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  std::string kind() const;

  static ConvexBody polygon(std::vector<Vec2> vertices);
  static ConvexBody ellipse(double a, double b, Vec2 center = Vec2::Zero(), double rotation = 0);
  static ConvexBody lp_ball(double p, double scale = 1, double rotation = 0);
  static ConvexBody disc(double radius);
  static ConvexBody composite(std::vector<Arc> arcs, double rotation = 0);

  /// Disc of `radius` truncated by the chord x = cut (0 < cut < radius).
  static ConvexBody cut_disc(double radius, double cut);

 private:
  Variant v_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Support function s(d) = max over the body of <d, x>. Total; s(0) = 0.
double support(const ConvexBody& body, const Vec2& direction);

/// Minkowski gauge: inf{t > 0 : point/t in body}; 1 exactly on the boundary.
double gauge(const ConvexBody& body, const Vec2& point);

double area(const ConvexBody& body);

bool contains(const ConvexBody& body, const Vec2& point, double tol = 1e-9);

/// The unique boundary point on the ray at classic polar angle phi.
Vec2 boundary_point(const ConvexBody& body, double phi);

/// Polar dual {z : <z, x> <= 1 on the body}. Closed form per variant where
/// available; otherwise a dense polygon of dual boundary points sampled at
/// `samples` directions.
ConvexBody polar(const ConvexBody& body, int samples = 4096);

/// Body rotated counterclockwise by `angle` about the origin.
ConvexBody rotated(const ConvexBody& body, double angle);

// JSON round trip. Schema: {"kind": "polygon"|"ellipse"|"lp"|"disc"|"composite", ...}.
ConvexBody body_from_json_text(const std::string& text);
std::string body_to_json_text(const ConvexBody& body);

}  // namespace ctrig
