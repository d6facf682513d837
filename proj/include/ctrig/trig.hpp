#pragma once

#include "ctrig/geometry.hpp"

#include <memory>
#include <vector>

namespace ctrig {

struct Interval {
  double lo = 0, hi = 0;
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x, double tol = 0) const { return x >= lo - tol && x <= hi + tol; }
};

// Local boundary regularity at a generalized angle, used to decide uniqueness
// and finite-time questions for the second-order flows.
struct Regularity {
  enum class Kind {
    smooth,          // locally C^2 (or better)
    corner,          // supporting covector jumps
    power,           // C^1, curve deviates from its tangent like |dθ|^exponent, exponent in (1,2)
    curvature_jump,  // C^1 with a curvature discontinuity
  };
  Kind kind = Kind::smooth;
  double exponent = 2;
};

/// Sector-area parametrization of a convex boundary: theta advances by twice
/// the area swept from the positive x-axis, so the period is twice the body
/// area. Exact closed forms per body variant; no interpolation in queries.
class TrigTable {
 public:
  static std::shared_ptr<const TrigTable> build(const ConvexBody& body, int resolution = 1024);

  const ConvexBody& body() const { return body_; }
  double area() const { return area_; }
  double period() const { return period_; }  // 2 * area

  /// Boundary point P_theta = (cos theta, sin theta) in the generalized sense.
  Vec2 cos_sin(double theta) const;
  double cos(double theta) const { return cos_sin(theta).x(); }
  double sin(double theta) const { return cos_sin(theta).y(); }

  /// One-sided supporting covectors at P_theta; both lie on the polar boundary
  /// and differ only at corners.
  Vec2 dual_below(double theta) const;
  Vec2 dual_above(double theta) const;

  /// Generalized angle in [0, period) of a boundary point / of the boundary
  /// point on the ray at classic angle phi.
  double angle_of_point(const Vec2& pt) const;
  double angle_at_direction(double phi) const;
  double angle_at_direction(const Vec2& dir) const;

  /// Junction angles of the piecewise-smooth boundary description, in [0, period).
  std::vector<double> breakpoints() const;
  std::vector<double> corner_angles() const;
  Regularity regularity_at(double theta) const;

  /// If the boundary is straight on the whole smooth span around theta,
  /// returns the affine parametrization P(t) = origin + t*slope valid on
  /// [theta0, theta1] (t is the generalized angle).
  struct LinearSpan {
    bool linear = false;
    Vec2 origin = Vec2::Zero(), slope = Vec2::Zero();
    double theta0 = 0, theta1 = 0;
  };
  LinearSpan linear_span(double theta) const;

  /// Integral of (cos, sin) over the generalized-angle range [t0, t1];
  /// exact on straight and circular pieces, adaptive elsewhere.
  Vec2 integral_cos_sin(double t0, double t1) const;

  int resolution() const { return resolution_; }

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  TrigTable(ConvexBody body, int resolution);
  ConvexBody body_;
  double area_ = 0, period_ = 0;
  int resolution_ = 0;
  std::shared_ptr<Impl> impl_;
};

using TrigTablePtr = std::shared_ptr<const TrigTable>;

/// A body, its polar dual, and the monotone correspondence between their
/// generalized angles (quasiperiodic: theta + period maps to theta_polar +
/// polar period). Multivalued at corners: a primal corner maps onto a polar
/// edge and vice versa.
class TrigPair {
 public:
  static TrigPair build(const ConvexBody& body, int resolution = 1024);
  static TrigPair from_tables(TrigTablePtr primal, TrigTablePtr polar);

  const TrigTable& primal() const { return *primal_; }
  const TrigTable& polar() const { return *polar_; }
  TrigTablePtr primal_ptr() const { return primal_; }
  TrigTablePtr polar_ptr() const { return polar_; }

  /// Roles exchanged (the polar becomes the primal); exact by bipolarity.
  TrigPair swapped() const;

  /// Monotone branch of the correspondence, anchored so that the value at
  /// theta = 0 is the lower end of its interval.
  double theta_polar(double theta) const;
  Interval theta_polar_interval(double theta) const;
  double theta_primal(double theta_polar) const;
  Interval theta_primal_interval(double theta_polar) const;

  /// Corner test per the correspondence-interval criterion.
  bool is_corner(double theta, double tol_scale = 1e-9) const;
  bool is_polar_corner(double theta_polar, double tol_scale = 1e-9) const;

  /// One-sided derivative pair(s) of (cos, sin): (-sin°, cos°) over the
  /// corresponding interval. first = below, second = above.
  std::pair<Vec2, Vec2> derivative(double theta) const;

  /// dtheta_polar/dtheta and boundary curvature at a C^2 point; throws
  /// NumericError at corners.
  double dtheta_polar_dtheta(double theta) const;
  double curvature(double theta) const;

  /// point = r * cos_sin(theta) with r = s_polar(point) > 0; theta in [0, period).
  std::pair<double, double> polar_decompose(const Vec2& point) const;

  /// Angle set on the primal boundary attaining the maximum of <dir, .>
  /// (an interval along an edge, a point otherwise) plus the maximum value.
  struct SupportSet {
    double value = 0;
    Interval theta;
  };
  SupportSet support_set(const Vec2& dir) const;

 private:
  TrigPair() = default;
  TrigTablePtr primal_, polar_;

  // Correspondence chain over one period: nodes alternate between smooth spans
  // and corner jumps, monotone in both coordinates (polar side unwrapped).
  struct Node {
    Interval theta;        // primal range (may be a point)
    Interval theta_polar;  // polar range (may be a point)
    bool primal_corner = false;  // theta is a point, theta_polar an interval
    bool linear_span = false;    // straight primal piece: theta_polar a point
    // monotone (theta, theta_polar) samples dense enough to resolve the
    // polar-period ambiguity when mapping between the two angles
    std::vector<std::pair<double, double>> anchors;
  };
  std::vector<Node> chain_;
  double anchor_polar_ = 0;  // unwrapped theta_polar at theta = 0

  void build_chain();
  double polar_raw_unwrapped(double theta_reduced, const Node& node) const;
  double primal_raw_unwrapped(double theta_polar_reduced, const Node& node) const;
};

}  // namespace ctrig
