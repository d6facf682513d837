#pragma once

#include "ctrig/ode.hpp"

namespace ctrig::lobachevsky {

// Geodesics of the time-optimal motion on the upper half-plane with velocity
// set y * body. Horizontal geodesics are similarity images of an arc of the
// polar boundary; vertical ones follow the top/bottom support set of the body.
struct Geodesic {
  enum class Kind { horizontal, vertical_up, vertical_down };
  Kind kind = Kind::horizontal;
  std::vector<double> t;
  std::vector<Vec2> xy;
  std::vector<double> theta_polar;  // horizontal only
  std::vector<Vec2> control;       // filled when a full pair is available
};

struct HorizontalParams {
  double lambda = 1;       // similarity scale (> 0)
  int sign = +1;           // +1: y = lambda cos°; -1: mirrored branch
  double x0 = 0;           // horizontal shift
  double theta_polar0 = 0; // initial polar angle; the start must satisfy y > 0
  double T = 1;
  double dt = 0.01;
};

/// Natural parametrization d theta°/dt = -cos°(theta°); only the polar table
/// is needed for the curve itself.
Geodesic horizontal(const TrigTable& polar_table, const HorizontalParams& params);

/// Controls u(t) = (cos theta, sin theta) along a horizontal geodesic.
void recover_controls(const TrigPair& pair, Geodesic& geo);

struct VerticalParams {
  bool up = true;
  double x0 = 0, y0 = 1;
  double T = 1;
  double dt = 0.01;
  SelectionPolicy selection;  // control angle within the support edge
};

Geodesic vertical(const TrigPair& pair, const VerticalParams& params);

/// Polar angles of the intersections of the polar boundary with the vertical
/// axis; these are the fixed points of the natural parametrization.
std::vector<double> fixed_points(const TrigTable& polar_table);

}  // namespace ctrig::lobachevsky
