#pragma once

#include "ctrig/trig.hpp"

namespace ctrig::plane_dyn {

// Time-optimal planar motion of a point with bounded acceleration set: the
// adjoint q(t) = q0 - p t is affine, the control is the boundary point
// supported by q, and the polar angle of q obeys a closed first-order law.
struct PlaneSpec {
  ConvexBody body;
  int resolution = 1024;
};

struct Sample {
  double t = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  double R = 0;            // support value s(q)
  double theta_polar = 0;  // polar angle of q
  double theta = 0;        // control angle
  Vec2 u = Vec2::Zero();
};

struct Trace {
  std::vector<Sample> samples;
  Vec2 p = Vec2::Zero();
  double E = 0;              // p x q, conserved
  bool two_valued = false;   // E = 0 with p != 0: the angle jumps once
  double t_split = 0;
};

Trace plane_dyn_extremal(const PlaneSpec& spec, const Vec2& x0, const Vec2& y0, const Vec2& p,
                         const Vec2& q0, double T, double dt = 0.01);

}  // namespace ctrig::plane_dyn
