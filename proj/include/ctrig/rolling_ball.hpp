#pragma once

#include "ctrig/ode.hpp"

#include <Eigen/Dense>

namespace ctrig::rolling_ball {

// Time-optimal rolling of a unit ball on the plane without slipping or
// twisting; the contact-point velocity set is `body`, (p, q) are the constant
// translational adjoints and H > 0 the Hamiltonian level.
struct BallSpec {
  ConvexBody body;
  double p = 0, q = 0;
  double H = 1;
  int resolution = 1024;
};

class BallSystem {
 public:
  explicit BallSystem(BallSpec spec);
  const BallSpec& spec() const { return spec_; }
  const TrigPair& pair() const { return pot_.pair(); }
  /// Vertical potential: half the squared distance from (p/H, q/H) to the
  /// polar boundary point, up to a constant. Its ct energy is the full energy
  /// divided by H.
  const Potential& vertical() const { return pot_; }
  double energy_full(double theta_polar, double v) const { return spec_.H * pot_.energy(theta_polar, v); }

 private:
  BallSpec spec_;
  Potential pot_;
};

struct BallSample {
  double t = 0;
  Vec2 xy = Vec2::Zero();
  Eigen::Vector4d orientation = Eigen::Vector4d(1, 0, 0, 0);  // unit quaternion (w, x, y, z)
  double theta_polar = 0, v = 0, theta = 0;
  Vec2 u = Vec2::Zero();
  ArcLabel label = ArcLabel::bang;
};

struct BallTrace {
  std::vector<BallSample> samples;
  double energy_full = 0;
  ExtremalTrajectory vertical;
};

/// Normal extremal: vertical flow from (theta_polar0, h30 = H * dtheta°/dt),
/// horizontal state and orientation advanced by the recovered control.
BallTrace ball_integrate(const BallSystem& sys, double theta_polar0, double h30, double T,
                         const IntegrateOptions& opt = {});

/// Abnormal extremal (H = 0): straight line with the boundary control
/// supporting the direction (p, q).
BallTrace ball_abnormal(const ConvexBody& body, double p, double q, double T, double dt = 0.01);

}  // namespace ctrig::rolling_ball
