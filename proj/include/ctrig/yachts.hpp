#pragma once

#include "ctrig/ode.hpp"

namespace ctrig::yachts {

// Planar vehicle models on (x, y, heading) whose translational velocity field
// is the body's generalized cosine/sine of the heading: bending-energy
// minimizer, bounded-turn shortest path, forward/backward bounded-turn
// shortest path, and the sub-Riemannian metric.
enum class Problem { elastica, markov_dubins, reeds_shepp, sr_se2 };
std::string to_string(Problem p);

struct YachtSpec {
  Problem problem = Problem::elastica;
  ConvexBody body;
  double psi1 = 1, psi2 = 0;  // constant translational adjoints
  int resolution = 1024;
};

/// Rotation reduction: with alpha = atan2(psi2, psi1) the adjoint pair becomes
/// (1, 0) for the body rotated clockwise by alpha; the generalized-angle
/// shifts realign the headings.
struct Reduction {
  double alpha = 0;
  double alpha_tilde = 0;        // generalized shift on the body
  double alpha_tilde_polar = 0;  // generalized shift on the polar
  TrigPair rotated;              // pair of the rotated body
};
Reduction yacht_reduce(const YachtSpec& spec);

struct Classification {
  int case_id = 0;          // 0 = below range .. per-family numbering
  double m1 = 0, m2 = 0;    // min / max of the rotated cosine
  Interval theta_min_set;   // angles attaining m1
  Interval theta_max_set;   // angles attaining m2
  double theta5 = 0, theta6 = 0;  // angles of the vertical-axis boundary points
  std::vector<double> cross_pos, cross_neg;  // rotated cosine = +H / -H angles in [0, 2S)
  bool min_is_edge = false, max_is_edge = false;
};
Classification yacht_classify(const YachtSpec& spec, double H);

struct Switch {
  double t = 0;
  Vec2 u_before = Vec2::Zero(), u_after = Vec2::Zero();
  std::string label;
};

struct YachtTrajectory {
  std::vector<double> t;
  std::vector<Vec2> xy;
  std::vector<double> heading;      // generalized angle on the original body
  std::vector<double> theta_tilde;  // rotated-body angle
  std::vector<Vec2> u;
  std::vector<Switch> switches;
  double hamiltonian = 0;
  Classification cls;
};

/// Bending-energy extremal from (theta_tilde0, dtheta_tilde0); u1 = 1,
/// u2 = dtheta/dt, maximized Hamiltonian th_dot^2/2 + cos~.
YachtTrajectory elastica_extremal(const YachtSpec& spec, double theta_tilde0, double dtheta0, double T,
                                  double dt = 0.01);

/// Sub-Riemannian extremal: u1 = cos~, u2 = dtheta/dt, Hamiltonian
/// (cos~^2 + th_dot^2)/2.
YachtTrajectory sr_extremal(const YachtSpec& spec, double theta_tilde0, double dtheta0, double T,
                            double dt = 0.01);

/// Bounded-turn extremal at level H: u1 = 1, u2 switches between +-1 at the
/// level crossings of the rotated cosine; switching times are angle
/// differences on the rotated table.
YachtTrajectory dubins_extremal(const YachtSpec& spec, double H, double theta_tilde0, int u2_sign0,
                                double T, double dt = 0.01);

/// Degenerate family (psi1 = psi2 = 0): constant turn u2 = +-1; both loops
/// close up at t equal to the full angle period.
YachtTrajectory dubins_degenerate(const YachtSpec& spec, int u2_sign, double theta0, double T,
                                  double dt = 0.01);

/// Forward/backward bounded-turn extremal: u1 = sign of the rotated cosine,
/// u2 switches at the +-H crossings.
YachtTrajectory reeds_shepp_extremal(const YachtSpec& spec, double H, double theta_tilde0, int u2_sign0,
                                     double T, double dt = 0.01);

}  // namespace ctrig::yachts
