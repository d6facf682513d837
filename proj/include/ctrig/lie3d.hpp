#pragma once

#include "ctrig/ode.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace ctrig::lie3d {

using GroupMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

enum class Algebra { heisenberg, su2, sl2, se2, sh2 };
std::string to_string(Algebra alg);

// Structure signs of the bracket normalization
//   [X1, X2] = X3, [X3, X1] = a X2, [X3, X2] = b X1.
struct StructurePair {
  int a = 0, b = 0;
};

Algebra algebra_of(StructurePair ab);

/// Normalized invariants (chi, kappa) to structure signs; requires either
/// chi = kappa = 0 or chi^2 + kappa^2 = 1 with chi >= 0.
struct Reduction {
  StructurePair ab;
  Algebra algebra;
};
Reduction reduce_chi_kappa(double chi, double kappa);

struct LieSpec {
  StructurePair ab;
  ConvexBody body;
  double H = 1;
  int resolution = 1024;
};

/// A left-invariant time-optimal problem with 2d control in `body`, reduced to
/// the vertical pendulum-type flow on the polar angle. The vertical dynamics
/// are independent of H; the adjoint scales as h = H (cos°, sin°, v).
class LieSystem {
 public:
  explicit LieSystem(LieSpec spec);

  const LieSpec& spec() const { return spec_; }
  StructurePair ab() const { return spec_.ab; }
  double H() const { return spec_.H; }
  Algebra algebra() const { return algebra_; }
  const TrigPair& pair() const { return pot_.pair(); }
  const Potential& vertical() const { return pot_; }

  Eigen::Vector3d adjoint(double theta_polar, double v) const;  // (h1, h2, h3)
  double casimir(double theta_polar, double v) const;  // (h3^2 - b h1^2 + a h2^2) / 2
  double hamiltonian_residual(double theta_polar) const;  // s(h1,h2) - H

  // faithful matrix generators X1, X2, X3 of the bracket normalization
  const std::array<GroupMat, 3>& generators() const { return gens_; }

 private:
  LieSpec spec_;
  Algebra algebra_;
  Potential pot_;
  std::array<GroupMat, 3> gens_;
};

// ---------------------------------------------------------------------------
// Singular structure
// ---------------------------------------------------------------------------

enum class SingularType { none, general, special };
std::string to_string(SingularType t);

struct SingularInfo {
  SingularType type = SingularType::none;
  Vec2 control = Vec2::Zero();   // general: the unique constant control
  Interval control_theta;        // special: admissible control-angle interval
  Vec2 segment_lo = Vec2::Zero(), segment_hi = Vec2::Zero();  // special: segment ends
};

/// Classification of the constant-polar-angle extremal at theta_polar via the
/// rank of the linear system [cos° sin°; a sin° b cos°] u = (1, 0), gated on
/// second-order nonsmoothness of the polar boundary there.
SingularInfo singular_classify(const LieSystem& sys, double theta_polar, double boundary_tol = 1e-8);

// ---------------------------------------------------------------------------
// Phase portrait
// ---------------------------------------------------------------------------

struct Equilibrium {
  double theta_polar = 0;
  StationaryKind kind = StationaryKind::not_stationary;
  SingularType singular = SingularType::none;
  bool finite_time = false;  // at least one separatrix enters in finite time
  StationaryInfo detail;
};

struct PhasePortrait {
  std::vector<Equilibrium> equilibria;
  struct FlatRun {  // maximal interval of flat potential (every point stationary)
    Interval theta_polar;
  };
  std::vector<FlatRun> flat_runs;
  struct Level {
    double energy = 0;
    // (theta_polar, h3) polyline samples of the level set, split into branches
    std::vector<std::vector<Vec2>> branches;
  };
  std::vector<Level> levels;
  std::vector<double> profile_theta, profile_U;
};

PhasePortrait phase_portrait(const LieSystem& sys, const std::vector<double>& energies,
                             int scan_resolution = 2048, int threads = 1);

// ---------------------------------------------------------------------------
// Extremal taxonomy report
// ---------------------------------------------------------------------------

enum class Presence { no, yes, allowed };
std::string to_string(Presence p);

struct TypeReport {
  bool theorem_applies = false;
  std::string family;  // "polygon", "strictly_convex_smooth_polar", "lp"
  Presence bang_bang = Presence::yes;
  Presence singular = Presence::no;
  Presence mixed = Presence::no;
  Presence nonuniqueness = Presence::no;
  bool obs_bang_bang = false, obs_singular = false, obs_mixed = false, obs_nonuniqueness = false;
  bool agree = false;
};

TypeReport extremal_type_report(const LieSystem& sys, int scan_resolution = 2048);

// ---------------------------------------------------------------------------
// Horizontal (group) integration
// ---------------------------------------------------------------------------

struct GroupSample {
  double t = 0;
  GroupMat g;
};

/// Integrates the left-invariant flow dg/dt = g (u1 X1 + u2 X2) from the
/// identity along the control trace of a vertical trajectory; each step is the
/// exponential of the frozen algebra element, with a structure projection.
std::vector<GroupSample> integrate_group(const LieSystem& sys, const ExtremalTrajectory& traj);

/// Determinant / unitary / affine-structure drift of a group element.
double group_constraint_residual(const LieSystem& sys, const GroupMat& g);

/// Row-major flattening for emitters (re/im pairs for the unitary case).
std::vector<double> flatten(const LieSystem& sys, const GroupMat& g);

}  // namespace ctrig::lie3d
