#pragma once

#include "ctrig/trig.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctrig {

/// Scalar field on the plane with gradient. An exact quadratic representation
/// f(x) = 0.5 x^T M x + b^T x + c, when present, enables closed-form flows on
/// straight boundary pieces.
struct ScalarField2 {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
  struct Quadratic {
    Mat2 M = Mat2::Zero();
    Vec2 b = Vec2::Zero();
    double c = 0;
  };
  std::optional<Quadratic> quadratic;

  static ScalarField2 from_quadratic(const Mat2& M, const Vec2& b, double c = 0);
  static ScalarField2 linear(const Vec2& b, double c = 0);
};

/// Potential of the second-order inclusion on the polar angle,
///   d^2/dt^2 theta_polar in -U'(theta_polar),  U = f(cos°, sin°),
/// where the derivative set U' = { -f_p sin theta + f_q cos theta } ranges
/// over the correspondence interval theta <-> theta_polar; it is an interval
/// with the one-sided derivatives as endpoints.
class Potential {
 public:
  Potential(TrigPair pair, ScalarField2 f);

  double U(double tp) const;
  double Uprime_left(double tp) const;
  double Uprime_right(double tp) const;
  Interval Uprime(double tp) const;  // [min, max] of the one-sided values
  double period() const { return pair_.polar().period(); }
  double energy(double tp, double v) const { return 0.5 * v * v + U(tp); }
  Vec2 host_point(double tp) const { return pair_.polar().cos_sin(tp); }
  Vec2 grad_at(double tp) const { return f_.grad(host_point(tp)); }

  const TrigPair& pair() const { return pair_; }
  const ScalarField2& field() const { return f_; }
  double U_min() const { return umin_; }

 private:
  TrigPair pair_;
  ScalarField2 f_;
  double umin_ = 0;
};

double energy(const Potential& pot, double tp, double v);

// ---------------------------------------------------------------------------
// Stationary-point classification
// ---------------------------------------------------------------------------

enum class StationaryKind {
  not_stationary,
  center,
  saddle_slow,
  saddle_finite_time,
  general_singular,
  special_singular,
  flat,
  indeterminate,
};

std::string to_string(StationaryKind k);

struct StationaryInfo {
  StationaryKind primary = StationaryKind::not_stationary;
  bool stationary = false;
  bool up_left = false, up_right = false;      // potential rises on that side
  bool flat_left = false, flat_right = false;  // potential locally constant
  bool convergent_left = false, convergent_right = false;  // finite entry time
  // constant-control case: the linear system has a unique solution on the
  // control-body boundary
  bool singular_general = false;
  Vec2 general_control = Vec2::Zero();
  // free-family case: vanishing gradient at a host corner
  bool singular_special = false;
  Interval special_theta_range;
  bool host_smooth = true;  // boundary locally C^2 at the host point
  bool confident = true;    // numeric convergence/side tests were unambiguous
};

struct ClassifyOptions {
  double zero_tol = 1e-10;
  double corner_tol_scale = 1e-9;
  double boundary_tol = 1e-8;
  double probe_frac = 1e-4;
};

StationaryInfo classify_stationary(const Potential& pot, double tp, const ClassifyOptions& opt = {});

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

enum class BranchPolicy { stay, depart_left, depart_right, fail_on_branch };
enum class ArcLabel { bang, general_singular, special_singular };

std::string to_string(ArcLabel label);

struct BranchingError : NumericError {
  using NumericError::NumericError;
};

struct TrajectorySample {
  double t = 0;
  double theta_polar = 0;
  double v = 0;      // d theta_polar / dt
  double theta = 0;  // control angle on the primal body
  Vec2 u = Vec2::Zero();
  ArcLabel label = ArcLabel::bang;
  double energy_residual = 0;
};

struct TrajectoryEvent {
  double t = 0;
  std::string kind;  // "corner", "turn", "stationary", "depart"
  double theta_polar = 0;
};

/// Measurable selection for free-family arcs: maps (t, admissible control
/// angle interval) to a control angle. Defaults to the interval midpoint.
using SelectionPolicy = std::function<double(double, const Interval&)>;

struct IntegrateOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double dt_out = 0.01;
  BranchPolicy policy = BranchPolicy::stay;
  double dwell = 0;  // dwell time before departure under depart_* policies
  SelectionPolicy selection;
  ClassifyOptions classify;
};

struct ExtremalTrajectory {
  std::vector<TrajectorySample> samples;
  double energy = 0;
  std::vector<TrajectoryEvent> events;
  bool branched = false;
  double dwell_time = 0;
  int departure_sign = 0;
  double tau_lower_bound = 0;  // guaranteed departure window after branching
};

ExtremalTrajectory integrate(const Potential& pot, double tp0, double v0, double T,
                             const IntegrateOptions& opt = {});

/// Solution that sits at a finite-time-entry stationary point for `dwell`
/// seconds and then departs in the given direction (+1 right, -1 left).
ExtremalTrajectory branch_enumerate(const Potential& pot, double tp0, double dwell, int direction,
                                    double T, const IntegrateOptions& opt = {});

/// Re-derive the control trace of an integrated trajectory under a different
/// selection policy; validates the energy residuals first.
void recover_control(const Potential& pot, ExtremalTrajectory& traj, const SelectionPolicy& selection = {});

/// Travel time between two polar angles on the energy shell E:
/// integral of d psi / sqrt(2 (E - U(psi))), tolerant of integrable
/// inverse-square-root endpoint singularities.
double travel_time(const Potential& pot, double E, double from, double to);

}  // namespace ctrig
