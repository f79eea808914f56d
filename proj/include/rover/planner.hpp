#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "rover/min_jerk_spline.hpp"
#include "rover/power.hpp"
#include "rover/terrain.hpp"
#include "rover/trajectory.hpp"

namespace rover {

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Waiting cannot bank energy because the base load eats all supply.
class InfeasibleBudgetError : public PlanningError {
 public:
  InfeasibleBudgetError(const std::string& what, double deficit)
      : PlanningError(what), deficit_(deficit) {}
  double deficit() const { return deficit_; }

 private:
  double deficit_;
};

struct PlannerConfig {
  double rho_T = 1.0;
  double rho_r = 0.5;
  double lambda_c = kDefaultCurvatureWeight;
  double vx_B_max = 1.0;
  double ax_B_max = 0.5;
  double ay_B_max = 0.5;
  int n_segments = 8;
  int samples_per_segment = 16;
  int max_outer_iters = 12;
  int max_inner_iters = 400;
  double grad_tol = 1e-6;
  double constraint_tol = 0.01;  // power, as a fraction of the cap
  double kinematic_tol = 0.02;   // fraction of each kinematic bound
  double kinematic_weight = 10.0;
  double kinematic_kappa = 50.0;  // sharpness on the normalized bound excess
  TauMode tau_mode = TauMode::kHeadroom;
  double v_nominal = 0.5;
  double profile_dt = 0.05;
  double E_bank0 = 0.0;
  double risk_seed_threshold = 0.0;
  bool parallel = true;

  void validate() const;
};

/// Constraint rows penalized per quadrature sample.
enum ConstraintKind : int {
  kPowerCap = 0,
  kSpeedBound,
  kAccelUpper,
  kAccelLower,
  kLateralUpper,
  kLateralLower,
  kReversal,  // velocity against the chord of its segment
  kConstraintKindCount
};

/// Speed below which the reversal measure fades toward zero.
inline constexpr double kReversalSpeedScale = 0.005;
inline constexpr double kReversalMargin = 0.2;

/// -(v . d) / (|d| sqrt(|v|^2 + s^2)) - margin for chord d of the segment; positive
/// when the motion runs backwards. -1 for wait segments and closed chords.
double reversal_measure(const Segment& segment, double vx, double vy);

struct BodyKinematics {
  double vx_B = 0.0;
  double ax_B = 0.0;
  double ay_B = 0.0;
  double reversal = -1.0;
};

struct PowerProfile {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<PowerBreakdown> samples;
  std::vector<BodyKinematics> body;

  std::size_t size() const { return times.size(); }
  double peak_consumption() const;
};

struct ObjectiveTerms {
  double jerk = 0.0;
  double time = 0.0;
  double risk = 0.0;
  double power_penalty = 0.0;
  double kinematic_penalty = 0.0;
};

struct OuterIteration {
  double power_violation = 0.0;      // max (P_cons - cap) / cap, clipped at 0
  double kinematic_violation = 0.0;  // max normalized bound excess, clipped at 0
  double excess = 0.0;               // violation beyond tolerance over enforced rows
  double objective = 0.0;
  int inner_iterations = 0;
  bool accepted = false;
};

struct PlanResult {
  SplineTrajectorySE2 trajectory;
  PowerProfile profile;
  ObjectiveTerms objective_terms;
  double P_pmax = 0.0;
  double budget_margin = 0.0;
  double wait_time_inserted = 0.0;
  double power_violation = 0.0;
  double kinematic_violation = 0.0;
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::vector<OuterIteration> history;
};

/// Penalty scales and per-sample multipliers of the augmented Lagrangian.
struct AugmentedLagrangian {
  std::array<double, kConstraintKindCount> scale{1, 1, 1, 1, 1, 1, 1};
  std::vector<double> multipliers;  // [sample * kConstraintKindCount + kind]
};

struct ObjectiveEvaluation {
  bool valid = true;
  double value = 0.0;
  ObjectiveTerms terms;
  Eigen::VectorXd gradient;
};

/// The penalized trajectory objective over decision variables
/// [interior waypoints (x, y) ..., log segment durations ...].
class PlanningProblem {
 public:
  PlanningProblem(const TerrainMap& map, const PowerParams& params, const PlannerConfig& config,
                  const Pose2& start, const Pose2& goal);

  int n_segments() const { return n_segments_; }
  int num_variables() const { return 2 * (n_segments_ - 1) + n_segments_; }
  int num_samples() const { return n_segments_ * (config_.samples_per_segment + 1); }

  Eigen::VectorXd initial_variables() const;
  Eigen::VectorXd pack(const std::vector<Eigen::Vector2d>& waypoints,
                       const Eigen::VectorXd& durations) const;
  MinJerkSpline spline(const Eigen::VectorXd& variables) const;
  SplineTrajectorySE2 trajectory(const Eigen::VectorXd& variables) const;

  ObjectiveEvaluation evaluate(const Eigen::VectorXd& variables, bool with_gradient = true) const;

  /// Multiplier step lambda <- d(penalty)/d(g) at the current variables.
  void update_multipliers(const Eigen::VectorXd& variables);
  /// Worst smoothed-constraint value per kind on the quadrature samples.
  std::array<double, kConstraintKindCount> sample_constraint_peaks(const Eigen::VectorXd& variables) const;

  AugmentedLagrangian& lagrangian() { return al_; }
  const AugmentedLagrangian& lagrangian() const { return al_; }
  const PowerParams& params() const { return params_; }
  const PlannerConfig& config() const { return config_; }
  const TerrainMap& map() const { return map_; }

 private:
  const TerrainMap& map_;
  PowerParams params_;
  PlannerConfig config_;
  Pose2 start_;
  Pose2 goal_;
  int n_segments_ = 1;
  AugmentedLagrangian al_;
};

/// Samples the trajectory at resolution dt within each segment (joints included).
PowerProfile evaluate_profile(const SplineTrajectorySE2& traj, const TerrainMap& map,
                              const PowerParams& params, double dt,
                              TauMode tau_mode = TauMode::kHeadroom);

/// Trapezoid integral of availability minus drawn power over the profile.
double budget_margin(const PowerProfile& profile);

/// Largest cumulative shortfall max_t (E_cons(t) - E_avail(t)) on the profile grid.
double peak_cumulative_shortfall(const PowerProfile& profile);

PlanResult plan(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                const PowerParams& params, const PlannerConfig& config);

/// Prepends a waiting segment long enough for the cumulative budget to hold
/// at every profile sample; unchanged when it already does.
PlanResult enforce_energy_budget(const PlanResult& result, const PowerParams& params,
                                 const PlannerConfig& config);

}  // namespace rover
