#include <algorithm>
#include <cmath>
#include <limits>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "rover/planner.hpp"

namespace rover {

namespace {

class ObjectiveFunction final : public ceres::FirstOrderFunction {
 public:
  ObjectiveFunction(const PlanningProblem& problem, double scale)
      : problem_(problem), scale_(scale) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> x(parameters, problem_.num_variables());
    const ObjectiveEvaluation e = problem_.evaluate(x, gradient != nullptr);
    if (!e.valid) return false;
    *cost = e.value / scale_;
    if (gradient != nullptr) {
      if (!e.gradient.allFinite()) return false;
      Eigen::Map<Eigen::VectorXd>(gradient, problem_.num_variables()) = e.gradient / scale_;
    }
    return true;
  }

  int NumParameters() const override { return problem_.num_variables(); }

 private:
  const PlanningProblem& problem_;
  double scale_;
};

// The first L-BFGS step is the raw negative gradient; dividing the objective keeps it short.
// Near-rest heading singularities make long trial steps blow up, so a stalled solve retries
// with a shorter one.
constexpr std::array<double, 3> kFirstSteps{1e-1, 1e-3, 1e-5};
constexpr double kSettledObjective = 1e-4;

struct Violations {
  bool valid = false;
  double power = 0.0;
  std::array<double, kConstraintKindCount> per_kind{};
  double kinematic = 0.0;
};

Violations measure(const PowerProfile& prof, const PowerParams& params, const PlannerConfig& cfg) {
  Violations v;
  v.valid = true;
  const double cap = params.cap();
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& s : prof.samples) peak = std::max(peak, s.P_cons);
  v.power = std::max(0.0, cap > 0.0 ? (peak - cap) / cap : peak - cap);
  v.per_kind[kPowerCap] = v.power;
  for (const auto& b : prof.body) {
    v.per_kind[kSpeedBound] = std::max(v.per_kind[kSpeedBound], b.vx_B / cfg.vx_B_max - 1.0);
    v.per_kind[kAccelUpper] = std::max(v.per_kind[kAccelUpper], b.ax_B / cfg.ax_B_max - 1.0);
    v.per_kind[kAccelLower] = std::max(v.per_kind[kAccelLower], -b.ax_B / cfg.ax_B_max - 1.0);
    v.per_kind[kLateralUpper] = std::max(v.per_kind[kLateralUpper], b.ay_B / cfg.ay_B_max - 1.0);
    v.per_kind[kLateralLower] = std::max(v.per_kind[kLateralLower], -b.ay_B / cfg.ay_B_max - 1.0);
    v.per_kind[kReversal] = std::max(v.per_kind[kReversal], b.reversal);
  }
  for (int k = kSpeedBound; k < kConstraintKindCount; ++k) v.kinematic = std::max(v.kinematic, v.per_kind[k]);
  return v;
}

PlanResult stationary_plan(const Pose2& start, const TerrainMap& map, const PowerParams& params,
                           const PlannerConfig& config) {
  PlanResult r;
  r.trajectory = SplineTrajectorySE2({Segment::wait(start.x, start.y, 1.0)});
  r.profile = evaluate_profile(r.trajectory, map, params, config.profile_dt, config.tau_mode);
  r.objective_terms.time = config.rho_T * 1.0;
  r.P_pmax = r.profile.peak_consumption();
  r.budget_margin = budget_margin(r.profile);
  r.converged = true;
  return r;
}

}  // namespace

PlanResult plan(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                const PowerParams& params, const PlannerConfig& config) {
  config.validate();
  params.validate();
  if (!map.contains(start.x, start.y)) throw OutOfBoundsError(start.x, start.y);
  if (!map.contains(goal.x, goal.y)) throw OutOfBoundsError(goal.x, goal.y);
  if (std::hypot(goal.x - start.x, goal.y - start.y) < 1e-9) {
    return stationary_plan(start, map, params, config);
  }

  PlanningProblem problem(map, params, config, start, goal);
  Eigen::VectorXd x = problem.initial_variables();

  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_num_iterations = config.max_inner_iters;
  options.gradient_tolerance = config.grad_tol;
  options.function_tolerance = 1e-10;
  options.parameter_tolerance = 1e-10;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;

  const bool power_enforced = params.omega_E > 0.0;
  const bool kinematics_enforced = config.kinematic_weight > 0.0;

  PlanResult best;
  bool have_best = false;
  double best_power = std::numeric_limits<double>::infinity();
  double best_kin_excess = std::numeric_limits<double>::infinity();
  double prev_feasible_objective = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd best_x = x;
  std::array<double, kConstraintKindCount> prev{};
  prev.fill(std::numeric_limits<double>::infinity());
  int total_inner = 0;

  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    const ObjectiveEvaluation start_eval = problem.evaluate(x);
    const double g0 = start_eval.valid ? start_eval.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    ceres::GradientProblemSolver::Summary summary;
    Eigen::VectorXd trial = x;
    int inner = 0;
    for (const double first_step : kFirstSteps) {
      const double fscale = std::isfinite(g0) ? std::max(1.0, g0 / first_step) : 1.0;
      options.gradient_tolerance = config.grad_tol / fscale;
      ceres::GradientProblem gp(new ObjectiveFunction(problem, fscale));
      trial = x;
      ceres::Solve(options, gp, trial.data(), &summary);
      inner += static_cast<int>(summary.iterations.size());
      const bool stalled =
          summary.iterations.size() <= 2 && g0 > config.grad_tol &&
          summary.initial_cost - summary.final_cost <= 1e-9 * std::abs(summary.initial_cost);
      if (!stalled) break;
    }
    if (summary.termination_type != ceres::FAILURE && trial.allFinite() &&
        problem.evaluate(trial, false).valid) {
      x = trial;
    }
    total_inner += inner;

    OuterIteration it;
    it.inner_iterations = inner;
    const SplineTrajectorySE2 traj = problem.trajectory(x);
    PowerProfile prof;
    Violations viol;
    try {
      prof = evaluate_profile(traj, map, params, config.profile_dt, config.tau_mode);
      viol = measure(prof, params, config);
    } catch (const std::exception&) {
      viol.valid = false;
    }

    if (viol.valid) {
      const double p_excess = power_enforced ? std::max(0.0, viol.power - config.constraint_tol) : 0.0;
      const double k_excess =
          kinematics_enforced ? std::max(0.0, viol.kinematic - config.kinematic_tol) : 0.0;
      const double power_rank = power_enforced ? viol.power : 0.0;
      it.power_violation = viol.power;
      it.kinematic_violation = viol.kinematic;
      it.excess = p_excess + k_excess;
      it.objective = problem.evaluate(x, false).value;
      it.accepted = power_rank <= best_power && k_excess <= best_kin_excess;
      if (it.accepted) {
        best_power = power_rank;
        best_kin_excess = k_excess;
        best_x = x;
        have_best = true;
        best.trajectory = traj;
        best.profile = std::move(prof);
        best.power_violation = viol.power;
        best.kinematic_violation = viol.kinematic;
        // An inner solve capped by max_inner_iters still counts once the feasible objective settles.
        const bool settled = std::abs(it.objective - prev_feasible_objective) <=
                             kSettledObjective * std::abs(it.objective);
        best.converged =
            it.excess == 0.0 && (summary.termination_type == ceres::CONVERGENCE || settled);
      }
    }
    prev_feasible_objective =
        viol.valid && it.excess == 0.0 ? it.objective : std::numeric_limits<double>::quiet_NaN();
    best.history.push_back(it);
    if (have_best && best.converged && it.accepted) break;
    if (!viol.valid) continue;

    for (int k = 0; k < kConstraintKindCount; ++k) {
      const bool power = k == kPowerCap;
      if (power ? !power_enforced : !kinematics_enforced) continue;
      const double tol = power ? config.constraint_tol : config.kinematic_tol;
      const double v = viol.per_kind[k];
      if (v > tol && v > 0.5 * prev[k]) problem.lagrangian().scale[k] *= 5.0;
      prev[k] = v;
    }
    problem.update_multipliers(x);
  }

  if (!have_best) throw PlanningError("planner produced no trajectory inside the terrain map");

  // Report the unweighted objective at the accepted iterate.
  problem.lagrangian() = AugmentedLagrangian{};
  problem.lagrangian().multipliers.assign(
      static_cast<std::size_t>(problem.num_samples()) * kConstraintKindCount, 0.0);
  best.objective_terms = problem.evaluate(best_x, false).terms;
  best.P_pmax = best.profile.peak_consumption();
  best.budget_margin = budget_margin(best.profile);
  best.outer_iterations = static_cast<int>(best.history.size());
  best.inner_iterations = total_inner;
  return best;
}

}  // namespace rover
