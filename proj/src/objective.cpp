#include <cmath>
#include <limits>
#include <vector>

#include "rover/planner.hpp"
#include "rover/sample_kernel.hpp"

namespace rover {

void PlannerConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be >= 0");
  };
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  nonneg(rho_T, "rho_T");
  nonneg(rho_r, "rho_r");
  nonneg(lambda_c, "lambda_c");
  nonneg(kinematic_weight, "kinematic_weight");
  nonneg(E_bank0, "E_bank0");
  nonneg(risk_seed_threshold, "risk_seed_threshold");
  positive(vx_B_max, "vx_B_max");
  positive(ax_B_max, "ax_B_max");
  positive(ay_B_max, "ay_B_max");
  positive(grad_tol, "grad_tol");
  positive(constraint_tol, "constraint_tol");
  positive(kinematic_tol, "kinematic_tol");
  positive(kinematic_kappa, "kinematic_kappa");
  positive(v_nominal, "v_nominal");
  positive(profile_dt, "profile_dt");
  if (n_segments < 1) throw std::invalid_argument("n_segments must be >= 1");
  if (samples_per_segment < 8) throw std::invalid_argument("samples_per_segment must be >= 8");
  if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
  if (max_inner_iters < 1) throw std::invalid_argument("max_inner_iters must be >= 1");
}

PlanningProblem::PlanningProblem(const TerrainMap& map, const PowerParams& params,
                                 const PlannerConfig& config, const Pose2& start, const Pose2& goal)
    : map_(map), params_(params), config_(config), start_(start), goal_(goal) {
  config_.validate();
  params_.validate();
  if (!map_.contains(start.x, start.y)) throw OutOfBoundsError(start.x, start.y);
  if (!map_.contains(goal.x, goal.y)) throw OutOfBoundsError(goal.x, goal.y);
  n_segments_ = config_.n_segments;
  al_.multipliers.assign(static_cast<std::size_t>(num_samples()) * kConstraintKindCount, 0.0);
}

Eigen::VectorXd PlanningProblem::initial_variables() const {
  InitialGuessOptions opt;
  opt.n_segments = n_segments_;
  opt.v_nominal = config_.v_nominal;
  opt.risk_seed_threshold = config_.risk_seed_threshold;
  opt.lambda_c = config_.lambda_c;
  const WaypointSeed seed = seed_waypoints(start_, goal_, map_, opt);
  if (static_cast<int>(seed.durations.size()) != n_segments_) {
    throw PlanningError("start and goal coincide; nothing to optimize");
  }
  std::vector<Eigen::Vector2d> interior(seed.points.begin() + 1, seed.points.end() - 1);
  return pack(interior, Eigen::Map<const Eigen::VectorXd>(seed.durations.data(), n_segments_));
}

Eigen::VectorXd PlanningProblem::pack(const std::vector<Eigen::Vector2d>& waypoints,
                                      const Eigen::VectorXd& durations) const {
  Eigen::VectorXd v(num_variables());
  for (int i = 0; i + 1 < n_segments_; ++i) v.segment<2>(2 * i) = waypoints[i];
  v.tail(n_segments_) = durations.array().log().matrix();
  return v;
}

MinJerkSpline PlanningProblem::spline(const Eigen::VectorXd& variables) const {
  std::vector<Eigen::Vector2d> interior(n_segments_ - 1);
  for (int i = 0; i + 1 < n_segments_; ++i) interior[i] = variables.segment<2>(2 * i);
  const Eigen::VectorXd T = variables.tail(n_segments_).array().exp().matrix();
  BoundaryState head, tail;
  head.p = Eigen::Vector2d(start_.x, start_.y);
  tail.p = Eigen::Vector2d(goal_.x, goal_.y);
  MinJerkSpline s;
  s.generate(head, tail, interior, T);
  return s;
}

SplineTrajectorySE2 PlanningProblem::trajectory(const Eigen::VectorXd& variables) const {
  return spline(variables).trajectory();
}

namespace {

std::vector<SampleTerm> run_kernel(const SampleKernelInputs& in, int n, bool parallel,
                                   bool with_gradient) {
  std::vector<SampleTerm> terms(static_cast<std::size_t>(n));
  if (parallel) {
    evaluate_samples_parallel(in, terms, with_gradient);
  } else {
    evaluate_samples_serial(in, terms, with_gradient);
  }
  return terms;
}

}  // namespace

ObjectiveEvaluation PlanningProblem::evaluate(const Eigen::VectorXd& variables,
                                              bool with_gradient) const {
  ObjectiveEvaluation out;
  if (!variables.allFinite() || variables.size() != num_variables()) {
    out.valid = false;
    return out;
  }
  MinJerkSpline sp;
  try {
    sp = spline(variables);
  } catch (const std::exception&) {
    out.valid = false;
    return out;
  }
  std::vector<Segment> segs;
  segs.reserve(n_segments_);
  for (int i = 0; i < n_segments_; ++i) segs.push_back(sp.segment(i));

  SampleKernelInputs in;
  in.map = &map_;
  in.params = &params_;
  in.config = &config_;
  in.lagrangian = &al_;
  in.segments = segs;
  in.samples_per_segment = config_.samples_per_segment;
  const std::vector<SampleTerm> terms =
      run_kernel(in, num_samples(), config_.parallel, with_gradient);

  Eigen::MatrixX2d dJ_dc = Eigen::MatrixX2d::Zero(6 * n_segments_, 2);
  Eigen::VectorXd dJ_dT = Eigen::VectorXd::Zero(n_segments_);
  const int per = config_.samples_per_segment + 1;
  double value = 0.0;
  for (int i = 0; i < num_samples(); ++i) {
    const SampleTerm& t = terms[i];
    if (!t.valid) {
      out.valid = false;
      return out;
    }
    value += t.cost;
    out.terms.risk += t.risk;
    out.terms.power_penalty += t.power_penalty;
    out.terms.kinematic_penalty += t.kinematic_penalty;
    if (with_gradient) {
      const int s = i / per;
      for (int k = 0; k < 6; ++k) {
        dJ_dc(6 * s + k, 0) += t.d_coeffs[k];
        dJ_dc(6 * s + k, 1) += t.d_coeffs[6 + k];
      }
      dJ_dT[s] += t.d_duration;
    }
  }

  for (int s = 0; s < n_segments_; ++s) {
    const JerkCost jc = segment_jerk_cost(segs[s]);
    out.terms.jerk += jc.value;
    out.terms.time += config_.rho_T * segs[s].duration;
    if (with_gradient) {
      for (int k = 0; k < 6; ++k) {
        dJ_dc(6 * s + k, 0) += jc.d_coeffs[k];
        dJ_dc(6 * s + k, 1) += jc.d_coeffs[6 + k];
      }
      dJ_dT[s] += jc.d_duration + config_.rho_T;
    }
  }
  value += out.terms.jerk + out.terms.time;
  out.value = value;
  if (!std::isfinite(value)) {
    out.valid = false;
    return out;
  }
  if (!with_gradient) return out;

  const MinJerkSpline::Gradient g = sp.propagate(dJ_dc, dJ_dT);
  out.gradient.resize(num_variables());
  for (int i = 0; i + 1 < n_segments_; ++i) out.gradient.segment<2>(2 * i) = g.waypoints[i];
  out.gradient.tail(n_segments_) = g.durations.cwiseProduct(sp.durations());
  return out;
}

void PlanningProblem::update_multipliers(const Eigen::VectorXd& variables) {
  const SplineTrajectorySE2 traj = trajectory(variables);
  SampleKernelInputs in;
  in.map = &map_;
  in.params = &params_;
  in.config = &config_;
  in.lagrangian = &al_;
  in.segments = traj.segments();
  in.samples_per_segment = config_.samples_per_segment;
  const std::vector<SampleTerm> terms = run_kernel(in, num_samples(), config_.parallel, false);

  std::vector<double> next(al_.multipliers.size(), 0.0);
  for (int i = 0; i < num_samples(); ++i) {
    const SampleTerm& t = terms[i];
    if (!t.valid) continue;
    for (int k = 0; k < kConstraintKindCount; ++k) {
      if (!t.active && k != kReversal) continue;
      const bool power = k == kPowerCap;
      const double weight = power ? params_.omega_E : config_.kinematic_weight;
      if (weight <= 0.0) continue;
      const double kappa = power ? params_.kappa : config_.kinematic_kappa;
      const double rho = al_.scale[k] * weight;
      const std::size_t slot = static_cast<std::size_t>(i) * kConstraintKindCount + k;
      const double y = t.g[k] + al_.multipliers[slot] / (2.0 * rho);
      next[slot] = 2.0 * rho * softplus(y, kappa) * logistic(kappa * y);
    }
  }
  al_.multipliers = std::move(next);
}

std::array<double, kConstraintKindCount> PlanningProblem::sample_constraint_peaks(
    const Eigen::VectorXd& variables) const {
  std::array<double, kConstraintKindCount> peaks;
  peaks.fill(-std::numeric_limits<double>::infinity());
  const SplineTrajectorySE2 traj = trajectory(variables);
  SampleKernelInputs in;
  in.map = &map_;
  in.params = &params_;
  in.config = &config_;
  in.lagrangian = &al_;
  in.segments = traj.segments();
  in.samples_per_segment = config_.samples_per_segment;
  const std::vector<SampleTerm> terms = run_kernel(in, num_samples(), config_.parallel, false);
  for (const SampleTerm& t : terms) {
    if (!t.valid) continue;
    for (int k = 0; k < kConstraintKindCount; ++k) {
      if (t.active || k == kReversal) peaks[k] = std::max(peaks[k], t.g[k]);
    }
  }
  return peaks;
}

}  // namespace rover
