#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "rover/planner.hpp"
#include "rover/sample_kernel.hpp"
#include "rover/scenario.hpp"
#include "support.hpp"

using namespace rover;
using rover::testing::close_rel;
using rover::testing::sampled_map;

namespace {

const std::filesystem::path kAssets = ROVER_ASSET_DIR;

TerrainMap flat_map(int n = 41, double cell = 0.5) {
  return sampled_map([](double, double) { return 0.0; }, n, cell);
}

TerrainMap ramp_map() {
  // Plane rising 0.1 m per metre along x.
  return sampled_map([](double x, double) { return 0.1 * x; }, 81, 0.5);
}

SplineTrajectorySE2 straight_line(double x0, double y0, double vx, double vy, double T) {
  Segment s;
  s.cx = {x0, vx, 0, 0, 0, 0};
  s.cy = {y0, vy, 0, 0, 0, 0};
  s.duration = T;
  return SplineTrajectorySE2({s});
}

PlannerConfig small_config() {
  PlannerConfig c;
  c.n_segments = 3;
  c.samples_per_segment = 8;
  c.rho_r = 0.3;
  c.parallel = false;
  return c;
}

double cumulative_gap(const PowerProfile& p, std::size_t upto) {
  double gap = 0.0;
  for (std::size_t i = 1; i <= upto; ++i) {
    const double h = p.times[i] - p.times[i - 1];
    const double a = drawn_power(p.samples[i - 1]) - p.samples[i - 1].P_avail;
    const double b = drawn_power(p.samples[i]) - p.samples[i].P_avail;
    gap += 0.5 * h * (a + b);
  }
  return gap;
}

struct CraterRuns {
  Scenario scenario;
  TerrainMap map;
  PlanResult proposed;
  PlanResult ablation;
};

const CraterRuns& crater_runs() {
  static const CraterRuns runs = [] {
    Scenario s = load_scenario(kAssets / "scenarios" / "craters.json");
    TerrainMap map = load_heightmap(s.terrain.path, s.terrain.format);
    PlanResult a = plan(s.start, s.goal, map, s.power, s.planner);
    PowerParams off = s.power;
    off.omega_E = 0.0;
    PlanResult b = plan(s.start, s.goal, map, off, s.planner);
    return CraterRuns{s, std::move(map), std::move(a), std::move(b)};
  }();
  return runs;
}

}  // namespace

TEST(PlannerConfig, RejectsBadValues) {
  PlannerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.samples_per_segment = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PlannerConfig{};
  c.rho_T = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PlannerConfig{};
  c.vx_B_max = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Objective, WaitOnlyIsPureTimeCost) {
  const TerrainMap map = flat_map();
  PlannerConfig c;
  c.n_segments = 1;
  c.rho_T = 1.7;
  const Pose2 p{5.0, 5.0, 0.0};
  const PlanningProblem prob(map, PowerParams{}, c, p, p);
  for (double T : {0.5, 2.0, 9.0}) {
    Eigen::VectorXd v(1);
    v << std::log(T);
    const ObjectiveEvaluation e = prob.evaluate(v);
    ASSERT_TRUE(e.valid);
    EXPECT_NEAR(e.value, c.rho_T * T, 1e-12 * T);
    EXPECT_NEAR(e.gradient[0], c.rho_T * T, 1e-12 * T);
    EXPECT_EQ(e.terms.power_penalty, 0.0);
    EXPECT_EQ(e.terms.jerk, 0.0);
  }
}

TEST(Objective, GradientMatchesFiniteDifferencesOnFlat) {
  const TerrainMap map = flat_map();
  const PlannerConfig c = small_config();
  PowerParams p;
  p.P_limit = 160.0;
  PlanningProblem prob(map, p, c, {3.0, 4.0, 0.0}, {16.0, 12.0, 0.0});
  const Eigen::VectorXd x0 = prob.initial_variables();
  prob.update_multipliers(x0);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x = x0;
    for (int i = 0; i < x.size(); ++i) x[i] += (i < 2 * (c.n_segments - 1) ? 0.8 : 0.2) * noise(rng);
    const ObjectiveEvaluation e = prob.evaluate(x);
    if (!e.valid) continue;
    ++checked;
    const double floor = 1e-6 * (1.0 + e.gradient.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (prob.evaluate(xp, false).value - prob.evaluate(xm, false).value) / (2 * h);
      EXPECT_TRUE(close_rel(e.gradient[i], fd, 1e-3, floor))
          << "trial " << trial << " var " << i << ": " << e.gradient[i] << " vs " << fd;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Objective, GradientMatchesFiniteDifferencesOnRoughTerrain) {
  const TerrainMap map = rover::testing::smooth_random_map(17, 30, 1.0);
  const PlannerConfig c = small_config();
  PowerParams p;
  p.P_limit = 150.0;
  PlanningProblem prob(map, p, c, {5.0, 6.0, 0.0}, {22.0, 20.0, 0.0});
  const Eigen::VectorXd x0 = prob.initial_variables();
  prob.update_multipliers(x0);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 300; ++trial) {
    Eigen::VectorXd x = x0;
    for (int i = 0; i < x.size(); ++i) x[i] += (i < 2 * (c.n_segments - 1) ? 0.8 : 0.2) * noise(rng);
    const ObjectiveEvaluation e = prob.evaluate(x);
    if (!e.valid) continue;
    ++checked;
    const double floor = 1e-6 * (1.0 + e.gradient.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (prob.evaluate(xp, false).value - prob.evaluate(xm, false).value) / (2 * h);
      EXPECT_TRUE(close_rel(e.gradient[i], fd, 1e-3, floor))
          << "trial " << trial << " var " << i << ": " << e.gradient[i] << " vs " << fd;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(ReversalMeasure, SignFollowsTheChord) {
  Segment s;
  s.cx = {0.0, 1.0, 0, 0, 0, 0};
  s.cy = {0.0, 0.0, 0, 0, 0, 0};
  s.duration = 2.0;
  const double e = kReversalSpeedScale;
  EXPECT_NEAR(reversal_measure(s, 1.0, 0.0), -1.0 / std::sqrt(1.0 + e * e) - kReversalMargin, 1e-15);
  EXPECT_NEAR(reversal_measure(s, -1.0, 0.0), 1.0 / std::sqrt(1.0 + e * e) - kReversalMargin, 1e-15);
  EXPECT_NEAR(reversal_measure(s, 0.0, 3.0), -kReversalMargin, 1e-15);
  EXPECT_NEAR(reversal_measure(s, 0.0, 0.0), -kReversalMargin, 1e-15);
  EXPECT_EQ(reversal_measure(Segment::wait(1.0, 1.0, 2.0), -1.0, 0.0), -1.0);
}

TEST(Objective, GradientMatchesFiniteDifferencesThroughReversal) {
  // The interior waypoint overshoots the goal, so the last segment runs back.
  const TerrainMap map = flat_map();
  PlannerConfig c = small_config();
  c.n_segments = 2;
  PowerParams p;
  p.P_limit = 1000.0;
  PlanningProblem prob(map, p, c, {3.0, 4.0, 0.0}, {10.0, 4.0, 0.0});
  Eigen::VectorXd durations(2);
  durations << 6.0, 3.0;
  const Eigen::VectorXd x0 = prob.pack({Eigen::Vector2d(14.0, 4.5)}, durations);
  ASSERT_GT(prob.sample_constraint_peaks(x0)[kReversal], 0.5);
  prob.update_multipliers(x0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd x = x0;
    for (int i = 0; i < x.size(); ++i) x[i] += noise(rng);
    const ObjectiveEvaluation e = prob.evaluate(x);
    ASSERT_TRUE(e.valid);
    EXPECT_GT(e.terms.kinematic_penalty, 0.1);
    const double floor = 1e-6 * (1.0 + e.gradient.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (prob.evaluate(xp, false).value - prob.evaluate(xm, false).value) / (2 * h);
      EXPECT_TRUE(close_rel(e.gradient[i], fd, 1e-3, floor))
          << "trial " << trial << " var " << i << ": " << e.gradient[i] << " vs " << fd;
    }
  }
}

TEST(Objective, PenaltyGrowsWithWeight) {
  const TerrainMap map = rover::testing::smooth_random_map(3, 30, 1.0);
  PowerParams p;
  p.P_limit = 140.0;
  PowerParams q = p;
  q.omega_E *= 10.0;
  const PlannerConfig c = small_config();
  const PlanningProblem a(map, p, c, {5.0, 6.0, 0.0}, {22.0, 20.0, 0.0});
  const PlanningProblem b(map, q, c, {5.0, 6.0, 0.0}, {22.0, 20.0, 0.0});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x = a.initial_variables();
    for (int i = 0; i < x.size(); ++i) x[i] += noise(rng);
    const ObjectiveEvaluation ea = a.evaluate(x, false);
    const ObjectiveEvaluation eb = b.evaluate(x, false);
    if (!ea.valid) continue;
    EXPECT_GE(eb.terms.power_penalty, ea.terms.power_penalty);
  }
}

TEST(SampleKernel, ParallelMatchesSerialBitwise) {
  const TerrainMap map = rover::testing::smooth_random_map(11, 30, 1.0);
  PlannerConfig c;
  c.n_segments = 6;
  PowerParams p;
  PlanningProblem prob(map, p, c, {4.0, 4.0, 0.0}, {24.0, 22.0, 0.0});
  const Eigen::VectorXd x = prob.initial_variables();
  prob.update_multipliers(x);
  const MinJerkSpline sp = prob.spline(x);
  std::vector<Segment> segs;
  for (int i = 0; i < sp.segments(); ++i) segs.push_back(sp.segment(i));

  SampleKernelInputs in;
  in.map = &map;
  in.params = &p;
  in.config = &c;
  in.lagrangian = &prob.lagrangian();
  in.segments = segs;
  in.samples_per_segment = c.samples_per_segment;
  std::vector<SampleTerm> a(prob.num_samples()), b(prob.num_samples());
  evaluate_samples_serial(in, a, true);
  evaluate_samples_parallel(in, b, true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].cost, b[i].cost);
    EXPECT_EQ(a[i].d_duration, b[i].d_duration);
    EXPECT_EQ(a[i].d_coeffs, b[i].d_coeffs);
  }

  PlannerConfig cs = c;
  cs.parallel = false;
  PlanningProblem serial(map, p, cs, {4.0, 4.0, 0.0}, {24.0, 22.0, 0.0});
  serial.lagrangian() = prob.lagrangian();
  const ObjectiveEvaluation ep = prob.evaluate(x);
  const ObjectiveEvaluation es = serial.evaluate(x);
  EXPECT_EQ(ep.value, es.value);
  EXPECT_EQ(ep.gradient, es.gradient);
}

TEST(EvaluateProfile, WaitOnlyDrawsBase) {
  const TerrainMap map = flat_map();
  const PowerParams p;
  const SplineTrajectorySE2 traj({Segment::wait(5.0, 5.0, 3.0)});
  const PowerProfile prof = evaluate_profile(traj, map, p, 0.1);
  EXPECT_EQ(prof.size(), 31u);
  for (const auto& s : prof.samples) EXPECT_EQ(s.P_cons, p.P_base);
}

TEST(EvaluateProfile, ConstantVelocityWithoutResistance) {
  const TerrainMap map = flat_map();
  PowerParams p;
  p.C0 = p.C1 = p.C2 = 0.0;
  const PowerProfile prof = evaluate_profile(straight_line(2.0, 3.0, 0.6, 0.3, 8.0), map, p, 0.05);
  for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_GT(prof.times[i], prof.times[i - 1]);
  for (const auto& s : prof.samples) EXPECT_EQ(s.P_cons, p.P_base);
}

TEST(EvaluateProfile, RampAscentPlateau) {
  const TerrainMap map = ramp_map();
  PowerParams p;
  p.C0 = p.C1 = p.C2 = 0.0;
  // 0.5 m/s in the plane, climbing a slope with sin(phi) ~ 0.1.
  const PowerProfile prof = evaluate_profile(straight_line(8.0, 20.0, 0.5, 0.0, 40.0), map, p, 0.1);
  const double phi = std::atan(0.1);
  for (const auto& s : prof.samples) {
    EXPECT_NEAR(s.P_lin, p.m * p.g * std::sin(phi) * 0.5 / std::cos(phi), 1e-6);
    EXPECT_NEAR(s.P_lin, 12.21, 0.15);
  }
}

TEST(EvaluateProfile, LeavingTheMapNamesTime) {
  const TerrainMap map = flat_map();
  try {
    evaluate_profile(straight_line(5.0, 5.0, 1.0, 0.0, 30.0), map, PowerParams{}, 0.1);
    FAIL() << "expected an error";
  } catch (const PlanningError& e) {
    EXPECT_NE(std::string(e.what()).find("t = 15"), std::string::npos) << e.what();
  }
  EXPECT_THROW(evaluate_profile(straight_line(5.0, 5.0, 1.0, 0.0, 3.0), map, PowerParams{}, 0.0),
               std::invalid_argument);
}

TEST(EnergyBudget, AlreadySatisfiedIsUnchanged) {
  const TerrainMap map = flat_map();
  PlanResult r;
  r.trajectory = straight_line(5.0, 5.0, 0.5, 0.0, 10.0);
  r.profile = evaluate_profile(r.trajectory, map, PowerParams{}, 0.05);
  r.budget_margin = budget_margin(r.profile);
  const PlanResult out = enforce_energy_budget(r, PowerParams{}, PlannerConfig{});
  EXPECT_EQ(out.wait_time_inserted, 0.0);
  EXPECT_EQ(out.profile.size(), r.profile.size());
  EXPECT_EQ(out.trajectory.total_duration(), r.trajectory.total_duration());
  EXPECT_GT(out.budget_margin, 0.0);
}

TEST(EnergyBudget, FiftyJouleDeficitWaitsFiveSeconds) {
  // Uniform acceleration from rest with m a^2 = 8 W/s: drawn power rises 100 -> 140 W over 5 s
  // against 110 W available, a 50 J shortfall at the end.
  const TerrainMap map = flat_map();
  PowerParams p;
  p.C0 = p.C1 = p.C2 = 0.0;
  p.P_RTG = 110.0;
  p.P_solar = 0.0;
  p.P_base = 100.0;
  PlannerConfig c;
  c.profile_dt = 0.05;
  const double a = std::sqrt(8.0 / p.m);
  Segment s;
  s.cx = {5.0, 0, 0.5 * a, 0, 0, 0};
  s.cy = {5.0, 0, 0, 0, 0, 0};
  s.duration = 5.0;
  PlanResult r;
  r.trajectory = SplineTrajectorySE2({s});
  r.profile = evaluate_profile(r.trajectory, map, p, c.profile_dt);
  EXPECT_NEAR(peak_cumulative_shortfall(r.profile), 50.0, 1e-9);

  const PlanResult out = enforce_energy_budget(r, p, c);
  EXPECT_NEAR(out.wait_time_inserted, 5.0, 1e-9);
  EXPECT_NEAR(out.trajectory.total_duration(), 10.0, 1e-9);
  EXPECT_TRUE(out.trajectory.segments()[0].kind == SegmentKind::kWait);
  for (std::size_t i = 1; i < out.profile.size(); ++i) {
    double used = 0.0;
    for (std::size_t k = 1; k <= i; ++k)
      used += 0.5 * (out.profile.times[k] - out.profile.times[k - 1]) *
              (drawn_power(out.profile.samples[k - 1]) + drawn_power(out.profile.samples[k]));
    EXPECT_LE(cumulative_gap(out.profile, i), 1e-6 * used) << "sample " << i;
  }
}

TEST(EnergyBudget, PowerJumpAtMotionStartStillCloses) {
  const TerrainMap map = flat_map();
  PowerParams p;
  p.C0 = 20.0;
  p.C1 = p.C2 = 0.0;
  p.P_RTG = 110.0;
  p.P_solar = 0.0;
  PlannerConfig c;
  PlanResult r;
  r.trajectory = straight_line(5.0, 5.0, 1.0, 0.0, 5.0);
  r.profile = evaluate_profile(r.trajectory, map, p, c.profile_dt);
  const PlanResult out = enforce_energy_budget(r, p, c);
  EXPECT_GE(out.wait_time_inserted, 5.0);
  EXPECT_LE(out.wait_time_inserted, 5.0 + 2.0 * c.profile_dt);
  EXPECT_LE(peak_cumulative_shortfall(out.profile), 1e-6 * 50.0);
}

TEST(EnergyBudget, BankedEnergyCoversDeficit) {
  const TerrainMap map = flat_map();
  PowerParams p;
  p.C0 = p.C1 = p.C2 = 0.0;
  p.P_RTG = 110.0;
  p.P_solar = 0.0;
  PlannerConfig c;
  c.E_bank0 = 30.0;
  const double a = std::sqrt(8.0 / p.m);
  Segment s;
  s.cx = {5.0, 0, 0.5 * a, 0, 0, 0};
  s.cy = {5.0, 0, 0, 0, 0, 0};
  s.duration = 5.0;
  PlanResult r;
  r.trajectory = SplineTrajectorySE2({s});
  r.profile = evaluate_profile(r.trajectory, map, p, c.profile_dt);
  EXPECT_NEAR(enforce_energy_budget(r, p, c).wait_time_inserted, 2.0, 1e-9);
  c.E_bank0 = 60.0;
  EXPECT_EQ(enforce_energy_budget(r, p, c).wait_time_inserted, 0.0);
}

TEST(EnergyBudget, NoSurplusIsInfeasible) {
  const TerrainMap map = flat_map();
  PowerParams p;
  p.P_RTG = 50.0;
  p.P_solar = 40.0;
  PlanResult r;
  r.trajectory = straight_line(5.0, 5.0, 0.5, 0.0, 4.0);
  r.profile = evaluate_profile(r.trajectory, map, p, 0.05);
  try {
    enforce_energy_budget(r, p, PlannerConfig{});
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleBudgetError& e) {
    EXPECT_GT(e.deficit(), 0.0);
    EXPECT_NE(std::string(e.what()).find("deficit"), std::string::npos);
  }
}

TEST(Plan, StartEqualsGoalWaits) {
  const TerrainMap map = flat_map();
  const PlanResult r = plan({5.0, 5.0, 0.0}, {5.0, 5.0, 0.0}, map, PowerParams{}, PlannerConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.trajectory.is_stationary());
  EXPECT_EQ(r.P_pmax, PowerParams{}.P_base);
}

TEST(Plan, OutOfBoundsEndpointRejected) {
  const TerrainMap map = flat_map();
  EXPECT_THROW(plan({5.0, 5.0, 0.0}, {50.0, 5.0, 0.0}, map, PowerParams{}, PlannerConfig{}), OutOfBoundsError);
}

TEST(Plan, GenerousCapOnFlatTerrain) {
  const TerrainMap map = flat_map(61);
  PowerParams p;
  p.P_limit = 10000.0;
  const PlanResult r = plan({3.0, 4.0, 0.0}, {25.0, 20.0, 0.0}, map, p, PlannerConfig{});
  ASSERT_TRUE(r.converged);
  const ObjectiveTerms& t = r.objective_terms;
  const double J = t.jerk + t.time + t.risk + t.power_penalty + t.kinematic_penalty;
  EXPECT_LE(t.power_penalty, 1e-6 * J);
  EXPECT_EQ(r.P_pmax, r.profile.peak_consumption());
  EXPECT_NEAR(r.budget_margin, budget_margin(r.profile), 1e-9 * std::abs(r.budget_margin));
}

TEST(Plan, NoBackingUpNearRestEndpoints) {
  // Endpoint pairs that once produced overshoot-and-return or back-up-then-go plans.
  const TerrainMap map =
      load_heightmap(kAssets / "terrain" / "flat.asc", HeightmapFormat::kEsriAsciiGrid);
  const std::vector<std::pair<Pose2, Pose2>> cases = {
      {{23.879288576267875, 22.70519507066782, 0.0}, {19.92126391984225, 18.165004305857313, 0.0}},
      {{18.807427887371418, 4.84688143776894, 0.0}, {21.411295234101097, 10.03211607608219, 0.0}},
      {{12.352038735118109, 20.992402103137646, 0.0}, {15.74325109841087, 16.526627570173648, 0.0}},
  };
  const PowerParams p;
  const PlannerConfig c;
  for (const auto& [a, b] : cases) {
    const PlanResult r = plan(a, b, map, p, c);
    EXPECT_TRUE(r.converged);
    double worst = -1.0;
    for (const BodyKinematics& k : r.profile.body) worst = std::max(worst, k.reversal);
    EXPECT_LE(worst, c.kinematic_tol) << a.x << ", " << a.y;
    EXPECT_LE(r.P_pmax, 1.01 * p.cap());
  }
}

TEST(Plan, CraterFieldRespectsCap) {
  const CraterRuns& runs = crater_runs();
  ASSERT_TRUE(runs.proposed.converged);
  EXPECT_LE(runs.proposed.P_pmax, runs.scenario.power.cap() * 1.01);
  EXPECT_GT(runs.ablation.P_pmax, runs.scenario.power.cap());
  EXPECT_LE(runs.proposed.P_pmax, runs.ablation.P_pmax);
}

TEST(Plan, BoundaryExactness) {
  const CraterRuns& runs = crater_runs();
  for (const PlanResult* r : {&runs.proposed, &runs.ablation}) {
    if (!r->converged) continue;
    const Pose2 a = r->trajectory.start_pose();
    const Pose2 b = r->trajectory.end_pose();
    EXPECT_NEAR(a.x, runs.scenario.start.x, 1e-6);
    EXPECT_NEAR(a.y, runs.scenario.start.y, 1e-6);
    EXPECT_NEAR(b.x, runs.scenario.goal.x, 1e-6);
    EXPECT_NEAR(b.y, runs.scenario.goal.y, 1e-6);
  }
}

TEST(Plan, AcceptedIteratesAreMonotone) {
  const CraterRuns& runs = crater_runs();
  double last = std::numeric_limits<double>::infinity();
  int accepted = 0;
  for (const OuterIteration& it : runs.proposed.history) {
    if (!it.accepted) continue;
    ++accepted;
    EXPECT_LE(it.power_violation, last);
    last = it.power_violation;
  }
  EXPECT_GE(accepted, 1);
}

TEST(Plan, HalvingResolutionChangesPeakLittle) {
  const CraterRuns& runs = crater_runs();
  ASSERT_TRUE(runs.proposed.converged);
  const double dt = runs.scenario.planner.profile_dt;
  const PowerProfile fine =
      evaluate_profile(runs.proposed.trajectory, runs.map, runs.scenario.power, 0.5 * dt, runs.scenario.planner.tau_mode);
  EXPECT_LT(std::abs(fine.peak_consumption() - runs.proposed.P_pmax), 0.01 * runs.proposed.P_pmax);
}
