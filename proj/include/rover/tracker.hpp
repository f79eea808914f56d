#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rover/power.hpp"
#include "rover/terrain.hpp"
#include "rover/trajectory.hpp"

namespace rover {

class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NMPCConfig {
  int N_p = 20;
  int N_c = 10;
  double dt_ctrl = 0.1;
  Eigen::Vector3d Q{10.0, 10.0, 2.0};
  Eigen::Vector2d R{1.0, 1.0};
  Eigen::Vector2d R_d{5.0, 5.0};
  Eigen::Vector2d v_bounds{-0.5, 1.5};
  Eigen::Vector2d omega_bounds{-1.0, 1.0};
  int max_sqp_iters = 5;
  int max_qp_iters = 400;
  double qp_tol = 1e-10;

  void validate() const;
};

struct SimState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double t = 0.0;
};

/// (v, omega) in the projected plane or the body frame.
struct Control {
  double v = 0.0;
  double omega = 0.0;
};

struct ReferenceWindow {
  std::vector<Eigen::Vector3d> X;  // N_p + 1 poses (x, y, psi)
  std::vector<Eigen::Vector2d> U;  // N_c + 1 controls (v, omega)
};

/// Samples at t_now + k dt_ctrl; past the end the goal pose is held at rest.
ReferenceWindow build_reference(const SplineTrajectorySE2& traj, double t_now, const NMPCConfig& cfg);

struct NMPCSolution {
  Control u;                          // first element, the one applied
  std::vector<Eigen::Vector2d> plan;  // optimized N_c + 1 controls
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Gauss-Newton SQP on the receding-horizon cost; each step is a box QP solved
/// by accelerated projected gradient, followed by a backtracking line search.
NMPCSolution solve_nmpc(const SimState& state, const ReferenceWindow& ref, const NMPCConfig& cfg);

/// Horizon cost of a control sequence under the unicycle rollout.
double nmpc_cost(const SimState& state, const ReferenceWindow& ref, const NMPCConfig& cfg,
                 const std::vector<Eigen::Vector2d>& controls);

double wrap_angle(double a);

Control map_to_body(const Control& u_proj, double phi, double xi);
Control project_to_plane(const Control& u_body, double phi, double xi);

struct Disturbance {
  double actuation_sigma = 0.0;  // relative, per command component
  double power_sigma = 0.0;      // W, additive on P_est
};

struct TrackingOptions {
  double goal_tolerance = 0.1;  // m
  double grace_time = 10.0;     // s past the plan end
  int substeps = 4;             // RK4 steps per control period
  std::uint64_t seed = 0;
  Disturbance disturbance;
};

struct TrackingRecord {
  double t = 0.0;
  SimState state;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  Control u_proj;
  Control u_body;
  double e_y = 0.0;
  double e_vx = 0.0;
  double P_est = 0.0;
};

struct TrackingSummary {
  double e_y_rms = 0.0;
  double e_vx_rms = 0.0;
  double P_tmax = 0.0;
};

struct TrackingLog {
  std::vector<TrackingRecord> records;
  TrackingSummary summary;
  bool success = false;
  std::string message;
  int unconverged_solves = 0;

  std::string to_csv() const;
  std::string summary_json() const;
};

TrackingSummary summarize(const std::vector<TrackingRecord>& records);

TrackingLog simulate_tracking(const SplineTrajectorySE2& traj, const TerrainMap& map,
                              const PowerParams& params, const NMPCConfig& cfg,
                              const TrackingOptions& options = {});

}  // namespace rover
