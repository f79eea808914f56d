#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rover/tracker.hpp"

namespace rover {

namespace {

struct Angles {
  double phi = 0.0;
  double xi = 0.0;
};

Angles terrain_angles(const TerrainMap& map, double x, double y, double psi) {
  const auto jet = map.try_jet(x, y);
  if (!jet) {
    std::ostringstream msg;
    msg << "rover left the terrain map at (" << x << ", " << y << ")";
    throw TrackingError(msg.str());
  }
  return {pitch_from_jet(*jet, psi).phi, attitude_from_jet(*jet).xi};
}

// Body commands are held; the projected rates follow the terrain under the rover.
Eigen::Vector3d plant_rate(const TerrainMap& map, const Eigen::Vector3d& s, const Control& u_body) {
  const Angles a = terrain_angles(map, s.x(), s.y(), s.z());
  const Control u = project_to_plane(u_body, a.phi, a.xi);
  return {u.v * std::cos(s.z()), u.v * std::sin(s.z()), u.omega};
}

Eigen::Vector3d rk4(const TerrainMap& map, Eigen::Vector3d s, const Control& u, double dt, int n) {
  const double h = dt / n;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d k1 = plant_rate(map, s, u);
    const Eigen::Vector3d k2 = plant_rate(map, s + 0.5 * h * k1, u);
    const Eigen::Vector3d k3 = plant_rate(map, s + 0.5 * h * k2, u);
    const Eigen::Vector3d k4 = plant_rate(map, s + h * k3, u);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

}  // namespace

TrackingSummary summarize(const std::vector<TrackingRecord>& records) {
  TrackingSummary s;
  if (records.empty()) return s;
  double ey = 0.0, ev = 0.0;
  s.P_tmax = records.front().P_est;
  for (const auto& r : records) {
    ey += r.e_y * r.e_y;
    ev += r.e_vx * r.e_vx;
    s.P_tmax = std::max(s.P_tmax, r.P_est);
  }
  const double n = static_cast<double>(records.size());
  s.e_y_rms = std::sqrt(ey / n);
  s.e_vx_rms = std::sqrt(ev / n);
  return s;
}

TrackingLog simulate_tracking(const SplineTrajectorySE2& traj, const TerrainMap& map,
                              const PowerParams& params, const NMPCConfig& cfg,
                              const TrackingOptions& opt) {
  cfg.validate();
  params.validate();
  TrackingLog log;
  const Pose2 start = traj.start_pose();
  const Pose2 goal = traj.end_pose();
  if (traj.is_stationary()) {
    log.success = true;
    log.message = "stationary plan";
    return log;
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::Vector3d s(start.x, start.y, start.psi);
  double t = traj.t0();
  const double dt = cfg.dt_ctrl;
  const double t_end = traj.end_time();

  Control prev_body;
  {
    const ReferenceWindow ref0 = build_reference(traj, t, cfg);
    const Angles a = terrain_angles(map, s.x(), s.y(), s.z());
    prev_body = map_to_body({ref0.U[0][0], ref0.U[0][1]}, a.phi, a.xi);
  }

  const long max_cycles = static_cast<long>(std::ceil((t_end - t + opt.grace_time) / dt)) + 1;
  for (long cycle = 0; cycle < max_cycles; ++cycle) {
    const ReferenceWindow ref = build_reference(traj, t, cfg);
    const SimState state{s.x(), s.y(), s.z(), t};
    const NMPCSolution sol = solve_nmpc(state, ref, cfg);
    if (!sol.converged) ++log.unconverged_solves;

    const Angles a = terrain_angles(map, s.x(), s.y(), s.z());
    Control body = map_to_body(sol.u, a.phi, a.xi);
    if (opt.disturbance.actuation_sigma > 0.0) {
      body.v *= 1.0 + opt.disturbance.actuation_sigma * normal(rng);
      body.omega *= 1.0 + opt.disturbance.actuation_sigma * normal(rng);
    }
    const Control proj = project_to_plane(body, a.phi, a.xi);

    TrackingRecord rec;
    rec.t = t;
    rec.state = state;
    rec.reference = ref.X[0];
    rec.u_body = body;
    rec.u_proj = proj;
    const double psi_r = ref.X[0].z();
    rec.e_y = -std::sin(psi_r) * (s.x() - ref.X[0].x()) + std::cos(psi_r) * (s.y() - ref.X[0].y());
    rec.e_vx = proj.v - ref.U[0].x();

    // Backward differences over one control period stand in for IMU rates.
    const double a_body = (body.v - prev_body.v) / dt;
    const double domega_body = (body.omega - prev_body.omega) / dt;
    MotionState ms;
    const double c = std::cos(s.z()), sn = std::sin(s.z());
    ms.vx_G = proj.v * c;
    ms.vy_G = proj.v * sn;
    ms.ax_G = a_body * std::cos(a.phi) * c;
    ms.ay_G = a_body * std::cos(a.phi) * sn;
    ms.psi_G = s.z();
    ms.omega_G = proj.omega;
    ms.domega_G = domega_body * std::cos(a.xi);
    ms.phi = a.phi;
    ms.xi = a.xi;
    rec.P_est = motion_power(ms, params).P_cons;
    if (opt.disturbance.power_sigma > 0.0) rec.P_est += opt.disturbance.power_sigma * normal(rng);
    log.records.push_back(rec);
    prev_body = body;

    s = rk4(map, s, body, dt, std::max(1, opt.substeps));
    s.z() = wrap_angle(s.z());
    t = traj.t0() + (cycle + 1) * dt;

    if (t >= t_end - 1e-9 && std::hypot(s.x() - goal.x, s.y() - goal.y) <= opt.goal_tolerance) {
      log.success = true;
      break;
    }
  }
  log.summary = summarize(log.records);
  if (!log.success) {
    std::ostringstream msg;
    msg << "goal not reached within " << opt.grace_time << " s after the plan end";
    log.message = msg.str();
  }
  return log;
}

std::string TrackingLog::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,x,y,psi,x_ref,y_ref,psi_ref,v_cmd,omega_cmd,e_y,e_vx,P_est\n";
  for (const auto& r : records) {
    out << r.t << ',' << r.state.x << ',' << r.state.y << ',' << r.state.psi << ',' << r.reference.x()
        << ',' << r.reference.y() << ',' << r.reference.z() << ',' << r.u_body.v << ','
        << r.u_body.omega << ',' << r.e_y << ',' << r.e_vx << ',' << r.P_est << '\n';
  }
  return out.str();
}

std::string TrackingLog::summary_json() const {
  nlohmann::ordered_json j;
  j["e_y_rms"] = summary.e_y_rms;
  j["e_vx_rms"] = summary.e_vx_rms;
  j["P_tmax"] = summary.P_tmax;
  j["success"] = success;
  j["cycles"] = records.size();
  j["unconverged_solves"] = unconverged_solves;
  if (!message.empty()) j["message"] = message;
  return j.dump(2) + "\n";
}

}  // namespace rover
