#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rover/planner.hpp"

namespace rover {

double reversal_measure(const Segment& seg, double vx, double vy) {
  if (seg.kind == SegmentKind::kWait) return -1.0;
  double dx = 0.0, dy = 0.0, Tk = 1.0;
  for (int k = 1; k < 6; ++k) {
    Tk *= seg.duration;
    dx += seg.cx[k] * Tk;
    dy += seg.cy[k] * Tk;
  }
  const double L = std::hypot(dx, dy);
  if (L < 1e-9) return -1.0;
  const double s = std::sqrt(vx * vx + vy * vy + kReversalSpeedScale * kReversalSpeedScale);
  return -(vx * dx + vy * dy) / (L * s) - kReversalMargin;
}

double PowerProfile::peak_consumption() const {
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) peak = std::max(peak, s.P_cons);
  return peak;
}

PowerProfile evaluate_profile(const SplineTrajectorySE2& traj, const TerrainMap& map,
                              const PowerParams& params, double dt, TauMode tau_mode) {
  if (!(dt > 0.0)) throw std::invalid_argument("profile resolution dt must be positive");
  PowerProfile prof;
  prof.dt = dt;

  auto push = [&](std::size_t seg, double tau) {
    const TrajectorySample s = traj.evaluate_local(seg, tau);
    const auto jet = map.try_jet(s.x, s.y);
    if (!jet) {
      std::ostringstream msg;
      msg << "trajectory leaves the terrain map at t = " << s.t << " s (x = " << s.x
          << ", y = " << s.y << ")";
      throw PlanningError(msg.str());
    }
    MotionState ms;
    ms.vx_G = s.vx;
    ms.vy_G = s.vy;
    ms.ax_G = s.ax;
    ms.ay_G = s.ay;
    ms.psi_G = s.psi;
    ms.omega_G = s.omega;
    ms.domega_G = s.domega;
    ms.phi = pitch_from_jet(*jet, s.psi).phi;
    ms.xi = attitude_from_jet(*jet).xi;
    prof.times.push_back(s.t);
    prof.samples.push_back(motion_power(ms, params, tau_mode));

    const double c = std::cos(ms.phi);
    BodyKinematics bk;
    bk.vx_B = s.speed() / c;
    bk.ax_B = (s.ax * std::cos(s.psi) + s.ay * std::sin(s.psi)) / c;
    bk.ay_B = s.omega / std::cos(ms.xi) * bk.vx_B;
    bk.reversal = reversal_measure(traj.segments()[seg], s.vx, s.vy);
    prof.body.push_back(bk);
  };

  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double T = traj.segments()[i].duration;
    const int n = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    for (int k = 0; k < n; ++k) push(i, T * k / n);
  }
  if (traj.size() > 0) push(traj.size() - 1, traj.segments().back().duration);
  return prof;
}

double budget_margin(const PowerProfile& p) {
  double margin = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double h = p.times[i] - p.times[i - 1];
    const double a = p.samples[i - 1].P_avail - drawn_power(p.samples[i - 1]);
    const double b = p.samples[i].P_avail - drawn_power(p.samples[i]);
    margin += 0.5 * h * (a + b);
  }
  return margin;
}

double peak_cumulative_shortfall(const PowerProfile& p) {
  double cum = 0.0;
  double peak = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double h = p.times[i] - p.times[i - 1];
    const double a = drawn_power(p.samples[i - 1]) - p.samples[i - 1].P_avail;
    const double b = drawn_power(p.samples[i]) - p.samples[i].P_avail;
    cum += 0.5 * h * (a + b);
    peak = std::max(peak, cum);
  }
  return peak;
}

}  // namespace rover
