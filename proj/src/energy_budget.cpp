#include <algorithm>
#include <cmath>
#include <sstream>

#include "rover/planner.hpp"

namespace rover {

PlanResult enforce_energy_budget(const PlanResult& result, const PowerParams& params,
                                 const PlannerConfig& config) {
  const double shortfall = peak_cumulative_shortfall(result.profile);
  const double deficit = shortfall - config.E_bank0;
  if (deficit <= 0.0) return result;

  const double P_avail = params.available();
  const double surplus = P_avail - params.P_base;
  if (!(surplus > 0.0)) {
    std::ostringstream msg;
    msg << "energy budget infeasible: deficit " << deficit << " J cannot be recovered by waiting, "
        << "P_avail " << P_avail << " W does not exceed P_base " << params.P_base << " W";
    throw InfeasibleBudgetError(msg.str(), deficit);
  }
  const double dt = result.profile.dt > 0.0 ? result.profile.dt : config.profile_dt;
  const double t0 = result.trajectory.t0();

  PowerBreakdown idle;
  idle.P_base = params.P_base;
  idle.P_cons = params.P_base;
  idle.P_avail = P_avail;
  idle.tau = params.cap() - params.P_base;

  auto prepend_wait = [&](double wait) {
    const int n = std::max(1, static_cast<int>(std::ceil(wait / dt - 1e-9)));
    PowerProfile prof;
    prof.dt = dt;
    for (int k = 0; k < n; ++k) {
      prof.times.push_back(t0 + wait * k / n);
      prof.samples.push_back(idle);
      prof.body.push_back({});
    }
    for (std::size_t i = 0; i < result.profile.size(); ++i) {
      prof.times.push_back(result.profile.times[i] + wait);
      prof.samples.push_back(result.profile.samples[i]);
      prof.body.push_back(result.profile.body[i]);
    }
    return prof;
  };

  // A power jump where motion starts costs h * jump / 2 on the trapezoid grid;
  // top the wait up until the sampled budget closes.
  const double tol = 1e-6 * std::max(1.0, shortfall);
  double wait = deficit / surplus;
  PowerProfile prof = prepend_wait(wait);
  double remaining = peak_cumulative_shortfall(prof) - config.E_bank0;
  for (int it = 0; it < 8 && remaining > tol; ++it) {
    wait += remaining / surplus;
    prof = prepend_wait(wait);
    remaining = peak_cumulative_shortfall(prof) - config.E_bank0;
  }
  if (remaining > tol) {
    std::ostringstream msg;
    msg << "energy budget still violated by " << remaining << " J after inserting " << wait
        << " s of waiting";
    throw PlanningError(msg.str());
  }

  PlanResult out = result;
  out.trajectory = result.trajectory.with_leading_wait(wait);
  out.wait_time_inserted = result.wait_time_inserted + wait;
  out.profile = std::move(prof);
  out.budget_margin = budget_margin(out.profile);
  return out;
}

}  // namespace rover
