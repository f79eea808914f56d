#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rover {

/// Physical constants of the rover and its power supply.
struct PowerParams {
  double m = 150.0;       // kg
  double I_z = 60.0;      // kg m^2
  double g = 1.62;        // m/s^2, lunar surface
  double C0 = 20.0;       // N
  double C1 = 5.0;        // N s/m
  double C2 = 0.0;        // N s^2/m^2
  double P_base = 100.0;  // W
  double P_RTG = 110.0;   // W
  double P_solar = 90.0;  // W
  double omega_E = 1e-2;  // penalty weight
  double kappa = 0.05;    // softplus sharpness, 1/W
  std::optional<double> P_limit;  // instantaneous cap; defaults to P_RTG + P_solar

  double available() const { return P_RTG + P_solar; }
  double cap() const { return P_limit.value_or(available()); }
  void validate() const;
};

/// Projected-plane kinematics at one instant plus the terrain angles under the rover.
struct MotionState {
  double vx_G = 0.0, vy_G = 0.0;
  double ax_G = 0.0, ay_G = 0.0;
  double psi_G = 0.0;
  double omega_G = 0.0;
  double domega_G = 0.0;
  double phi = 0.0;
  double xi = 0.0;

  double speed() const;
  void validate() const;
};

struct PowerBreakdown {
  double P_lin = 0.0;
  double P_rot = 0.0;
  double P_res = 0.0;
  double P_base = 0.0;
  double P_cons = 0.0;
  double P_avail = 0.0;
  double S = 0.0;    // sqrt(P_lin^2 + P_rot^2)
  double tau = 0.0;  // slack against the instantaneous cap
};

/// Headroom reads the slack as cap - P_base - P_res so the motion power in S is
/// not counted twice; literal uses cap - P_cons.
enum class TauMode { kHeadroom, kLiteral };

// Entries ordered (vx_G, vy_G, ax_G, ay_G, psi_G, phi) and (omega_G, domega_G, xi).
struct PowerGradient {
  Eigen::Matrix<double, 6, 1> d_P_lin = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Vector3d d_P_rot = Eigen::Vector3d::Zero();
};

struct PenaltyResult {
  double J_P = 0.0;
  double z = 0.0;
  double dJ_dz = 0.0;
  double dJ_dPlin = 0.0;
  double dJ_dProt = 0.0;
  double dJ_dPres = 0.0;
};

class DegenerateStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kPowerGradientMinSpeed = 1e-6;

PowerBreakdown motion_power(const MotionState& state, const PowerParams& params,
                            TauMode tau_mode = TauMode::kHeadroom);

/// Throws DegenerateStateError below kPowerGradientMinSpeed, where the
/// velocity-direction terms are undefined. Callers at exact rest treat the
/// linear-power gradient as zero.
PowerGradient motion_power_gradient(const MotionState& state, const PowerParams& params);

double resistive_power(double vx_B, const PowerParams& params);
double resistive_power_gradient(double vx_B, const PowerParams& params);

/// Power drawn from the supply with no regeneration credit for braking.
double drawn_power(const PowerBreakdown& b);

double softplus(double z, double kappa);
double logistic(double z);

PenaltyResult power_penalty(const PowerBreakdown& breakdown, const PowerParams& params,
                            TauMode tau_mode = TauMode::kHeadroom);

/// Piecewise-linear availability override as (time, watts) knots.
struct AvailabilityTable {
  std::vector<std::pair<double, double>> knots;
};

double available_power(double t, const PowerParams& params,
                       const AvailabilityTable* profile = nullptr);

}  // namespace rover
