#include "rover/power.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace rover {

void PowerParams::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid power parameters: ") + what);
  };
  check(m > 0.0, "m must be positive");
  check(I_z > 0.0, "I_z must be positive");
  check(g > 0.0, "g must be positive");
  check(C0 >= 0.0 && C1 >= 0.0 && C2 >= 0.0, "resistive coefficients must be non-negative");
  check(P_base >= 0.0, "P_base must be non-negative");
  check(P_RTG >= 0.0 && P_solar >= 0.0, "power sources must be non-negative");
  check(omega_E >= 0.0, "omega_E must be non-negative");
  check(kappa > 0.0, "kappa must be positive");
  check(!P_limit || *P_limit >= 0.0, "P_limit must be non-negative");
}

double MotionState::speed() const { return std::hypot(vx_G, vy_G); }

void MotionState::validate() const {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  if (!(std::abs(phi) < half_pi) || !(std::abs(xi) < half_pi)) {
    throw std::invalid_argument("motion state terrain angles must lie in (-pi/2, pi/2)");
  }
}

double resistive_power(double vx_B, const PowerParams& p) {
  return (p.C0 + p.C1 * std::abs(vx_B) + p.C2 * vx_B * vx_B) * vx_B;
}

double resistive_power_gradient(double vx_B, const PowerParams& p) {
  if (vx_B == 0.0) return p.C0;
  return p.C0 + 2.0 * p.C1 * std::abs(vx_B) + 3.0 * p.C2 * vx_B * vx_B;
}

PowerBreakdown motion_power(const MotionState& s, const PowerParams& p, TauMode tau_mode) {
  s.validate();
  const double v = s.speed();
  const double c = std::cos(s.phi);
  const double sn = std::sin(s.phi);
  const double a = s.ax_G * std::cos(s.psi_G) + s.ay_G * std::sin(s.psi_G);
  const double vx_B = v / c;

  PowerBreakdown b;
  b.P_lin = p.m * (a / c + p.g * sn) * vx_B;
  b.P_rot = p.I_z * s.domega_G * s.omega_G / std::cos(s.xi);
  b.P_res = resistive_power(vx_B, p);
  b.P_base = p.P_base;
  b.P_cons = b.P_lin + b.P_rot + b.P_res + b.P_base;
  b.P_avail = p.available();
  b.S = std::hypot(b.P_lin, b.P_rot);
  b.tau = tau_mode == TauMode::kHeadroom ? p.cap() - b.P_base - b.P_res : p.cap() - b.P_cons;
  return b;
}

PowerGradient motion_power_gradient(const MotionState& s, const PowerParams& p) {
  s.validate();
  const double v = s.speed();
  if (!(v > kPowerGradientMinSpeed)) {
    std::ostringstream os;
    os << "power gradient undefined at projected speed " << v << " m/s";
    throw DegenerateStateError(os.str());
  }
  const double c = std::cos(s.phi);
  const double sn = std::sin(s.phi);
  const double cp = std::cos(s.psi_G);
  const double sp = std::sin(s.psi_G);
  const double a = s.ax_G * cp + s.ay_G * sp;
  const double b = -s.ax_G * sp + s.ay_G * cp;
  const double force = p.m * (a / c + p.g * sn);

  PowerGradient out;
  out.d_P_lin << force * s.vx_G / (c * v),
                 force * s.vy_G / (c * v),
                 p.m * v / (c * c) * cp,
                 p.m * v / (c * c) * sp,
                 p.m * v / (c * c) * b,
                 p.m * v * (2.0 * a * sn / (c * c * c) + p.g / (c * c));
  const double cx = std::cos(s.xi);
  out.d_P_rot << p.I_z * s.domega_G / cx,
                 p.I_z * s.omega_G / cx,
                 p.I_z * s.domega_G * s.omega_G * std::sin(s.xi) / (cx * cx);
  return out;
}

double drawn_power(const PowerBreakdown& b) {
  return std::max(b.P_lin, 0.0) + std::max(b.P_rot, 0.0) + b.P_res + b.P_base;
}

double softplus(double z, double kappa) {
  const double kz = kappa * z;
  return (std::max(kz, 0.0) + std::log1p(std::exp(-std::abs(kz)))) / kappa;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

PenaltyResult power_penalty(const PowerBreakdown& b, const PowerParams& p, TauMode tau_mode) {
  PenaltyResult out;
  out.z = b.S - b.tau;
  const double sp = softplus(out.z, p.kappa);
  out.J_P = p.omega_E * sp * sp;
  out.dJ_dz = 2.0 * p.omega_E * sp * logistic(p.kappa * out.z);
  // P/S has a removable singularity at S = 0; the limit contribution is zero.
  const double lin_share = b.S > 0.0 ? b.P_lin / b.S : 0.0;
  const double rot_share = b.S > 0.0 ? b.P_rot / b.S : 0.0;
  const double direct = tau_mode == TauMode::kLiteral ? 1.0 : 0.0;
  out.dJ_dPlin = out.dJ_dz * (lin_share + direct);
  out.dJ_dProt = out.dJ_dz * (rot_share + direct);
  out.dJ_dPres = out.dJ_dz;
  return out;
}

double available_power(double t, const PowerParams& params, const AvailabilityTable* profile) {
  if (!(t >= 0.0)) throw std::invalid_argument("availability query requires t >= 0");
  if (profile == nullptr || profile->knots.empty()) return params.available();
  const auto& k = profile->knots;
  if (t < k.front().first || t > k.back().first) {
    std::ostringstream os;
    os << "t = " << t << " s is outside the availability profile span [" << k.front().first
       << ", " << k.back().first << "]";
    throw std::out_of_range(os.str());
  }
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (t <= k[i].first) {
      const double span = k[i].first - k[i - 1].first;
      if (span <= 0.0) return k[i].second;
      const double w = (t - k[i - 1].first) / span;
      return (1.0 - w) * k[i - 1].second + w * k[i].second;
    }
  }
  return k.back().second;
}

}  // namespace rover
