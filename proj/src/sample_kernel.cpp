#include "rover/sample_kernel.hpp"

#include <cmath>

namespace rover {

namespace {

struct Hinge {
  double value = 0.0;
  double slope = 0.0;
};

// rho * SP(g + lambda / (2 rho))^2 and its derivative in g.
Hinge smoothed_hinge(double g, double rho, double kappa, double lambda) {
  const double y = g + lambda / (2.0 * rho);
  const double sp = softplus(y, kappa);
  return {rho * sp * sp, 2.0 * rho * sp * logistic(kappa * y)};
}

double plain_penalty(double g, double weight, double kappa) {
  const double sp = softplus(g, kappa);
  return weight * sp * sp;
}

struct Reversal {
  bool defined = false;
  double g = -1.0;
  std::array<double, 12> d_coeffs{};
  double d_duration = 0.0;
};

// Sign-aware alignment of the velocity with the segment chord.
Reversal reversal_row(const Segment& seg, double alpha, bool with_gradient) {
  Reversal out;
  if (seg.kind == SegmentKind::kWait) return out;
  const double T = seg.duration;
  const double tau = alpha * T;
  double d[2] = {0.0, 0.0}, v[2] = {0.0, 0.0}, a[2] = {0.0, 0.0}, vT[2] = {0.0, 0.0};
  const QuinticCoeffs* c[2] = {&seg.cx, &seg.cy};
  for (int ax = 0; ax < 2; ++ax) {
    const QuinticCoeffs& q = *c[ax];
    for (int k = 1; k < 6; ++k) {
      d[ax] += q[k] * std::pow(T, k);
      v[ax] += k * q[k] * std::pow(tau, k - 1);
      vT[ax] += k * q[k] * std::pow(T, k - 1);
      if (k >= 2) a[ax] += k * (k - 1) * q[k] * std::pow(tau, k - 2);
    }
  }
  const double L = std::hypot(d[0], d[1]);
  if (L < 1e-9) return out;
  const double e = kReversalSpeedScale;
  const double sp = std::sqrt(v[0] * v[0] + v[1] * v[1] + e * e);
  const double u = v[0] * d[0] + v[1] * d[1];
  out.defined = true;
  out.g = -u / (L * sp) - kReversalMargin;
  if (!with_gradient) return out;

  double gv[2], gd[2];
  for (int ax = 0; ax < 2; ++ax) {
    gv[ax] = -(d[ax] / (L * sp) - u * v[ax] / (L * sp * sp * sp));
    gd[ax] = -(v[ax] / (L * sp) - u * d[ax] / (L * L * L * sp));
  }
  for (int ax = 0; ax < 2; ++ax) {
    for (int k = 1; k < 6; ++k) {
      out.d_coeffs[6 * ax + k] = gv[ax] * k * std::pow(tau, k - 1) + gd[ax] * std::pow(T, k);
    }
    out.d_duration += gv[ax] * alpha * a[ax] + gd[ax] * vT[ax];
  }
  return out;
}

}  // namespace

SampleTerm evaluate_sample(const SampleKernelInputs& in, int index, bool with_gradient) noexcept {
  SampleTerm out;
  const int K = in.samples_per_segment;
  const int seg_index = index / (K + 1);
  const int node = index % (K + 1);
  const Segment& seg = in.segments[seg_index];
  const double alpha = static_cast<double>(node) / K;
  const double T = seg.duration;
  const double w = T / K * ((node == 0 || node == K) ? 0.5 : 1.0);

  const SampleSensitivity sens = segment_sample_derivatives(seg, alpha);
  const TrajectorySample& s = sens.sample;
  const auto jet = in.map->try_jet(s.x, s.y);
  if (!jet) {
    out.valid = false;
    return out;
  }
  const PowerParams& p = *in.params;
  const PlannerConfig& cfg = *in.config;
  const AugmentedLagrangian* al = in.lagrangian;
  auto multiplier = [&](int kind) {
    if (al == nullptr || al->multipliers.empty()) return 0.0;
    return al->multipliers[static_cast<std::size_t>(index) * kConstraintKindCount + kind];
  };
  auto scale = [&](int kind) { return al == nullptr ? 1.0 : al->scale[kind]; };

  const Reversal rev = reversal_row(seg, alpha, with_gradient);
  out.g[kReversal] = rev.g;
  Hinge rev_h;
  double rev_plain = 0.0;
  if (rev.defined && cfg.kinematic_weight > 0.0) {
    rev_h = smoothed_hinge(rev.g, scale(kReversal) * cfg.kinematic_weight, cfg.kinematic_kappa,
                           multiplier(kReversal));
    rev_plain = plain_penalty(rev.g, cfg.kinematic_weight, cfg.kinematic_kappa);
  }
  auto add_reversal_gradient = [&](double U) {
    for (int k = 0; k < 12; ++k) out.d_coeffs[k] += w * rev_h.slope * rev.d_coeffs[k];
    out.d_duration += U * w / T + w * rev_h.slope * rev.d_duration;
  };

  if (sens.degenerate) {
    out.cost = w * rev_h.value;
    out.kinematic_penalty = w * rev_plain;
    if (with_gradient) add_reversal_gradient(rev_h.value);
    return out;
  }
  out.active = true;

  const PitchResult pitch = pitch_from_jet(*jet, s.psi);
  const AttitudeResult att = attitude_from_jet(*jet);
  const RiskResult risk = risk_from_jet(*jet, cfg.lambda_c);

  MotionState ms;
  ms.vx_G = s.vx;
  ms.vy_G = s.vy;
  ms.ax_G = s.ax;
  ms.ay_G = s.ay;
  ms.psi_G = s.psi;
  ms.omega_G = s.omega;
  ms.domega_G = s.domega;
  ms.phi = pitch.phi;
  ms.xi = att.xi;

  PowerBreakdown b;
  PowerGradient pg;
  try {
    b = motion_power(ms, p, cfg.tau_mode);
    pg = motion_power_gradient(ms, p);
  } catch (...) {
    out.valid = false;
    return out;
  }

  const double v = std::hypot(s.vx, s.vy);
  const double c = std::cos(pitch.phi);
  const double sn = std::sin(pitch.phi);
  const double cxi = std::cos(att.xi);
  const double sxi = std::sin(att.xi);
  const double cpsi = std::cos(s.psi);
  const double spsi = std::sin(s.psi);
  const double a_long = s.ax * cpsi + s.ay * spsi;
  const double a_lat = -s.ax * spsi + s.ay * cpsi;

  const double vx_B = v / c;
  const double ax_B = a_long / c;
  const double ay_B = s.omega / cxi * vx_B;

  // Constraint rows, normalized so kinematic rows share one sharpness.
  out.g[kPowerCap] = b.S - b.tau;
  out.g[kSpeedBound] = vx_B / cfg.vx_B_max - 1.0;
  out.g[kAccelUpper] = ax_B / cfg.ax_B_max - 1.0;
  out.g[kAccelLower] = -ax_B / cfg.ax_B_max - 1.0;
  out.g[kLateralUpper] = ay_B / cfg.ay_B_max - 1.0;
  out.g[kLateralLower] = -ay_B / cfg.ay_B_max - 1.0;

  double U = cfg.rho_r * risk.r * v;
  std::array<double, kConstraintKindCount> slope{};

  if (p.omega_E > 0.0) {
    const Hinge h = smoothed_hinge(out.g[kPowerCap], scale(kPowerCap) * p.omega_E, p.kappa,
                                   multiplier(kPowerCap));
    U += h.value;
    slope[kPowerCap] = h.slope;
    out.power_penalty = w * plain_penalty(out.g[kPowerCap], p.omega_E, p.kappa);
  }
  if (cfg.kinematic_weight > 0.0) {
    double plain = rev_plain;
    U += rev_h.value;
    for (int k = kSpeedBound; k <= kLateralLower; ++k) {
      const Hinge h = smoothed_hinge(out.g[k], scale(k) * cfg.kinematic_weight,
                                     cfg.kinematic_kappa, multiplier(k));
      U += h.value;
      slope[k] = h.slope;
      plain += plain_penalty(out.g[k], cfg.kinematic_weight, cfg.kinematic_kappa);
    }
    out.kinematic_penalty = w * plain;
  }
  out.cost = w * U;
  out.risk = w * cfg.rho_r * risk.r * v;
  if (!with_gradient) return out;

  // dU/d(sample fields) plus the terrain-angle partials, chained at the end.
  Eigen::Matrix<double, 9, 1> gq = Eigen::Matrix<double, 9, 1>::Zero();
  double g_phi = 0.0;
  double g_xi = 0.0;

  gq(kX) += cfg.rho_r * v * risk.d_r.x();
  gq(kY) += cfg.rho_r * v * risk.d_r.y();
  gq(kVx) += cfg.rho_r * risk.r * s.vx / v;
  gq(kVy) += cfg.rho_r * risk.r * s.vy / v;

  // Body forward speed vx_B = v / cos(phi) feeds resistance and two bounds.
  double g_vxB = 0.0;

  if (slope[kPowerCap] != 0.0) {
    const double dz = slope[kPowerCap];
    const double direct = cfg.tau_mode == TauMode::kLiteral ? 1.0 : 0.0;
    const double lin_share = b.S > 0.0 ? b.P_lin / b.S : 0.0;
    const double rot_share = b.S > 0.0 ? b.P_rot / b.S : 0.0;
    const double d_lin = dz * (lin_share + direct);
    const double d_rot = dz * (rot_share + direct);
    gq(kVx) += d_lin * pg.d_P_lin(0);
    gq(kVy) += d_lin * pg.d_P_lin(1);
    gq(kAx) += d_lin * pg.d_P_lin(2);
    gq(kAy) += d_lin * pg.d_P_lin(3);
    gq(kPsi) += d_lin * pg.d_P_lin(4);
    g_phi += d_lin * pg.d_P_lin(5);
    gq(kOmega) += d_rot * pg.d_P_rot(0);
    gq(kDomega) += d_rot * pg.d_P_rot(1);
    g_xi += d_rot * pg.d_P_rot(2);
    g_vxB += dz * resistive_power_gradient(vx_B, p);
  }

  g_vxB += slope[kSpeedBound] / cfg.vx_B_max;
  const double g_axB = (slope[kAccelUpper] - slope[kAccelLower]) / cfg.ax_B_max;
  const double g_ayB = (slope[kLateralUpper] - slope[kLateralLower]) / cfg.ay_B_max;

  // ax_B = (ax cos psi + ay sin psi) / cos(phi)
  gq(kAx) += g_axB * cpsi / c;
  gq(kAy) += g_axB * spsi / c;
  gq(kPsi) += g_axB * a_lat / c;
  g_phi += g_axB * a_long * sn / (c * c);

  // ay_B = omega / cos(xi) * vx_B
  gq(kOmega) += g_ayB * vx_B / cxi;
  g_xi += g_ayB * s.omega * vx_B * sxi / (cxi * cxi);
  g_vxB += g_ayB * s.omega / cxi;

  gq(kVx) += g_vxB * s.vx / (v * c);
  gq(kVy) += g_vxB * s.vy / (v * c);
  g_phi += g_vxB * v * sn / (c * c);

  gq(kX) += g_phi * pitch.d_phi.x() + g_xi * att.d_xi.x();
  gq(kY) += g_phi * pitch.d_phi.y() + g_xi * att.d_xi.y();
  gq(kPsi) += g_phi * pitch.d_phi.z();

  const Eigen::Matrix<double, 1, 12> dc = w * (gq.transpose() * sens.d_coeffs);
  for (int k = 0; k < 12; ++k) out.d_coeffs[k] = dc(k);
  out.d_duration = w * gq.dot(sens.d_duration);
  add_reversal_gradient(U);
  return out;
}

void evaluate_samples_serial(const SampleKernelInputs& in, std::span<SampleTerm> out,
                             bool with_gradient) {
  const int n = static_cast<int>(out.size());
  for (int i = 0; i < n; ++i) out[i] = evaluate_sample(in, i, with_gradient);
}

void evaluate_samples_parallel(const SampleKernelInputs& in, std::span<SampleTerm> out,
                               bool with_gradient) {
  const int n = static_cast<int>(out.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out[i] = evaluate_sample(in, i, with_gradient);
}

}  // namespace rover
