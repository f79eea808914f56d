#include "rover/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace rover {

namespace {

constexpr double kFactorialRatio[6][6] = {
    // kFactorialRatio[d][k] = k! / (k - d)!  (0 when k < d)
    {1, 1, 1, 1, 1, 1},
    {0, 1, 2, 3, 4, 5},
    {0, 0, 2, 6, 12, 20},
    {0, 0, 0, 6, 24, 60},
    {0, 0, 0, 0, 24, 120},
    {0, 0, 0, 0, 0, 120},
};

// d-th derivative of the quintic at tau (Horner).
double poly(const QuinticCoeffs& c, int d, double tau) {
  double s = 0.0;
  for (int k = 5; k >= d; --k) s = s * tau + kFactorialRatio[d][k] * c[k];
  return s;
}

// d/dcoeff_k of the d-th derivative at tau.
double basis(int d, int k, double tau) {
  if (k < d) return 0.0;
  return kFactorialRatio[d][k] * std::pow(tau, k - d);
}

struct YawJacobian {
  // Partials of (psi, omega, domega) w.r.t. (vx, vy, ax, ay, jx, jy).
  Eigen::Matrix<double, 3, 6> d = Eigen::Matrix<double, 3, 6>::Zero();
};

YawJacobian yaw_jacobian(double vx, double vy, double ax, double ay, double jx, double jy) {
  const double V = vx * vx + vy * vy;
  const double N = vx * ay - vy * ax;
  const double D = vx * ax + vy * ay;
  const double K = vx * jy - vy * jx;
  const double V2 = V * V;
  const double V3 = V2 * V;
  YawJacobian y;
  y.d(0, 0) = -vy / V;
  y.d(0, 1) = vx / V;

  y.d(1, 0) = ay / V - 2.0 * N * vx / V2;
  y.d(1, 1) = -ax / V - 2.0 * N * vy / V2;
  y.d(1, 2) = -vy / V;
  y.d(1, 3) = vx / V;

  y.d(2, 0) = jy / V - 2.0 * K * vx / V2 - 2.0 * (ay * D + N * ax) / V2 + 8.0 * N * D * vx / V3;
  y.d(2, 1) = -jx / V - 2.0 * K * vy / V2 - 2.0 * (-ax * D + N * ay) / V2 + 8.0 * N * D * vy / V3;
  y.d(2, 2) = -2.0 * (-vy * D + N * vx) / V2;
  y.d(2, 3) = -2.0 * (vx * D + N * vy) / V2;
  y.d(2, 4) = -vy / V;
  y.d(2, 5) = vx / V;
  return y;
}

bool has_motion(const Segment& s) {
  if (s.kind == SegmentKind::kWait) return false;
  for (int k = 1; k < 6; ++k) {
    if (s.cx[k] != 0.0 || s.cy[k] != 0.0) return true;
  }
  return false;
}

}  // namespace

Segment Segment::wait(double x, double y, double duration) {
  Segment s;
  s.cx = {x, 0, 0, 0, 0, 0};
  s.cy = {y, 0, 0, 0, 0, 0};
  s.duration = duration;
  s.kind = SegmentKind::kWait;
  return s;
}

double TrajectorySample::speed() const { return std::hypot(vx, vy); }

SplineTrajectorySE2::SplineTrajectorySE2(std::vector<Segment> segments, double t0)
    : segments_(std::move(segments)), t0_(t0) {
  if (segments_.empty()) throw TrajectoryError("trajectory needs at least one segment");
  if (!std::isfinite(t0_)) throw TrajectoryError("trajectory start time must be finite");
  starts_.reserve(segments_.size());
  double t = t0_;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw TrajectoryError("segment " + std::to_string(i) + " has non-positive duration");
    }
    for (int k = 0; k < 6; ++k) {
      if (!std::isfinite(s.cx[k]) || !std::isfinite(s.cy[k])) {
        throw TrajectoryError("segment " + std::to_string(i) + " has non-finite coefficients");
      }
      if (s.kind == SegmentKind::kWait && k > 0 && (s.cx[k] != 0.0 || s.cy[k] != 0.0)) {
        throw TrajectoryError("wait segment " + std::to_string(i) + " has motion coefficients");
      }
    }
    starts_.push_back(t);
    t += s.duration;
  }
  total_ = t - t0_;
}

std::pair<std::size_t, double> SplineTrajectorySE2::locate(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(end_time()));
  if (!(t >= t0_ - tol) || !(t <= end_time() + tol)) {
    std::ostringstream os;
    os << "time " << t << " s is outside the trajectory horizon [" << t0_ << ", " << end_time()
       << "]";
    throw TrajectoryError(os.str());
  }
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  const double tau = std::clamp(t - starts_[i], 0.0, segments_[i].duration);
  return {i, tau};
}

double SplineTrajectorySE2::held_heading(std::size_t seg, double tau) const {
  auto leading_direction = [&](std::size_t i, double at, bool from_left) -> std::optional<double> {
    const Segment& s = segments_[i];
    for (int d = 1; d <= 5; ++d) {
      const double dx = poly(s.cx, d, at);
      const double dy = poly(s.cy, d, at);
      if (std::hypot(dx, dy) > 1e-12) {
        // Velocity ~ p^(d) (t - at)^(d-1) near `at`; the left limit flips sign for even d.
        const double sign = (from_left && d % 2 == 0) ? -1.0 : 1.0;
        return std::atan2(sign * dy, sign * dx);
      }
    }
    return std::nullopt;
  };

  bool prior_motion = tau > 0.0 && has_motion(segments_[seg]);
  for (std::size_t i = 0; i < seg && !prior_motion; ++i) prior_motion = has_motion(segments_[i]);

  if (has_motion(segments_[seg])) {
    if (auto h = leading_direction(seg, tau, prior_motion)) return *h;
  }
  for (std::size_t i = seg; i-- > 0;) {
    if (has_motion(segments_[i])) {
      if (auto h = leading_direction(i, segments_[i].duration, true)) return *h;
    }
  }
  for (std::size_t i = seg + 1; i < segments_.size(); ++i) {
    if (has_motion(segments_[i])) {
      if (auto h = leading_direction(i, 0.0, false)) return *h;
    }
  }
  return 0.0;
}

TrajectorySample SplineTrajectorySE2::evaluate_local(std::size_t seg, double tau) const {
  const Segment& s = segments_.at(seg);
  TrajectorySample out;
  out.t = starts_[seg] + tau;
  out.x = poly(s.cx, 0, tau);
  out.y = poly(s.cy, 0, tau);
  out.vx = poly(s.cx, 1, tau);
  out.vy = poly(s.cy, 1, tau);
  out.ax = poly(s.cx, 2, tau);
  out.ay = poly(s.cy, 2, tau);
  out.jx = poly(s.cx, 3, tau);
  out.jy = poly(s.cy, 3, tau);
  const double V = out.vx * out.vx + out.vy * out.vy;
  if (std::sqrt(V) > kYawSpeedEpsilon) {
    out.psi = std::atan2(out.vy, out.vx);
    out.omega = (out.vx * out.ay - out.vy * out.ax) / V;
    out.domega = (out.vx * out.jy - out.vy * out.jx) / V -
                 2.0 * out.omega * (out.vx * out.ax + out.vy * out.ay) / V;
  } else {
    out.degenerate = true;
    out.psi = held_heading(seg, tau);
  }
  return out;
}

TrajectorySample SplineTrajectorySE2::evaluate(double t) const {
  const auto [seg, tau] = locate(t);
  TrajectorySample s = evaluate_local(seg, tau);
  s.t = t;
  return s;
}

Pose2 SplineTrajectorySE2::start_pose() const {
  const auto s = evaluate(t0_);
  return {s.x, s.y, s.psi};
}

Pose2 SplineTrajectorySE2::end_pose() const {
  const auto s = evaluate(end_time());
  return {s.x, s.y, s.psi};
}

double SplineTrajectorySE2::jerk_cost() const {
  double total = 0.0;
  for (const auto& s : segments_) total += segment_jerk_cost(s).value;
  return total;
}

SplineTrajectorySE2 SplineTrajectorySE2::with_leading_wait(double duration) const {
  const auto s = evaluate(t0_);
  std::vector<Segment> segs;
  segs.reserve(segments_.size() + 1);
  segs.push_back(Segment::wait(s.x, s.y, duration));
  segs.insert(segs.end(), segments_.begin(), segments_.end());
  return SplineTrajectorySE2(std::move(segs), t0_);
}

bool SplineTrajectorySE2::is_stationary() const {
  return std::none_of(segments_.begin(), segments_.end(), has_motion);
}

JerkCost segment_jerk_cost(const Segment& seg) {
  JerkCost out;
  const double T = seg.duration;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  auto axis = [&](const QuinticCoeffs& c, double* d, double& dT) {
    // jerk = A + B t + C t^2
    const double A = 6.0 * c[3], B = 24.0 * c[4], C = 60.0 * c[5];
    const double v = A * A * T + A * B * T2 + (B * B + 2.0 * A * C) * T3 / 3.0 + B * C * T4 / 2.0 +
                     C * C * T5 / 5.0;
    const double dA = 2.0 * A * T + B * T2 + 2.0 * C * T3 / 3.0;
    const double dB = A * T2 + 2.0 * B * T3 / 3.0 + C * T4 / 2.0;
    const double dC = 2.0 * A * T3 / 3.0 + B * T4 / 2.0 + 2.0 * C * T5 / 5.0;
    d[3] = 6.0 * dA;
    d[4] = 24.0 * dB;
    d[5] = 60.0 * dC;
    dT = A * A + 2.0 * A * B * T + (B * B + 2.0 * A * C) * T2 + 2.0 * B * C * T3 + C * C * T4;
    return v;
  };
  double dTx = 0.0, dTy = 0.0;
  out.value = axis(seg.cx, out.d_coeffs.data(), dTx) + axis(seg.cy, out.d_coeffs.data() + 6, dTy);
  out.d_duration = dTx + dTy;
  return out;
}

SampleSensitivity segment_sample_derivatives(const Segment& seg, double alpha) {
  SampleSensitivity out;
  out.alpha = alpha;
  const double tau = alpha * seg.duration;

  TrajectorySample& s = out.sample;
  s.x = poly(seg.cx, 0, tau);
  s.y = poly(seg.cy, 0, tau);
  s.vx = poly(seg.cx, 1, tau);
  s.vy = poly(seg.cy, 1, tau);
  s.ax = poly(seg.cx, 2, tau);
  s.ay = poly(seg.cy, 2, tau);
  s.jx = poly(seg.cx, 3, tau);
  s.jy = poly(seg.cy, 3, tau);
  const double sx = poly(seg.cx, 4, tau);
  const double sy = poly(seg.cy, 4, tau);

  if (seg.kind == SegmentKind::kWait) {
    out.degenerate = true;
    s.degenerate = true;
    out.d_coeffs(kX, 0) = 1.0;
    out.d_coeffs(kY, 6) = 1.0;
    return out;
  }

  // Rows x, y, vx, vy, ax, ay of the plain polynomial basis.
  for (int k = 0; k < 6; ++k) {
    out.d_coeffs(kX, k) = basis(0, k, tau);
    out.d_coeffs(kY, 6 + k) = basis(0, k, tau);
    out.d_coeffs(kVx, k) = basis(1, k, tau);
    out.d_coeffs(kVy, 6 + k) = basis(1, k, tau);
    out.d_coeffs(kAx, k) = basis(2, k, tau);
    out.d_coeffs(kAy, 6 + k) = basis(2, k, tau);
  }
  out.d_duration(kX) = alpha * s.vx;
  out.d_duration(kY) = alpha * s.vy;
  out.d_duration(kVx) = alpha * s.ax;
  out.d_duration(kVy) = alpha * s.ay;
  out.d_duration(kAx) = alpha * s.jx;
  out.d_duration(kAy) = alpha * s.jy;

  const double V = s.vx * s.vx + s.vy * s.vy;
  if (std::sqrt(V) <= kYawSpeedEpsilon) {
    out.degenerate = true;
    s.degenerate = true;
    return out;
  }
  s.psi = std::atan2(s.vy, s.vx);
  s.omega = (s.vx * s.ay - s.vy * s.ax) / V;
  s.domega = (s.vx * s.jy - s.vy * s.jx) / V - 2.0 * s.omega * (s.vx * s.ax + s.vy * s.ay) / V;

  const YawJacobian yj = yaw_jacobian(s.vx, s.vy, s.ax, s.ay, s.jx, s.jy);
  // Jacobian of (vx, vy, ax, ay, jx, jy) w.r.t. the 12 coefficients.
  Eigen::Matrix<double, 6, 12> base = Eigen::Matrix<double, 6, 12>::Zero();
  for (int k = 0; k < 6; ++k) {
    base(0, k) = basis(1, k, tau);
    base(1, 6 + k) = basis(1, k, tau);
    base(2, k) = basis(2, k, tau);
    base(3, 6 + k) = basis(2, k, tau);
    base(4, k) = basis(3, k, tau);
    base(5, 6 + k) = basis(3, k, tau);
  }
  out.d_coeffs.block<3, 12>(kPsi, 0) = yj.d * base;

  Eigen::Matrix<double, 6, 1> rates;
  rates << s.ax, s.ay, s.jx, s.jy, sx, sy;
  const double ddomega = yj.d.row(2).dot(rates);
  out.d_duration(kPsi) = alpha * s.omega;
  out.d_duration(kOmega) = alpha * s.domega;
  out.d_duration(kDomega) = alpha * ddomega;
  return out;
}

SampleSensitivity sample_derivatives(const SplineTrajectorySE2& traj, double t) {
  const auto [seg, tau] = traj.locate(t);
  const Segment& s = traj.segments()[seg];
  SampleSensitivity out = segment_sample_derivatives(s, tau / s.duration);
  out.segment = seg;
  if (out.degenerate) {
    out.sample = traj.evaluate_local(seg, tau);
  }
  out.sample.t = t;
  return out;
}

}  // namespace rover
