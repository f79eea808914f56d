#include "rover/min_jerk_spline.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace rover {

namespace {

constexpr double kFact[5] = {1, 1, 2, 6, 24};

// d/dc_k of p^(d)(t).
double basis(int d, int k, double t) {
  if (k < d) return 0.0;
  double r = 1.0;
  for (int j = 0; j < d; ++j) r *= k - j;
  return r * std::pow(t, k - d);
}

Eigen::RowVector2d derivative_at(const Eigen::MatrixX2d& c, int seg, int d, double t) {
  Eigen::RowVector2d out = Eigen::RowVector2d::Zero();
  for (int k = d; k < 6; ++k) out += basis(d, k, t) * c.row(6 * seg + k);
  return out;
}

}  // namespace

void MinJerkSpline::generate(const BoundaryState& head, const BoundaryState& tail,
                             const std::vector<Eigen::Vector2d>& waypoints,
                             const Eigen::VectorXd& durations) {
  const int n = static_cast<int>(durations.size());
  if (n < 1) throw std::invalid_argument("min-jerk spline needs at least one segment");
  if (static_cast<int>(waypoints.size()) != n - 1) {
    throw std::invalid_argument("min-jerk spline needs one waypoint per interior joint");
  }
  for (int i = 0; i < n; ++i) {
    if (!(durations[i] > 0.0) || !std::isfinite(durations[i])) {
      throw std::invalid_argument("min-jerk spline durations must be positive");
    }
  }
  durations_ = durations;

  const int dim = 6 * n;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixX2d b = Eigen::MatrixX2d::Zero(dim, 2);

  for (int d = 0; d < 3; ++d) M(d, d) = kFact[d];
  b.row(0) = head.p.transpose();
  b.row(1) = head.v.transpose();
  b.row(2) = head.a.transpose();

  for (int i = 0; i + 1 < n; ++i) {
    const int r = 3 + 6 * i;
    const double T = durations[i];
    for (int k = 0; k < 6; ++k) M(r, 6 * i + k) = basis(0, k, T);
    b.row(r) = waypoints[i].transpose();
    for (int d = 0; d < 5; ++d) {
      for (int k = 0; k < 6; ++k) M(r + 1 + d, 6 * i + k) = basis(d, k, T);
      M(r + 1 + d, 6 * (i + 1) + d) = -kFact[d];
    }
  }

  const double T = durations[n - 1];
  for (int d = 0; d < 3; ++d) {
    for (int k = 0; k < 6; ++k) M(dim - 3 + d, 6 * (n - 1) + k) = basis(d, k, T);
  }
  b.row(dim - 3) = tail.p.transpose();
  b.row(dim - 2) = tail.v.transpose();
  b.row(dim - 1) = tail.a.transpose();

  lu_.compute(M);
  coeffs_ = lu_.solve(b);
}

Segment MinJerkSpline::segment(int i) const {
  Segment s;
  for (int k = 0; k < 6; ++k) {
    s.cx[k] = coeffs_(6 * i + k, 0);
    s.cy[k] = coeffs_(6 * i + k, 1);
  }
  s.duration = durations_[i];
  s.kind = SegmentKind::kMotion;
  return s;
}

SplineTrajectorySE2 MinJerkSpline::trajectory(double t0) const {
  std::vector<Segment> segs;
  segs.reserve(durations_.size());
  for (int i = 0; i < segments(); ++i) segs.push_back(segment(i));
  return SplineTrajectorySE2(std::move(segs), t0);
}

MinJerkSpline::Gradient MinJerkSpline::propagate(const Eigen::MatrixX2d& dJ_dc,
                                                 const Eigen::VectorXd& dJ_dT_explicit) const {
  const int n = segments();
  const int dim = 6 * n;
  const Eigen::MatrixX2d adj = lu_.transpose().solve(dJ_dc);

  Gradient g;
  g.waypoints.resize(n - 1);
  g.durations = dJ_dT_explicit;
  // dM/dT_i c touches only rows evaluated at the end of segment i, where it
  // raises the derivative order by one.
  for (int i = 0; i + 1 < n; ++i) {
    const int r = 3 + 6 * i;
    const double T = durations_[i];
    g.waypoints[i] = adj.row(r).transpose();
    double dT = adj.row(r).dot(derivative_at(coeffs_, i, 1, T));
    for (int d = 0; d < 5; ++d) {
      dT += adj.row(r + 1 + d).dot(derivative_at(coeffs_, i, d + 1, T));
    }
    g.durations[i] -= dT;
  }
  const double T = durations_[n - 1];
  double dT = 0.0;
  for (int d = 0; d < 3; ++d) {
    dT += adj.row(dim - 3 + d).dot(derivative_at(coeffs_, n - 1, d + 1, T));
  }
  g.durations[n - 1] -= dT;
  return g;
}

}  // namespace rover
