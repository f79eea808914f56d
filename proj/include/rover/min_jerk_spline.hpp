#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "rover/trajectory.hpp"

namespace rover {

struct BoundaryState {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
};

/// Minimum-jerk quintic spline through fixed interior waypoints with given
/// segment durations. Boundary position, velocity and acceleration are pinned;
/// interior joints are C4, which is the optimality condition of the jerk
/// integral. Coefficients follow from one banded linear system M(T) c = b(q),
/// so gradients of any cost in c are pulled back to (q, T) through M^-T.
class MinJerkSpline {
 public:
  void generate(const BoundaryState& head, const BoundaryState& tail,
                const std::vector<Eigen::Vector2d>& waypoints, const Eigen::VectorXd& durations);

  int segments() const { return static_cast<int>(durations_.size()); }
  const Eigen::VectorXd& durations() const { return durations_; }

  /// Row 6 i + k holds the t^k coefficient of segment i, columns x and y.
  const Eigen::MatrixX2d& coefficients() const { return coeffs_; }

  Segment segment(int i) const;
  SplineTrajectorySE2 trajectory(double t0 = 0.0) const;

  struct Gradient {
    std::vector<Eigen::Vector2d> waypoints;
    Eigen::VectorXd durations;
  };

  /// Total derivatives w.r.t. waypoints and durations for a cost whose partials
  /// at fixed coefficients are dJ_dc (same layout as coefficients()) and
  /// dJ_dT_explicit.
  Gradient propagate(const Eigen::MatrixX2d& dJ_dc, const Eigen::VectorXd& dJ_dT_explicit) const;

 private:
  Eigen::VectorXd durations_;
  Eigen::MatrixX2d coeffs_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace rover
