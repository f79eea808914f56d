#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rover {

class TerrainMap;

/// Below this projected speed the heading is held and rotational rates are zero.
inline constexpr double kYawSpeedEpsilon = 1e-3;

enum class SegmentKind { kMotion, kWait };

/// Power-basis coefficients c0..c5 in segment-local time.
using QuinticCoeffs = std::array<double, 6>;

struct Segment {
  QuinticCoeffs cx{};
  QuinticCoeffs cy{};
  double duration = 1.0;
  SegmentKind kind = SegmentKind::kMotion;

  static Segment wait(double x, double y, double duration);
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
  double jx = 0.0, jy = 0.0;
  double psi = 0.0;
  double omega = 0.0;
  double domega = 0.0;
  bool degenerate = false;  // speed below kYawSpeedEpsilon

  double speed() const;
};

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise quintic projected trajectory; yaw follows the velocity direction.
class SplineTrajectorySE2 {
 public:
  SplineTrajectorySE2() = default;
  explicit SplineTrajectorySE2(std::vector<Segment> segments, double t0 = 0.0);

  double t0() const { return t0_; }
  double total_duration() const { return total_; }
  double end_time() const { return t0_ + total_; }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  double segment_start(std::size_t i) const { return starts_[i]; }

  /// Segment index and local time; throws TrajectoryError outside the horizon.
  std::pair<std::size_t, double> locate(double t) const;

  TrajectorySample evaluate(double t) const;
  TrajectorySample evaluate_local(std::size_t segment, double tau) const;

  Pose2 start_pose() const;
  Pose2 end_pose() const;

  /// Closed-form integral of |jerk|^2 over the whole horizon.
  double jerk_cost() const;

  SplineTrajectorySE2 with_leading_wait(double duration) const;

  /// Every segment is a wait, or all motion coefficients vanish.
  bool is_stationary() const;

 private:
  double held_heading(std::size_t segment, double tau) const;

  std::vector<Segment> segments_;
  std::vector<double> starts_;
  double t0_ = 0.0;
  double total_ = 0.0;
};

/// Index into the rows of a SampleSensitivity.
enum SampleField : int { kX = 0, kY, kVx, kVy, kAx, kAy, kPsi, kOmega, kDomega, kSampleFieldCount };

/// Jacobian of (x, y, vx, vy, ax, ay, psi, omega, domega) at one sample with
/// respect to the 12 coefficients of its segment (x block then y block) and
/// its duration. The duration column holds the sample's normalized position
/// alpha = tau / T fixed, so d/dT = alpha * d/dt.
struct SampleSensitivity {
  std::size_t segment = 0;
  double alpha = 0.0;
  bool degenerate = false;
  TrajectorySample sample;
  Eigen::Matrix<double, 9, 12> d_coeffs = Eigen::Matrix<double, 9, 12>::Zero();
  Eigen::Matrix<double, 9, 1> d_duration = Eigen::Matrix<double, 9, 1>::Zero();
};

SampleSensitivity sample_derivatives(const SplineTrajectorySE2& traj, double t);
SampleSensitivity segment_sample_derivatives(const Segment& segment, double alpha);

/// Jerk cost of one quintic pair and its partials w.r.t. the 12 coefficients
/// and the duration.
struct JerkCost {
  double value = 0.0;
  std::array<double, 12> d_coeffs{};
  double d_duration = 0.0;
};
JerkCost segment_jerk_cost(const Segment& segment);

struct InitialGuessOptions {
  int n_segments = 8;
  double v_nominal = 0.5;
  // When positive, a grid A* over terrain risk replaces the straight seed if
  // the straight line crosses a cell whose risk exceeds this value.
  double risk_seed_threshold = 0.0;
  double risk_seed_weight = 20.0;
  double lambda_c = 0.1;
};

/// Rest-to-rest seed through waypoints spaced uniformly along the start-goal
/// line (or an A* path), durations chord / v_nominal.
SplineTrajectorySE2 initial_guess(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                                  const InitialGuessOptions& options);

/// Waypoints (including both endpoints) and segment durations of the seed.
struct WaypointSeed {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> durations;
};
WaypointSeed seed_waypoints(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                            const InitialGuessOptions& options);

inline constexpr int kTrajectoryFormatVersion = 1;

std::string trajectory_to_json(const SplineTrajectorySE2& traj);
SplineTrajectorySE2 trajectory_from_json(const std::string& text);

}  // namespace rover
