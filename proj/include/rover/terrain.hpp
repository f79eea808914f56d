#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rover {

class TerrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for any query outside the interpolation domain. The map never
/// extrapolates or clamps.
class OutOfBoundsError : public TerrainError {
 public:
  OutOfBoundsError(double x, double y);
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

class HeightmapParseError : public TerrainError {
 public:
  using TerrainError::TerrainError;
};

/// Height and spatial derivatives up to third order at one point.
struct TerrainJet {
  double h = 0.0;
  double hx = 0.0, hy = 0.0;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  double hxxx = 0.0, hxxy = 0.0, hxyy = 0.0, hyyy = 0.0;
};

struct TerrainQuery {
  double height = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

/// Regular-grid heightfield interpolated by a tensor-product cubic spline
/// with not-a-knot end conditions. The surface is C2, passes through every
/// sample, and reproduces any bicubic polynomial field exactly.
///
/// Node (col, row) sits at origin + cell_size * (col, row); heights are stored
/// row-major with row 0 at the smallest y. Immutable after construction.
class TerrainMap {
 public:
  TerrainMap(Eigen::Vector2d origin, double cell_size, int width, int height,
             std::vector<double> heights);

  const Eigen::Vector2d& origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& samples() const { return heights_; }
  double sample(int col, int row) const { return heights_[static_cast<std::size_t>(row) * width_ + col]; }

  double x_min() const { return origin_.x(); }
  double y_min() const { return origin_.y(); }
  double x_max() const { return origin_.x() + cell_size_ * (width_ - 1); }
  double y_max() const { return origin_.y() + cell_size_ * (height_ - 1); }

  bool contains(double x, double y) const;

  TerrainJet jet(double x, double y) const;
  std::optional<TerrainJet> try_jet(double x, double y) const noexcept;
  TerrainQuery query(double x, double y) const;
  double height_at(double x, double y) const { return jet(x, y).h; }

 private:
  TerrainJet evaluate_patch(double x, double y) const noexcept;

  Eigen::Vector2d origin_;
  double cell_size_;
  int width_;
  int height_;
  std::vector<double> heights_;
  // Per-cell coefficients a[p*4+q] of u^p v^q in local unit coordinates.
  std::vector<std::array<double, 16>> patches_;
};

struct PitchResult {
  double phi = 0.0;
  Eigen::Vector3d d_phi = Eigen::Vector3d::Zero();  // d/dx, d/dy, d/dpsi
};

struct AttitudeResult {
  double xi = 0.0;
  Eigen::Vector2d d_xi = Eigen::Vector2d::Zero();
};

struct RiskResult {
  double r = 0.0;
  Eigen::Vector2d d_r = Eigen::Vector2d::Zero();
};

inline constexpr double kDefaultCurvatureWeight = 0.1;

// Pitch of the terrain along heading psi, positive when climbing.
PitchResult pitch_along_heading(const TerrainMap& map, double x, double y, double psi);
PitchResult pitch_from_jet(const TerrainJet& jet, double psi) noexcept;

// Tilt of the terrain normal from global vertical; independent of heading.
AttitudeResult attitude_angle(const TerrainMap& map, double x, double y);
AttitudeResult attitude_from_jet(const TerrainJet& jet) noexcept;

// r = |grad h|^2 + lambda_c * |Hessian|_F^2
RiskResult risk_density(const TerrainMap& map, double x, double y,
                        double lambda_c = kDefaultCurvatureWeight);
RiskResult risk_from_jet(const TerrainJet& jet, double lambda_c) noexcept;

enum class HeightmapFormat { kEsriAsciiGrid, kCsvGrid };

HeightmapFormat parse_heightmap_format(const std::string& name);
std::string to_string(HeightmapFormat format);

TerrainMap load_heightmap(const std::filesystem::path& path, HeightmapFormat format);
TerrainMap parse_esri_ascii_grid(std::istream& in);
TerrainMap parse_csv_grid(std::istream& in);

}  // namespace rover
