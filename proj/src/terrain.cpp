#include "rover/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace rover {

namespace {

std::string format_point(double x, double y) {
  std::ostringstream os;
  os << "terrain query (" << x << ", " << y << ") is outside the map";
  return os.str();
}

// Node slopes of not-a-knot cubic splines through each column of `values`
// (n samples at uniform spacing h, one independent spline per column).
Eigen::MatrixXd not_a_knot_slopes(const Eigen::MatrixXd& values, double h) {
  const Eigen::Index n = values.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, values.cols());
  system(0, 0) = 1.0;
  system(0, 1) = -2.0;
  system(0, 2) = 1.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    system(i, i - 1) = 1.0;
    system(i, i) = 4.0;
    system(i, i + 1) = 1.0;
    rhs.row(i) = 6.0 * (values.row(i + 1) - 2.0 * values.row(i) + values.row(i - 1)) / (h * h);
  }
  system(n - 1, n - 3) = 1.0;
  system(n - 1, n - 2) = -2.0;
  system(n - 1, n - 1) = 1.0;
  const Eigen::MatrixXd curvature = system.partialPivLu().solve(rhs);

  Eigen::MatrixXd slopes(n, values.cols());
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    slopes.row(i) = (values.row(i + 1) - values.row(i)) / h -
                    h * (2.0 * curvature.row(i) + curvature.row(i + 1)) / 6.0;
  }
  slopes.row(n - 1) = (values.row(n - 1) - values.row(n - 2)) / h +
                      h * (curvature.row(n - 2) + 2.0 * curvature.row(n - 1)) / 6.0;
  return slopes;
}

}  // namespace

OutOfBoundsError::OutOfBoundsError(double x, double y)
    : TerrainError(format_point(x, y)), x_(x), y_(y) {}

TerrainMap::TerrainMap(Eigen::Vector2d origin, double cell_size, int width, int height,
                       std::vector<double> heights)
    : origin_(std::move(origin)),
      cell_size_(cell_size),
      width_(width),
      height_(height),
      heights_(std::move(heights)) {
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) {
    throw TerrainError("terrain cell size must be positive and finite");
  }
  if (width_ < 4 || height_ < 4) {
    throw TerrainError("terrain grid must be at least 4x4 for bicubic support");
  }
  if (heights_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw TerrainError("terrain sample count does not match grid dimensions");
  }
  for (std::size_t i = 0; i < heights_.size(); ++i) {
    if (!std::isfinite(heights_[i])) {
      std::ostringstream os;
      os << "non-finite terrain height at row " << i / width_ << ", column " << i % width_;
      throw TerrainError(os.str());
    }
  }

  // values(row, col); x runs along columns, y along rows.
  Eigen::MatrixXd values(height_, width_);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) values(r, c) = sample(c, r);
  }
  const Eigen::MatrixXd fx = not_a_knot_slopes(values.transpose(), cell_size_).transpose();
  const Eigen::MatrixXd fy = not_a_knot_slopes(values, cell_size_);
  const Eigen::MatrixXd fxy = not_a_knot_slopes(fx, cell_size_);

  Eigen::Matrix4d hermite;
  hermite << 1, 0, 0, 0,
             0, 0, 1, 0,
            -3, 3, -2, -1,
             2, -2, 1, 1;

  const double h = cell_size_;
  patches_.resize(static_cast<std::size_t>(width_ - 1) * (height_ - 1));
  for (int r = 0; r + 1 < height_; ++r) {
    for (int c = 0; c + 1 < width_; ++c) {
      Eigen::Matrix4d corner;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          corner(a, b) = values(r + b, c + a);
          corner(a, b + 2) = h * fy(r + b, c + a);
          corner(a + 2, b) = h * fx(r + b, c + a);
          corner(a + 2, b + 2) = h * h * fxy(r + b, c + a);
        }
      }
      const Eigen::Matrix4d coeffs = hermite * corner * hermite.transpose();
      auto& patch = patches_[static_cast<std::size_t>(r) * (width_ - 1) + c];
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; q < 4; ++q) patch[p * 4 + q] = coeffs(p, q);
      }
    }
  }
}

bool TerrainMap::contains(double x, double y) const {
  return std::isfinite(x) && std::isfinite(y) && x >= x_min() && x <= x_max() && y >= y_min() &&
         y <= y_max();
}

TerrainJet TerrainMap::evaluate_patch(double x, double y) const noexcept {
  const double gx = (x - origin_.x()) / cell_size_;
  const double gy = (y - origin_.y()) / cell_size_;
  const int c = std::clamp(static_cast<int>(std::floor(gx)), 0, width_ - 2);
  const int r = std::clamp(static_cast<int>(std::floor(gy)), 0, height_ - 2);
  const double u = gx - c;
  const double v = gy - r;
  const auto& a = patches_[static_cast<std::size_t>(r) * (width_ - 1) + c];

  // Monomial basis and its derivatives, indexed [order][power].
  const double ub[4][4] = {{1.0, u, u * u, u * u * u},
                           {0.0, 1.0, 2.0 * u, 3.0 * u * u},
                           {0.0, 0.0, 2.0, 6.0 * u},
                           {0.0, 0.0, 0.0, 6.0}};
  const double vb[4][4] = {{1.0, v, v * v, v * v * v},
                           {0.0, 1.0, 2.0 * v, 3.0 * v * v},
                           {0.0, 0.0, 2.0, 6.0 * v},
                           {0.0, 0.0, 0.0, 6.0}};
  auto d = [&](int du, int dv) {
    double s = 0.0;
    for (int p = 0; p < 4; ++p) {
      double row = 0.0;
      for (int q = 0; q < 4; ++q) row += a[p * 4 + q] * vb[dv][q];
      s += ub[du][p] * row;
    }
    return s / std::pow(cell_size_, du + dv);
  };

  TerrainJet j;
  j.h = d(0, 0);
  j.hx = d(1, 0);
  j.hy = d(0, 1);
  j.hxx = d(2, 0);
  j.hxy = d(1, 1);
  j.hyy = d(0, 2);
  j.hxxx = d(3, 0);
  j.hxxy = d(2, 1);
  j.hxyy = d(1, 2);
  j.hyyy = d(0, 3);
  return j;
}

TerrainJet TerrainMap::jet(double x, double y) const {
  if (!contains(x, y)) throw OutOfBoundsError(x, y);
  return evaluate_patch(x, y);
}

std::optional<TerrainJet> TerrainMap::try_jet(double x, double y) const noexcept {
  if (!contains(x, y)) return std::nullopt;
  return evaluate_patch(x, y);
}

TerrainQuery TerrainMap::query(double x, double y) const {
  const TerrainJet j = jet(x, y);
  TerrainQuery q;
  q.height = j.h;
  q.gradient = {j.hx, j.hy};
  q.hessian << j.hxx, j.hxy, j.hxy, j.hyy;
  q.normal = Eigen::Vector3d(-j.hx, -j.hy, 1.0).normalized();
  return q;
}

PitchResult pitch_from_jet(const TerrainJet& j, double psi) noexcept {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double slope = j.hx * c + j.hy * s;
  const double k = 1.0 / (1.0 + slope * slope);
  PitchResult out;
  out.phi = std::atan(slope);
  out.d_phi = Eigen::Vector3d((j.hxx * c + j.hxy * s) * k, (j.hxy * c + j.hyy * s) * k,
                              (-j.hx * s + j.hy * c) * k);
  return out;
}

PitchResult pitch_along_heading(const TerrainMap& map, double x, double y, double psi) {
  return pitch_from_jet(map.jet(x, y), psi);
}

AttitudeResult attitude_from_jet(const TerrainJet& j) noexcept {
  const double g2 = j.hx * j.hx + j.hy * j.hy;
  const double g = std::sqrt(g2);
  AttitudeResult out;
  out.xi = std::atan(g);
  // xi is a cone in the gradient at flat points; 0 is the symmetric subgradient.
  if (g > 1e-12) {
    const double k = 1.0 / (g * (1.0 + g2));
    out.d_xi = Eigen::Vector2d((j.hx * j.hxx + j.hy * j.hxy) * k, (j.hx * j.hxy + j.hy * j.hyy) * k);
  }
  return out;
}

AttitudeResult attitude_angle(const TerrainMap& map, double x, double y) {
  return attitude_from_jet(map.jet(x, y));
}

RiskResult risk_from_jet(const TerrainJet& j, double lambda_c) noexcept {
  RiskResult out;
  out.r = j.hx * j.hx + j.hy * j.hy +
          lambda_c * (j.hxx * j.hxx + 2.0 * j.hxy * j.hxy + j.hyy * j.hyy);
  out.d_r.x() = 2.0 * (j.hx * j.hxx + j.hy * j.hxy) +
                lambda_c * 2.0 * (j.hxx * j.hxxx + 2.0 * j.hxy * j.hxxy + j.hyy * j.hxyy);
  out.d_r.y() = 2.0 * (j.hx * j.hxy + j.hy * j.hyy) +
                lambda_c * 2.0 * (j.hxx * j.hxxy + 2.0 * j.hxy * j.hxyy + j.hyy * j.hyyy);
  return out;
}

RiskResult risk_density(const TerrainMap& map, double x, double y, double lambda_c) {
  if (lambda_c < 0.0) throw std::invalid_argument("curvature weight must be non-negative");
  return risk_from_jet(map.jet(x, y), lambda_c);
}

}  // namespace rover
