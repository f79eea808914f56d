#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "rover/terrain.hpp"

namespace rover::testing {

inline TerrainMap sampled_map(const std::function<double(double, double)>& f, int n, double cell,
                              Eigen::Vector2d origin = Eigen::Vector2d::Zero()) {
  std::vector<double> h(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) h[static_cast<std::size_t>(r) * n + c] = f(origin.x() + c * cell, origin.y() + r * cell);
  }
  return TerrainMap(origin, cell, n, n, std::move(h));
}

/// Sum of a few random low-frequency waves sampled on a 1 m grid.
inline TerrainMap smooth_random_map(std::uint64_t seed, int n = 24, double cell = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.05, 0.6), freq(0.05, 0.35), phase(0.0, 6.283185307179586);
  struct Wave { double a, kx, ky, p; };
  std::vector<Wave> waves;
  for (int i = 0; i < 6; ++i) waves.push_back({amp(rng), freq(rng), freq(rng) - 0.2, phase(rng)});
  return sampled_map(
      [waves](double x, double y) {
        double h = 0.0;
        for (const auto& w : waves) h += w.a * std::sin(w.kx * x + w.ky * y + w.p);
        return h;
      },
      n, cell);
}

/// |a - b| within rel * max(|a|, |b|), or within abs_floor when both are tiny.
inline bool close_rel(double a, double b, double rel, double abs_floor) {
  const double d = std::abs(a - b);
  if (d <= abs_floor) return true;
  return d <= rel * std::max(std::abs(a), std::abs(b));
}

inline double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace rover::testing
