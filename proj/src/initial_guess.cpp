#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "rover/min_jerk_spline.hpp"
#include "rover/terrain.hpp"
#include "rover/trajectory.hpp"

namespace rover {

namespace {

bool line_is_risky(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const TerrainMap& map,
                   const InitialGuessOptions& opt) {
  const double len = (b - a).norm();
  const int n = std::max(2, static_cast<int>(std::ceil(2.0 * len / map.cell_size())));
  for (int i = 0; i <= n; ++i) {
    const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(i) / n);
    if (risk_density(map, p.x(), p.y(), opt.lambda_c).r > opt.risk_seed_threshold) return true;
  }
  return false;
}

// 8-connected A* over grid nodes with edge cost length * (1 + w * mean risk).
std::vector<Eigen::Vector2d> risk_astar(const Eigen::Vector2d& start, const Eigen::Vector2d& goal,
                                        const TerrainMap& map, const InitialGuessOptions& opt) {
  const int w = map.width();
  const int h = map.height();
  const double cs = map.cell_size();
  std::vector<double> risk(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double x = map.origin().x() + c * cs;
      const double y = map.origin().y() + r * cs;
      risk[static_cast<std::size_t>(r) * w + c] = risk_density(map, x, y, opt.lambda_c).r;
    }
  }
  auto node_of = [&](const Eigen::Vector2d& p) {
    const int c = std::clamp(static_cast<int>(std::lround((p.x() - map.origin().x()) / cs)), 0, w - 1);
    const int r = std::clamp(static_cast<int>(std::lround((p.y() - map.origin().y()) / cs)), 0, h - 1);
    return r * w + c;
  };
  const int s = node_of(start);
  const int g = node_of(goal);
  const int gc = g % w, gr = g / w;

  std::vector<double> cost(risk.size(), std::numeric_limits<double>::infinity());
  std::vector<int> parent(risk.size(), -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[s] = 0.0;
  open.emplace(0.0, s);
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (u == g) break;
    const int uc = u % w, ur = u / w;
    if (f > cost[u] + cs * std::hypot(uc - gc, ur - gr) + 1e-12) continue;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int vc = uc + dc, vr = ur + dr;
        if (vc < 0 || vr < 0 || vc >= w || vr >= h) continue;
        const int v = vr * w + vc;
        const double step = cs * std::hypot(dc, dr) * (1.0 + opt.risk_seed_weight * 0.5 * (risk[u] + risk[v]));
        if (cost[u] + step < cost[v]) {
          cost[v] = cost[u] + step;
          parent[v] = u;
          open.emplace(cost[v] + cs * std::hypot(vc - gc, vr - gr), v);
        }
      }
    }
  }
  std::vector<Eigen::Vector2d> path{goal};
  for (int v = parent[g]; v >= 0 && v != s; v = parent[v]) {
    path.emplace_back(map.origin().x() + (v % w) * cs, map.origin().y() + (v / w) * cs);
  }
  path.push_back(start);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Eigen::Vector2d> resample(const std::vector<Eigen::Vector2d>& path, int n_segments) {
  std::vector<double> arc{0.0};
  for (std::size_t i = 1; i < path.size(); ++i) arc.push_back(arc.back() + (path[i] - path[i - 1]).norm());
  std::vector<Eigen::Vector2d> out{path.front()};
  std::size_t j = 1;
  for (int k = 1; k < n_segments; ++k) {
    const double target = arc.back() * k / n_segments;
    while (j + 1 < arc.size() && arc[j] < target) ++j;
    const double span = arc[j] - arc[j - 1];
    const double w = span > 0.0 ? (target - arc[j - 1]) / span : 0.0;
    out.push_back(path[j - 1] + w * (path[j] - path[j - 1]));
  }
  out.push_back(path.back());
  return out;
}

}  // namespace

WaypointSeed seed_waypoints(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                            const InitialGuessOptions& opt) {
  if (opt.n_segments < 1) throw std::invalid_argument("initial guess needs n_segments >= 1");
  if (!(opt.v_nominal > 0.0)) throw std::invalid_argument("initial guess needs v_nominal > 0");
  if (!map.contains(start.x, start.y)) throw OutOfBoundsError(start.x, start.y);
  if (!map.contains(goal.x, goal.y)) throw OutOfBoundsError(goal.x, goal.y);

  const Eigen::Vector2d a(start.x, start.y);
  const Eigen::Vector2d b(goal.x, goal.y);
  WaypointSeed seed;
  if ((b - a).norm() < 1e-9) {
    seed.points = {a, b};
    seed.durations = {1.0};
    return seed;
  }
  std::vector<Eigen::Vector2d> path{a, b};
  if (opt.risk_seed_threshold > 0.0 && line_is_risky(a, b, map, opt)) {
    path = risk_astar(a, b, map, opt);
  }
  seed.points = resample(path, opt.n_segments);
  for (int i = 0; i < opt.n_segments; ++i) {
    seed.durations.push_back((seed.points[i + 1] - seed.points[i]).norm() / opt.v_nominal);
  }
  return seed;
}

SplineTrajectorySE2 initial_guess(const Pose2& start, const Pose2& goal, const TerrainMap& map,
                                  const InitialGuessOptions& opt) {
  const WaypointSeed seed = seed_waypoints(start, goal, map, opt);
  if (seed.durations.size() == 1 && (seed.points[1] - seed.points[0]).norm() < 1e-9) {
    return SplineTrajectorySE2({Segment::wait(start.x, start.y, 1.0)});
  }
  BoundaryState head, tail;
  head.p = seed.points.front();
  tail.p = seed.points.back();
  MinJerkSpline spline;
  spline.generate(head, tail, {seed.points.begin() + 1, seed.points.end() - 1},
                  Eigen::Map<const Eigen::VectorXd>(seed.durations.data(),
                                                    static_cast<Eigen::Index>(seed.durations.size())));
  return spline.trajectory();
}

}  // namespace rover
