#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rover/planner.hpp"
#include "rover/report.hpp"
#include "rover/scenario.hpp"
#include "rover/terrain.hpp"
#include "rover/tracker.hpp"
#include "rover/trajectory.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnconverged = 2;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
};

rover::Scenario load(const std::string& path, const Overrides& o) {
  rover::Scenario s = rover::load_scenario(path);
  if (o.seed) {
    s.seed = *o.seed;
    s.tracking.seed = *o.seed;
  }
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw std::invalid_argument("--dt must be positive");
    s.planner.profile_dt = *o.dt;
  }
  return s;
}

int cmd_plan(const std::string& scenario_path, const Overrides& o) {
  const rover::Scenario s = load(scenario_path, o);
  const rover::TerrainMap map = rover::load_heightmap(s.terrain.path, s.terrain.format);
  rover::PlanResult r = rover::plan(s.start, s.goal, map, s.power, s.planner);
  r = rover::enforce_energy_budget(r, s.power, s.planner);

  fs::create_directories(s.output_dir);
  write_file(s.output_dir / "trajectory.json", rover::trajectory_to_json(r.trajectory));
  write_file(s.output_dir / "profile.csv", rover::profile_csv(r.profile));
  write_file(s.output_dir / "metrics.json", rover::plan_metrics_json(r, s.label));

  std::cout << "P_pmax " << r.P_pmax << " W, duration " << r.trajectory.total_duration()
            << " s, wait " << r.wait_time_inserted << " s, "
            << (r.converged ? "converged" : "not converged") << "\n";
  return r.converged ? kExitOk : kExitUnconverged;
}

int cmd_track(const std::string& scenario_path, const std::string& trajectory_path, const Overrides& o) {
  const rover::Scenario s = load(scenario_path, o);
  const rover::TerrainMap map = rover::load_heightmap(s.terrain.path, s.terrain.format);
  const rover::SplineTrajectorySE2 traj = rover::trajectory_from_json(read_file(trajectory_path));
  const rover::TrackingLog log = rover::simulate_tracking(traj, map, s.power, s.nmpc, s.tracking);

  fs::create_directories(s.output_dir);
  write_file(s.output_dir / "tracking.csv", log.to_csv());
  write_file(s.output_dir / "summary.json", log.summary_json());

  std::cout << "e_y_rms " << log.summary.e_y_rms << " m, e_vx_rms " << log.summary.e_vx_rms
            << " m/s, P_tmax " << log.summary.P_tmax << " W\n";
  if (!log.success) {
    std::cerr << "tracking failed: " << log.message << "\n";
    return kExitUnconverged;
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& csv_path) {
  std::vector<rover::ReportRow> rows;
  for (const auto& d : dirs) rows.push_back(rover::load_report_row(d));
  std::cout << rover::report_table(rows);
  if (!csv_path.empty()) write_file(csv_path, rover::report_csv(rows));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-aware rover planning and tracking"};
  app.require_subcommand(0, 1);

  Overrides overrides;
  std::uint64_t seed = 0;
  double dt = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");
  auto* dt_opt = app.add_option("--dt", dt, "Override the power profile resolution (s)");
  bool probe = false;
  app.add_flag("--format-version", probe, "Print supported file format versions");

  std::string scenario;
  std::string trajectory;
  std::vector<std::string> dirs;
  std::string csv_path = "report.csv";

  auto* plan = app.add_subcommand("plan", "Plan a trajectory for a scenario");
  plan->add_option("scenario", scenario, "Scenario JSON")->required();
  auto* track = app.add_subcommand("track", "Track a planned trajectory in simulation");
  track->add_option("scenario", scenario, "Scenario JSON")->required();
  track->add_option("trajectory", trajectory, "Trajectory JSON")->required();
  auto* report = app.add_subcommand("report", "Tabulate metrics of run directories");
  report->add_option("dirs", dirs, "Run directories")->required();
  report->add_option("--csv", csv_path, "CSV output path (empty to skip)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (*seed_opt) overrides.seed = seed;
  if (*dt_opt) overrides.dt = dt;

  if (probe) {
    std::cout << "trajectory " << rover::kTrajectoryFormatVersion << "\n";
    return kExitOk;
  }
  try {
    if (*plan) return cmd_plan(scenario, overrides);
    if (*track) return cmd_track(scenario, trajectory, overrides);
    if (*report) return cmd_report(dirs, csv_path);
    std::cerr << app.help();
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
