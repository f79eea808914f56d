#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "rover/planner.hpp"
#include "rover/power.hpp"
#include "rover/terrain.hpp"
#include "rover/tracker.hpp"

namespace rover {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TerrainSource {
  std::filesystem::path path;  // resolved against the scenario file
  HeightmapFormat format = HeightmapFormat::kEsriAsciiGrid;
};

struct Scenario {
  std::string label;
  TerrainSource terrain;
  Pose2 start;
  Pose2 goal;
  PowerParams power;
  PlannerConfig planner;
  NMPCConfig nmpc;
  TrackingOptions tracking;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

/// Relative paths inside the document are taken against base_dir.
Scenario scenario_from_json(const std::string& text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Exactly the PowerParams field names; unknown keys are rejected.
PowerParams power_params_from_json(const std::string& text);
std::string power_params_to_json(const PowerParams& params);

std::string plan_metrics_json(const PlanResult& result, const std::string& label);
std::string profile_csv(const PowerProfile& profile);

}  // namespace rover
