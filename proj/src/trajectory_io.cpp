#include <json.hpp>

#include "rover/trajectory.hpp"

namespace rover {

using nlohmann::json;

std::string trajectory_to_json(const SplineTrajectorySE2& traj) {
  json segments = json::array();
  for (const auto& s : traj.segments()) {
    segments.push_back({{"kind", s.kind == SegmentKind::kWait ? "wait" : "motion"},
                        {"duration", s.duration},
                        {"coeffs_x", s.cx},
                        {"coeffs_y", s.cy}});
  }
  json doc = {{"format_version", kTrajectoryFormatVersion},
              {"t0", traj.t0()},
              {"segments", std::move(segments)}};
  return doc.dump(2) + "\n";
}

SplineTrajectorySE2 trajectory_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TrajectoryError(std::string("trajectory JSON parse error: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw TrajectoryError("trajectory JSON must be an object");
    if (!doc.contains("format_version")) throw TrajectoryError("trajectory JSON lacks format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kTrajectoryFormatVersion) {
      throw TrajectoryError("unsupported trajectory format_version " + std::to_string(version) +
                            " (supported: " + std::to_string(kTrajectoryFormatVersion) + ")");
    }
    std::vector<Segment> segments;
    const auto& arr = doc.at("segments");
    if (!arr.is_array()) throw TrajectoryError("trajectory 'segments' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& js = arr[i];
      Segment s;
      const std::string kind = js.at("kind").get<std::string>();
      if (kind == "motion") {
        s.kind = SegmentKind::kMotion;
      } else if (kind == "wait") {
        s.kind = SegmentKind::kWait;
      } else {
        throw TrajectoryError("segment " + std::to_string(i) + " has unknown kind '" + kind + "'");
      }
      s.duration = js.at("duration").get<double>();
      const auto cx = js.at("coeffs_x").get<std::vector<double>>();
      const auto cy = js.at("coeffs_y").get<std::vector<double>>();
      if (cx.size() != 6 || cy.size() != 6) {
        throw TrajectoryError("segment " + std::to_string(i) + " needs 6 coefficients per axis");
      }
      std::copy(cx.begin(), cx.end(), s.cx.begin());
      std::copy(cy.begin(), cy.end(), s.cy.begin());
      segments.push_back(s);
    }
    return SplineTrajectorySE2(std::move(segments), doc.value("t0", 0.0));
  } catch (const json::exception& e) {
    throw TrajectoryError(std::string("malformed trajectory JSON: ") + e.what());
  }
}

}  // namespace rover
