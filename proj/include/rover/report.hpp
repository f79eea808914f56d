#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rover {

struct ReportRow {
  std::string label;
  double P_pmax = 0.0;
  double P_tmax = 0.0;
  double e_y = 0.0;
  double e_vx = 0.0;
};

/// Reads metrics.json and summary.json from a run directory.
ReportRow load_report_row(const std::filesystem::path& run_dir);

std::string report_table(const std::vector<ReportRow>& rows);
std::string report_csv(const std::vector<ReportRow>& rows);

}  // namespace rover
