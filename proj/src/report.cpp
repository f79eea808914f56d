#include "rover/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rover {

namespace {

nlohmann::json read_json(const std::filesystem::path& dir, const char* name) {
  const auto path = dir / name;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("run directory " + dir.string() + " has no " + name);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("run directory " + dir.string() + ": bad " + name + ": " + e.what());
  }
}

}  // namespace

ReportRow load_report_row(const std::filesystem::path& run_dir) {
  const auto metrics = read_json(run_dir, "metrics.json");
  const auto summary = read_json(run_dir, "summary.json");
  ReportRow row;
  row.label = metrics.value("label", std::string());
  if (row.label.empty()) row.label = run_dir.filename().string();
  row.P_pmax = metrics.at("P_pmax").get<double>();
  row.P_tmax = summary.at("P_tmax").get<double>();
  row.e_y = summary.at("e_y_rms").get<double>();
  row.e_vx = summary.at("e_vx_rms").get<double>();
  return row;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Method" << std::right
      << std::setw(12) << "P_pmax [W]" << std::setw(12) << "P_tmax [W]" << std::setw(10) << "e_y [m]"
      << std::setw(12) << "e_vx [m/s]" << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.label << std::right
        << std::setprecision(2) << std::setw(12) << r.P_pmax << std::setw(12) << r.P_tmax
        << std::setprecision(4) << std::setw(10) << r.e_y << std::setw(12) << r.e_vx << '\n';
  }
  return out.str();
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "label,P_pmax,P_tmax,e_y,e_vx\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.P_pmax << ',' << r.P_tmax << ',' << r.e_y << ',' << r.e_vx << '\n';
  }
  return out.str();
}

}  // namespace rover
