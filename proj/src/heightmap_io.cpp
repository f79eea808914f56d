#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>

#include "rover/terrain.hpp"

namespace rover {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void fail(const std::string& message) { throw HeightmapParseError(message); }

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

HeightmapFormat parse_heightmap_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "esri_ascii_grid" || n == "esri" || n == "asc") return HeightmapFormat::kEsriAsciiGrid;
  if (n == "csv_grid" || n == "csv") return HeightmapFormat::kCsvGrid;
  throw HeightmapParseError("unknown heightmap format '" + name + "'");
}

std::string to_string(HeightmapFormat format) {
  return format == HeightmapFormat::kEsriAsciiGrid ? "esri_ascii_grid" : "csv_grid";
}

TerrainMap parse_esri_ascii_grid(std::istream& in) {
  std::map<std::string, double> header;
  std::string line;
  int line_no = 0;
  std::vector<std::vector<double>> rows;
  std::optional<double> nodata;

  auto require = [&](const std::string& key) {
    const auto it = header.find(key);
    if (it == header.end()) fail("ESRI grid header is missing '" + key + "'");
    return it->second;
  };

  bool in_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (in_header && std::isalpha(static_cast<unsigned char>(tokens.front().front()))) {
      if (tokens.size() != 2) fail("malformed ESRI header at line " + std::to_string(line_no));
      const auto value = parse_number(tokens[1]);
      if (!value) fail("malformed ESRI header value at line " + std::to_string(line_no));
      header[lower(std::string(tokens[0]))] = *value;
      continue;
    }
    if (in_header) {
      in_header = false;
      if (header.count("nodata_value")) nodata = header["nodata_value"];
    }
    const int ncols = static_cast<int>(require("ncols"));
    const std::size_t row_index = rows.size();
    if (static_cast<int>(tokens.size()) != ncols) {
      fail("ESRI grid row " + std::to_string(row_index) + " has " + std::to_string(tokens.size()) +
           " values, expected " + std::to_string(ncols));
    }
    std::vector<double> row;
    row.reserve(tokens.size());
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      const auto value = parse_number(tokens[c]);
      if (!value) {
        fail("unparseable value in ESRI grid row " + std::to_string(row_index) + ", column " +
             std::to_string(c));
      }
      if (!std::isfinite(*value) || (nodata && *value == *nodata)) {
        fail("ESRI grid row " + std::to_string(row_index) + ", column " + std::to_string(c) +
             " is NODATA or non-finite");
      }
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }

  const double ncols_d = require("ncols");
  const double nrows_d = require("nrows");
  const double cell = require("cellsize");
  if (ncols_d != std::floor(ncols_d) || nrows_d != std::floor(nrows_d) || ncols_d < 1 || nrows_d < 1) {
    fail("ESRI grid ncols/nrows must be positive integers");
  }
  const int ncols = static_cast<int>(ncols_d);
  const int nrows = static_cast<int>(nrows_d);
  if (static_cast<int>(rows.size()) != nrows) {
    fail("ESRI grid declares " + std::to_string(nrows) + " rows but contains " +
         std::to_string(rows.size()));
  }

  // Samples are cell centres; *llcorner refers to the outer corner of the lower-left cell.
  double x0 = 0.0;
  double y0 = 0.0;
  if (header.count("xllcenter")) {
    x0 = header["xllcenter"];
  } else {
    x0 = require("xllcorner") + 0.5 * cell;
  }
  if (header.count("yllcenter")) {
    y0 = header["yllcenter"];
  } else {
    y0 = require("yllcorner") + 0.5 * cell;
  }

  // File rows run north to south; storage runs south to north.
  std::vector<double> heights;
  heights.reserve(static_cast<std::size_t>(ncols) * nrows);
  for (int r = nrows - 1; r >= 0; --r) {
    heights.insert(heights.end(), rows[r].begin(), rows[r].end());
  }
  return TerrainMap({x0, y0}, cell, ncols, nrows, std::move(heights));
}

TerrainMap parse_csv_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail("CSV grid is empty");
  auto head = split_commas(line);
  if (head.size() == 3 && !parse_number(head[0])) {
    if (trim(head[0]) != "origin_x" || trim(head[1]) != "origin_y" || trim(head[2]) != "cell_size")
      fail("CSV grid header must be 'origin_x,origin_y,cell_size'");
    if (!std::getline(in, line)) fail("CSV grid header has no values line");
    head = split_commas(line);
  }
  if (head.size() != 3) fail("CSV grid header must be 'origin_x,origin_y,cell_size'");
  std::array<double, 3> h{};
  for (int i = 0; i < 3; ++i) {
    const auto v = parse_number(head[i]);
    if (!v) fail("CSV grid header value " + std::to_string(i) + " is not a number");
    h[i] = *v;
  }

  std::vector<double> heights;
  int width = -1;
  int row_index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (width < 0) width = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != width) {
      fail("CSV grid row " + std::to_string(row_index) + " has " + std::to_string(cells.size()) +
           " values, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        fail("unparseable value in CSV grid row " + std::to_string(row_index) + ", column " +
             std::to_string(c));
      }
      if (!std::isfinite(*v)) {
        fail("non-finite value in CSV grid row " + std::to_string(row_index) + ", column " +
             std::to_string(c));
      }
      heights.push_back(*v);
    }
    ++row_index;
  }
  if (width < 0) fail("CSV grid has no data rows");
  return TerrainMap({h[0], h[1]}, h[2], width, row_index, std::move(heights));
}

TerrainMap load_heightmap(const std::filesystem::path& path, HeightmapFormat format) {
  std::ifstream in(path);
  if (!in) throw HeightmapParseError("cannot open heightmap '" + path.string() + "'");
  return format == HeightmapFormat::kEsriAsciiGrid ? parse_esri_ascii_grid(in) : parse_csv_grid(in);
}

}  // namespace rover
