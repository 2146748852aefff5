#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floodroute/csv.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"

namespace floodroute {

// Esri ASCII grid. Header keys are case-insensitive:
//
//   ncols         <int>
//   nrows         <int>
//   xllcorner     <lon of the southwest corner, degrees>   (or xllcenter)
//   yllcorner     <lat of the southwest corner, degrees>   (or yllcenter)
//   cellsize      <meters>
//   NODATA_value  <sentinel, optional, default -9999>
//
// followed by nrows lines of ncols values, northernmost row first.

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Token {
  std::string_view text;
  std::size_t line;
};

inline std::vector<Token> tokenize_lines(std::string_view content) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < content.size()) {
    const char ch = content[i];
    if (ch == '\n') {
      ++line;
      ++i;
    } else if (ch == ' ' || ch == '\t' || ch == '\r') {
      ++i;
    } else {
      std::size_t j = i;
      while (j < content.size() && content[j] != ' ' && content[j] != '\t' &&
             content[j] != '\r' && content[j] != '\n') {
        ++j;
      }
      tokens.push_back({content.substr(i, j - i), line});
      i = j;
    }
  }
  return tokens;
}

inline Error ascii_error(std::size_t line, const std::string& message) {
  return Error(Errc::parse_error, "line " + std::to_string(line) + ": " + message);
}

}  // namespace detail

inline ElevationGrid parse_elevation_ascii(std::string_view content,
                                           std::size_t max_cells = kDefaultMaxCells) {
  const auto tokens = detail::tokenize_lines(content);
  std::size_t pos = 0;
  std::optional<double> ncols, nrows, xll, yll, cellsize, nodata;
  bool x_center = false, y_center = false;
  std::size_t last_line = tokens.empty() ? 1 : tokens.back().line;

  while (pos < tokens.size()) {
    const auto& key_tok = tokens[pos];
    if (text::parse_double(key_tok.text)) break;  // start of the value block
    const std::string key = detail::lower(std::string(key_tok.text));
    if (pos + 1 >= tokens.size() || tokens[pos + 1].line != key_tok.line) {
      throw detail::ascii_error(key_tok.line, "header '" + key + "' has no value");
    }
    const auto value = text::parse_double(tokens[pos + 1].text);
    if (!value) {
      throw detail::ascii_error(key_tok.line, "header '" + key + "' value '" +
                                                  std::string(tokens[pos + 1].text) +
                                                  "' is not a number");
    }
    std::optional<double>* slot = nullptr;
    if (key == "ncols") slot = &ncols;
    else if (key == "nrows") slot = &nrows;
    else if (key == "xllcorner" || key == "xllcenter") { slot = &xll; x_center = key == "xllcenter"; }
    else if (key == "yllcorner" || key == "yllcenter") { slot = &yll; y_center = key == "yllcenter"; }
    else if (key == "cellsize") slot = &cellsize;
    else if (key == "nodata_value") slot = &nodata;
    else throw detail::ascii_error(key_tok.line, "unknown header '" + key + "'");
    if (slot->has_value()) {
      throw detail::ascii_error(key_tok.line, "duplicate header '" + key + "'");
    }
    *slot = *value;
    pos += 2;
  }

  const std::size_t data_line = pos < tokens.size() ? tokens[pos].line : last_line;
  auto require = [&](const std::optional<double>& v, const char* name) {
    if (!v) throw detail::ascii_error(data_line, std::string("missing '") + name + "' header");
    return *v;
  };
  const double cols_v = require(ncols, "ncols");
  const double rows_v = require(nrows, "nrows");
  const double xll_v = require(xll, "xllcorner");
  const double yll_v = require(yll, "yllcorner");
  const double cell_v = require(cellsize, "cellsize");
  const double nodata_v = nodata.value_or(kDefaultNodata);
  auto positive_int = [&](double v, const char* name) {
    if (!(v >= 1.0 && v <= 1e9 && std::floor(v) == v)) {
      throw detail::ascii_error(data_line, std::string(name) + " must be a positive integer");
    }
    return static_cast<int>(v);
  };
  const int cols = positive_int(cols_v, "ncols");
  const int rows = positive_int(rows_v, "nrows");
  if (!(cell_v > 0.0)) throw detail::ascii_error(data_line, "cellsize must be > 0");
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) > max_cells) {
    throw detail::ascii_error(data_line, "grid exceeds the cell cap");
  }

  // Center-anchored headers shift back by half a cell.
  double lat0 = yll_v;
  if (y_center) lat0 -= cell_v / 2.0 / (std::numbers::pi / 180.0 * kEarthRadiusM);
  double lon0 = xll_v;
  if (x_center) {
    lon0 -= cell_v / 2.0 /
            (std::numbers::pi / 180.0 * kEarthRadiusM * std::cos(deg_to_rad(lat0)));
  }
  GridSpec spec;
  try {
    spec = GridSpec({lat0, lon0}, cell_v, rows, cols, max_cells);
  } catch (const Error& e) {
    throw detail::ascii_error(data_line, e.what());
  }

  const std::size_t expected = spec.size();
  std::vector<double> values(expected);
  for (std::size_t k = 0; k < expected; ++k, ++pos) {
    if (pos >= tokens.size()) {
      throw detail::ascii_error(last_line, "expected " + std::to_string(expected) +
                                               " values, found " + std::to_string(k));
    }
    const auto v = text::parse_double(tokens[pos].text);
    if (!v) {
      throw detail::ascii_error(tokens[pos].line, "bad value '" +
                                                      std::string(tokens[pos].text) + "'");
    }
    // File rows run north to south; storage is south-up.
    const int file_row = static_cast<int>(k / static_cast<std::size_t>(cols));
    const int col = static_cast<int>(k % static_cast<std::size_t>(cols));
    values[spec.index({rows - 1 - file_row, col})] = *v;
  }
  if (pos != tokens.size()) {
    throw detail::ascii_error(tokens[pos].line, "trailing data after " +
                                                    std::to_string(expected) + " values");
  }
  return ElevationGrid(spec, std::move(values), nodata_v);
}

inline ElevationGrid load_elevation_ascii(const std::string& path) {
  return parse_elevation_ascii(text::read_file(path));
}

inline std::string format_elevation_ascii(const ElevationGrid& grid) {
  const GridSpec& spec = grid.spec();
  std::string out;
  out += "ncols " + std::to_string(spec.cols()) + "\n";
  out += "nrows " + std::to_string(spec.rows()) + "\n";
  out += "xllcorner " + text::format_double(spec.origin().lon) + "\n";
  out += "yllcorner " + text::format_double(spec.origin().lat) + "\n";
  out += "cellsize " + text::format_double(spec.cell_size_m()) + "\n";
  out += "NODATA_value " + text::format_double(grid.nodata()) + "\n";
  for (int r = spec.rows() - 1; r >= 0; --r) {
    for (int c = 0; c < spec.cols(); ++c) {
      if (c) out += ' ';
      out += text::format_double(grid.at({r, c}));
    }
    out += '\n';
  }
  return out;
}

inline void save_elevation_ascii(const ElevationGrid& grid, const std::string& path) {
  text::write_file(path, format_elevation_ascii(grid));
}

}  // namespace floodroute
