#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "floodroute/depth.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/time.hpp"

namespace floodroute {

namespace text {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::io_error, "failed reading '" + path + "'");
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io_error, "failed writing '" + path + "'");
}

}  // namespace text

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Splits RFC 4180 text into records. Quoted fields may contain commas,
/// doubled quotes and newlines. Blank lines are skipped.
inline std::vector<CsvRow> parse_csv(std::string_view content) {
  std::vector<CsvRow> rows;
  if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
  CsvRow row;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  row.line = 1;
  auto end_record = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    const bool blank = row.fields.size() == 1 && row.fields[0].empty() && !field_quoted;
    if (!blank) rows.push_back(std::move(row));
    row = CsvRow{};
    field_quoted = false;
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char ch = content[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      in_quotes = true;
      field_quoted = true;
    } else if (ch == ',') {
      row.fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      // tolerated before '\n'
    } else if (ch == '\n') {
      end_record();
      ++line;
      row.line = line;
    } else {
      field += ch;
    }
  }
  if (in_quotes) {
    throw Error(Errc::parse_error,
                "line " + std::to_string(row.line) + ": unterminated quoted field");
  }
  if (!field.empty() || !row.fields.empty() || field_quoted) end_record();
  return rows;
}

namespace detail {

// Header name -> column index, validated against the required set.
inline std::map<std::string, std::size_t> map_header(
    const std::vector<CsvRow>& rows, const std::vector<std::string>& required) {
  if (rows.empty()) throw Error(Errc::validation_error, "missing CSV header");
  std::map<std::string, std::size_t> columns;
  const auto& header = rows.front().fields;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = header[i];
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!columns.emplace(name, i).second) {
      throw Error(Errc::validation_error, "duplicate column '" + name + "'");
    }
  }
  for (const auto& col : required) {
    if (!columns.contains(col)) {
      throw Error(Errc::validation_error, "missing required column '" + col + "'");
    }
  }
  return columns;
}

class RowReader {
 public:
  RowReader(const CsvRow& row, const std::map<std::string, std::size_t>& columns,
            std::vector<std::string>& errors)
      : row_(row), columns_(columns), errors_(errors) {}

  std::string str(const std::string& col) const {
    const std::size_t idx = columns_.at(col);
    return idx < row_.fields.size() ? row_.fields[idx] : std::string{};
  }

  double number(const std::string& col) {
    auto v = text::parse_double(str(col));
    if (!v) fail(col + ": '" + str(col) + "' is not a finite number");
    return v.value_or(0.0);
  }

  Timestamp timestamp(const std::string& col) {
    try {
      return parse_rfc3339(str(col));
    } catch (const Error&) {
      fail(col + ": '" + str(col) + "' is not an RFC 3339 timestamp");
      return {};
    }
  }

  void fail(const std::string& message) {
    ok_ = false;
    errors_.push_back("line " + std::to_string(row_.line) + ": " + message);
  }
  bool ok() const { return ok_; }

  bool check_width() {
    if (row_.fields.size() != columns_.size()) {
      fail("expected " + std::to_string(columns_.size()) + " fields, found " +
           std::to_string(row_.fields.size()));
    }
    return ok_;
  }

 private:
  const CsvRow& row_;
  const std::map<std::string, std::size_t>& columns_;
  std::vector<std::string>& errors_;
  bool ok_ = true;
};

inline void reject_if_errors(const std::vector<std::string>& errors,
                             std::string_view what) {
  if (errors.empty()) return;
  throw Error(Errc::validation_error,
              std::string(what) + ": " + std::to_string(errors.size()) +
                  " invalid row(s); first: " + errors.front(),
              errors);
}

}  // namespace detail

/// Parses `id,lat,lon,depth_m,timestamp`. Any invalid row rejects the file;
/// the error's details list every offending line.
inline std::vector<DepthObservation> parse_observations_csv(std::string_view content) {
  const auto rows = parse_csv(content);
  const auto columns =
      detail::map_header(rows, {"id", "lat", "lon", "depth_m", "timestamp"});
  std::vector<DepthObservation> out;
  std::vector<std::string> errors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    detail::RowReader r(rows[i], columns, errors);
    if (!r.check_width()) continue;
    DepthObservation o;
    o.id = r.str("id");
    if (o.id.empty()) r.fail("id: empty");
    o.location = {r.number("lat"), r.number("lon")};
    o.depth_m = r.number("depth_m");
    o.timestamp = r.timestamp("timestamp");
    o.source = ObservationSource::direct;
    if (r.ok() && !is_valid(o.location)) r.fail("lat/lon out of range");
    if (r.ok() && o.depth_m < 0.0) r.fail("depth_m: must be >= 0");
    if (r.ok()) out.push_back(std::move(o));
  }
  detail::reject_if_errors(errors, "observations");
  return out;
}

/// Parses `id,lat,lon,pre_len_px,pre_scale_px_per_m,post_len_px,post_scale_px_per_m,timestamp`.
inline std::vector<PolePairMeasurement> parse_pole_pairs_csv(std::string_view content) {
  const auto rows = parse_csv(content);
  const auto columns = detail::map_header(
      rows, {"id", "lat", "lon", "pre_len_px", "pre_scale_px_per_m", "post_len_px",
             "post_scale_px_per_m", "timestamp"});
  std::vector<PolePairMeasurement> out;
  std::vector<std::string> errors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    detail::RowReader r(rows[i], columns, errors);
    if (!r.check_width()) continue;
    PolePairMeasurement m;
    m.id = r.str("id");
    if (m.id.empty()) r.fail("id: empty");
    m.location = {r.number("lat"), r.number("lon")};
    m.pre_len_px = r.number("pre_len_px");
    m.pre_scale_px_per_m = r.number("pre_scale_px_per_m");
    m.post_len_px = r.number("post_len_px");
    m.post_scale_px_per_m = r.number("post_scale_px_per_m");
    m.timestamp = r.timestamp("timestamp");
    if (r.ok()) {
      try {
        validate(m);
      } catch (const Error& e) {
        r.fail(e.what());
      }
    }
    if (r.ok()) out.push_back(std::move(m));
  }
  detail::reject_if_errors(errors, "pole pairs");
  return out;
}

inline std::vector<DepthObservation> load_observations(const std::string& path) {
  return parse_observations_csv(text::read_file(path));
}

inline std::vector<PolePairMeasurement> load_pole_pairs(const std::string& path) {
  return parse_pole_pairs_csv(text::read_file(path));
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string format_observations_csv(const std::vector<DepthObservation>& obs) {
  std::string out = "id,lat,lon,depth_m,timestamp\n";
  for (const auto& o : obs) {
    out += detail::csv_field(o.id) + ',' + text::format_double(o.location.lat) + ',' +
           text::format_double(o.location.lon) + ',' + text::format_double(o.depth_m) +
           ',' + format_rfc3339(o.timestamp) + '\n';
  }
  return out;
}

/// Depth column keyed by id, for evaluation files. Accepts `depth_m` or
/// `depth_in` (converted to meters); other columns are ignored.
inline std::vector<std::pair<std::string, double>> parse_depth_table_csv(
    std::string_view content) {
  const auto rows = parse_csv(content);
  if (rows.empty()) throw Error(Errc::validation_error, "missing CSV header");
  const auto& header = rows.front().fields;
  const bool has_m = std::find(header.begin(), header.end(), "depth_m") != header.end();
  const bool has_in = std::find(header.begin(), header.end(), "depth_in") != header.end();
  if (!has_m && !has_in) {
    throw Error(Errc::validation_error, "missing required column 'depth_m' (or 'depth_in')");
  }
  const std::string depth_col = has_m ? "depth_m" : "depth_in";
  const auto columns = detail::map_header(rows, {"id", depth_col});
  std::vector<std::pair<std::string, double>> out;
  std::vector<std::string> errors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    detail::RowReader r(rows[i], columns, errors);
    if (!r.check_width()) continue;
    std::string id = r.str("id");
    double v = r.number(depth_col);
    if (id.empty()) r.fail("id: empty");
    if (r.ok()) out.emplace_back(std::move(id), has_m ? v : inches_to_meters(v));
  }
  detail::reject_if_errors(errors, "depth table");
  return out;
}

}  // namespace floodroute
