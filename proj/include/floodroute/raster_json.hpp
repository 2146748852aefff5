#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "floodroute/csv.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/inundation.hpp"
#include "floodroute/time.hpp"

namespace floodroute {

inline constexpr int kRasterFormatVersion = 1;

/// Versioned raster document. `nodata_cells` lists the row-major indices of
/// cells without terrain data (empty for complete elevation grids).
inline nlohmann::json raster_to_json(const FloodRaster& r) {
  nlohmann::json nodata_cells = nlohmann::json::array();
  for (std::size_t i = 0; i < r.spec.size(); ++i) {
    if (r.nodata[i]) nodata_cells.push_back(i);
  }
  return {
      {"version", kRasterFormatVersion},
      {"spec",
       {{"origin_lat", r.spec.origin().lat},
        {"origin_lon", r.spec.origin().lon},
        {"cell_size_m", r.spec.cell_size_m()},
        {"rows", r.spec.rows()},
        {"cols", r.spec.cols()}}},
      {"params",
       {{"bandwidth_m", r.params.bandwidth_m},
        {"support_radius_factor", r.params.support_radius_factor}}},
      {"generated_at", format_rfc3339(r.generated_at)},
      {"depth_m", std::vector<double>(r.depth_m.values().begin(), r.depth_m.values().end())},
      {"nodata_cells", std::move(nodata_cells)},
  };
}

inline std::string format_raster_json(const FloodRaster& r) {
  return raster_to_json(r).dump();
}

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key,
                                    nlohmann::json::value_t type, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::parse_error, std::string(where) + ": missing '" + key + "'");
  }
  const auto& v = obj.at(key);
  const bool numeric_ok = type == nlohmann::json::value_t::number_float && v.is_number();
  const bool int_ok = type == nlohmann::json::value_t::number_unsigned &&
                      (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0));
  if (!(numeric_ok || int_ok || v.type() == type)) {
    throw Error(Errc::parse_error, std::string(where) + ": '" + key + "' has wrong type");
  }
  return v;
}

}  // namespace detail

inline FloodRaster raster_from_json(const nlohmann::json& doc) {
  using vt = nlohmann::json::value_t;
  const auto& version = detail::member(doc, "version", vt::number_unsigned, "raster");
  if (version.get<long long>() != kRasterFormatVersion) {
    throw Error(Errc::parse_error,
                "raster: unsupported version " + version.dump());
  }
  const auto& spec_j = detail::member(doc, "spec", vt::object, "raster");
  const auto& params_j = detail::member(doc, "params", vt::object, "raster");
  const auto& depth_j = detail::member(doc, "depth_m", vt::array, "raster");
  const auto& when_j = detail::member(doc, "generated_at", vt::string, "raster");

  FloodRaster r;
  try {
    const auto rows = detail::member(spec_j, "rows", vt::number_unsigned, "spec").get<unsigned long long>();
    const auto cols = detail::member(spec_j, "cols", vt::number_unsigned, "spec").get<unsigned long long>();
    if (rows > 1'000'000'000ULL || cols > 1'000'000'000ULL) {
      throw Error(Errc::invalid_argument, "rows/cols too large");
    }
    r.spec = GridSpec(
        {detail::member(spec_j, "origin_lat", vt::number_float, "spec").get<double>(),
         detail::member(spec_j, "origin_lon", vt::number_float, "spec").get<double>()},
        detail::member(spec_j, "cell_size_m", vt::number_float, "spec").get<double>(),
        static_cast<int>(rows), static_cast<int>(cols));
    r.params.bandwidth_m =
        detail::member(params_j, "bandwidth_m", vt::number_float, "params").get<double>();
    r.params.support_radius_factor =
        detail::member(params_j, "support_radius_factor", vt::number_float, "params").get<double>();
    r.generated_at = parse_rfc3339(when_j.get<std::string>());

    if (depth_j.size() != r.spec.size()) {
      throw Error(Errc::parse_error, "raster: depth_m has " + std::to_string(depth_j.size()) +
                                         " values, expected " + std::to_string(r.spec.size()));
    }
    std::vector<double> depth;
    depth.reserve(depth_j.size());
    for (const auto& v : depth_j) {
      if (!v.is_number()) throw Error(Errc::parse_error, "raster: non-numeric depth value");
      depth.push_back(v.get<double>());
    }
    r.depth_m = Grid<double>(r.spec, std::move(depth));
    r.nodata = Grid<std::uint8_t>(r.spec, 0);
    if (doc.contains("nodata_cells")) {
      const auto& nd = detail::member(doc, "nodata_cells", vt::array, "raster");
      for (const auto& v : nd) {
        if (!v.is_number_unsigned() || v.get<std::size_t>() >= r.spec.size()) {
          throw Error(Errc::parse_error, "raster: bad nodata cell index " + v.dump());
        }
        r.nodata[v.get<std::size_t>()] = 1;
      }
    }
    validate(r);
  } catch (const Error& e) {
    if (e.code() == Errc::parse_error) throw;
    throw Error(Errc::parse_error, std::string("raster: ") + e.what());
  }
  return r;
}

inline FloodRaster parse_raster_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("raster: malformed JSON: ") + e.what());
  }
  return raster_from_json(doc);
}

inline FloodRaster load_raster_json(const std::string& path) {
  return parse_raster_json(text::read_file(path));
}

inline void save_raster_json(const FloodRaster& r, const std::string& path) {
  text::write_file(path, format_raster_json(r) + "\n");
}

}  // namespace floodroute
