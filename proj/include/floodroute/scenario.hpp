#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "floodroute/ascii_grid.hpp"
#include "floodroute/csv.hpp"
#include "floodroute/depth.hpp"
#include "floodroute/elevation.hpp"
#include "floodroute/error.hpp"
#include "floodroute/inundation.hpp"
#include "floodroute/remote_elevation.hpp"
#include "floodroute/routing.hpp"

namespace floodroute {

enum class ElevationMode { raster, remote, recorded };

inline ElevationMode parse_elevation_mode(std::string_view s) {
  if (s == "raster") return ElevationMode::raster;
  if (s == "remote") return ElevationMode::remote;
  if (s == "recorded") return ElevationMode::recorded;
  throw Error(Errc::invalid_argument, "unknown elevation mode '" + std::string(s) +
                                          "' (expected raster, remote or recorded)");
}

struct ElevationSource {
  ElevationMode mode = ElevationMode::raster;
  std::string path;                // raster: Esri ASCII grid; recorded: fixture JSON
  std::string endpoint;            // remote
  std::optional<GridSpec> grid;    // remote/recorded: lattice to sample
};

struct RouteDefaults {
  double max_depth_m = 0.3;
  HeuristicMode heuristic = HeuristicMode::octile;
  double depth_penalty_per_m = 0.0;
};

/// Declarative description of one mapping session. Relative paths resolve
/// against the scenario file's directory.
struct Scenario {
  std::string name;
  ElevationSource elevation;
  std::vector<std::string> observation_files;
  std::vector<std::string> pole_pair_files;
  DecayParams decay;
  RouteDefaults route_defaults;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> system_env(const char* name) {
  if (const char* v = std::getenv(name); v && *v) return std::string(v);
  return std::nullopt;
}

namespace detail {

inline GridSpec grid_from_json(const nlohmann::json& j) {
  return GridSpec({j.at("origin_lat").get<double>(), j.at("origin_lon").get<double>()},
                  j.at("cell_size_m").get<double>(), j.at("rows").get<int>(),
                  j.at("cols").get<int>());
}

inline std::vector<std::string> path_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& v = j.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else {
    for (const auto& p : v) out.push_back(p.get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Environment overrides: FLOODROUTE_ELEVATION_MODE and
/// FLOODROUTE_ELEVATION_ENDPOINT replace the file's elevation settings.
inline Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                               const EnvLookup& env = system_env) {
  Scenario s;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
  };
  try {
    s.name = doc.value("name", "scenario");
    const auto& elev = doc.at("elevation");
    s.elevation.mode = parse_elevation_mode(elev.value("mode", "raster"));
    if (elev.contains("path")) s.elevation.path = resolve(elev.at("path").get<std::string>());
    s.elevation.endpoint = elev.value("endpoint", "");
    if (elev.contains("grid")) s.elevation.grid = detail::grid_from_json(elev.at("grid"));

    for (const auto& p : detail::path_list(doc, "observations")) s.observation_files.push_back(resolve(p));
    for (const auto& p : detail::path_list(doc, "pole_pairs")) s.pole_pair_files.push_back(resolve(p));

    if (doc.contains("decay")) {
      const auto& d = doc.at("decay");
      s.decay.bandwidth_m = d.value("bandwidth_m", s.decay.bandwidth_m);
      s.decay.support_radius_factor = d.value("support_radius_factor", s.decay.support_radius_factor);
    }
    if (doc.contains("route_defaults")) {
      const auto& r = doc.at("route_defaults");
      s.route_defaults.max_depth_m = r.value("max_depth_m", s.route_defaults.max_depth_m);
      s.route_defaults.heuristic = parse_heuristic(r.value("heuristic", "octile"));
      s.route_defaults.depth_penalty_per_m =
          r.value("depth_penalty_per_m", s.route_defaults.depth_penalty_per_m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::validation_error, std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::validation_error, std::string("scenario: ") + e.what());
  }

  if (auto mode = env("FLOODROUTE_ELEVATION_MODE")) s.elevation.mode = parse_elevation_mode(*mode);
  if (auto endpoint = env("FLOODROUTE_ELEVATION_ENDPOINT")) s.elevation.endpoint = *endpoint;

  validate(s.decay);
  if (!(s.route_defaults.max_depth_m >= 0.0) || !(s.route_defaults.depth_penalty_per_m >= 0.0)) {
    throw Error(Errc::validation_error, "scenario: route defaults must be >= 0");
  }
  auto must_exist = [](const std::string& p, const char* what) {
    if (!std::filesystem::exists(p)) {
      throw Error(Errc::io_error, std::string("scenario: ") + what + " '" + p + "' does not exist");
    }
  };
  switch (s.elevation.mode) {
    case ElevationMode::raster: must_exist(s.elevation.path, "elevation raster"); break;
    case ElevationMode::recorded:
      must_exist(s.elevation.path, "recorded elevation fixture");
      [[fallthrough]];
    case ElevationMode::remote:
      if (!s.elevation.grid) throw Error(Errc::validation_error, "scenario: elevation.grid required");
      if (s.elevation.mode == ElevationMode::remote && s.elevation.endpoint.empty()) {
        throw Error(Errc::validation_error, "scenario: remote elevation needs an endpoint");
      }
      break;
  }
  for (const auto& p : s.observation_files) must_exist(p, "observation file");
  for (const auto& p : s.pole_pair_files) must_exist(p, "pole-pair file");
  return s;
}

inline Scenario load_scenario(const std::string& path, const EnvLookup& env = system_env) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, "scenario '" + path + "': " + e.what());
  }
  return parse_scenario(doc, std::filesystem::path(path).parent_path(), env);
}

inline std::unique_ptr<ElevationProvider> make_elevation_provider(const ElevationSource& src) {
  switch (src.mode) {
    case ElevationMode::raster: return raster_elevation_provider(load_elevation_ascii(src.path));
    case ElevationMode::remote: return remote_elevation_client(src.endpoint);
    case ElevationMode::recorded:
      return std::make_unique<RemoteElevationClient>(
          RecordedElevationTransport::from_file(src.path),
          RemoteElevationOptions{.name = "recorded"});
  }
  throw Error(Errc::invalid_argument, "unknown elevation mode");
}

inline ElevationGrid load_elevation(const ElevationSource& src) {
  if (src.mode == ElevationMode::raster) return load_elevation_ascii(src.path);
  return sample_grid(*make_elevation_provider(src), *src.grid);
}

/// All observations a scenario references; pole pairs become depth estimates.
inline std::vector<DepthObservation> load_scenario_observations(const Scenario& s) {
  std::vector<DepthObservation> out;
  for (const auto& f : s.observation_files) {
    auto obs = load_observations(f);
    out.insert(out.end(), obs.begin(), obs.end());
  }
  for (const auto& f : s.pole_pair_files) {
    for (const auto& m : load_pole_pairs(f)) out.push_back(estimate_depth(m));
  }
  return out;
}

}  // namespace floodroute
