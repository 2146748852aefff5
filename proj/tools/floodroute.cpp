// floodroute command-line front end.
//
// Exit codes: 0 success, 2 validation error, 3 no route, 4 I/O error.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "floodroute/floodroute.hpp"

namespace fr = floodroute;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoRoute = 3;
constexpr int kExitIo = 4;

int exit_code_for(fr::Errc code) {
  switch (code) {
    case fr::Errc::io_error:
    case fr::Errc::provider_unavailable:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

fr::GeoPoint parse_lat_lon(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw fr::Error(fr::Errc::invalid_argument, "expected lat,lon but got '" + s + "'");
  }
  auto lat = fr::text::parse_double(s.substr(0, comma));
  auto lon = fr::text::parse_double(s.substr(comma + 1));
  if (!lat || !lon) throw fr::Error(fr::Errc::invalid_argument, "expected lat,lon but got '" + s + "'");
  return fr::make_geo_point(*lat, *lon);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    fr::text::write_file(path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flood depth mapping and flood-aware routing"};
  app.require_subcommand(1);

  // depth
  std::string pairs_path, depth_out;
  auto* depth_cmd = app.add_subcommand("depth", "Convert pole-pair measurements to depth observations");
  depth_cmd->add_option("--pairs", pairs_path, "Pole-pair CSV")->required();
  depth_cmd->add_option("-o,--output", depth_out, "Observation CSV (default stdout)");

  // map
  std::vector<std::string> obs_paths, map_pair_paths;
  std::string dem_path, map_out;
  fr::DecayParams decay;
  unsigned threads = 1;
  auto* map_cmd = app.add_subcommand("map", "Build a flood-depth raster from observations");
  map_cmd->add_option("--obs", obs_paths, "Observation CSV (repeatable)");
  map_cmd->add_option("--pairs", map_pair_paths, "Pole-pair CSV (repeatable)");
  map_cmd->add_option("--dem", dem_path, "Esri ASCII elevation grid")->required();
  map_cmd->add_option("--bandwidth", decay.bandwidth_m, "Gaussian bandwidth in meters")
      ->default_val(100.0);
  map_cmd->add_option("--support-factor", decay.support_radius_factor,
                      "Influence cutoff in bandwidths")
      ->default_val(3.0);
  map_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->default_val(1);
  map_cmd->add_option("-o,--output", map_out, "Raster JSON (default stdout)");

  // route
  std::string route_map, from_s, to_s, heuristic_s = "octile", route_out;
  double max_depth = 0.3, penalty = 0.0;
  bool verbatim = false;
  auto* route_cmd = app.add_subcommand("route", "Find a passable route over a flood raster");
  route_cmd->add_option("--map", route_map, "Raster JSON")->required();
  route_cmd->add_option("--from", from_s, "Origin as lat,lon")->required();
  route_cmd->add_option("--to", to_s, "Destination as lat,lon")->required();
  route_cmd->add_option("--max-depth", max_depth, "Vehicle wade-depth threshold in meters")
      ->default_val(0.3);
  route_cmd->add_option("--heuristic", heuristic_s, "manhattan_paper | octile | zero")
      ->default_val("octile");
  route_cmd->add_option("--penalty", penalty, "Cost per meter of depth entered")->default_val(0.0);
  route_cmd->add_flag("--no-reparent", verbatim,
                      "Never lower the cost of a node already on the open list");
  route_cmd->add_option("-o,--output", route_out, "Route GeoJSON (default stdout)");

  // overlay
  std::string overlay_map, overlay_out;
  double overlay_depth = 0.0;
  auto* overlay_cmd = app.add_subcommand("overlay", "Export flooded cells as GeoJSON polygons");
  overlay_cmd->add_option("--map", overlay_map, "Raster JSON")->required();
  overlay_cmd->add_option("--max-depth", overlay_depth, "Cells deeper than this are exported")
      ->default_val(0.0);
  overlay_cmd->add_option("-o,--output", overlay_out, "GeoJSON (default stdout)");

  // eval
  std::string est_path, truth_path;
  auto* eval_cmd = app.add_subcommand("eval", "RMSE of depth estimates against ground truth");
  eval_cmd->add_option("--estimates", est_path, "CSV with id and depth_m (or depth_in)")->required();
  eval_cmd->add_option("--truth", truth_path, "CSV with id and depth_m (or depth_in)")->required();

  // serve
  std::string scenario_path, host = "0.0.0.0";
  int port = 8080;
  bool build_on_start = false;
  int timeout_ms = 5000;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  serve_cmd->add_option("--port", port, "Listen port")->default_val(8080);
  serve_cmd->add_option("--host", host, "Listen address")->default_val("0.0.0.0");
  serve_cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->default_val(5000);
  serve_cmd->add_option("--threads", threads, "Raster build threads (0 = all cores)")->default_val(1);
  serve_cmd->add_flag("--build", build_on_start, "Build the flood raster before listening");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*depth_cmd) {
      std::vector<fr::DepthObservation> obs;
      for (const auto& m : fr::load_pole_pairs(pairs_path)) obs.push_back(fr::estimate_depth(m));
      emit(depth_out, fr::format_observations_csv(obs));
      std::cerr << "estimated " << obs.size() << " depth observation(s)\n";
      return kExitOk;
    }

    if (*map_cmd) {
      std::vector<fr::DepthObservation> obs;
      for (const auto& p : obs_paths) {
        auto part = fr::load_observations(p);
        obs.insert(obs.end(), part.begin(), part.end());
      }
      for (const auto& p : map_pair_paths) {
        for (const auto& m : fr::load_pole_pairs(p)) obs.push_back(fr::estimate_depth(m));
      }
      const auto elev = fr::load_elevation_ascii(dem_path);
      const auto raster = fr::build_flood_raster(obs, elev, decay, {threads});
      emit(map_out, fr::format_raster_json(raster) + "\n");
      std::size_t flooded = 0;
      for (double d : raster.depth_m.values()) flooded += d > 0.0;
      std::cerr << "raster " << raster.spec.rows() << "x" << raster.spec.cols() << ", "
                << flooded << " flooded cell(s), max depth " << raster.max_depth() << " m\n";
      return kExitOk;
    }

    if (*route_cmd) {
      const auto raster = fr::load_raster_json(route_map);
      fr::RouteRequest req{parse_lat_lon(from_s), parse_lat_lon(to_s), max_depth,
                           fr::parse_heuristic(heuristic_s), penalty};
      fr::SearchOptions opts;
      opts.reparent_open = !verbatim;
      const auto result = fr::astar(req, raster, opts);
      if (!result) {
        std::cerr << "no route: " << fr::to_string(result.reason) << "\n";
        return kExitNoRoute;
      }
      emit(route_out, fr::route_to_geojson(*result.route, raster.spec).dump() + "\n");
      std::cerr << "route: " << result.route->cells.size() << " cells, cost "
                << result.route->total_cost << ", " << result.route->path_length_m << " m, "
                << result.route->expanded << " expanded\n";
      return kExitOk;
    }

    if (*overlay_cmd) {
      const auto raster = fr::load_raster_json(overlay_map);
      emit(overlay_out, fr::export_flood_geojson(raster, overlay_depth).dump() + "\n");
      return kExitOk;
    }

    if (*eval_cmd) {
      const auto est = fr::parse_depth_table_csv(fr::text::read_file(est_path));
      const auto truth = fr::parse_depth_table_csv(fr::text::read_file(truth_path));
      std::map<std::string, double> truth_by_id(truth.begin(), truth.end());
      std::vector<double> e, t;
      for (const auto& [id, v] : est) {
        auto it = truth_by_id.find(id);
        if (it == truth_by_id.end()) {
          throw fr::Error(fr::Errc::validation_error, "estimate '" + id + "' has no ground truth");
        }
        e.push_back(v);
        t.push_back(it->second);
      }
      const double err = fr::rmse(e, t);
      std::printf("pairs: %zu\nrmse_m: %.6f\nrmse_in: %.4f\n", e.size(), err,
                  fr::meters_to_inches(err));
      return kExitOk;
    }

    if (*serve_cmd) {
      const auto scenario = fr::load_scenario(scenario_path);
      fr::EngineOptions options;
      options.request_timeout = std::chrono::milliseconds(timeout_ms);
      options.build_threads = threads;
      auto engine = fr::Engine::from_scenario(scenario, options);
      if (build_on_start) {
        const auto reply = engine->build_map("");
        if (reply.status != 200) {
          std::cerr << "initial build failed: " << reply.body << "\n";
          return kExitValidation;
        }
      }
      httplib::Server server;
      fr::mount(server, *engine);
      // Signals are taken synchronously here; the listener thread never sees them.
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      if (!server.bind_to_port(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return kExitIo;
      }
      std::cerr << "serving scenario '" << scenario.name << "' on " << host << ":" << port << "\n";
      std::jthread listener([&server] { server.listen_after_bind(); });
      int sig = 0;
      sigwait(&stop_signals, &sig);
      server.stop();
      return kExitOk;
    }
  } catch (const fr::Error& e) {
    std::cerr << "error [" << fr::to_string(e.code()) << "]: " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return exit_code_for(e.code());
  }
  return kExitOk;
}
