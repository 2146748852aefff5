#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "floodroute/depth.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/inundation.hpp"
#include "floodroute/raster_json.hpp"
#include "floodroute/routing.hpp"
#include "floodroute/scenario.hpp"

namespace floodroute {

/// One immutable engine state. Requests pin a snapshot at their start and
/// read nothing else; writers publish a fresh snapshot with version + 1.
struct Snapshot {
  std::uint64_t version = 0;
  std::shared_ptr<const ElevationGrid> elevation;
  std::shared_ptr<const std::vector<DepthObservation>> observations;
  DecayParams params;
  std::shared_ptr<const FloodRaster> raster;       // null before the first build
  std::shared_ptr<const std::string> raster_doc;   // serialized `raster`
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct EngineOptions {
  std::chrono::milliseconds request_timeout{5000};
  unsigned build_threads = 1;
  RouteDefaults route_defaults;
};

class Engine {
 public:
  Engine(ElevationGrid elevation, std::vector<DepthObservation> observations,
         DecayParams params, EngineOptions options = {})
      : options_(options) {
    validate(params);
    auto snap = std::make_shared<Snapshot>();
    snap->elevation = std::make_shared<const ElevationGrid>(std::move(elevation));
    snap->observations =
        std::make_shared<const std::vector<DepthObservation>>(std::move(observations));
    snap->params = params;
    current_ = std::move(snap);
  }

  static std::unique_ptr<Engine> from_scenario(const Scenario& s, EngineOptions options = {}) {
    options.route_defaults = s.route_defaults;
    return std::make_unique<Engine>(load_elevation(s.elevation), load_scenario_observations(s),
                                    s.decay, options);
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(publish_mutex_);
    return current_;
  }

  const EngineOptions& options() const { return options_; }

  // GET /health
  HttpReply health() const {
    const auto snap = snapshot();
    return json_reply(200, {{"status", "ok"}, {"snapshot_version", snap->version}});
  }

  // POST /observations
  HttpReply post_observations(std::string_view body) {
    nlohmann::json doc;
    if (!parse_body(body, doc, /*allow_empty=*/false)) {
      return problem(422, "invalid_json", "request body is not valid JSON");
    }
    if (!doc.is_array()) return problem(422, "validation_error", "expected an array of observations");
    if (doc.empty()) return problem(422, "validation_error", "observation array is empty");

    std::vector<DepthObservation> incoming;
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      try {
        incoming.push_back(observation_from_json(doc[i]));
      } catch (const std::exception& e) {
        errors.push_back("record " + std::to_string(i) + ": " + e.what());
      }
    }
    if (!errors.empty()) {
      return problem(422, "validation_error", "observation records failed validation", errors);
    }

    std::unique_lock writer(writer_mutex_, std::defer_lock);
    if (!writer.try_lock_for(options_.request_timeout)) return busy();
    const auto base = snapshot();
    auto merged = std::make_shared<std::vector<DepthObservation>>(*base->observations);
    merged->insert(merged->end(), incoming.begin(), incoming.end());
    std::shared_ptr<const Snapshot> next;
    try {
      next = rebuilt(*base, std::move(merged), base->params);
    } catch (const Error& e) {
      return problem(422, "validation_error", e.what());
    }
    publish(next);
    return json_reply(200, {{"accepted_count", incoming.size()},
                            {"snapshot_version", next->version}});
  }

  // POST /map/build
  HttpReply build_map(std::string_view body) {
    nlohmann::json doc;
    if (!parse_body(body, doc, /*allow_empty=*/true) || !(doc.is_object() || doc.is_null())) {
      return problem(422, "invalid_json", "request body must be a JSON object");
    }
    std::unique_lock writer(writer_mutex_, std::defer_lock);
    if (!writer.try_lock_for(options_.request_timeout)) return busy();
    const auto base = snapshot();
    DecayParams params = base->params;
    try {
      if (doc.is_object()) {
        if (doc.contains("bandwidth_m")) params.bandwidth_m = number_field(doc, "bandwidth_m");
        if (doc.contains("support_radius_factor")) {
          params.support_radius_factor = number_field(doc, "support_radius_factor");
        }
      }
      validate(params);
    } catch (const std::exception& e) {
      return problem(422, "validation_error", e.what());
    }
    std::shared_ptr<const Snapshot> next;
    try {
      next = rebuilt(*base, base->observations, params);
    } catch (const Error& e) {
      return problem(422, "validation_error", e.what());
    }
    publish(next);
    const auto& r = *next->raster;
    std::size_t flooded = 0;
    for (double d : r.depth_m.values()) flooded += d > 0.0 ? 1 : 0;
    return json_reply(200, {{"rows", r.spec.rows()},
                            {"cols", r.spec.cols()},
                            {"cell_size_m", r.spec.cell_size_m()},
                            {"max_depth_m", r.max_depth()},
                            {"flooded_cell_count", flooded},
                            {"snapshot_version", next->version}});
  }

  // GET /map/flood.geojson?max_depth_m=x
  HttpReply flood_geojson(std::optional<std::string> max_depth_param) const {
    const auto snap = snapshot();
    if (!snap->raster) return not_built(*snap);
    double threshold = 0.0;
    if (max_depth_param) {
      auto v = text::parse_double(*max_depth_param);
      if (!v || *v < 0.0) return problem(422, "validation_error", "max_depth_m must be a number >= 0");
      threshold = *v;
    }
    auto doc = export_flood_geojson(*snap->raster, threshold);
    doc["properties"] = {{"snapshot_version", snap->version}, {"max_depth_m", threshold}};
    return {200, doc.dump(), "application/geo+json"};
  }

  // GET /map/raster
  HttpReply raster() const {
    const auto snap = snapshot();
    if (!snap->raster) return not_built(*snap);
    return {200, *snap->raster_doc, "application/json"};
  }

  // POST /route
  HttpReply route(std::string_view body) const {
    const auto started = std::chrono::steady_clock::now();
    const auto snap = snapshot();
    nlohmann::json doc;
    if (!parse_body(body, doc, /*allow_empty=*/false) || !doc.is_object()) {
      return problem(422, "invalid_json", "request body must be a JSON object");
    }
    RouteRequest req;
    try {
      req.origin = point_field(doc, "origin");
      req.destination = point_field(doc, "destination");
      req.max_depth_m = doc.contains("max_depth_m") ? number_field(doc, "max_depth_m")
                                                    : options_.route_defaults.max_depth_m;
      req.heuristic = doc.contains("heuristic")
                          ? parse_heuristic(doc.at("heuristic").get<std::string>())
                          : options_.route_defaults.heuristic;
      req.depth_penalty_per_m = doc.contains("depth_penalty_per_m")
                                    ? number_field(doc, "depth_penalty_per_m")
                                    : options_.route_defaults.depth_penalty_per_m;
      if (!(req.max_depth_m >= 0.0)) throw Error(Errc::invalid_argument, "max_depth_m must be >= 0");
      if (!(req.depth_penalty_per_m >= 0.0)) {
        throw Error(Errc::invalid_argument, "depth_penalty_per_m must be >= 0");
      }
    } catch (const std::exception& e) {
      return problem(422, "validation_error", e.what());
    }
    if (!snap->raster) return not_built(*snap);

    SearchOptions search;
    search.deadline = started + options_.request_timeout;
    const RouteResult result = astar(req, *snap->raster, search);
    if (!result) {
      if (result.reason == NoRouteReason::timed_out) {
        return problem(503, "timeout", "route search exceeded the request timeout");
      }
      auto body_j = problem_json(409, "no_route", "no passable route",
                                 std::string(to_string(result.reason)));
      body_j["reason"] = to_string(result.reason);
      body_j["snapshot_version"] = snap->version;
      return {409, body_j.dump(), "application/problem+json"};
    }
    auto feature = route_to_geojson(*result.route, snap->raster->spec);
    feature["properties"]["snapshot_version"] = snap->version;
    feature["properties"]["heuristic"] = to_string(req.heuristic);
    feature["properties"]["max_depth_m"] = req.max_depth_m;
    feature["properties"]["depth_penalty_per_m"] = req.depth_penalty_per_m;
    return {200, feature.dump(), "application/geo+json"};
  }

  static HttpReply problem(int status, std::string_view code, const std::string& detail,
                           const std::vector<std::string>& errors = {}) {
    auto j = problem_json(status, code, title_for(status), detail);
    if (!errors.empty()) j["errors"] = errors;
    return {status, j.dump(), "application/problem+json"};
  }

 private:
  static nlohmann::json problem_json(int status, std::string_view code, const std::string& title,
                                     const std::string& detail) {
    return {{"type", "about:blank"}, {"title", title}, {"status", status},
            {"code", code},          {"detail", detail}};
  }

  static std::string title_for(int status) {
    switch (status) {
      case 404: return "Not Found";
      case 409: return "Conflict";
      case 422: return "Unprocessable Entity";
      case 503: return "Service Unavailable";
      default: return "Error";
    }
  }

  static HttpReply json_reply(int status, const nlohmann::json& j) { return {status, j.dump()}; }

  static HttpReply busy() {
    return problem(503, "busy", "another map update is in progress; retry later");
  }

  static HttpReply not_built(const Snapshot& snap) {
    auto j = problem_json(409, "map_not_built", title_for(409),
                          "no flood raster yet; POST /map/build or /observations first");
    j["snapshot_version"] = snap.version;
    return {409, j.dump(), "application/problem+json"};
  }

  static bool parse_body(std::string_view body, nlohmann::json& out, bool allow_empty) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      out = nullptr;
      return allow_empty;
    }
    try {
      out = nlohmann::json::parse(body);
      return true;
    } catch (const nlohmann::json::exception&) {
      return false;
    }
  }

  static double number_field(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(Errc::invalid_argument, std::string(key) + " must be a number");
    return v.get<double>();
  }

  static GeoPoint point_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_object()) {
      throw Error(Errc::invalid_argument, std::string(key) + " must be an object {lat, lon}");
    }
    const auto& p = j.at(key);
    return make_geo_point(number_field(p, "lat"), number_field(p, "lon"));
  }

  static DepthObservation observation_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::invalid_argument, "not an object");
    DepthObservation o;
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
      throw Error(Errc::invalid_argument, "id must be a non-empty string");
    }
    o.id = j.at("id").get<std::string>();
    o.location = make_geo_point(number_field(j, "lat"), number_field(j, "lon"));
    o.depth_m = number_field(j, "depth_m");
    if (!j.contains("timestamp") || !j.at("timestamp").is_string()) {
      throw Error(Errc::invalid_argument, "timestamp must be an RFC 3339 string");
    }
    o.timestamp = parse_rfc3339(j.at("timestamp").get<std::string>());
    o.source = ObservationSource::direct;
    validate(o);
    return o;
  }

  std::shared_ptr<const Snapshot> rebuilt(
      const Snapshot& base, std::shared_ptr<const std::vector<DepthObservation>> observations,
      const DecayParams& params) const {
    auto next = std::make_shared<Snapshot>();
    next->version = base.version + 1;
    next->elevation = base.elevation;
    next->observations = std::move(observations);
    next->params = params;
    auto raster = std::make_shared<FloodRaster>(build_flood_raster(
        *next->observations, *next->elevation, params, {options_.build_threads}));
    next->raster_doc = std::make_shared<const std::string>(format_raster_json(*raster));
    next->raster = std::move(raster);
    return next;
  }

  void publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(publish_mutex_);
    current_ = std::move(next);
  }

  EngineOptions options_;
  mutable std::mutex publish_mutex_;
  std::shared_ptr<const Snapshot> current_;
  std::timed_mutex writer_mutex_;
};

/// Registers the engine's endpoints on an httplib server.
inline void mount(httplib::Server& server, Engine& engine) {
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(reply.body, reply.content_type);
  };
  server.Get("/health", [&engine, send](const httplib::Request&, httplib::Response& res) {
    send(res, engine.health());
  });
  server.Post("/observations", [&engine, send](const httplib::Request& req, httplib::Response& res) {
    send(res, engine.post_observations(req.body));
  });
  server.Post("/map/build", [&engine, send](const httplib::Request& req, httplib::Response& res) {
    send(res, engine.build_map(req.body));
  });
  server.Get("/map/flood.geojson", [&engine, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> threshold;
    if (req.has_param("max_depth_m")) threshold = req.get_param_value("max_depth_m");
    send(res, engine.flood_geojson(threshold));
  });
  server.Get("/map/raster", [&engine, send](const httplib::Request&, httplib::Response& res) {
    send(res, engine.raster());
  });
  server.Post("/route", [&engine, send](const httplib::Request& req, httplib::Response& res) {
    send(res, engine.route(req.body));
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.set_exception_handler(
      [send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        send(res, Engine::problem(500, "internal_error", what));
      });
  const auto timeout = engine.options().request_timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  server.set_read_timeout(secs.count(), usecs.count());
  server.set_write_timeout(secs.count(), usecs.count());
}

}  // namespace floodroute
