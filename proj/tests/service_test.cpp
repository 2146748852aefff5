#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "floodroute/floodroute.hpp"
#include "test_support.hpp"

namespace floodroute {
namespace {

using nlohmann::json;

const std::string kData = FLOODROUTE_TEST_DATA;

std::unique_ptr<Engine> fixture_engine(EngineOptions options = {}) {
  return Engine::from_scenario(load_scenario(kData + "/scenario.json", [](const char*) {
                                 return std::optional<std::string>{};
                               }),
                               options);
}

std::uint64_t version_of(const Engine& e) { return e.snapshot()->version; }

json point(const GeoPoint& p) { return {{"lat", p.lat}, {"lon", p.lon}}; }

std::string route_body(const GridSpec& spec, Cell from, Cell to, json extra = json::object()) {
  json j = {{"origin", point(cell_center(spec, from))}, {"destination", point(cell_center(spec, to))}};
  j.update(extra);
  return j.dump();
}

TEST(Engine, HealthReportsVersion) {
  auto engine = fixture_engine();
  EXPECT_EQ(json::parse(engine->health().body)["snapshot_version"], 0);
  ASSERT_EQ(engine->build_map("").status, 200);
  const auto h = json::parse(engine->health().body);
  EXPECT_EQ(h["status"], "ok");
  EXPECT_EQ(h["snapshot_version"], 1);
}

TEST(Engine, ReadsBeforeFirstBuildAreConflicts) {
  auto engine = fixture_engine();
  const auto spec = engine->snapshot()->elevation->spec();
  for (const auto& reply :
       {engine->raster(), engine->flood_geojson(std::nullopt), engine->route(route_body(spec, {0, 0}, {1, 1}))}) {
    EXPECT_EQ(reply.status, 409);
    EXPECT_EQ(json::parse(reply.body)["code"], "map_not_built");
  }
}

TEST(Engine, BuildSummary) {
  auto engine = fixture_engine();
  const auto reply = engine->build_map(R"({"bandwidth_m": 40})");
  ASSERT_EQ(reply.status, 200) << reply.body;
  const auto j = json::parse(reply.body);
  EXPECT_EQ(j["rows"], 40);
  EXPECT_EQ(j["cols"], 40);
  EXPECT_EQ(j["cell_size_m"], 10.0);
  EXPECT_NEAR(j["max_depth_m"].get<double>(), 0.9, 1e-12);
  EXPECT_GT(j["flooded_cell_count"].get<int>(), 0);
  EXPECT_EQ(j["snapshot_version"], 1);
}

TEST(Engine, InvalidBuildParamsLeaveStateAlone) {
  auto engine = fixture_engine();
  for (const char* body : {R"({"bandwidth_m": 0})", R"({"bandwidth_m": -5})",
                           R"({"support_radius_factor": 0})", R"({"bandwidth_m": "wide"})", "[1,2]",
                           "{oops"}) {
    const auto reply = engine->build_map(body);
    EXPECT_EQ(reply.status, 422) << body;
    EXPECT_EQ(reply.content_type, "application/problem+json");
    const auto j = json::parse(reply.body);
    EXPECT_EQ(j["status"], 422);
    EXPECT_TRUE(j.contains("title") && j.contains("detail") && j.contains("type"));
  }
  EXPECT_EQ(version_of(*engine), 0u);
}

TEST(Engine, IdenticalBuildsAreByteIdentical) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("{}").status, 200);
  const std::string first = engine->raster().body;
  ASSERT_EQ(engine->build_map("{}").status, 200);
  EXPECT_EQ(engine->raster().body, first);
  EXPECT_EQ(version_of(*engine), 2u);

  EngineOptions threaded;
  threaded.build_threads = 4;
  auto other = fixture_engine(threaded);
  ASSERT_EQ(other->build_map("").status, 200);
  EXPECT_EQ(other->raster().body, first);
  EXPECT_EQ(parse_raster_json(first), *engine->snapshot()->raster);
}

TEST(Engine, ObservationIngest) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("").status, 200);
  const auto spec = engine->snapshot()->elevation->spec();
  const GeoPoint p = cell_center(spec, {5, 30});
  const json batch = json::array({{{"id", "new-1"}, {"lat", p.lat}, {"lon", p.lon},
                                   {"depth_m", 1.4}, {"timestamp", "2017-08-31T09:00:00-05:00"}}});
  const auto reply = engine->post_observations(batch.dump());
  ASSERT_EQ(reply.status, 200) << reply.body;
  const auto j = json::parse(reply.body);
  EXPECT_EQ(j["accepted_count"], 1);
  EXPECT_EQ(j["snapshot_version"], 2);
  const auto snap = engine->snapshot();
  EXPECT_EQ(snap->observations->size(), 7u);
  EXPECT_NEAR(snap->raster->max_depth(), 1.4, 1e-12);
  EXPECT_EQ(json::parse(*snap->raster_doc)["generated_at"], "2017-08-31T14:00:00Z");
}

TEST(Engine, InvalidObservationsAreRejectedWhole) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("").status, 200);
  const json batch = json::array({
      {{"id", "ok"}, {"lat", 29.761}, {"lon", -95.368}, {"depth_m", 0.2}, {"timestamp", "2017-08-30T10:00:00Z"}},
      {{"id", "neg"}, {"lat", 29.761}, {"lon", -95.368}, {"depth_m", -0.2}, {"timestamp", "2017-08-30T10:00:00Z"}},
      {{"id", "lat"}, {"lat", 129.0}, {"lon", -95.368}, {"depth_m", 0.2}, {"timestamp", "2017-08-30T10:00:00Z"}},
      {{"id", "time"}, {"lat", 29.761}, {"lon", -95.368}, {"depth_m", 0.2}, {"timestamp", "noon"}},
      {{"lat", 29.761}, {"lon", -95.368}, {"depth_m", 0.2}, {"timestamp", "2017-08-30T10:00:00Z"}},
  });
  const auto reply = engine->post_observations(batch.dump());
  EXPECT_EQ(reply.status, 422);
  const auto j = json::parse(reply.body);
  ASSERT_EQ(j["errors"].size(), 4u);
  EXPECT_EQ(j["errors"][0].get<std::string>().rfind("record 1:", 0), 0u);
  EXPECT_EQ(version_of(*engine), 1u);
  EXPECT_EQ(engine->snapshot()->observations->size(), 6u);

  for (const char* body : {"[]", "{}", "", "not json"}) {
    EXPECT_EQ(engine->post_observations(body).status, 422) << body;
  }
  EXPECT_EQ(version_of(*engine), 1u);
}

TEST(Engine, RouteMatchesOracle) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("").status, 200);
  const auto snap = engine->snapshot();
  const auto& spec = snap->raster->spec;
  const auto reply = engine->route(route_body(spec, {20, 2}, {20, 37}));
  ASSERT_EQ(reply.status, 200) << reply.body;
  EXPECT_EQ(reply.content_type, "application/geo+json");
  const auto j = json::parse(reply.body);
  EXPECT_EQ(j["type"], "Feature");
  EXPECT_EQ(j["geometry"]["type"], "LineString");
  const auto& props = j["properties"];
  EXPECT_EQ(props["heuristic"], "octile");
  EXPECT_EQ(props["max_depth_m"], 0.3);
  EXPECT_EQ(props["snapshot_version"], 1);
  const double oracle = testing::oracle_route_cost(*snap->raster, {20, 2}, {20, 37}, 0.3);
  EXPECT_NEAR(props["total_cost"].get<double>(), oracle, 1e-9);
  // Straight line would be 35; the flooded band forces a detour.
  EXPECT_GT(oracle, 35.0 + 1e-6);
}

TEST(Engine, RouteFailures) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("").status, 200);
  const auto& spec = engine->snapshot()->raster->spec;

  auto no_route = [&](const std::string& body) {
    const auto reply = engine->route(body);
    EXPECT_EQ(reply.status, 409) << reply.body;
    const auto j = json::parse(reply.body);
    EXPECT_EQ(j["code"], "no_route");
    EXPECT_EQ(j["snapshot_version"], 1);
    return j["reason"].get<std::string>();
  };
  EXPECT_EQ(no_route(route_body(spec, {20, 2}, {20, 20})), "destination_flooded");
  EXPECT_EQ(no_route(route_body(spec, {20, 20}, {20, 2})), "origin_flooded");
  EXPECT_EQ(no_route(json{{"origin", {{"lat", 10.0}, {"lon", 10.0}}},
                          {"destination", point(cell_center(spec, {0, 0}))}}
                         .dump()),
            "outside_footprint");
  EXPECT_EQ(no_route(route_body(spec, {20, 2}, {20, 37}, {{"max_depth_m", 0.0}})), "disconnected");

  for (const std::string& body :
       {std::string("{}"), std::string("[]"), route_body(spec, {0, 0}, {1, 1}, {{"heuristic", "euclid"}}),
        route_body(spec, {0, 0}, {1, 1}, {{"max_depth_m", -1}}),
        route_body(spec, {0, 0}, {1, 1}, {{"depth_penalty_per_m", "x"}}),
        json{{"origin", {{"lat", 95.0}, {"lon", 0.0}}}, {"destination", {{"lat", 0.0}, {"lon", 0.0}}}}.dump()}) {
    EXPECT_EQ(engine->route(body).status, 422) << body;
  }
}

TEST(Engine, RouteTimeout) {
  const auto spec = testing::test_spec(300, 300);
  std::vector<DepthObservation> obs{{"o", cell_center(spec, {150, 150}), 0.1,
                                     parse_rfc3339("2017-08-30T00:00:00Z"), ObservationSource::direct}};
  EngineOptions options;
  options.request_timeout = std::chrono::milliseconds(0);
  Engine engine(testing::flat_elevation(spec), obs, {}, options);
  ASSERT_EQ(engine.build_map("").status, 200);
  const auto reply = engine.route(route_body(spec, {0, 0}, {299, 299}, {{"heuristic", "zero"}}));
  EXPECT_EQ(reply.status, 503);
  EXPECT_EQ(json::parse(reply.body)["code"], "timeout");
}

TEST(Engine, ConcurrentWritersGetBusy) {
  const auto spec = testing::test_spec(400, 400);
  std::vector<DepthObservation> obs;
  for (int i = 0; i < 200; ++i) {
    obs.push_back({"o" + std::to_string(i), cell_center(spec, {i * 2, (i * 37) % 400}), 0.5,
                   parse_rfc3339("2017-08-30T00:00:00Z"), ObservationSource::direct});
  }
  EngineOptions options;
  options.request_timeout = std::chrono::milliseconds(1);
  Engine engine(testing::flat_elevation(spec), obs, {100.0, 3.0}, options);
  std::atomic<int> ok{0}, busy{0};
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&] {
        const auto reply = engine.build_map("");
        if (reply.status == 200) ++ok;
        if (reply.status == 503 && json::parse(reply.body)["code"] == "busy") ++busy;
      });
    }
  }
  EXPECT_GE(ok, 1);
  EXPECT_GE(busy, 1);
  EXPECT_EQ(ok + busy, 4);
  EXPECT_EQ(version_of(engine), static_cast<std::uint64_t>(ok.load()));
}

TEST(Engine, FloodGeoJsonThreshold) {
  auto engine = fixture_engine();
  ASSERT_EQ(engine->build_map("").status, 200);
  const auto all = json::parse(engine->flood_geojson(std::nullopt).body);
  const auto deep = json::parse(engine->flood_geojson("0.5").body);
  EXPECT_EQ(all["type"], "FeatureCollection");
  EXPECT_GT(all["features"].size(), deep["features"].size());
  EXPECT_GT(deep["features"].size(), 0u);
  for (const auto& f : deep["features"]) EXPECT_GT(f["properties"]["depth_m"].get<double>(), 0.5);
  EXPECT_EQ(deep["properties"]["snapshot_version"], 1);
  EXPECT_EQ(engine->flood_geojson("-1").status, 422);
  EXPECT_EQ(engine->flood_geojson("deep").status, 422);
}

TEST(Engine, SnapshotIsolationUnderConcurrentIngest) {
  const auto outcome = testing::snapshot_isolation_stress(40, 4, 25, 99);
  for (const auto& f : outcome.failures) ADD_FAILURE() << f;
  EXPECT_EQ(outcome.routes_checked, 100u);
  EXPECT_EQ(outcome.final_version, 41u);
  EXPECT_GE(outcome.distinct_versions, 2u);
}

// ---- over HTTP ------------------------------------------------------------

class HttpServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    engine_ = fixture_engine();
    mount(server_, *engine_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::unique_ptr<Engine> engine_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpServiceTest, EndToEnd) {
  auto res = client_->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

  res = client_->Post("/route", "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/problem+json");

  res = client_->Post("/map/build", R"({"bandwidth_m": 40})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);

  res = client_->Get("/map/flood.geojson?max_depth_m=0.3");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/geo+json");

  res = client_->Get("/map/raster");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, *engine_->snapshot()->raster_doc);

  const auto& spec = engine_->snapshot()->raster->spec;
  res = client_->Post("/route", route_body(spec, {20, 2}, {20, 37}), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["properties"]["snapshot_version"], 1);

  res = client_->Post("/route", route_body(spec, {20, 2}, {20, 20}), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body)["reason"], "destination_flooded");

  const GeoPoint p = cell_center(spec, {1, 1});
  const json batch = json::array({{{"id", "h"}, {"lat", p.lat}, {"lon", p.lon}, {"depth_m", 0.4},
                                   {"timestamp", "2017-08-30T13:00:00Z"}}});
  res = client_->Post("/observations", batch.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(client_->Get("/health")->body)["snapshot_version"], 2);
}

TEST_F(HttpServiceTest, CorsPreflight) {
  auto res = client_->Options("/route");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_NE(res->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(HttpServiceTest, UnknownPathIs404) {
  auto res = client_->Get("/nope");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

}  // namespace
}  // namespace floodroute
