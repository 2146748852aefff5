#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "floodroute/csv.hpp"
#include "floodroute/elevation.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"

namespace floodroute {

// Wire contract, one POST per batch of at most 100 points:
//   request:  {"locations": [{"lat": .., "lon": ..}, ...]}
//   response: {"results":   [{"lat": .., "lon": .., "elevation_m": ..}, ...]}
// Results are positional. A null elevation_m means the point is not covered.

/// Moves one request body to the service and returns the response body.
/// Network-level failures throw Errc::provider_unavailable (retryable);
/// anything else is a protocol error.
class ElevationTransport {
 public:
  virtual ~ElevationTransport() = default;
  virtual std::string post(const std::string& body) = 0;
};

class HttpElevationTransport final : public ElevationTransport {
 public:
  explicit HttpElevationTransport(const std::string& url,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (base_.rfind("http://", 0) != 0) {
      throw Error(Errc::invalid_argument, "elevation endpoint must be an http:// URL: " + url);
    }
    timeout_ = timeout;
  }

  std::string post(const std::string& body) override {
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      throw Error(Errc::provider_unavailable,
                  "elevation request failed: " + httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
      throw Error(Errc::provider_unavailable,
                  "elevation service returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(Errc::protocol_error,
                  "elevation service returned HTTP " + std::to_string(res->status));
    }
    return res->body;
  }

 private:
  std::string base_;
  std::string path_;
  std::chrono::milliseconds timeout_{};
};

/// Replays stored responses. The fixture document may hold
///   "exchanges": [{"request": {...}, "response": <object or raw string>}]
/// matched on the exact request, and/or
///   "points": [{"lat", "lon", "elevation_m"}]
/// from which any request over known points is answered.
class RecordedElevationTransport final : public ElevationTransport {
 public:
  explicit RecordedElevationTransport(const nlohmann::json& fixture) {
    if (fixture.contains("exchanges")) {
      for (const auto& ex : fixture.at("exchanges")) {
        const auto& resp = ex.at("response");
        exchanges_[ex.at("request").dump()] =
            resp.is_string() ? resp.get<std::string>() : resp.dump();
      }
    }
    if (fixture.contains("points")) {
      for (const auto& p : fixture.at("points")) {
        points_[{p.at("lat").get<double>(), p.at("lon").get<double>()}] = p.at("elevation_m");
      }
    }
  }

  static std::unique_ptr<RecordedElevationTransport> from_file(const std::string& path) {
    try {
      return std::make_unique<RecordedElevationTransport>(
          nlohmann::json::parse(text::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, "recorded elevation fixture '" + path + "': " + e.what());
    }
  }

  std::string post(const std::string& body) override {
    ++calls_;
    const auto request = nlohmann::json::parse(body);
    if (auto it = exchanges_.find(request.dump()); it != exchanges_.end()) return it->second;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& loc : request.at("locations")) {
      const double lat = loc.at("lat").get<double>();
      const double lon = loc.at("lon").get<double>();
      auto it = points_.find({lat, lon});
      if (it == points_.end()) {
        throw Error(Errc::provider_unavailable, "no recorded response for this request");
      }
      results.push_back({{"lat", lat}, {"lon", lon}, {"elevation_m", it->second}});
    }
    return nlohmann::json{{"results", results}}.dump();
  }

  std::size_t calls() const { return calls_; }

 private:
  std::map<std::string, std::string> exchanges_;
  std::map<std::pair<double, double>, nlohmann::json> points_;
  std::atomic<std::size_t> calls_{0};
};

struct RemoteElevationOptions {
  std::size_t batch_size = 100;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{200};  // doubles after each failure
  std::string name = "remote";
};

/// Elevation provider backed by the JSON-over-HTTP contract above. Every
/// answer (including "not covered") is cached for the object's lifetime;
/// lookups and fetches are serialized, so each point is fetched at most once.
class RemoteElevationClient final : public ElevationProvider {
 public:
  explicit RemoteElevationClient(std::unique_ptr<ElevationTransport> transport,
                                 RemoteElevationOptions options = {})
      : transport_(std::move(transport)), options_(std::move(options)) {
    if (!transport_) throw Error(Errc::invalid_argument, "null elevation transport");
    if (options_.batch_size == 0 || options_.batch_size > 100) options_.batch_size = 100;
    if (options_.max_attempts < 1) options_.max_attempts = 1;
  }

  ProviderInfo info() const override { return {options_.name, std::nullopt, 0.0}; }

  double elevation_at(GeoPoint p) const override {
    return elevations(std::span<const GeoPoint>(&p, 1)).front();
  }

  std::vector<double> elevations(std::span<const GeoPoint> points) const override {
    std::lock_guard lock(mutex_);
    std::vector<GeoPoint> missing;
    std::set<Key> queued;
    for (const auto& p : points) {
      if (!is_valid(p)) throw Error(Errc::invalid_argument, "invalid query point");
      const Key k = key(p);
      if (!cache_.contains(k) && queued.insert(k).second) missing.push_back(p);
    }
    for (std::size_t i = 0; i < missing.size(); i += options_.batch_size) {
      const std::size_t n = std::min(options_.batch_size, missing.size() - i);
      fetch_batch(std::span<const GeoPoint>(missing.data() + i, n));
    }
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
      const double v = cache_.at(key(p));
      if (std::isnan(v)) {
        throw Error(Errc::not_covered, "elevation service has no data at (" +
                                           std::to_string(p.lat) + ", " +
                                           std::to_string(p.lon) + ")");
      }
      out.push_back(v);
    }
    return out;
  }

  /// Batches sent over the transport, counting retries.
  std::size_t requests_sent() const { return requests_sent_; }

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  static Key key(GeoPoint p) {
    return {std::bit_cast<std::uint64_t>(p.lat), std::bit_cast<std::uint64_t>(p.lon)};
  }

  void fetch_batch(std::span<const GeoPoint> batch) const {
    nlohmann::json locations = nlohmann::json::array();
    for (const auto& p : batch) locations.push_back({{"lat", p.lat}, {"lon", p.lon}});
    const std::string body = nlohmann::json{{"locations", locations}}.dump();

    std::string response;
    for (int attempt = 1;; ++attempt) {
      try {
        ++requests_sent_;
        response = transport_->post(body);
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::provider_unavailable) throw;
        if (attempt >= options_.max_attempts) {
          throw Error(Errc::provider_unavailable,
                      std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
        }
        std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
      }
    }

    auto protocol = [](const std::string& what) {
      return Error(Errc::protocol_error, "elevation response: " + what);
    };
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception&) {
      throw protocol("malformed JSON");
    }
    if (!doc.is_object() || !doc.contains("results") || !doc.at("results").is_array()) {
      throw protocol("missing 'results' array");
    }
    const auto& results = doc.at("results");
    if (results.size() != batch.size()) {
      throw protocol("expected " + std::to_string(batch.size()) + " results, got " +
                     std::to_string(results.size()));
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& r = results[i];
      if (!r.is_object() || !r.contains("elevation_m")) throw protocol("result without elevation_m");
      const auto& e = r.at("elevation_m");
      if (e.is_null()) {
        values.push_back(std::nan(""));
      } else if (e.is_number() && std::isfinite(e.get<double>())) {
        values.push_back(e.get<double>());
      } else {
        throw protocol("non-numeric elevation_m");
      }
      if (r.contains("lat") && r.contains("lon") && r.at("lat").is_number() &&
          r.at("lon").is_number()) {
        const GeoPoint echoed{r.at("lat").get<double>(), r.at("lon").get<double>()};
        if (std::abs(echoed.lat - batch[i].lat) > 1e-7 ||
            std::abs(echoed.lon - batch[i].lon) > 1e-7) {
          throw protocol("result " + std::to_string(i) + " does not match its request point");
        }
      }
    }
    for (std::size_t i = 0; i < batch.size(); ++i) cache_[key(batch[i])] = values[i];
  }

  std::unique_ptr<ElevationTransport> transport_;
  RemoteElevationOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<Key, double> cache_;
  mutable std::atomic<std::size_t> requests_sent_{0};
};

inline std::unique_ptr<RemoteElevationClient> remote_elevation_client(
    const std::string& url, RemoteElevationOptions options = {}) {
  return std::make_unique<RemoteElevationClient>(
      std::make_unique<HttpElevationTransport>(url), std::move(options));
}

}  // namespace floodroute
