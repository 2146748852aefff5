#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "floodroute/depth.hpp"
#include "floodroute/elevation.hpp"
#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/time.hpp"

namespace floodroute {

/// Gaussian kernel bandwidth and the support cutoff, in bandwidths.
struct DecayParams {
  double bandwidth_m = 100.0;
  double support_radius_factor = 3.0;

  double support_radius_m() const { return bandwidth_m * support_radius_factor; }

  friend bool operator==(const DecayParams&, const DecayParams&) = default;
};

inline void validate(const DecayParams& p) {
  if (!(std::isfinite(p.bandwidth_m) && p.bandwidth_m > 0.0)) {
    throw Error(Errc::invalid_argument, "bandwidth_m must be > 0");
  }
  if (!(std::isfinite(p.support_radius_factor) && p.support_radius_factor > 0.0)) {
    throw Error(Errc::invalid_argument, "support_radius_factor must be > 0");
  }
}

/// Estimated floodwater depth per cell. Cells without terrain data hold depth
/// 0 and are flagged in `nodata`; routing treats them as impassable.
struct FloodRaster {
  GridSpec spec;
  Grid<double> depth_m;
  Grid<std::uint8_t> nodata;
  Timestamp generated_at{};
  DecayParams params;

  bool is_nodata(Cell c) const { return nodata[c] != 0; }
  double depth(Cell c) const { return depth_m[c]; }

  double max_depth() const {
    double m = 0.0;
    for (double d : depth_m.values()) m = std::max(m, d);
    return m;
  }

  friend bool operator==(const FloodRaster&, const FloodRaster&) = default;
};

inline void validate(const FloodRaster& r) {
  if (r.depth_m.spec() != r.spec || r.nodata.spec() != r.spec ||
      r.depth_m.size() != r.spec.size() || r.nodata.size() != r.spec.size()) {
    throw Error(Errc::invalid_argument, "flood raster layers do not match the grid");
  }
  for (std::size_t i = 0; i < r.depth_m.size(); ++i) {
    if (!(std::isfinite(r.depth_m[i]) && r.depth_m[i] >= 0.0)) {
      throw Error(Errc::invalid_argument,
                  "flood depth at cell index " + std::to_string(i) +
                      " is negative or non-finite");
    }
  }
  validate(r.params);
}

/// Depth contributed by one observation at `target`: the Gaussian-decayed
/// observed depth plus the terrain drop from the observation (I0) to the
/// target (Ij), clamped at zero. Exactly zero beyond the support radius.
inline double decay_depth_at(const DepthObservation& obs, GeoPoint target,
                             double obs_elevation_m, double target_elevation_m,
                             const DecayParams& params) {
  const double d = haversine_distance(obs.location, target);
  if (d > params.support_radius_m()) return 0.0;
  const double u = d / params.bandwidth_m;
  const double depth = obs.depth_m * std::exp(-0.5 * u * u) +
                       (obs_elevation_m - target_elevation_m);
  return std::max(0.0, depth);
}

struct BuildOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
};

namespace detail {

struct PreparedObservation {
  const DepthObservation* obs;
  double elevation_m;
  int row_lo, row_hi, col_lo, col_hi;  // inclusive cell window
};

inline void fuse_rows(const std::vector<PreparedObservation>& prepared,
                      const ElevationGrid& elev, const DecayParams& params,
                      int row_begin, int row_end, FloodRaster& out) {
  const GridSpec& spec = elev.spec();
  for (const auto& p : prepared) {
    const int r0 = std::max(p.row_lo, row_begin);
    const int r1 = std::min(p.row_hi, row_end - 1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = p.col_lo; c <= p.col_hi; ++c) {
        const Cell cell{r, c};
        if (elev.is_nodata(cell)) continue;
        const double v = decay_depth_at(*p.obs, cell_center(spec, cell),
                                        p.elevation_m, elev.at(cell), params);
        double& slot = out.depth_m[cell];
        if (v > slot) slot = v;
      }
    }
  }
}

}  // namespace detail

/// Fuses all observations into one raster: each cell takes the maximum of the
/// per-observation decayed depths. Each observation's own elevation is
/// sampled bilinearly from `elev`. The result does not depend on thread count
/// or observation order.
inline FloodRaster build_flood_raster(std::span<const DepthObservation> observations,
                                      const ElevationGrid& elev,
                                      const DecayParams& params,
                                      BuildOptions options = {}) {
  validate(params);
  if (observations.empty()) {
    throw Error(Errc::invalid_argument, "at least one observation is required");
  }
  const GridSpec& spec = elev.spec();

  std::vector<detail::PreparedObservation> prepared;
  prepared.reserve(observations.size());
  Timestamp generated_at = observations.front().timestamp;
  // Window half-width in cells; the slack absorbs the gap between the local
  // projection and haversine distance. Exact cutoff happens per cell.
  const double radius_cells =
      params.support_radius_m() * 1.01 / spec.cell_size_m() + 2.0;
  for (const auto& obs : observations) {
    validate(obs);
    double elevation_m;
    try {
      elevation_m = bilinear_elevation(elev, obs.location);
    } catch (const Error& e) {
      throw Error(Errc::not_covered,
                  "observation '" + obs.id + "': " + std::string(e.what()));
    }
    generated_at = std::max(generated_at, obs.timestamp);
    const double x = (obs.location.lon - spec.origin().lon) *
                     spec.meters_per_deg_lon() / spec.cell_size_m();
    const double y = (obs.location.lat - spec.origin().lat) *
                     spec.meters_per_deg_lat() / spec.cell_size_m();
    auto clamp_index = [](double v, int hi) {
      return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi)));
    };
    prepared.push_back({&obs, elevation_m,
                        clamp_index(std::floor(y - radius_cells), spec.rows() - 1),
                        clamp_index(std::ceil(y + radius_cells), spec.rows() - 1),
                        clamp_index(std::floor(x - radius_cells), spec.cols() - 1),
                        clamp_index(std::ceil(x + radius_cells), spec.cols() - 1)});
  }

  FloodRaster out{spec, Grid<double>(spec, 0.0), Grid<std::uint8_t>(spec, 0),
                  generated_at, params};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    out.nodata[i] = elev.is_nodata(i) ? 1 : 0;
  }

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency()
                                          : options.threads;
  threads = std::clamp(threads, 1u, static_cast<unsigned>(spec.rows()));
  if (threads == 1) {
    detail::fuse_rows(prepared, elev, params, 0, spec.rows(), out);
    return out;
  }
  std::vector<std::jthread> workers;
  const int rows = spec.rows();
  for (unsigned t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(rows) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(rows) * (t + 1) / threads);
    workers.emplace_back([&, begin, end] {
      detail::fuse_rows(prepared, elev, params, begin, end, out);
    });
  }
  workers.clear();
  return out;
}

/// 1 where a vehicle cannot enter: depth strictly above `max_depth_m`, or no
/// terrain data.
inline Grid<std::uint8_t> threshold_mask(const FloodRaster& raster,
                                         double max_depth_m) {
  if (std::isnan(max_depth_m) || max_depth_m < 0.0) {
    throw Error(Errc::invalid_argument, "max_depth_m must be >= 0");
  }
  Grid<std::uint8_t> mask(raster.spec, 0);
  for (std::size_t i = 0; i < raster.spec.size(); ++i) {
    mask[i] = (raster.nodata[i] != 0 || raster.depth_m[i] > max_depth_m) ? 1 : 0;
  }
  return mask;
}

/// One rectangle Polygon per flooded cell (depth above the threshold),
/// counter-clockwise from the southwest corner, lon/lat order.
inline nlohmann::json export_flood_geojson(const FloodRaster& raster,
                                           double max_depth_m) {
  if (std::isnan(max_depth_m) || max_depth_m < 0.0) {
    throw Error(Errc::invalid_argument, "max_depth_m must be >= 0");
  }
  const GridSpec& spec = raster.spec;
  const double half_lat = spec.cell_size_deg_lat() / 2.0;
  const double half_lon = spec.cell_size_deg_lon() / 2.0;
  auto features = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (raster.nodata[i] != 0 || !(raster.depth_m[i] > max_depth_m)) continue;
    const Cell cell = spec.cell_at(i);
    const GeoPoint c = cell_center(spec, cell);
    const double w = c.lon - half_lon, e = c.lon + half_lon;
    const double s = c.lat - half_lat, n = c.lat + half_lat;
    features.push_back({
        {"type", "Feature"},
        {"geometry",
         {{"type", "Polygon"},
          {"coordinates",
           nlohmann::json::array(
               {nlohmann::json::array({{w, s}, {e, s}, {e, n}, {w, n}, {w, s}})})}}},
        {"properties",
         {{"depth_m", raster.depth_m[i]}, {"row", cell.row}, {"col", cell.col}}},
    });
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace floodroute
