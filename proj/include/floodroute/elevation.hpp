#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"

namespace floodroute {

struct ProviderInfo {
  std::string name;
  std::optional<GridSpec> coverage;  // nullopt: coverage known only per query
  double resolution_m = 0.0;
};

/// Source of terrain elevations. Implementations return finite meters or
/// throw Error(Errc::not_covered); they must tolerate concurrent callers.
class ElevationProvider {
 public:
  virtual ~ElevationProvider() = default;

  virtual ProviderInfo info() const = 0;
  virtual double elevation_at(GeoPoint p) const = 0;

  virtual std::vector<double> elevations(std::span<const GeoPoint> points) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(elevation_at(p));
    return out;
  }
};

namespace detail {

// Snaps values within 1e-9 of an integer so that queries at cell centers hit
// the cell value exactly despite projection round-off.
inline double snap_to_integer(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace detail

/// Bilinear interpolation between the four cell centers around `p`. Points in
/// the outer half-cell band use the nearest edge row/column. Throws
/// not_covered outside the footprint or when a contributing cell is nodata.
inline double bilinear_elevation(const ElevationGrid& grid, GeoPoint p) {
  const GridSpec& spec = grid.spec();
  if (!point_to_cell(spec, p)) {
    throw Error(Errc::not_covered,
                "point (" + std::to_string(p.lat) + ", " +
                    std::to_string(p.lon) + ") outside elevation footprint");
  }
  const double x = (p.lon - spec.origin().lon) * spec.meters_per_deg_lon();
  const double y = (p.lat - spec.origin().lat) * spec.meters_per_deg_lat();
  const double fx = std::clamp(detail::snap_to_integer(x / spec.cell_size_m() - 0.5),
                               0.0, static_cast<double>(spec.cols() - 1));
  const double fy = std::clamp(detail::snap_to_integer(y / spec.cell_size_m() - 0.5),
                               0.0, static_cast<double>(spec.rows() - 1));
  const int c0 = static_cast<int>(std::floor(fx));
  const int r0 = static_cast<int>(std::floor(fy));
  const int c1 = std::min(c0 + 1, spec.cols() - 1);
  const int r1 = std::min(r0 + 1, spec.rows() - 1);
  const double tx = fx - c0;
  const double ty = fy - r0;

  const Cell corners[4] = {{r0, c0}, {r0, c1}, {r1, c0}, {r1, c1}};
  const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty,
                             tx * ty};
  double value = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (weights[i] == 0.0) continue;
    if (grid.is_nodata(corners[i])) {
      throw Error(Errc::not_covered,
                  "no elevation data at cell (" +
                      std::to_string(corners[i].row) + ", " +
                      std::to_string(corners[i].col) + ")");
    }
    value += weights[i] * grid.at(corners[i]);
  }
  return value;
}

class RasterElevationProvider final : public ElevationProvider {
 public:
  explicit RasterElevationProvider(std::shared_ptr<const ElevationGrid> grid)
      : grid_(std::move(grid)) {
    if (!grid_) throw Error(Errc::invalid_argument, "null elevation grid");
  }

  ProviderInfo info() const override {
    return {"raster", grid_->spec(), grid_->spec().cell_size_m()};
  }
  double elevation_at(GeoPoint p) const override {
    return bilinear_elevation(*grid_, p);
  }

 private:
  std::shared_ptr<const ElevationGrid> grid_;
};

inline std::unique_ptr<ElevationProvider> raster_elevation_provider(
    ElevationGrid grid) {
  return std::make_unique<RasterElevationProvider>(
      std::make_shared<const ElevationGrid>(std::move(grid)));
}

/// Materializes a provider onto a lattice by querying every cell center in
/// one batch. Cells the provider does not cover become nodata.
inline ElevationGrid sample_grid(const ElevationProvider& provider,
                                 const GridSpec& spec,
                                 double nodata = kDefaultNodata) {
  std::vector<GeoPoint> centers;
  centers.reserve(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    centers.push_back(cell_center(spec, spec.cell_at(i)));
  }
  std::vector<double> values;
  try {
    values = provider.elevations(centers);
  } catch (const Error& e) {
    if (e.code() != Errc::not_covered) throw;
    values.clear();
    values.reserve(centers.size());
    for (const auto& c : centers) {
      try {
        values.push_back(provider.elevation_at(c));
      } catch (const Error& inner) {
        if (inner.code() != Errc::not_covered) throw;
        values.push_back(nodata);
      }
    }
  }
  return ElevationGrid(spec, std::move(values), nodata);
}

}  // namespace floodroute
