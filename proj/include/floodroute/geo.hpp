#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floodroute/error.hpp"

namespace floodroute {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr std::size_t kDefaultMaxCells = 25'000'000;

/// WGS84 position in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_valid(GeoPoint p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

inline GeoPoint make_geo_point(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!is_valid(p)) {
    throw Error(Errc::invalid_argument,
                "coordinate out of range: lat=" + std::to_string(lat) +
                    " lon=" + std::to_string(lon));
  }
  return p;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Great-circle distance on a sphere of radius kEarthRadiusM.
inline double haversine_distance(GeoPoint a, GeoPoint b) {
  const double phi1 = deg_to_rad(a.lat);
  const double phi2 = deg_to_rad(b.lat);
  const double dphi = deg_to_rad(b.lat - a.lat);
  const double dlambda = deg_to_rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Regular lattice anchored at its southwest corner. Row 0 is the southern
/// edge, column 0 the western edge. Cell coordinates come from a local
/// equirectangular projection about the origin.
class GridSpec {
 public:
  GridSpec() = default;

  GridSpec(GeoPoint origin, double cell_size_m, int rows, int cols,
           std::size_t max_cells = kDefaultMaxCells)
      : origin_(origin), cell_size_m_(cell_size_m), rows_(rows), cols_(cols) {
    if (!is_valid(origin)) {
      throw Error(Errc::invalid_argument, "grid origin is not a valid point");
    }
    if (!(std::isfinite(cell_size_m) && cell_size_m > 0.0)) {
      throw Error(Errc::invalid_argument, "cell_size_m must be > 0");
    }
    if (rows <= 0 || cols <= 0) {
      throw Error(Errc::invalid_argument, "rows and cols must be > 0");
    }
    if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) >
        max_cells) {
      throw Error(Errc::invalid_argument,
                  "grid of " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " exceeds the cell cap of " +
                      std::to_string(max_cells));
    }
    if (std::abs(origin.lat) >= 89.0) {
      throw Error(Errc::invalid_argument,
                  "grid origin too close to a pole for local projection");
    }
  }

  GeoPoint origin() const { return origin_; }
  double cell_size_m() const { return cell_size_m_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  }
  double footprint_area_m2() const {
    return static_cast<double>(size()) * cell_size_m_ * cell_size_m_;
  }

  bool contains(Cell c) const {
    return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index / static_cast<std::size_t>(cols_)),
            static_cast<int>(index % static_cast<std::size_t>(cols_))};
  }

  double meters_per_deg_lat() const {
    return std::numbers::pi / 180.0 * kEarthRadiusM;
  }
  double meters_per_deg_lon() const {
    return meters_per_deg_lat() * std::cos(deg_to_rad(origin_.lat));
  }
  double cell_size_deg_lat() const { return cell_size_m_ / meters_per_deg_lat(); }
  double cell_size_deg_lon() const { return cell_size_m_ / meters_per_deg_lon(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  GeoPoint origin_{};
  double cell_size_m_ = 1.0;
  int rows_ = 0;
  int cols_ = 0;
};

/// Containing cell, or nullopt when `p` falls outside the grid footprint.
inline std::optional<Cell> point_to_cell(const GridSpec& spec, GeoPoint p) {
  if (!is_valid(p) || spec.size() == 0) return std::nullopt;
  const double x = (p.lon - spec.origin().lon) * spec.meters_per_deg_lon();
  const double y = (p.lat - spec.origin().lat) * spec.meters_per_deg_lat();
  const double col = std::floor(x / spec.cell_size_m());
  const double row = std::floor(y / spec.cell_size_m());
  if (row < 0.0 || col < 0.0 || row >= spec.rows() || col >= spec.cols()) {
    return std::nullopt;
  }
  return Cell{static_cast<int>(row), static_cast<int>(col)};
}

inline GeoPoint cell_center(const GridSpec& spec, Cell c) {
  if (!spec.contains(c)) {
    throw Error(Errc::out_of_bounds,
                "cell (" + std::to_string(c.row) + ", " +
                    std::to_string(c.col) + ") outside " +
                    std::to_string(spec.rows()) + "x" +
                    std::to_string(spec.cols()) + " grid");
  }
  return {spec.origin().lat + (c.row + 0.5) * spec.cell_size_deg_lat(),
          spec.origin().lon + (c.col + 0.5) * spec.cell_size_deg_lon()};
}

/// Dense row-major raster over a GridSpec.
template <typename T>
class Grid {
 public:
  Grid() = default;
  explicit Grid(GridSpec spec, T fill = T{})
      : spec_(std::move(spec)), values_(spec_.size(), fill) {}
  Grid(GridSpec spec, std::vector<T> values)
      : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_.size()) {
      throw Error(Errc::invalid_argument,
                  "grid has " + std::to_string(values_.size()) +
                      " values, expected " + std::to_string(spec_.size()));
    }
  }

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }

  T& operator[](Cell c) { return values_[spec_.index(c)]; }
  const T& operator[](Cell c) const { return values_[spec_.index(c)]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  GridSpec spec_;
  std::vector<T> values_;
};

inline constexpr double kDefaultNodata = -9999.0;

/// Terrain elevations in meters. A cell whose value equals the nodata
/// sentinel carries no elevation.
class ElevationGrid {
 public:
  ElevationGrid() = default;
  ElevationGrid(GridSpec spec, std::vector<double> values,
                double nodata = kDefaultNodata)
      : values_(std::move(spec), std::move(values)), nodata_(nodata) {
    if (!std::isfinite(nodata_)) {
      throw Error(Errc::invalid_argument, "nodata sentinel must be finite");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] != nodata_ && !std::isfinite(values_[i])) {
        throw Error(Errc::invalid_argument,
                    "non-finite elevation at cell index " + std::to_string(i));
      }
    }
  }

  const GridSpec& spec() const { return values_.spec(); }
  double nodata() const { return nodata_; }
  double at(Cell c) const { return values_[c]; }
  double operator[](std::size_t i) const { return values_[i]; }
  bool is_nodata(Cell c) const { return values_[c] == nodata_; }
  bool is_nodata(std::size_t i) const { return values_[i] == nodata_; }
  std::span<const double> values() const { return values_.values(); }

  friend bool operator==(const ElevationGrid&, const ElevationGrid&) = default;

 private:
  Grid<double> values_;
  double nodata_ = kDefaultNodata;
};

}  // namespace floodroute
