#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/time.hpp"

namespace floodroute {

inline constexpr double kMetersPerInch = 0.0254;

constexpr double inches_to_meters(double inches) { return inches * kMetersPerInch; }
constexpr double meters_to_inches(double meters) { return meters / kMetersPerInch; }

/// Visible pole lengths of one sign in a pre-flood and a post-flood photo,
/// each with the photo's own pixel scale.
struct PolePairMeasurement {
  std::string id;
  GeoPoint location;
  double pre_len_px = 0.0;
  double pre_scale_px_per_m = 0.0;
  double post_len_px = 0.0;
  double post_scale_px_per_m = 0.0;
  Timestamp timestamp{};
};

enum class ObservationSource { pole_pair, direct };

constexpr std::string_view to_string(ObservationSource s) {
  return s == ObservationSource::pole_pair ? "pole_pair" : "direct";
}

struct DepthObservation {
  std::string id;
  GeoPoint location;
  double depth_m = 0.0;
  Timestamp timestamp{};
  ObservationSource source = ObservationSource::direct;
};

inline void validate(const PolePairMeasurement& m) {
  auto bad = [&](const std::string& what) {
    return Error(Errc::invalid_measurement,
                 "measurement '" + m.id + "': " + what);
  };
  if (!is_valid(m.location)) throw bad("location out of range");
  if (!(std::isfinite(m.pre_scale_px_per_m) && m.pre_scale_px_per_m > 0.0))
    throw bad("pre_scale_px_per_m must be > 0");
  if (!(std::isfinite(m.post_scale_px_per_m) && m.post_scale_px_per_m > 0.0))
    throw bad("post_scale_px_per_m must be > 0");
  if (!(std::isfinite(m.pre_len_px) && m.pre_len_px > 0.0))
    throw bad("pre_len_px must be > 0");
  if (!(std::isfinite(m.post_len_px) && m.post_len_px >= 0.0))
    throw bad("post_len_px must be >= 0");
}

inline void validate(const DepthObservation& o) {
  if (!is_valid(o.location)) {
    throw Error(Errc::invalid_argument,
                "observation '" + o.id + "': location out of range");
  }
  if (!(std::isfinite(o.depth_m) && o.depth_m >= 0.0)) {
    throw Error(Errc::invalid_argument,
                "observation '" + o.id + "': depth_m must be finite and >= 0");
  }
}

/// Floodwater depth is the submerged part of the pole: the physical pre-flood
/// length minus the physical post-flood length, clamped at zero.
inline DepthObservation estimate_depth(const PolePairMeasurement& m) {
  validate(m);
  const double pre_m = m.pre_len_px / m.pre_scale_px_per_m;
  const double post_m = m.post_len_px / m.post_scale_px_per_m;
  return DepthObservation{m.id, m.location, std::max(0.0, pre_m - post_m),
                          m.timestamp, ObservationSource::pole_pair};
}

inline double rmse(std::span<const double> estimates,
                   std::span<const double> truths) {
  if (estimates.empty() || truths.empty()) {
    throw Error(Errc::invalid_argument, "rmse needs at least one pair");
  }
  if (estimates.size() != truths.size()) {
    throw Error(Errc::invalid_argument,
                "rmse length mismatch: " + std::to_string(estimates.size()) +
                    " estimates vs " + std::to_string(truths.size()) +
                    " truths");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truths[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

}  // namespace floodroute
