#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "floodroute/error.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/inundation.hpp"

namespace floodroute {

enum class HeuristicMode { manhattan_paper, octile, zero };

constexpr std::string_view to_string(HeuristicMode m) {
  switch (m) {
    case HeuristicMode::manhattan_paper: return "manhattan_paper";
    case HeuristicMode::octile: return "octile";
    case HeuristicMode::zero: return "zero";
  }
  return "octile";
}

inline HeuristicMode parse_heuristic(std::string_view s) {
  if (s == "manhattan_paper" || s == "manhattan") return HeuristicMode::manhattan_paper;
  if (s == "octile") return HeuristicMode::octile;
  if (s == "zero") return HeuristicMode::zero;
  throw Error(Errc::invalid_argument,
              "unknown heuristic '" + std::string(s) +
                  "' (expected manhattan_paper, octile or zero)");
}

enum class NoRouteReason {
  outside_footprint,
  origin_flooded,
  destination_flooded,
  disconnected,
  timed_out,
};

constexpr std::string_view to_string(NoRouteReason r) {
  switch (r) {
    case NoRouteReason::outside_footprint: return "outside_footprint";
    case NoRouteReason::origin_flooded: return "origin_flooded";
    case NoRouteReason::destination_flooded: return "destination_flooded";
    case NoRouteReason::disconnected: return "disconnected";
    case NoRouteReason::timed_out: return "timed_out";
  }
  return "disconnected";
}

struct RouteRequest {
  GeoPoint origin;
  GeoPoint destination;
  double max_depth_m = 0.0;
  HeuristicMode heuristic = HeuristicMode::octile;
  double depth_penalty_per_m = 0.0;
};

/// Same request, already resolved to grid cells.
struct CellRequest {
  Cell origin;
  Cell destination;
  double max_depth_m = 0.0;
  HeuristicMode heuristic = HeuristicMode::octile;
  double depth_penalty_per_m = 0.0;
};

struct SearchOptions {
  // Lower G of a node already on the open list when a cheaper parent shows
  // up. false reproduces the plain open/closed pseudocode, which never
  // revisits an open node.
  bool reparent_open = true;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct Route {
  std::vector<Cell> cells;
  double total_cost = 0.0;
  std::size_t expanded = 0;  // nodes moved to the closed list
  double path_length_m = 0.0;
};

struct RouteResult {
  std::optional<Route> route;
  NoRouteReason reason = NoRouteReason::disconnected;

  explicit operator bool() const { return route.has_value(); }
};

inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// Remaining-cost estimate in cell units.
inline double heuristic(Cell cell, Cell goal, HeuristicMode mode) {
  const double dr = std::abs(cell.row - goal.row);
  const double dc = std::abs(cell.col - goal.col);
  switch (mode) {
    case HeuristicMode::manhattan_paper: return dr + dc;
    case HeuristicMode::octile:
      return std::max(dr, dc) + (kSqrt2 - 1.0) * std::min(dr, dc);
    case HeuristicMode::zero: return 0.0;
  }
  return 0.0;
}

/// Unit cost for orthogonal moves, sqrt(2) for diagonal ones, plus a linear
/// penalty on the depth of the cell being entered.
inline double step_cost(Cell from, Cell to, const FloodRaster& raster,
                        double depth_penalty_per_m) {
  const int dr = std::abs(from.row - to.row);
  const int dc = std::abs(from.col - to.col);
  if (std::max(dr, dc) != 1) {
    throw Error(Errc::invalid_argument, "step_cost: cells are not 8-adjacent");
  }
  if (!raster.spec.contains(from) || !raster.spec.contains(to)) {
    throw Error(Errc::out_of_bounds, "step_cost: cell outside grid");
  }
  if (raster.is_nodata(to)) {
    throw Error(Errc::invalid_argument, "step_cost: target cell is impassable");
  }
  const double base = (dr == 1 && dc == 1) ? kSqrt2 : 1.0;
  return base + depth_penalty_per_m * raster.depth(to);
}

namespace detail {

inline constexpr std::array<std::pair<int, int>, 8> kNeighborOffsets{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

inline void validate_query(const CellRequest& q) {
  if (std::isnan(q.max_depth_m) || q.max_depth_m < 0.0) {
    throw Error(Errc::invalid_argument, "max_depth_m must be >= 0");
  }
  if (!std::isfinite(q.depth_penalty_per_m) || q.depth_penalty_per_m < 0.0) {
    throw Error(Errc::invalid_argument, "depth_penalty_per_m must be >= 0");
  }
}

inline std::optional<NoRouteReason> check_endpoints(const Grid<std::uint8_t>& blocked,
                                                    const CellRequest& q) {
  const GridSpec& spec = blocked.spec();
  if (!spec.contains(q.origin) || !spec.contains(q.destination)) {
    return NoRouteReason::outside_footprint;
  }
  if (blocked[q.origin]) return NoRouteReason::origin_flooded;
  if (blocked[q.destination]) return NoRouteReason::destination_flooded;
  return std::nullopt;
}

// A diagonal step also needs both orthogonal cells it squeezes between.
inline bool can_step(const Grid<std::uint8_t>& blocked, Cell from, Cell to) {
  if (!blocked.spec().contains(to) || blocked[to]) return false;
  if (from.row != to.row && from.col != to.col) {
    return !blocked[Cell{from.row, to.col}] && !blocked[Cell{to.row, from.col}];
  }
  return true;
}

inline double path_length(const GridSpec& spec, const std::vector<Cell>& cells) {
  double total = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    total += haversine_distance(cell_center(spec, cells[i - 1]),
                                cell_center(spec, cells[i]));
  }
  return total;
}

inline std::vector<Cell> unwind(const GridSpec& spec,
                                const std::vector<std::int64_t>& parent,
                                std::size_t goal) {
  std::vector<Cell> cells;
  for (std::int64_t at = static_cast<std::int64_t>(goal); at >= 0;
       at = parent[static_cast<std::size_t>(at)]) {
    cells.push_back(spec.cell_at(static_cast<std::size_t>(at)));
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

struct OpenEntry {
  double f;
  double g;
  Cell cell;
};

// Pops the smallest F; ties go to the larger G, then to the smaller (row, col).
struct OpenEntryAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.cell > b.cell;
  }
};

}  // namespace detail

/// Best-first search over the 8-connected grid with F = G + H. Nodes are
/// popped from the open list by smallest F, moved to the closed list, and
/// their eight neighbors relaxed. With an admissible heuristic (octile, zero)
/// and `reparent_open` the returned cost is optimal.
inline RouteResult astar(const CellRequest& query, const FloodRaster& raster,
                         const SearchOptions& options = {}) {
  detail::validate_query(query);
  const Grid<std::uint8_t> blocked = threshold_mask(raster, query.max_depth_m);
  if (auto reason = detail::check_endpoints(blocked, query)) {
    return {std::nullopt, *reason};
  }
  const GridSpec& spec = raster.spec;
  enum : std::uint8_t { kUnseen, kOpen, kClosed };
  std::vector<std::uint8_t> state(spec.size(), kUnseen);
  std::vector<double> g(spec.size(), std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(spec.size(), -1);
  std::priority_queue<detail::OpenEntry, std::vector<detail::OpenEntry>,
                      detail::OpenEntryAfter>
      open;

  const std::size_t start = spec.index(query.origin);
  const std::size_t goal = spec.index(query.destination);
  g[start] = 0.0;
  state[start] = kOpen;
  open.push({heuristic(query.origin, query.destination, query.heuristic), 0.0,
             query.origin});

  std::size_t expanded = 0;
  std::size_t pops = 0;
  while (!open.empty()) {
    const detail::OpenEntry top = open.top();
    open.pop();
    const std::size_t n = spec.index(top.cell);
    if (state[n] == kClosed || top.g != g[n]) continue;  // superseded entry

    if (options.deadline && (++pops & 1023u) == 0 &&
        std::chrono::steady_clock::now() > *options.deadline) {
      return {std::nullopt, NoRouteReason::timed_out};
    }

    if (n == goal) {
      Route route;
      route.cells = detail::unwind(spec, parent, goal);
      route.total_cost = g[goal];
      route.expanded = expanded;
      route.path_length_m = detail::path_length(spec, route.cells);
      return {std::move(route), NoRouteReason::disconnected};
    }

    state[n] = kClosed;
    ++expanded;
    for (const auto& [dr, dc] : detail::kNeighborOffsets) {
      const Cell m_cell{top.cell.row + dr, top.cell.col + dc};
      if (!detail::can_step(blocked, top.cell, m_cell)) continue;
      const std::size_t m = spec.index(m_cell);
      if (state[m] == kClosed) continue;
      const double tentative =
          g[n] + step_cost(top.cell, m_cell, raster, query.depth_penalty_per_m);
      if (state[m] == kOpen && !(options.reparent_open && tentative < g[m])) {
        continue;
      }
      g[m] = tentative;
      parent[m] = static_cast<std::int64_t>(n);
      state[m] = kOpen;
      open.push({tentative + heuristic(m_cell, query.destination, query.heuristic),
                 tentative, m_cell});
    }
  }
  return {std::nullopt, NoRouteReason::disconnected};
}

/// Resolves geographic endpoints to cells and runs the search.
inline RouteResult astar(const RouteRequest& request, const FloodRaster& raster,
                         const SearchOptions& options = {}) {
  const auto origin = point_to_cell(raster.spec, request.origin);
  const auto destination = point_to_cell(raster.spec, request.destination);
  if (!origin || !destination) return {std::nullopt, NoRouteReason::outside_footprint};
  return astar(CellRequest{*origin, *destination, request.max_depth_m,
                           request.heuristic, request.depth_penalty_per_m},
               raster, options);
}

/// Uniform-cost search with lazy deletion, kept separate from astar so it can
/// serve as its optimality reference. The heuristic field is ignored.
inline RouteResult dijkstra_oracle(const CellRequest& query, const FloodRaster& raster) {
  detail::validate_query(query);
  const Grid<std::uint8_t> blocked = threshold_mask(raster, query.max_depth_m);
  if (auto reason = detail::check_endpoints(blocked, query)) {
    return {std::nullopt, *reason};
  }
  const GridSpec& spec = raster.spec;
  const std::size_t start = spec.index(query.origin);
  const std::size_t goal = spec.index(query.destination);
  std::vector<double> dist(spec.size(), std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(spec.size(), -1);
  std::vector<bool> settled(spec.size(), false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[start] = 0.0;
  heap.push({0.0, start});
  std::size_t settled_count = 0;

  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    if (u == goal) {
      Route route;
      route.cells = detail::unwind(spec, parent, goal);
      route.total_cost = d;
      route.expanded = settled_count;
      route.path_length_m = detail::path_length(spec, route.cells);
      return {std::move(route), NoRouteReason::disconnected};
    }
    settled[u] = true;
    ++settled_count;
    const Cell uc = spec.cell_at(u);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Cell vc{uc.row + dr, uc.col + dc};
        if (!spec.contains(vc) || blocked[vc]) continue;
        const bool diagonal = dr != 0 && dc != 0;
        if (diagonal && (blocked[Cell{uc.row, vc.col}] || blocked[Cell{vc.row, uc.col}])) {
          continue;
        }
        const double w = (diagonal ? std::sqrt(2.0) : 1.0) +
                         query.depth_penalty_per_m * raster.depth_m[vc];
        const std::size_t v = spec.index(vc);
        if (d + w < dist[v]) {
          dist[v] = d + w;
          parent[v] = static_cast<std::int64_t>(u);
          heap.push({dist[v], v});
        }
      }
    }
  }
  return {std::nullopt, NoRouteReason::disconnected};
}

inline RouteResult dijkstra_oracle(const RouteRequest& request, const FloodRaster& raster) {
  const auto origin = point_to_cell(raster.spec, request.origin);
  const auto destination = point_to_cell(raster.spec, request.destination);
  if (!origin || !destination) return {std::nullopt, NoRouteReason::outside_footprint};
  return dijkstra_oracle(CellRequest{*origin, *destination, request.max_depth_m,
                                     request.heuristic, request.depth_penalty_per_m},
                         raster);
}

/// GeoJSON Feature with a LineString through the cell centers (lon, lat).
inline nlohmann::json route_to_geojson(const Route& route, const GridSpec& spec) {
  auto coords = nlohmann::json::array();
  for (const Cell& c : route.cells) {
    const GeoPoint p = cell_center(spec, c);
    coords.push_back({p.lon, p.lat});
  }
  return {
      {"type", "Feature"},
      {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
      {"properties",
       {{"total_cost", route.total_cost},
        {"path_length_m", route.path_length_m},
        {"expanded", route.expanded}}},
  };
}

}  // namespace floodroute
