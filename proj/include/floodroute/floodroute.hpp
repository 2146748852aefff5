#pragma once

#include "floodroute/error.hpp"
#include "floodroute/time.hpp"
#include "floodroute/geo.hpp"
#include "floodroute/depth.hpp"
#include "floodroute/elevation.hpp"
#include "floodroute/inundation.hpp"
#include "floodroute/routing.hpp"
#include "floodroute/csv.hpp"
#include "floodroute/ascii_grid.hpp"
#include "floodroute/raster_json.hpp"
#include "floodroute/remote_elevation.hpp"
#include "floodroute/scenario.hpp"
#include "floodroute/service.hpp"
