"""Regenerates the demo scenario fixture in this directory.

Terrain: 40x40 cells of 10 m near downtown Houston, a gentle west-to-east
slope with a shallow bowl in the middle and a 2x2 nodata block in the
northwest corner.
"""
import json
import math

ORIGIN_LAT, ORIGIN_LON = 29.76, -95.37
CELL_M, ROWS, COLS = 10.0, 40, 40
R = 6371000.0
NODATA = -9999


def elevation(row, col):
    if row >= 38 and col <= 1:
        return NODATA
    bowl = 0.6 * math.exp(-((row - 20) ** 2 + (col - 20) ** 2) / (2 * 8.0 ** 2))
    return round(12.0 - 0.02 * col - bowl, 3)


def center(spec, row, col):
    olat, olon, cell = spec
    m_per_deg = math.pi / 180.0 * R
    m_per_deg_lon = m_per_deg * math.cos(olat * math.pi / 180.0)
    return (olat + (row + 0.5) * (cell / m_per_deg),
            olon + (col + 0.5) * (cell / m_per_deg_lon))


def write_dem():
    with open("dem.asc", "w") as f:
        f.write(f"ncols {COLS}\nnrows {ROWS}\nxllcorner {ORIGIN_LON}\n"
                f"yllcorner {ORIGIN_LAT}\ncellsize {CELL_M}\nNODATA_value {NODATA}\n")
        for row in range(ROWS - 1, -1, -1):
            f.write(" ".join(f"{elevation(row, c):g}" for c in range(COLS)) + "\n")


def write_observations():
    spec = (ORIGIN_LAT, ORIGIN_LON, CELL_M)
    rows = [("obs-a", 20, 20, 0.9), ("obs-b", 13, 21, 0.7), ("obs-c", 27, 19, 0.7)]
    with open("observations.csv", "w") as f:
        f.write("id,lat,lon,depth_m,timestamp\n")
        for i, (oid, r, c, d) in enumerate(rows):
            lat, lon = center(spec, r, c)
            f.write(f"{oid},{lat!r},{lon!r},{d},2017-08-30T1{i}:00:00Z\n")
    # Pole pairs: 84/40 - 60/40 = 0.6 m; 96/48 - 72/48 = 0.5 m; 90/45 - 90/45 = 0 m.
    pairs = [("pole-1", 8, 30, 84, 40, 60, 40), ("pole-2", 32, 8, 96, 48, 72, 48),
             ("pole-3", 5, 5, 90, 45, 90, 45)]
    with open("pole_pairs.csv", "w") as f:
        f.write("id,lat,lon,pre_len_px,pre_scale_px_per_m,post_len_px,post_scale_px_per_m,timestamp\n")
        for oid, r, c, a, b, x, y in pairs:
            lat, lon = center(spec, r, c)
            f.write(f"{oid},{lat!r},{lon!r},{a},{b},{x},{y},2017-08-31T09:00:00-05:00\n")
    with open("truth.csv", "w") as f:
        f.write("id,depth_in\npole-1,25.0\npole-2,18.5\npole-3,1.0\n")


def write_recorded():
    # 4x4 lattice at 100 m resampling the same terrain function.
    spec = (ORIGIN_LAT, ORIGIN_LON, 100.0)
    points = []
    for r in range(4):
        for c in range(4):
            lat, lon = center(spec, r, c)
            points.append({"lat": lat, "lon": lon,
                           "elevation_m": elevation(r * 10 + 5, c * 10 + 5)})
    four = points[:4]
    req = {"locations": [{"lat": p["lat"], "lon": p["lon"]} for p in four]}
    doc = {
        "points": points,
        "exchanges": [
            {"request": req, "response": {"results": four}},
        ],
    }
    with open("recorded_elevation.json", "w") as f:
        json.dump(doc, f, indent=1)


if __name__ == "__main__":
    write_dem()
    write_observations()
    write_recorded()
