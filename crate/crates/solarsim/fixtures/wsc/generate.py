#!/usr/bin/env python3
"""Generates the Darwin to Adelaide fixture: route.json, weather.jsonl,
vehicle.toml and scenario.toml.

The route follows the Stuart Highway town chain, densified to roughly 10 km
legs with a small lateral zig-zag standing in for road curvature. Weather is
ten days of hourly samples per zone, scaled so every zone's daily irradiation
matches the DAY_GHI targets within ZONE_SPREAD.

Usage: generate.py [OUTDIR]   (defaults to this script's directory)
"""

import json
import math
import os
import sys

R = 6_371_000.0

# (name, lat, lon, alt_m, zone)
TOWNS = [
    ("Darwin", -12.463, 130.846, 30, "darwin"),
    ("Adelaide River", -13.238, 131.107, 60, "darwin"),
    ("Pine Creek", -13.823, 131.833, 200, "katherine"),
    ("Katherine", -14.465, 132.264, 108, "katherine"),
    ("Mataranka", -14.923, 133.064, 130, "katherine"),
    ("Larrimah", -15.575, 133.215, 200, "daly_waters"),
    ("Daly Waters", -16.254, 133.369, 211, "daly_waters"),
    ("Dunmarra", -16.680, 133.410, 240, "daly_waters"),
    ("Elliott", -17.551, 133.541, 220, "tennant_creek"),
    ("Renner Springs", -18.312, 133.797, 300, "tennant_creek"),
    ("Three Ways", -19.436, 134.211, 350, "tennant_creek"),
    ("Tennant Creek", -19.648, 134.190, 376, "tennant_creek"),
    ("Wauchope", -20.640, 134.222, 400, "barrow_creek"),
    ("Barrow Creek", -21.531, 133.888, 450, "barrow_creek"),
    ("Ti Tree", -22.131, 133.413, 550, "alice_springs"),
    ("Aileron", -22.639, 133.348, 650, "alice_springs"),
    ("Alice Springs", -23.698, 133.881, 545, "alice_springs"),
    ("Erldunda", -25.206, 133.196, 400, "kulgera"),
    ("Kulgera", -25.839, 133.297, 490, "kulgera"),
    ("Marla", -27.304, 133.622, 330, "coober_pedy"),
    ("Cadney Park", -27.909, 134.028, 290, "coober_pedy"),
    ("Coober Pedy", -29.013, 134.755, 210, "coober_pedy"),
    ("Glendambo", -30.968, 135.749, 150, "glendambo"),
    ("Pimba", -31.258, 136.803, 140, "glendambo"),
    ("Port Augusta", -32.493, 137.765, 10, "port_augusta"),
    ("Port Pirie", -33.180, 138.010, 5, "port_augusta"),
    ("Port Wakefield", -34.190, 138.150, 5, "adelaide"),
    ("Adelaide", -34.929, 138.601, 50, "adelaide"),
]

PARAMS = {
    "route_km": 3055.0,
    "leg_km": 10.0,
    "hill_m": 12.0,
    "start_date": "2023-10-22",
    "days": 10,
    # kWh/m² per day
    "day_ghi": [5.476, 5.220, 4.897, 4.826, 4.389, 2.210, 4.6, 4.7, 4.8, 4.9],
    # daily maximum, °C
    "day_tmax": [29.6, 24.0, 22.6, 18.2, 17.2, 13.8, 20.0, 21.0, 22.0, 23.0],
    "diurnal_range": 11.0,
    # direction the wind blows from, degrees
    "day_wind_dir": [135, 90, 270, 180, 0, 0, 180, 135, 90, 135],
    "day_wind_ms": [5.0, 5.4, 3.3, 3.5, 2.1, 4.6, 3.0, 3.0, 3.0, 3.0],
    "zone_spread": 0.03,
    "sunrise": 6.25,
    "sunset": 18.75,
    "vehicle": {
        "panel_area": 6.0,
        "panel_efficiency": 0.24,
        "system_efficiency": 0.9,
        "mass": 330.0,
        "drag_coefficient": 0.093,
        "frontal_area": 0.8,
        "rolling_resistance": 0.006,
        "battery_capacity": 5000.0,
        "constant_power_loss": 49.0,
        "panel_temp_coefficient": 0.0016,
    },
    "scenario": {
        "start_time": "2023-10-22T08:30",
        "soc_start_wh": 2750.0,
        "speed_max_kmh": 110,
        "min_speed_kmh": 57,
        "max_speed_kmh": 90,
        "max_days": 10,
    },
}


def haversine(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dp = p2 - p1
    dl = math.radians(b[1] - a[1])
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R * math.asin(math.sqrt(h))


def densify(offset_km, p):
    """Nodes with legs of about leg_km, alternately shifted sideways."""
    nodes = []
    k = 0
    for (n0, la0, lo0, h0, z0), (n1, la1, lo1, h1, _) in zip(TOWNS, TOWNS[1:]):
        d = haversine((la0, lo0), (la1, lo1)) / 1000.0
        n = max(1, round(d / p["leg_km"]))
        # unit normal in degrees, scaled to offset_km
        dlat = la1 - la0
        dlon = (lo1 - lo0) * math.cos(math.radians(la0))
        norm = math.hypot(dlat, dlon)
        nlat, nlon = -dlon / norm, dlat / norm
        deg = offset_km / 111.195
        for i in range(n):
            f = i / n
            lat = la0 + f * (la1 - la0)
            lon = lo0 + f * (lo1 - lo0)
            alt = h0 + f * (h1 - h0)
            if i > 0:
                s = 1 if k % 2 else -1
                lat += s * nlat * deg
                lon += s * nlon * deg / math.cos(math.radians(lat))
                alt += p["hill_m"] * math.sin(k * 0.9)
            name = n0 if i == 0 else f"{n0} +{round(f * d)} km"
            nodes.append({"lat": round(lat, 6), "lon": round(lon, 6), "alt_m": round(alt, 1), "name": name, "zone": z0})
            k += 1
    last = TOWNS[-1]
    nodes.append({"lat": last[1], "lon": last[2], "alt_m": float(last[3]), "name": last[0], "zone": last[4]})
    return nodes


def route_length_km(nodes):
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        h = haversine((a["lat"], a["lon"]), (b["lat"], b["lon"]))
        total += math.hypot(h, b["alt_m"] - a["alt_m"])
    return total / 1000.0


def build_route(p):
    lo, hi = 0.0, 5.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if route_length_km(densify(mid, p)) < p["route_km"]:
            lo = mid
        else:
            hi = mid
    return densify((lo + hi) / 2, p)


def ghi_shape(p):
    """Relative irradiance for each hour of the day, hour-average of sin^1.3."""
    shape = []
    for h in range(24):
        acc = 0.0
        for j in range(12):
            t = h + (j + 0.5) / 12
            x = (t - p["sunrise"]) / (p["sunset"] - p["sunrise"])
            acc += math.sin(math.pi * x) ** 1.3 if 0 < x < 1 else 0.0
        shape.append(acc / 12)
    return shape


def temp_shape(h):
    """0 at 05:00, 1 at 15:00."""
    return 0.5 - 0.5 * math.cos(math.pi * ((h - 5) % 24) / 10) if 5 <= h <= 15 else 0.5 + 0.5 * math.cos(math.pi * ((h - 15) % 24) / 14)


def build_weather(zones, p):
    shape = ghi_shape(p)
    total = sum(shape)
    y, m, d = map(int, p["start_date"].split("-"))
    import datetime

    start = datetime.datetime(y, m, d)
    lines = []
    for zi, zone in enumerate(zones):
        zf = 1.0 + p["zone_spread"] * math.sin(1.7 * zi + 0.4)
        for day in range(p["days"]):
            target = p["day_ghi"][day] * 1000.0 * zf
            tmax = p["day_tmax"][day]
            tmin = tmax - p["diurnal_range"]
            for h in range(24):
                t = start + datetime.timedelta(days=day, hours=h)
                ghi = round(target * shape[h] / total, 3)
                temp = round(tmin + (tmax - tmin) * temp_shape(h), 2)
                wdir = (p["day_wind_dir"][day] + 8.0 * math.sin(0.8 * h + zi)) % 360
                wms = p["day_wind_ms"][day] * (1.0 + 0.15 * math.sin(2 * math.pi * (h - 8) / 9))
                lines.append(
                    json.dumps(
                        {
                            "zone": zone,
                            "time": t.strftime("%Y-%m-%dT%H:00"),
                            "ghi_wm2": ghi,
                            "temp_c": temp,
                            "wind_dir_deg": round(wdir, 1),
                            "wind_ms": round(wms, 2),
                        }
                    )
                )
    return "\n".join(lines) + "\n"


def toml_value(v):
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def build_vehicle(p):
    return "".join(f"{k} = {toml_value(v)}\n" for k, v in p["vehicle"].items())


def build_scenario(p):
    s = p["scenario"]
    return (
        "[sim]\n"
        f"start_time = {toml_value(s['start_time'])}\n"
        f"soc_start_wh = {toml_value(s['soc_start_wh'])}\n"
        f"speed_max_kmh = {s['speed_max_kmh']}\n"
        f"max_days = {s['max_days']}\n"
        "\n[strategies]\n"
        f"min_speed_kmh = {s['min_speed_kmh']}\n"
        f"max_speed_kmh = {s['max_speed_kmh']}\n"
    )


def write_all(outdir, p=PARAMS):
    os.makedirs(outdir, exist_ok=True)
    route = build_route(p)
    zones = sorted({t[4] for t in TOWNS})
    files = {
        "route.json": json.dumps(route, indent=1) + "\n",
        "weather.jsonl": build_weather(zones, p),
        "vehicle.toml": build_vehicle(p),
        "scenario.toml": build_scenario(p),
    }
    for name, text in files.items():
        with open(os.path.join(outdir, name), "w") as f:
            f.write(text)
    return route_length_km(route)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    print(f"route length {write_all(out):.3f} km")
