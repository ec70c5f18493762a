import csv
import math
from pathlib import Path

import pytest

from transitlive import feed as feed_mod
from transitlive.geo import M_PER_DEG

ORIGIN_LAT = 47.0
ORIGIN_LON = -122.0


def write_feed_dir(
    dirpath: Path,
    stops: list[tuple[str, str, str, float, float]],
    routes: list[tuple[str, str, str]],
    patterns: list[tuple[str, str, int]],
    shapes: list[tuple[str, int, float, float]],
    trips: list[tuple[str, str]],
    stop_times: list[tuple],  # (trip_id, seq, stop_id, arrival_s[, along_shape_m])
    with_along: bool = False,
) -> Path:
    dirpath.mkdir(parents=True, exist_ok=True)
    tables = {
        "stops.csv": (["stop_id", "code", "name", "lat", "lon"], stops),
        "routes.csv": (["route_id", "short_name", "long_name"], routes),
        "patterns.csv": (["pattern_id", "route_id", "direction_id"], patterns),
        "shapes.csv": (["pattern_id", "seq", "lat", "lon"], shapes),
        "trips.csv": (["trip_id", "pattern_id"], trips),
        "stop_times.csv": (
            ["trip_id", "seq", "stop_id", "arrival_s"] + (["along_shape_m"] if with_along else []),
            stop_times,
        ),
    }
    for name, (header, rows) in tables.items():
        with (dirpath / name).open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(header)
            w.writerows(rows)
    return dirpath


def north_point(along_m: float, lat0: float = ORIGIN_LAT, lon0: float = ORIGIN_LON):
    """Point along_m meters due north of the origin."""
    return lat0 + along_m / M_PER_DEG, lon0


def write_straight_feed(
    dirpath: Path,
    stop_alongs: list[float],
    arrival_times: list[int],
    length_m: float | None = None,
    with_along: bool = False,
) -> Path:
    """One route, one northbound pattern over a straight shape, one trip."""
    assert len(stop_alongs) == len(arrival_times)
    length = length_m if length_m is not None else stop_alongs[-1]
    stops = []
    for i, d in enumerate(stop_alongs):
        lat, lon = north_point(d)
        stops.append((f"s{i+1}", f"{100+i}", f"Stop {i+1}", lat, lon))
    end_lat, end_lon = north_point(length)
    shapes = [("p1", 0, ORIGIN_LAT, ORIGIN_LON), ("p1", 1, end_lat, end_lon)]
    stop_times = []
    for i, (sid, arr) in enumerate(zip([s[0] for s in stops], arrival_times)):
        row = ["t1", i, sid, arr]
        if with_along:
            row.append(stop_alongs[i])
        stop_times.append(tuple(row))
    return write_feed_dir(
        dirpath,
        stops=stops,
        routes=[("r1", "10", "Test Line")],
        patterns=[("p1", "r1", 0)],
        shapes=shapes,
        trips=[("t1", "p1")],
        stop_times=stop_times,
        with_along=with_along,
    )


@pytest.fixture
def minimal_feed_dir(tmp_path):
    """2 stops, straight 1000 m shape, stops at 0/1000 m, times 0/120 s."""
    return write_straight_feed(tmp_path / "feed", [0.0, 1000.0], [0, 120], with_along=True)


@pytest.fixture
def minimal_feed(minimal_feed_dir):
    return feed_mod.load_feed(minimal_feed_dir)


@pytest.fixture
def line_feed_dir(tmp_path):
    """5 km shape, 6 stops every 1000 m, constant 10 m/s schedule."""
    return write_straight_feed(
        tmp_path / "line_feed",
        [0.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0],
        [0, 100, 200, 300, 400, 500],
        with_along=True,
    )


@pytest.fixture
def line_feed(line_feed_dir):
    return feed_mod.load_feed(line_feed_dir)
