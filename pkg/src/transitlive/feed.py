"""Static transit feed: CSV loading, validation, and the immutable in-memory model.

Feed layout (UTF-8, header row, comma-separated):
    stops.csv:      stop_id,code,name,lat,lon
    routes.csv:     route_id,short_name,long_name
    patterns.csv:   pattern_id,route_id,direction_id
    shapes.csv:     pattern_id,seq,lat,lon        (seq 0-based, contiguous)
    trips.csv:      trip_id,pattern_id
    stop_times.csv: trip_id,seq,stop_id,arrival_s[,along_shape_m]

A pattern's stop sequence comes from its trips' stop_times (all trips of a
pattern must share the same sequence). Missing along_shape_m values are
derived at load time by projecting the stop onto the pattern shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from . import geo
from .errors import DanglingRef, InvariantViolation, MissingFile, ParseError, UnknownStop
from .geo import GeoPoint, Polyline

FEED_FILES = ("stops.csv", "routes.csv", "patterns.csv", "shapes.csv", "trips.csv", "stop_times.csv")


@dataclass(frozen=True)
class Stop:
    stop_id: str
    code: str
    name: str
    location: GeoPoint


@dataclass(frozen=True)
class Route:
    route_id: str
    short_name: str
    long_name: str


@dataclass(frozen=True)
class RoutePattern:
    pattern_id: str
    route_id: str
    direction_id: int
    shape: Polyline
    stops: tuple[tuple[str, float], ...]  # (stop_id, along_shape_m), strictly increasing


@dataclass(frozen=True)
class Trip:
    trip_id: str
    pattern_id: str
    stop_times: tuple[tuple[str, int], ...]  # (stop_id, arrival_s), strictly increasing


@dataclass(frozen=True)
class StaticFeed:
    stops: dict[str, Stop]
    routes: dict[str, Route]
    patterns: dict[str, RoutePattern]
    trips: dict[str, Trip]
    # derived indexes
    stops_by_code: dict[str, str] = field(default_factory=dict)
    trips_by_pattern: dict[str, tuple[str, ...]] = field(default_factory=dict)
    patterns_by_route: dict[str, tuple[str, ...]] = field(default_factory=dict)
    arrivals_by_stop: dict[str, tuple[tuple[str, int], ...]] = field(default_factory=dict)

    def patterns_serving_stop(self, stop_id: str) -> list[RoutePattern]:
        if stop_id not in self.stops:
            raise UnknownStop(stop_id)
        return [
            p for p in self.patterns.values()
            if any(sid == stop_id for sid, _ in p.stops)
        ]

    def routes_serving_stop(self, stop_id: str) -> set[str]:
        return {p.route_id for p in self.patterns_serving_stop(stop_id)}


def trips_serving_stop(feed: StaticFeed, stop_id: str) -> list[tuple[str, int]]:
    """All (trip_id, arrival_s) at the stop, sorted by arrival_s then trip_id."""
    if stop_id not in feed.stops:
        raise UnknownStop(stop_id)
    return list(feed.arrivals_by_stop.get(stop_id, ()))


def _read_rows(path: Path, required: tuple[str, ...]) -> Iterator[tuple[int, dict[str, str]]]:
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise ParseError(path.name, 1, "missing header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise ParseError(path.name, 1, f"missing columns: {', '.join(missing)}")
        for row in reader:
            yield reader.line_num, row


def _parse_float(path: Path, line: int, row: dict[str, str], col: str) -> float:
    try:
        return float(row[col])
    except (ValueError, TypeError):
        raise ParseError(path.name, line, f"bad {col}: {row.get(col)!r}")


def _parse_int(path: Path, line: int, row: dict[str, str], col: str) -> int:
    try:
        return int(row[col])
    except (ValueError, TypeError):
        raise ParseError(path.name, line, f"bad {col}: {row.get(col)!r}")


def load_feed(feed_dir: str | Path) -> StaticFeed:
    """Load and validate a feed directory. All-or-nothing: any error is fatal."""
    feed_dir = Path(feed_dir)
    for name in FEED_FILES:
        if not (feed_dir / name).exists():
            raise MissingFile(str(feed_dir / name))

    stops: dict[str, Stop] = {}
    codes: dict[str, str] = {}
    path = feed_dir / "stops.csv"
    for line, row in _read_rows(path, ("stop_id", "code", "name", "lat", "lon")):
        stop_id = row["stop_id"]
        if stop_id in stops:
            raise InvariantViolation(f"duplicate stop_id {stop_id}")
        if row["code"] in codes:
            raise InvariantViolation(f"duplicate stop code {row['code']}")
        if not row["name"]:
            raise InvariantViolation(f"stop {stop_id}: empty name")
        try:
            loc = GeoPoint(_parse_float(path, line, row, "lat"), _parse_float(path, line, row, "lon"))
        except ValueError as e:
            raise ParseError(path.name, line, str(e))
        stops[stop_id] = Stop(stop_id, row["code"], row["name"], loc)
        codes[row["code"]] = stop_id

    routes: dict[str, Route] = {}
    path = feed_dir / "routes.csv"
    for line, row in _read_rows(path, ("route_id", "short_name", "long_name")):
        if row["route_id"] in routes:
            raise InvariantViolation(f"duplicate route_id {row['route_id']}")
        if not row["short_name"]:
            raise InvariantViolation(f"route {row['route_id']}: empty short_name")
        routes[row["route_id"]] = Route(row["route_id"], row["short_name"], row["long_name"])

    pattern_meta: dict[str, tuple[str, int]] = {}
    path = feed_dir / "patterns.csv"
    for line, row in _read_rows(path, ("pattern_id", "route_id", "direction_id")):
        pid = row["pattern_id"]
        if pid in pattern_meta:
            raise InvariantViolation(f"duplicate pattern_id {pid}")
        if row["route_id"] not in routes:
            raise DanglingRef("route", row["route_id"])
        direction = _parse_int(path, line, row, "direction_id")
        if direction not in (0, 1):
            raise ParseError(path.name, line, f"direction_id must be 0 or 1, got {direction}")
        pattern_meta[pid] = (row["route_id"], direction)

    shape_points: dict[str, list[tuple[int, GeoPoint]]] = {}
    path = feed_dir / "shapes.csv"
    for line, row in _read_rows(path, ("pattern_id", "seq", "lat", "lon")):
        pid = row["pattern_id"]
        if pid not in pattern_meta:
            raise DanglingRef("pattern", pid)
        try:
            p = GeoPoint(_parse_float(path, line, row, "lat"), _parse_float(path, line, row, "lon"))
        except ValueError as e:
            raise ParseError(path.name, line, str(e))
        shape_points.setdefault(pid, []).append((_parse_int(path, line, row, "seq"), p))

    shapes: dict[str, Polyline] = {}
    for pid, pts in shape_points.items():
        pts.sort(key=lambda t: t[0])
        seqs = [s for s, _ in pts]
        if seqs != list(range(len(seqs))):
            raise InvariantViolation(f"pattern {pid}: shape seq not contiguous from 0")
        try:
            shapes[pid] = Polyline([p for _, p in pts])
        except Exception as e:
            raise InvariantViolation(f"pattern {pid}: bad shape: {e}")
    for pid in pattern_meta:
        if pid not in shapes:
            raise InvariantViolation(f"pattern {pid}: no shape points")

    trip_pattern: dict[str, str] = {}
    path = feed_dir / "trips.csv"
    for line, row in _read_rows(path, ("trip_id", "pattern_id")):
        tid = row["trip_id"]
        if tid in trip_pattern:
            raise InvariantViolation(f"duplicate trip_id {tid}")
        if row["pattern_id"] not in pattern_meta:
            raise DanglingRef("pattern", row["pattern_id"])
        trip_pattern[tid] = row["pattern_id"]

    stop_time_rows: dict[str, list[tuple[int, str, int, float | None]]] = {}
    path = feed_dir / "stop_times.csv"
    for line, row in _read_rows(path, ("trip_id", "seq", "stop_id", "arrival_s")):
        tid = row["trip_id"]
        if tid not in trip_pattern:
            raise DanglingRef("trip", tid)
        if row["stop_id"] not in stops:
            raise DanglingRef("stop", row["stop_id"])
        along = None
        if row.get("along_shape_m") not in (None, ""):
            along = _parse_float(path, line, row, "along_shape_m")
        stop_time_rows.setdefault(tid, []).append(
            (_parse_int(path, line, row, "seq"), row["stop_id"], _parse_int(path, line, row, "arrival_s"), along)
        )

    # assemble trips, derive each pattern's stop sequence and distances
    trips: dict[str, Trip] = {}
    pattern_stop_seq: dict[str, tuple[str, ...]] = {}
    pattern_alongs: dict[str, tuple[float, ...]] = {}
    for tid, pid in trip_pattern.items():
        rows = stop_time_rows.get(tid)
        if not rows:
            raise InvariantViolation(f"trip {tid}: no stop_times")
        rows.sort(key=lambda t: t[0])
        seqs = [r[0] for r in rows]
        if seqs != list(range(len(seqs))):
            raise InvariantViolation(f"trip {tid}: stop_times seq not contiguous from 0")
        stop_ids = tuple(r[1] for r in rows)
        arrivals = [r[2] for r in rows]
        if any(b <= a for a, b in zip(arrivals, arrivals[1:])):
            raise InvariantViolation(f"trip {tid}: arrival_s not strictly increasing")
        if len(stop_ids) < 2:
            raise InvariantViolation(f"trip {tid}: fewer than 2 stops")
        if pid in pattern_stop_seq:
            if pattern_stop_seq[pid] != stop_ids:
                raise InvariantViolation(f"trip {tid}: stop sequence differs from pattern {pid}")
        else:
            pattern_stop_seq[pid] = stop_ids
        explicit = tuple(r[3] for r in rows)
        if any(a is not None for a in explicit):
            if any(a is None for a in explicit):
                raise InvariantViolation(f"trip {tid}: along_shape_m must be all present or all absent")
            alongs = tuple(float(a) for a in explicit)  # type: ignore[arg-type]
            prior = pattern_alongs.get(pid)
            if prior is not None and any(abs(x - y) > 1e-6 for x, y in zip(prior, alongs)):
                raise InvariantViolation(f"trip {tid}: along_shape_m differs from pattern {pid}")
            pattern_alongs[pid] = alongs
        trips[tid] = Trip(tid, pid, tuple(zip(stop_ids, arrivals)))

    patterns: dict[str, RoutePattern] = {}
    for pid, (route_id, direction) in pattern_meta.items():
        stop_ids = pattern_stop_seq.get(pid)
        if stop_ids is None:
            raise InvariantViolation(f"pattern {pid}: no trips define its stop sequence")
        shape = shapes[pid]
        alongs = pattern_alongs.get(pid)
        if alongs is None:
            alongs = tuple(
                geo.project_onto_polyline(stops[sid].location, shape).along_m for sid in stop_ids
            )
        if len(alongs) != len(stop_ids):
            raise InvariantViolation(f"pattern {pid}: along_shape_m count mismatch")
        if any(b <= a for a, b in zip(alongs, alongs[1:])):
            raise InvariantViolation(f"pattern {pid}: along_shape_m not strictly increasing")
        # 1 cm slack absorbs float drift when a stop sits exactly at the shape end
        if alongs[0] < 0 or alongs[-1] > shape.length_m + 0.01:
            raise InvariantViolation(f"pattern {pid}: along_shape_m outside shape length")
        alongs = tuple(min(a, shape.length_m) for a in alongs)
        patterns[pid] = RoutePattern(pid, route_id, direction, shape, tuple(zip(stop_ids, alongs)))

    trips_by_pattern: dict[str, tuple[str, ...]] = {}
    for tid in sorted(trips):
        trips_by_pattern.setdefault(trips[tid].pattern_id, ())
        trips_by_pattern[trips[tid].pattern_id] += (tid,)
    patterns_by_route: dict[str, tuple[str, ...]] = {}
    for pid in sorted(patterns):
        rid = patterns[pid].route_id
        patterns_by_route.setdefault(rid, ())
        patterns_by_route[rid] += (pid,)
    arrivals_by_stop: dict[str, list[tuple[str, int]]] = {}
    for trip in trips.values():
        for sid, arr in trip.stop_times:
            arrivals_by_stop.setdefault(sid, []).append((trip.trip_id, arr))
    frozen_arrivals = {
        sid: tuple(sorted(entries, key=lambda t: (t[1], t[0])))
        for sid, entries in arrivals_by_stop.items()
    }

    return StaticFeed(
        stops=stops,
        routes=routes,
        patterns=patterns,
        trips=trips,
        stops_by_code={s.code: s.stop_id for s in stops.values()},
        trips_by_pattern=trips_by_pattern,
        patterns_by_route=patterns_by_route,
        arrivals_by_stop=frozen_arrivals,
    )


def save_feed(feed: StaticFeed, out_dir: str | Path) -> None:
    """Write a feed back to CSV (with along_shape_m filled in) so that
    reloading reproduces the model exactly."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with (out_dir / "stops.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["stop_id", "code", "name", "lat", "lon"])
        for s in feed.stops.values():
            w.writerow([s.stop_id, s.code, s.name, repr(s.location.lat), repr(s.location.lon)])

    with (out_dir / "routes.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["route_id", "short_name", "long_name"])
        for r in feed.routes.values():
            w.writerow([r.route_id, r.short_name, r.long_name])

    with (out_dir / "patterns.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["pattern_id", "route_id", "direction_id"])
        for p in feed.patterns.values():
            w.writerow([p.pattern_id, p.route_id, p.direction_id])

    with (out_dir / "shapes.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["pattern_id", "seq", "lat", "lon"])
        for p in feed.patterns.values():
            for i, pt in enumerate(p.shape.points):
                w.writerow([p.pattern_id, i, repr(pt.lat), repr(pt.lon)])

    with (out_dir / "trips.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["trip_id", "pattern_id"])
        for t in feed.trips.values():
            w.writerow([t.trip_id, t.pattern_id])

    with (out_dir / "stop_times.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["trip_id", "seq", "stop_id", "arrival_s", "along_shape_m"])
        for t in feed.trips.values():
            pattern_stops = feed.patterns[t.pattern_id].stops
            for i, (sid, arr) in enumerate(t.stop_times):
                w.writerow([t.trip_id, i, sid, arr, repr(pattern_stops[i][1])])
