"""Geodesic primitives and the grid-based spatial index.

Spherical earth model with R = 6,371,000 m. Point-to-segment math runs in a
local equirectangular plane per segment (longitude scaled by cos of the
segment's mean latitude); the error is negligible against GPS noise at
city-block segment lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateInput, DegenerateShape, OutOfRange

EARTH_RADIUS_M = 6_371_000.0
M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0  # meters per degree of latitude


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError("coordinates must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon out of range: {self.lon}")


@dataclass(frozen=True)
class Projection:
    along_m: float     # distance from polyline start
    offset_m: float    # perpendicular point-to-polyline distance, >= 0
    segment_index: int


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> float:
    """Compass bearing from a toward b in [0, 360); 0 = north, 90 = east."""
    if a == b:
        raise DegenerateInput("bearing undefined for identical points")
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dlam = math.radians(b.lon - a.lon)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    brg = math.degrees(math.atan2(y, x)) % 360.0
    # a tiny negative angle mod 360 rounds to exactly 360.0
    return 0.0 if brg >= 360.0 else brg


class Polyline:
    """Immutable polyline with precomputed cumulative segment lengths."""

    __slots__ = ("points", "seg_lengths", "cum_lengths", "length_m")

    def __init__(self, points: Sequence[GeoPoint]):
        if len(points) < 2:
            raise DegenerateShape("polyline needs at least 2 points")
        self.points: tuple[GeoPoint, ...] = tuple(points)
        lengths = []
        for p, q in zip(self.points, self.points[1:]):
            if p == q:
                raise DegenerateShape("consecutive identical points")
            lengths.append(haversine_m(p, q))
        self.seg_lengths: tuple[float, ...] = tuple(lengths)
        cum = [0.0]
        for s in lengths:
            cum.append(cum[-1] + s)
        self.cum_lengths: tuple[float, ...] = tuple(cum)
        self.length_m: float = cum[-1]
        if self.length_m <= 0.0:
            raise DegenerateShape("zero total length")

    def __eq__(self, other):
        return isinstance(other, Polyline) and self.points == other.points

    def __hash__(self):
        return hash(self.points)


def _segment_frame(a: GeoPoint, b: GeoPoint, p: GeoPoint):
    """Planar (east, north) meters of b and p relative to a."""
    coslat = math.cos(math.radians((a.lat + b.lat) / 2.0))
    bx = (b.lon - a.lon) * coslat * M_PER_DEG
    by = (b.lat - a.lat) * M_PER_DEG
    px = (p.lon - a.lon) * coslat * M_PER_DEG
    py = (p.lat - a.lat) * M_PER_DEG
    return bx, by, px, py


def project_onto_polyline(p: GeoPoint, shape: Polyline | Sequence[GeoPoint]) -> Projection:
    """Nearest point on the polyline; ties go to the smaller segment index."""
    if not isinstance(shape, Polyline):
        shape = Polyline(shape)
    best: Projection | None = None
    for i in range(len(shape.points) - 1):
        a, b = shape.points[i], shape.points[i + 1]
        bx, by, px, py = _segment_frame(a, b, p)
        seg_planar = math.hypot(bx, by)
        t = 0.0 if seg_planar == 0.0 else (px * bx + py * by) / (seg_planar * seg_planar)
        t = min(1.0, max(0.0, t))
        dx = px - t * bx
        dy = py - t * by
        offset = math.hypot(dx, dy)
        if best is None or offset < best.offset_m:
            along = shape.cum_lengths[i] + t * shape.seg_lengths[i]
            best = Projection(along_m=min(along, shape.length_m), offset_m=offset, segment_index=i)
    assert best is not None
    return best


def point_at_distance(shape: Polyline | Sequence[GeoPoint], d: float) -> GeoPoint:
    """Point d meters along the polyline (linear interpolation within a segment)."""
    if not isinstance(shape, Polyline):
        shape = Polyline(shape)
    if d < 0 or d > shape.length_m:
        raise OutOfRange(f"distance {d} outside [0, {shape.length_m}]")
    if d == 0:
        return shape.points[0]
    if d >= shape.length_m:
        return shape.points[-1]
    # find segment containing d
    for i in range(len(shape.seg_lengths)):
        if d <= shape.cum_lengths[i + 1]:
            frac = (d - shape.cum_lengths[i]) / shape.seg_lengths[i]
            a, b = shape.points[i], shape.points[i + 1]
            return GeoPoint(
                lat=a.lat + frac * (b.lat - a.lat),
                lon=a.lon + frac * (b.lon - a.lon),
            )
    return shape.points[-1]


def segment_index_at_distance(shape: Polyline, d: float) -> int:
    """Segment containing distance d; an exact interior vertex selects the
    following segment, the shape end selects the last segment."""
    if d < 0 or d > shape.length_m:
        raise OutOfRange(f"distance {d} outside [0, {shape.length_m}]")
    if d >= shape.length_m:
        return len(shape.seg_lengths) - 1
    for i in range(len(shape.seg_lengths)):
        if d < shape.cum_lengths[i + 1]:
            return i
    return len(shape.seg_lengths) - 1


class GridIndex:
    """Fixed-cell spatial hash over stop locations.

    Cells are floor(coord / cell_size_deg); queries scan every cell
    intersecting the radius's bounding box and filter by exact haversine
    distance, so results are identical to a brute-force scan.
    """

    def __init__(self, stops: Iterable[tuple[str, GeoPoint]], cell_size_deg: float = 0.01):
        if cell_size_deg <= 0:
            raise ValueError("cell_size_deg must be positive")
        self.cell_size_deg = cell_size_deg
        self._buckets: dict[tuple[int, int], list[tuple[str, GeoPoint]]] = {}
        for stop_id, loc in stops:
            self._buckets.setdefault(self._cell(loc), []).append((stop_id, loc))

    def _cell(self, p: GeoPoint) -> tuple[int, int]:
        return (
            math.floor(p.lat / self.cell_size_deg),
            math.floor(p.lon / self.cell_size_deg),
        )

    def query(self, center: GeoPoint, radius_m: float) -> list[tuple[str, float]]:
        """All (stop_id, distance_m) with distance <= radius_m, sorted by
        distance then stop_id."""
        if radius_m < 0:
            raise ValueError("radius_m must be >= 0")
        dlat = radius_m / M_PER_DEG
        # widest longitude span occurs at the highest |lat| inside the band
        max_abs_lat = min(90.0, abs(center.lat) + dlat)
        coslat = math.cos(math.radians(max_abs_lat))
        dlon = 180.0 if coslat <= 1e-9 else min(180.0, radius_m / (M_PER_DEG * coslat))
        cs = self.cell_size_deg
        lat_lo = math.floor((center.lat - dlat) / cs)
        lat_hi = math.floor((center.lat + dlat) / cs)
        lon_lo = math.floor((center.lon - dlon) / cs)
        lon_hi = math.floor((center.lon + dlon) / cs)
        out: list[tuple[str, float]] = []
        for ci in range(lat_lo, lat_hi + 1):
            for cj in range(lon_lo, lon_hi + 1):
                for stop_id, loc in self._buckets.get((ci, cj), ()):
                    d = haversine_m(center, loc)
                    if d <= radius_m:
                        out.append((stop_id, d))
        out.sort(key=lambda item: (item[1], item[0]))
        return out


def stops_near(index: GridIndex, center: GeoPoint, radius_m: float) -> list[tuple[str, float]]:
    return index.query(center, radius_m)
