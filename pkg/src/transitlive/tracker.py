"""Per-vehicle tracking: fix gating, map matching, smoothing, schedule deviation.

Fix handling, in order: accuracy gate, out-of-order gate, corridor gate
(off-route fixes keep the vehicle alive but do not move it), then a clamped
exponential smoother over along-route distance. along_m never decreases
across accepted in-corridor fixes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace

from . import geo
from .errors import UnassignedVehicle, UnknownTrip, UnknownVehicle
from .feed import StaticFeed, Trip
from .geo import GeoPoint

STATUS_TRACKING = "tracking"
STATUS_STALE = "stale"
STATUS_OFF_ROUTE = "off_route"

REJECT_ACCURACY = "accuracy_too_low"
REJECT_OUT_OF_ORDER = "out_of_order"


@dataclass(frozen=True)
class GpsFix:
    vehicle_id: str
    ts: int  # unix seconds
    location: GeoPoint
    accuracy_m: float  # 1-sigma horizontal

    def __post_init__(self):
        if self.ts <= 0:
            raise ValueError("ts must be positive")
        if self.accuracy_m <= 0:
            raise ValueError("accuracy_m must be positive")


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: str
    trip_id: str
    along_m: float
    deviation_s: float  # positive = late
    last_fix_ts: int    # 0 until the first accepted fix
    status: str
    start_of_day_ts: int


@dataclass(frozen=True)
class TrackerConfig:
    max_accuracy_m: float = 100.0
    corridor_m: float = 250.0
    regression_clamp_m: float = 30.0
    smoothing_alpha: float = 0.5
    stale_after_s: float = 90.0

    def __post_init__(self):
        if min(self.max_accuracy_m, self.corridor_m, self.regression_clamp_m, self.stale_after_s) <= 0:
            raise ValueError("tracker thresholds must be positive")
        if not 0 < self.smoothing_alpha <= 1:
            raise ValueError("smoothing_alpha must be in (0, 1]")


@dataclass(frozen=True)
class IngestResult:
    accepted: bool
    state: VehicleState | None = None
    reason: str | None = None


class _Entry:
    __slots__ = ("state", "has_position", "lock")

    def __init__(self, state: VehicleState):
        self.state = state
        self.has_position = False
        self.lock = threading.Lock()


def scheduled_time_at_distance(feed: StaticFeed, trip: Trip | str, d: float) -> float:
    """Scheduled seconds-since-midnight at along-route distance d, by
    piecewise-linear interpolation over the trip's stop profile, clamped to
    the first/last stop times outside the stop span."""
    if isinstance(trip, str):
        t = feed.trips.get(trip)
        if t is None:
            raise UnknownTrip(trip)
        trip = t
    pattern = feed.patterns[trip.pattern_id]
    alongs = [a for _, a in pattern.stops]
    times = [arr for _, arr in trip.stop_times]
    if d <= alongs[0]:
        return float(times[0])
    if d >= alongs[-1]:
        return float(times[-1])
    for i in range(len(alongs) - 1):
        if d <= alongs[i + 1]:
            frac = (d - alongs[i]) / (alongs[i + 1] - alongs[i])
            return times[i] + frac * (times[i + 1] - times[i])
    return float(times[-1])


class VehicleStore:
    """Tracked-vehicle state. Per-vehicle writes are serialized; readers get
    immutable snapshots, never torn state."""

    def __init__(self, feed: StaticFeed, config: TrackerConfig | None = None):
        self.feed = feed
        self.config = config or TrackerConfig()
        self._entries: dict[str, _Entry] = {}
        self._map_lock = threading.Lock()

    def assign_trip(self, vehicle_id: str, trip_id: str, start_of_day_ts: int) -> VehicleState:
        """Create or fully replace a vehicle's state, pending its first fix."""
        if trip_id not in self.feed.trips:
            raise UnknownTrip(trip_id)
        state = VehicleState(
            vehicle_id=vehicle_id,
            trip_id=trip_id,
            along_m=0.0,
            deviation_s=0.0,
            last_fix_ts=0,
            status=STATUS_TRACKING,
            start_of_day_ts=start_of_day_ts,
        )
        with self._map_lock:
            self._entries[vehicle_id] = _Entry(state)
        return state

    def get(self, vehicle_id: str) -> VehicleState:
        with self._map_lock:
            entry = self._entries.get(vehicle_id)
        if entry is None:
            raise UnknownVehicle(vehicle_id)
        return entry.state

    def all_states(self) -> list[VehicleState]:
        with self._map_lock:
            entries = list(self._entries.values())
        return sorted((e.state for e in entries), key=lambda s: s.vehicle_id)

    def state_for_trip(self, trip_id: str) -> VehicleState | None:
        for s in self.all_states():
            if s.trip_id == trip_id:
                return s
        return None

    def ingest_fix(self, fix: GpsFix) -> IngestResult:
        with self._map_lock:
            entry = self._entries.get(fix.vehicle_id)
        if entry is None:
            raise UnassignedVehicle(fix.vehicle_id)
        cfg = self.config
        with entry.lock:
            state = entry.state
            if fix.accuracy_m > cfg.max_accuracy_m:
                return IngestResult(False, None, REJECT_ACCURACY)
            if fix.ts <= state.last_fix_ts:
                return IngestResult(False, None, REJECT_OUT_OF_ORDER)
            trip = self.feed.trips[state.trip_id]
            shape = self.feed.patterns[trip.pattern_id].shape
            proj = geo.project_onto_polyline(fix.location, shape)
            if proj.offset_m > cfg.corridor_m:
                new_state = replace(state, last_fix_ts=fix.ts, status=STATUS_OFF_ROUTE)
                entry.state = new_state
                return IngestResult(True, new_state)
            candidate = max(proj.along_m, state.along_m - cfg.regression_clamp_m)
            candidate = max(candidate, state.along_m)
            if entry.has_position:
                along = cfg.smoothing_alpha * candidate + (1 - cfg.smoothing_alpha) * state.along_m
            else:
                along = candidate
            # deviation is anchored to the raw clamped projection: the smoothed
            # along_m lags a moving vehicle by (1-alpha)/alpha fix intervals,
            # which would bias deviation late even on a perfect trace
            deviation = (fix.ts - state.start_of_day_ts) - scheduled_time_at_distance(self.feed, trip, candidate)
            new_state = replace(
                state,
                along_m=along,
                deviation_s=deviation,
                last_fix_ts=fix.ts,
                status=STATUS_TRACKING,
            )
            entry.state = new_state
            entry.has_position = True
            return IngestResult(True, new_state)

    def sweep_stale(self, now: int) -> int:
        """Mark every vehicle whose last fix is older than stale_after_s."""
        count = 0
        with self._map_lock:
            entries = list(self._entries.values())
        for entry in entries:
            with entry.lock:
                s = entry.state
                if s.status != STATUS_STALE and now - s.last_fix_ts > self.config.stale_after_s:
                    entry.state = replace(s, status=STATUS_STALE)
                    count += 1
        return count
