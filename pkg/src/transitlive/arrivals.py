"""Arrival prediction: schedule plus live vehicle deviation, and the
direction-of-travel bearing used by map UIs.

Deviation propagates unchanged to all downstream stops. A stop the vehicle
has already passed produces no estimate for that trip.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import geo, tracker
from .errors import StopNotOnPattern, UnknownRoute, UnknownStop
from .feed import StaticFeed, trips_serving_stop
from .geo import GeoPoint
from .tracker import STATUS_TRACKING, VehicleStore

SOURCE_REALTIME = "realtime"
SOURCE_SCHEDULE = "schedule"

DEFAULT_HORIZON_S = 1800
DEFAULT_LOOKBACK_S = 300


@dataclass(frozen=True)
class ArrivalEstimate:
    stop_id: str
    trip_id: str
    route_id: str
    scheduled_ts: int
    predicted_ts: int
    deviation_s: int
    source: str
    vehicle_distance_m: float | None = None  # upstream distance; realtime only


def _day_anchor(now: int) -> int:
    return (now // 86400) * 86400


def predict_arrivals_for_stop(
    feed: StaticFeed,
    store: VehicleStore,
    stop_id: str,
    now: int,
    horizon_s: int = DEFAULT_HORIZON_S,
    lookback_s: int = DEFAULT_LOOKBACK_S,
) -> list[ArrivalEstimate]:
    """Estimates for every trip serving the stop with a scheduled arrival in
    [now - lookback_s, now + horizon_s], sorted by predicted_ts then trip_id."""
    if stop_id not in feed.stops:
        raise UnknownStop(stop_id)
    out: list[ArrivalEstimate] = []
    for trip_id, arrival_s in trips_serving_stop(feed, stop_id):
        trip = feed.trips[trip_id]
        vehicle = store.state_for_trip(trip_id)
        # trips without a live vehicle are anchored to the current service day
        anchor = vehicle.start_of_day_ts if vehicle is not None else _day_anchor(now)
        scheduled_ts = anchor + arrival_s
        if not (now - lookback_s <= scheduled_ts <= now + horizon_s):
            continue
        pattern = feed.patterns[trip.pattern_id]
        stop_along = next(a for sid, a in pattern.stops if sid == stop_id)
        if vehicle is not None and vehicle.status == STATUS_TRACKING:
            if vehicle.along_m >= stop_along:
                continue  # already served
            deviation = int(round(vehicle.deviation_s))
            out.append(ArrivalEstimate(
                stop_id=stop_id,
                trip_id=trip_id,
                route_id=pattern.route_id,
                scheduled_ts=scheduled_ts,
                predicted_ts=scheduled_ts + deviation,
                deviation_s=deviation,
                source=SOURCE_REALTIME,
                vehicle_distance_m=stop_along - vehicle.along_m,
            ))
        else:
            out.append(ArrivalEstimate(
                stop_id=stop_id,
                trip_id=trip_id,
                route_id=pattern.route_id,
                scheduled_ts=scheduled_ts,
                predicted_ts=scheduled_ts,
                deviation_s=0,
                source=SOURCE_SCHEDULE,
            ))
    out.sort(key=lambda e: (e.predicted_ts, e.trip_id))
    return out


def direction_of_travel_deg(feed: StaticFeed, stop_id: str, pattern_id: str) -> float:
    """Bearing of the shape segment at the stop's along-route position."""
    if stop_id not in feed.stops:
        raise UnknownStop(stop_id)
    pattern = feed.patterns.get(pattern_id)
    if pattern is None or not any(sid == stop_id for sid, _ in pattern.stops):
        raise StopNotOnPattern(f"{stop_id} not on {pattern_id}")
    along = next(a for sid, a in pattern.stops if sid == stop_id)
    idx = geo.segment_index_at_distance(pattern.shape, along)
    a = pattern.shape.points[idx]
    b = pattern.shape.points[idx + 1]
    return geo.initial_bearing_deg(a, b)


def vehicles_for_route(
    feed: StaticFeed, store: VehicleStore, route_id: str
) -> list[tuple[str, str, GeoPoint, str]]:
    """Live vehicles on the route as (vehicle_id, trip_id, location, status)."""
    if route_id not in feed.routes:
        raise UnknownRoute(route_id)
    out = []
    for state in store.all_states():
        trip = feed.trips.get(state.trip_id)
        if trip is None:
            continue
        pattern = feed.patterns[trip.pattern_id]
        if pattern.route_id != route_id:
            continue
        loc = geo.point_at_distance(pattern.shape, min(state.along_m, pattern.shape.length_m))
        out.append((state.vehicle_id, state.trip_id, loc, state.status))
    return out
