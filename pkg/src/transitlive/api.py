"""HTTP/JSON API over the feed, tracker, arrivals, and alert modules.

Handlers are thin: every response is produced by the documented module
calls, times are unix seconds (integers), distances are meters.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import arrivals as arrivals_mod
from . import errors as err
from . import geo
from .alerts import AlertDraft, AlertStore, ServiceAlert
from .feed import StaticFeed, load_feed
from .geo import GeoPoint, GridIndex
from .tracker import GpsFix, TrackerConfig, VehicleState, VehicleStore

SWEEP_INTERVAL_S = 10

_NOT_FOUND = (
    err.UnknownStop, err.UnknownRoute, err.UnknownTrip, err.UnknownVehicle,
    err.UnknownAlert, err.StopNotOnPattern, err.UnknownEntityRef,
)
_BAD_REQUEST = (err.ValidationFailed, err.DegenerateInput, err.OutOfRange, err.InvalidSpec)
_CONFLICT = (err.UnassignedVehicle,)


@dataclass(frozen=True)
class ApiDefaults:
    horizon_s: int = arrivals_mod.DEFAULT_HORIZON_S
    lookback_s: int = arrivals_mod.DEFAULT_LOOKBACK_S
    default_radius_m: float = 500.0


@dataclass(frozen=True)
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8000"
    feed_dir: str = "feed"
    alerts_path: str = "alerts.json"
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    defaults: ApiDefaults = field(default_factory=ApiDefaults)

    @staticmethod
    def from_json_file(path: str | Path) -> "ServiceConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return ServiceConfig(
            listen_addr=obj.get("listen_addr", "127.0.0.1:8000"),
            feed_dir=obj["feed_dir"],
            alerts_path=obj.get("alerts_path", "alerts.json"),
            tracker=TrackerConfig(**obj.get("tracker", {})),
            defaults=ApiDefaults(**obj.get("defaults", {})),
        )


def _stop_json(feed: StaticFeed, stop_id: str) -> dict:
    s = feed.stops[stop_id]
    return {
        "stop_id": s.stop_id,
        "code": s.code,
        "name": s.name,
        "lat": s.location.lat,
        "lon": s.location.lon,
    }


def _alert_json(a: ServiceAlert) -> dict:
    return a.to_json()


def _estimate_json(e: arrivals_mod.ArrivalEstimate) -> dict:
    out = {
        "stop_id": e.stop_id,
        "trip_id": e.trip_id,
        "route_id": e.route_id,
        "scheduled_ts": e.scheduled_ts,
        "predicted_ts": e.predicted_ts,
        "deviation_s": e.deviation_s,
        "source": e.source,
    }
    if e.vehicle_distance_m is not None:
        out["vehicle_distance_m"] = e.vehicle_distance_m
    return out


def _vehicle_json(state: VehicleState) -> dict:
    return {
        "vehicle_id": state.vehicle_id,
        "trip_id": state.trip_id,
        "along_m": state.along_m,
        "deviation_s": state.deviation_s,
        "last_fix_ts": state.last_fix_ts,
        "status": state.status,
        "start_of_day_ts": state.start_of_day_ts,
    }


def render_text_arrivals(estimates, alerts, stop, now: int) -> str:
    """Plain-text stop view for text-only browsers: header line, one line per
    arrival in whole minutes, one line per active alert."""
    lines = [f"STOP {stop.code} {stop.name}"]
    for e in estimates:
        minutes = max(0, round((e.predicted_ts - now) / 60))
        tag = "realtime" if e.source == arrivals_mod.SOURCE_REALTIME else "sched"
        lines.append(f"{e.route_short_name} in {minutes} min ({tag})")
    for a in alerts:
        lines.append(f"! {a.severity}: {a.summary}")
    return "\n".join(lines) + "\n"


def create_app(
    feed: StaticFeed,
    store: VehicleStore,
    alert_store: AlertStore,
    defaults: ApiDefaults | None = None,
    run_sweeper: bool = False,
) -> FastAPI:
    defaults = defaults or ApiDefaults()
    stop_index = GridIndex((s.stop_id, s.location) for s in feed.stops.values())

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = None
        if run_sweeper:
            async def sweeper():
                while True:
                    await asyncio.sleep(SWEEP_INTERVAL_S)
                    store.sweep_stale(int(time.time()))
            task = asyncio.create_task(sweeper())
        yield
        if task is not None:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(title="transitlive", lifespan=lifespan)

    @app.exception_handler(err.TransitError)
    async def transit_error_handler(request: Request, exc: err.TransitError):
        if isinstance(exc, _NOT_FOUND):
            status = 404
        elif isinstance(exc, _BAD_REQUEST):
            status = 400
        elif isinstance(exc, _CONFLICT):
            status = 409
        else:
            status = 500
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"code": "invalid_argument", "message": str(exc)})

    def _now(now: int | None) -> int:
        return int(time.time()) if now is None else now

    @app.get("/api/stops-for-location")
    def stops_for_location(lat: float, lon: float, radius_m: float | None = None):
        radius = defaults.default_radius_m if radius_m is None else radius_m
        hits = geo.stops_near(stop_index, GeoPoint(lat, lon), radius)
        return {"stops": [dict(_stop_json(feed, sid), distance_m=d) for sid, d in hits]}

    @app.get("/api/stop/{stop_id}")
    def stop_detail(stop_id: str):
        if stop_id not in feed.stops:
            raise err.UnknownStop(stop_id)
        patterns = []
        for p in feed.patterns_serving_stop(stop_id):
            patterns.append({
                "pattern_id": p.pattern_id,
                "route_id": p.route_id,
                "direction_id": p.direction_id,
                "direction_of_travel_deg": arrivals_mod.direction_of_travel_deg(feed, stop_id, p.pattern_id),
            })
        return dict(_stop_json(feed, stop_id), patterns=patterns)

    @app.get("/api/arrivals-and-departures-for-stop/{stop_id}")
    def arrivals_for_stop(
        stop_id: str,
        now: int | None = None,
        horizon_s: int | None = None,
        lookback_s: int | None = None,
    ):
        t = _now(now)
        ests = arrivals_mod.predict_arrivals_for_stop(
            feed, store, stop_id, t,
            horizon_s=defaults.horizon_s if horizon_s is None else horizon_s,
            lookback_s=defaults.lookback_s if lookback_s is None else lookback_s,
        )
        active = alert_store.active_alerts_for(stop_id, t)
        return {
            "stop": _stop_json(feed, stop_id),
            "now": t,
            "arrivals": [_estimate_json(e) for e in ests],
            "alerts": [_alert_json(a) for a in active],
        }

    @app.get("/api/routes")
    def routes():
        return {
            "routes": [
                {"route_id": r.route_id, "short_name": r.short_name, "long_name": r.long_name}
                for r in feed.routes.values()
            ]
        }

    @app.get("/api/route/{route_id}")
    def route_detail(route_id: str):
        r = feed.routes.get(route_id)
        if r is None:
            raise err.UnknownRoute(route_id)
        patterns = []
        for pid in feed.patterns_by_route.get(route_id, ()):
            p = feed.patterns[pid]
            patterns.append({
                "pattern_id": p.pattern_id,
                "direction_id": p.direction_id,
                "shape": [[pt.lat, pt.lon] for pt in p.shape.points],
                "stops": [
                    dict(_stop_json(feed, sid), along_shape_m=along) for sid, along in p.stops
                ],
            })
        return {
            "route_id": r.route_id,
            "short_name": r.short_name,
            "long_name": r.long_name,
            "patterns": patterns,
        }

    def _vehicle_with_location(state: VehicleState) -> dict:
        pattern = feed.patterns[feed.trips[state.trip_id].pattern_id]
        loc = geo.point_at_distance(pattern.shape, min(state.along_m, pattern.shape.length_m))
        return dict(_vehicle_json(state), lat=loc.lat, lon=loc.lon)

    @app.get("/api/vehicles")
    def vehicles():
        return {"vehicles": [_vehicle_with_location(s) for s in store.all_states()]}

    @app.get("/api/vehicle/{vehicle_id}")
    def vehicle_detail(vehicle_id: str):
        return _vehicle_with_location(store.get(vehicle_id))

    @app.post("/api/vehicle-positions")
    def post_position(body: dict):
        fix = GpsFix(
            vehicle_id=str(body["vehicle_id"]),
            ts=int(body["ts"]),
            location=GeoPoint(float(body["lat"]), float(body["lon"])),
            accuracy_m=float(body["accuracy_m"]),
        )
        result = store.ingest_fix(fix)
        return {
            "accepted": result.accepted,
            "reason": result.reason,
            "state": _vehicle_json(result.state) if result.state is not None else None,
        }

    @app.post("/api/vehicle-assignments")
    def post_assignment(body: dict):
        state = store.assign_trip(
            str(body["vehicle_id"]), str(body["trip_id"]), int(body["start_of_day_ts"])
        )
        return {"state": _vehicle_json(state)}

    @app.post("/api/alerts", status_code=201)
    def create_alert(body: dict):
        return _alert_json(alert_store.create(_draft_from_body(body)))

    @app.put("/api/alerts/{alert_id}")
    def update_alert(alert_id: str, body: dict):
        return _alert_json(alert_store.update(alert_id, _draft_from_body(body)))

    @app.delete("/api/alerts/{alert_id}")
    def delete_alert(alert_id: str):
        alert_store.delete(alert_id)
        return {"deleted": alert_id}

    @app.get("/api/alerts")
    def list_alerts(
        stop_id: str | None = None,
        route_id: str | None = None,
        at: int | None = Query(default=None),
    ):
        t = _now(at)
        target = stop_id or route_id or "all"
        return {"alerts": [_alert_json(a) for a in alert_store.active_alerts_for(target, t)]}

    @app.get("/text/stop/{code}", response_class=PlainTextResponse)
    def text_stop(code: str, now: int | None = None):
        stop_id = feed.stops_by_code.get(code)
        if stop_id is None:
            raise err.UnknownStop(code)
        t = _now(now)
        ests = arrivals_mod.predict_arrivals_for_stop(
            feed, store, stop_id, t,
            horizon_s=defaults.horizon_s, lookback_s=defaults.lookback_s,
        )
        rendered = [
            _TextRow(route_short_name=feed.routes[e.route_id].short_name,
                     predicted_ts=e.predicted_ts, source=e.source)
            for e in ests
        ]
        active = alert_store.active_alerts_for(stop_id, t)
        return render_text_arrivals(rendered, active, feed.stops[stop_id], t)

    return app


@dataclass(frozen=True)
class _TextRow:
    route_short_name: str
    predicted_ts: int
    source: str


def _draft_from_body(body: dict) -> AlertDraft:
    return AlertDraft(
        summary=str(body.get("summary", "")),
        description=str(body.get("description", "")),
        severity=str(body.get("severity", "info")),
        affected_route_ids=frozenset(body.get("affected_route_ids", ())),
        affected_stop_ids=frozenset(body.get("affected_stop_ids", ())),
        active_from=int(body.get("active_from", 0)),
        active_until=int(body.get("active_until", 0)),
    )


def build_service(config: ServiceConfig) -> FastAPI:
    feed = load_feed(config.feed_dir)
    store = VehicleStore(feed, config.tracker)
    alert_store = AlertStore(feed, config.alerts_path)
    return create_app(feed, store, alert_store, config.defaults, run_sweeper=True)


def serve(config: ServiceConfig) -> None:
    """Run the service until terminated; in-flight requests finish on shutdown."""
    import uvicorn

    app = build_service(config)
    host, _, port = config.listen_addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
