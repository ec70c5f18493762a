"""Deterministic GPS trace generator and scenario runner.

Vehicles follow the schedule's piecewise speed shifted by a constant
departure offset, so true arrival times are exactly scheduled + offset and
prediction error is well-defined. Perturbations (noise, dropout, reordering,
accuracy changes) apply only to emitted fixes, never to ground truth.

Randomness comes from a documented portable generator (xorshift64* seeded
through splitmix64), so the same seed yields byte-identical traces anywhere.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field

from . import geo
from .errors import InvalidSpec, TargetUnreachable, UnknownTrip
from .feed import StaticFeed
from .geo import GeoPoint, M_PER_DEG
from .tracker import GpsFix, VehicleStore

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Prng:
    """xorshift64* stream; state seeded with splitmix64(seed)."""

    def __init__(self, seed: int):
        self._s = _splitmix64(seed & _MASK64) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        s = self._s
        s ^= (s >> 12)
        s ^= (s << 25) & _MASK64
        s ^= (s >> 27)
        self._s = s
        return (s * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def gauss_pair(self) -> tuple[float, float]:
        """Two independent standard normals (Box-Muller)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(2 * math.pi * u2), r * math.sin(2 * math.pi * u2)


@dataclass(frozen=True)
class RunSpec:
    trip_id: str
    vehicle_id: str
    depart_offset_s: int = 0
    fix_interval_s: int = 10
    noise_sigma_m: float = 0.0
    dropout_p: float = 0.0
    reorder_p: float = 0.0
    reorder_delay_s: int = 0
    accuracy_profile: tuple[tuple[int, float], ...] = ((0, 10.0),)

    def validate(self) -> None:
        if self.fix_interval_s <= 0:
            raise InvalidSpec("fix_interval_s must be positive")
        for name, p in (("dropout_p", self.dropout_p), ("reorder_p", self.reorder_p)):
            if not 0.0 <= p <= 1.0:
                raise InvalidSpec(f"{name} must be in [0, 1]")
        if self.noise_sigma_m < 0:
            raise InvalidSpec("noise_sigma_m must be >= 0")
        if not self.accuracy_profile or self.accuracy_profile[0][0] != 0:
            raise InvalidSpec("accuracy_profile must start at offset 0")


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    runs: tuple[RunSpec, ...]
    start_of_day_ts: int = 86400  # unix seconds at local midnight

    @staticmethod
    def from_json(obj: dict) -> "ScenarioSpec":
        try:
            runs = tuple(
                RunSpec(
                    trip_id=r["trip_id"],
                    vehicle_id=r["vehicle_id"],
                    depart_offset_s=r.get("depart_offset_s", 0),
                    fix_interval_s=r.get("fix_interval_s", 10),
                    noise_sigma_m=r.get("noise_sigma_m", 0.0),
                    dropout_p=r.get("dropout_p", 0.0),
                    reorder_p=r.get("reorder_p", 0.0),
                    reorder_delay_s=r.get("reorder_delay_s", 0),
                    accuracy_profile=tuple(
                        (int(f), float(a)) for f, a in r.get("accuracy_profile", [[0, 10.0]])
                    ),
                )
                for r in obj["runs"]
            )
            return ScenarioSpec(
                seed=int(obj["seed"]),
                runs=runs,
                start_of_day_ts=int(obj.get("start_of_day_ts", 86400)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidSpec(str(e))


@dataclass(frozen=True)
class GroundTruth:
    stop_arrivals: tuple[tuple[str, int], ...]   # (stop_id, true arrival unix ts)
    along_by_ts: tuple[tuple[int, float], ...]   # true along_m at each fix time


@dataclass(frozen=True)
class Trace:
    run: RunSpec
    fixes: tuple[GpsFix, ...]        # in emission order
    emit_ts: tuple[int, ...]         # server-arrival time of each fix
    truth: GroundTruth


def _distance_at_time(profile: list[tuple[float, int]], s: float) -> float:
    """Along-route distance at schedule second s; piecewise-linear between
    stops, clamped to the stop span."""
    if s <= profile[0][1]:
        return profile[0][0]
    if s >= profile[-1][1]:
        return profile[-1][0]
    for (d0, t0), (d1, t1) in zip(profile, profile[1:]):
        if s <= t1:
            frac = (s - t0) / (t1 - t0)
            return d0 + frac * (d1 - d0)
    return profile[-1][0]


def generate_trace(feed: StaticFeed, run: RunSpec, seed: int, run_index: int = 0,
                   start_of_day_ts: int = 86400) -> Trace:
    """Generate one vehicle's perturbed fix stream plus its ground truth."""
    run.validate()
    trip = feed.trips.get(run.trip_id)
    if trip is None:
        raise UnknownTrip(run.trip_id)
    pattern = feed.patterns[trip.pattern_id]
    shape = pattern.shape
    profile = [(along, arr) for (_, along), (_, arr) in zip(pattern.stops, trip.stop_times)]

    truth_stops = tuple(
        (sid, start_of_day_ts + arr + run.depart_offset_s) for sid, arr in trip.stop_times
    )

    rng = Prng(seed + run_index)
    t_depart = trip.stop_times[0][1] + run.depart_offset_s
    t_end = trip.stop_times[-1][1] + run.depart_offset_s

    emissions: list[tuple[int, int, GpsFix]] = []  # (emit_ts, seq, fix)
    along_samples: list[tuple[int, float]] = []
    seq = 0
    t = t_depart
    while t <= t_end:
        ts = start_of_day_ts + t
        true_along = _distance_at_time(profile, t - run.depart_offset_s)
        along_samples.append((ts, true_along))
        true_pos = geo.point_at_distance(shape, min(true_along, shape.length_m))
        # perturbation draws happen every fix so the stream stays aligned
        nx, ny = rng.gauss_pair()
        drop = rng.uniform() < run.dropout_p
        delay = rng.uniform() < run.reorder_p
        if not drop:
            dlat = run.noise_sigma_m * ny / M_PER_DEG
            dlon = run.noise_sigma_m * nx / (M_PER_DEG * math.cos(math.radians(true_pos.lat)))
            elapsed = t - t_depart
            accuracy = run.accuracy_profile[0][1]
            for from_s, acc in run.accuracy_profile:
                if elapsed >= from_s:
                    accuracy = acc
            fix = GpsFix(
                vehicle_id=run.vehicle_id,
                ts=ts,
                location=GeoPoint(true_pos.lat + dlat, true_pos.lon + dlon),
                accuracy_m=accuracy,
            )
            emit_ts = ts + (run.reorder_delay_s if delay else 0)
            emissions.append((emit_ts, seq, fix))
        seq += 1
        t += run.fix_interval_s

    emissions.sort(key=lambda e: (e[0], e[1]))
    return Trace(
        run=run,
        fixes=tuple(f for _, _, f in emissions),
        emit_ts=tuple(e for e, _, _ in emissions),
        truth=GroundTruth(stop_arrivals=truth_stops, along_by_ts=tuple(along_samples)),
    )


# --- scenario replay targets ---

class InProcessTarget:
    def __init__(self, store: VehicleStore, feed: StaticFeed):
        self.store = store
        self.feed = feed

    def assign(self, vehicle_id: str, trip_id: str, start_of_day_ts: int) -> None:
        self.store.assign_trip(vehicle_id, trip_id, start_of_day_ts)

    def ingest(self, fix: GpsFix) -> tuple[bool, str | None, float]:
        result = self.store.ingest_fix(fix)
        along = result.state.along_m if result.state is not None else self.store.get(fix.vehicle_id).along_m
        return result.accepted, result.reason, along

    def arrivals(self, stop_id: str, now: int, horizon_s: int) -> list[dict]:
        from .arrivals import predict_arrivals_for_stop
        ests = predict_arrivals_for_stop(self.feed, self.store, stop_id, now, horizon_s=horizon_s)
        return [
            {"trip_id": e.trip_id, "predicted_ts": e.predicted_ts, "source": e.source}
            for e in ests
        ]


class HttpTarget:
    def __init__(self, base_url: str):
        import httpx
        self.base = base_url.rstrip("/")
        self._client = httpx.Client(timeout=10.0)

    def _check(self, resp):
        if resp.status_code >= 500:
            raise TargetUnreachable(f"{resp.request.url}: {resp.status_code}")
        return resp

    def assign(self, vehicle_id: str, trip_id: str, start_of_day_ts: int) -> None:
        try:
            self._check(self._client.post(
                f"{self.base}/api/vehicle-assignments",
                json={"vehicle_id": vehicle_id, "trip_id": trip_id, "start_of_day_ts": start_of_day_ts},
            ))
        except Exception as e:
            raise TargetUnreachable(str(e))

    def ingest(self, fix: GpsFix) -> tuple[bool, str | None, float]:
        try:
            resp = self._check(self._client.post(
                f"{self.base}/api/vehicle-positions",
                json={
                    "vehicle_id": fix.vehicle_id,
                    "ts": fix.ts,
                    "lat": fix.location.lat,
                    "lon": fix.location.lon,
                    "accuracy_m": fix.accuracy_m,
                },
            ))
        except TargetUnreachable:
            raise
        except Exception as e:
            raise TargetUnreachable(str(e))
        body = resp.json()
        state = body.get("state") or {}
        return body["accepted"], body.get("reason"), state.get("along_m", 0.0)

    def arrivals(self, stop_id: str, now: int, horizon_s: int) -> list[dict]:
        try:
            resp = self._check(self._client.get(
                f"{self.base}/api/arrivals-and-departures-for-stop/{stop_id}",
                params={"now": now, "horizon_s": horizon_s},
            ))
        except TargetUnreachable:
            raise
        except Exception as e:
            raise TargetUnreachable(str(e))
        return resp.json()["arrivals"]


def run_scenario(feed: StaticFeed, spec: ScenarioSpec, target, realtime: bool = False) -> dict:
    """Replay every run's fixes in emission order and report per-stop
    prediction errors against ground truth, rejection counts, and the
    largest deviation jump between consecutive accepted fixes."""
    traces = [
        generate_trace(feed, run, spec.seed, run_index=i, start_of_day_ts=spec.start_of_day_ts)
        for i, run in enumerate(spec.runs)
    ]
    for run in spec.runs:
        target.assign(run.vehicle_id, run.trip_id, spec.start_of_day_ts)

    # merge all runs' emissions into one global arrival order
    events = []
    for run_idx, trace in enumerate(traces):
        for fix, emit in zip(trace.fixes, trace.emit_ts):
            events.append((emit, run_idx, fix))
    events.sort(key=lambda e: (e[0], e[1], e[2].ts))

    run_reports = []
    for run_idx, (run, trace) in enumerate(zip(spec.runs, traces)):
        pattern = feed.patterns[feed.trips[run.trip_id].pattern_id]
        run_reports.append({
            "vehicle_id": run.vehicle_id,
            "trip_id": run.trip_id,
            "accepted": 0,
            "rejections": {"accuracy_too_low": 0, "out_of_order": 0},
            "max_deviation_jump_s": 0.0,
            "_prev_deviation": None,
            "_along": 0.0,
            "stops": [
                {
                    "stop_id": sid,
                    "stop_along_m": along,
                    "true_arrival_ts": dict(trace.truth.stop_arrivals)[sid],
                    "samples": [],
                }
                for sid, along in pattern.stops
            ],
        })

    horizon_s = 24 * 3600
    prev_emit = None
    for emit_ts, run_idx, fix in events:
        if realtime and prev_emit is not None and emit_ts > prev_emit:
            _time.sleep(emit_ts - prev_emit)
        prev_emit = emit_ts
        report = run_reports[run_idx]
        accepted, reason, along = target.ingest(fix)
        if not accepted:
            report["rejections"][reason] = report["rejections"].get(reason, 0) + 1
            continue
        report["accepted"] += 1
        run = spec.runs[run_idx]
        deviation = (fix.ts - spec.start_of_day_ts) - _scheduled_at(feed, run.trip_id, along)
        if report["_prev_deviation"] is not None:
            jump = abs(deviation - report["_prev_deviation"])
            report["max_deviation_jump_s"] = max(report["max_deviation_jump_s"], jump)
        report["_prev_deviation"] = deviation
        report["_along"] = along
        # query every downstream stop before the vehicle passes it
        for stop in report["stops"]:
            if stop["stop_along_m"] <= along:
                continue
            for est in target.arrivals(stop["stop_id"], emit_ts, horizon_s):
                if est["trip_id"] == run.trip_id:
                    stop["samples"].append([
                        report["accepted"],
                        est["predicted_ts"] - stop["true_arrival_ts"],
                        est["source"],
                    ])
                    break

    for report in run_reports:
        del report["_prev_deviation"]
        del report["_along"]
    return {"seed": spec.seed, "start_of_day_ts": spec.start_of_day_ts, "runs": run_reports}


def _scheduled_at(feed: StaticFeed, trip_id: str, along: float) -> float:
    from .tracker import scheduled_time_at_distance
    return scheduled_time_at_distance(feed, trip_id, along)


def trace_to_jsonl(trace: Trace) -> str:
    lines = []
    for fix, emit in zip(trace.fixes, trace.emit_ts):
        lines.append(json.dumps({
            "vehicle_id": fix.vehicle_id,
            "ts": fix.ts,
            "lat": fix.location.lat,
            "lon": fix.location.lon,
            "accuracy_m": fix.accuracy_m,
            "emit_ts": emit,
        }, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
