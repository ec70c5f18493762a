import random

import pytest

from transitlive import geo
from transitlive.arrivals import (
    SOURCE_REALTIME,
    SOURCE_SCHEDULE,
    direction_of_travel_deg,
    predict_arrivals_for_stop,
    vehicles_for_route,
)
from transitlive.errors import StopNotOnPattern, UnknownRoute, UnknownStop
from transitlive.feed import load_feed
from transitlive.geo import GeoPoint
from transitlive.tracker import VehicleStore

from conftest import ORIGIN_LAT, ORIGIN_LON, north_point, write_feed_dir
from test_tracker import DAY, fix_at


class TestPredictArrivals:
    def test_unknown_stop(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        with pytest.raises(UnknownStop):
            predict_arrivals_for_stop(minimal_feed, store, "ghost", DAY)

    def test_no_trips_in_window(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        # trip arrives at s2 at DAY+120; query a much later 'now'
        assert predict_arrivals_for_stop(minimal_feed, store, "s2", DAY + 50000) == []

    def test_untracked_trip_schedule_source(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        now = DAY  # arrival at DAY+120, within default horizon
        [est] = predict_arrivals_for_stop(minimal_feed, store, "s2", now)
        assert est.source == SOURCE_SCHEDULE
        assert est.predicted_ts == est.scheduled_ts == DAY + 120
        assert est.deviation_s == 0
        assert est.vehicle_distance_m is None

    def test_realtime_estimate(self, line_feed):
        store = VehicleStore(line_feed)
        store.assign_trip("v1", "t1", DAY)
        # vehicle running 120 s late at along 1000 m when schedule says 100 s
        store.ingest_fix(fix_at(line_feed, 1000, DAY + 220))
        [est] = predict_arrivals_for_stop(line_feed, store, "s4", DAY + 220)
        assert est.source == SOURCE_REALTIME
        assert est.deviation_s == pytest.approx(120, abs=2)
        assert est.predicted_ts == est.scheduled_ts + est.deviation_s
        assert est.vehicle_distance_m == pytest.approx(2000, abs=2)

    def test_passed_stop_omitted(self, line_feed):
        store = VehicleStore(line_feed)
        store.assign_trip("v1", "t1", DAY)
        store.ingest_fix(fix_at(line_feed, 2500, DAY + 250))
        assert predict_arrivals_for_stop(line_feed, store, "s2", DAY + 250, lookback_s=10000) == []

    def test_stale_vehicle_falls_back_to_schedule(self, line_feed):
        store = VehicleStore(line_feed)
        store.assign_trip("v1", "t1", DAY)
        store.ingest_fix(fix_at(line_feed, 1000, DAY + 100))
        now = DAY + 100
        [rt] = predict_arrivals_for_stop(line_feed, store, "s4", now)
        assert rt.source == SOURCE_REALTIME
        store.sweep_stale(now + 1000)
        [sched] = predict_arrivals_for_stop(line_feed, store, "s4", now)
        assert sched.source == SOURCE_SCHEDULE
        assert sched.scheduled_ts == rt.scheduled_ts

    def test_sorted_by_predicted_then_trip(self, tmp_path):
        # two trips arriving in swapped schedule/predicted order
        stops = []
        for i in range(3):
            lat, lon = north_point(i * 1000.0)
            stops.append((f"s{i+1}", f"{i+1}", f"Stop {i+1}", lat, lon))
        end_lat, end_lon = north_point(2000.0)
        d = write_feed_dir(
            tmp_path / "f",
            stops=stops,
            routes=[("r1", "10", "L")],
            patterns=[("p1", "r1", 0)],
            shapes=[("p1", 0, ORIGIN_LAT, ORIGIN_LON), ("p1", 1, end_lat, end_lon)],
            trips=[("ta", "p1"), ("tb", "p1")],
            stop_times=[
                ("ta", 0, "s1", 0, 0.0), ("ta", 1, "s2", 100, 1000.0), ("ta", 2, "s3", 200, 2000.0),
                ("tb", 0, "s1", 60, 0.0), ("tb", 1, "s2", 160, 1000.0), ("tb", 2, "s3", 260, 2000.0),
            ],
            with_along=True,
        )
        feed = load_feed(d)
        store = VehicleStore(feed)
        store.assign_trip("va", "ta", DAY)
        # ta runs 300 s late so its prediction lands after tb's schedule time
        store.ingest_fix(fix_at(feed, 100, DAY + 310, vehicle_id="va"))
        ests = predict_arrivals_for_stop(feed, store, "s3", DAY + 310, lookback_s=600)
        assert [e.trip_id for e in ests] == ["tb", "ta"]
        assert ests == sorted(ests, key=lambda e: (e.predicted_ts, e.trip_id))

    def test_realtime_identity(self, line_feed):
        store = VehicleStore(line_feed)
        store.assign_trip("v1", "t1", DAY)
        store.ingest_fix(fix_at(line_feed, 1500, DAY + 100))
        for est in predict_arrivals_for_stop(line_feed, store, "s5", DAY + 100):
            if est.source == SOURCE_REALTIME:
                assert est.predicted_ts - est.scheduled_ts == est.deviation_s


class TestDirectionOfTravel:
    def test_northbound(self, line_feed):
        assert direction_of_travel_deg(line_feed, "s2", "p1") == pytest.approx(0.0, abs=0.1)

    def test_eastbound(self, tmp_path):
        from transitlive.geo import M_PER_DEG
        import math
        dlon = 1000.0 / (M_PER_DEG * math.cos(math.radians(ORIGIN_LAT)))
        d = write_feed_dir(
            tmp_path / "f",
            stops=[("s1", "1", "A", ORIGIN_LAT, ORIGIN_LON), ("s2", "2", "B", ORIGIN_LAT, ORIGIN_LON + dlon)],
            routes=[("r1", "10", "L")],
            patterns=[("p1", "r1", 0)],
            shapes=[("p1", 0, ORIGIN_LAT, ORIGIN_LON), ("p1", 1, ORIGIN_LAT, ORIGIN_LON + dlon)],
            trips=[("t1", "p1")],
            stop_times=[("t1", 0, "s1", 0), ("t1", 1, "s2", 120)],
        )
        feed = load_feed(d)
        assert direction_of_travel_deg(feed, "s1", "p1") == pytest.approx(90.0, abs=0.1)

    def test_stop_not_on_pattern(self, line_feed):
        with pytest.raises(StopNotOnPattern):
            direction_of_travel_deg(line_feed, "s1", "nope")

    def test_matches_geo_primitives_on_random_shapes(self, tmp_path):
        from test_geo import random_polyline
        rng = random.Random(17)
        for case in range(10):
            shape = random_polyline(rng, n_vertices=8)
            # stops at random distances along the shape
            alongs = sorted(rng.sample(range(50, int(shape.length_m) - 50), 3))
            stops = []
            for i, a in enumerate(alongs):
                p = geo.point_at_distance(shape, float(a))
                stops.append((f"s{i}", f"{i}", f"S{i}", p.lat, p.lon))
            d = write_feed_dir(
                tmp_path / f"dir{case}",
                stops=stops,
                routes=[("r1", "10", "L")],
                patterns=[("p1", "r1", 0)],
                shapes=[("p1", i, pt.lat, pt.lon) for i, pt in enumerate(shape.points)],
                trips=[("t1", "p1")],
                stop_times=[("t1", i, f"s{i}", i * 100, float(a)) for i, a in enumerate(alongs)],
                with_along=True,
            )
            feed = load_feed(d)
            for i, a in enumerate(alongs):
                idx = geo.segment_index_at_distance(feed.patterns["p1"].shape, float(a))
                expected = geo.initial_bearing_deg(
                    feed.patterns["p1"].shape.points[idx],
                    feed.patterns["p1"].shape.points[idx + 1],
                )
                assert direction_of_travel_deg(feed, f"s{i}", "p1") == pytest.approx(expected)


class TestVehiclesForRoute:
    def test_unknown_route(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        with pytest.raises(UnknownRoute):
            vehicles_for_route(minimal_feed, store, "ghost")

    def test_empty(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        assert vehicles_for_route(minimal_feed, store, "r1") == []

    def test_vehicle_at_start(self, minimal_feed):
        store = VehicleStore(minimal_feed)
        store.assign_trip("v1", "t1", DAY)
        [(vid, tid, loc, status)] = vehicles_for_route(minimal_feed, store, "r1")
        assert (vid, tid) == ("v1", "t1")
        assert loc == minimal_feed.patterns["p1"].shape.points[0]

    def test_location_round_trips(self, line_feed):
        store = VehicleStore(line_feed)
        store.assign_trip("v1", "t1", DAY)
        store.ingest_fix(fix_at(line_feed, 2345, DAY + 200))
        [(_, _, loc, _)] = vehicles_for_route(line_feed, store, "r1")
        proj = geo.project_onto_polyline(loc, line_feed.patterns["p1"].shape)
        assert proj.along_m == pytest.approx(store.get("v1").along_m, abs=1.0)
