"""Service alert store: CRUD with validation, time-window queries, and an
atomically rewritten JSON snapshot for persistence."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import UnknownAlert, UnknownEntityRef, ValidationFailed
from .feed import StaticFeed

SEVERITIES = ("info", "warning", "severe")
_SEVERITY_RANK = {s: i for i, s in enumerate(SEVERITIES)}
MAX_SUMMARY_LEN = 140


@dataclass(frozen=True)
class ServiceAlert:
    alert_id: str
    summary: str
    description: str
    severity: str
    affected_route_ids: frozenset[str]
    affected_stop_ids: frozenset[str]
    active_from: int
    active_until: int
    created_ts: int
    modified_ts: int

    def to_json(self) -> dict:
        d = asdict(self)
        d["affected_route_ids"] = sorted(self.affected_route_ids)
        d["affected_stop_ids"] = sorted(self.affected_stop_ids)
        return d


@dataclass(frozen=True)
class AlertDraft:
    summary: str
    description: str = ""
    severity: str = "info"
    affected_route_ids: frozenset[str] = field(default_factory=frozenset)
    affected_stop_ids: frozenset[str] = field(default_factory=frozenset)
    active_from: int = 0
    active_until: int = 0


def _validate_draft(draft: AlertDraft, feed: StaticFeed) -> None:
    if not draft.summary:
        raise ValidationFailed("summary", "must be nonempty")
    if len(draft.summary) > MAX_SUMMARY_LEN:
        raise ValidationFailed("summary", f"longer than {MAX_SUMMARY_LEN} chars")
    if draft.severity not in SEVERITIES:
        raise ValidationFailed("severity", f"must be one of {', '.join(SEVERITIES)}")
    if draft.active_from >= draft.active_until:
        raise ValidationFailed("active_from", "must be before active_until")
    for rid in draft.affected_route_ids:
        if rid not in feed.routes:
            raise UnknownEntityRef(f"route {rid}")
    for sid in draft.affected_stop_ids:
        if sid not in feed.stops:
            raise UnknownEntityRef(f"stop {sid}")


class AlertStore:
    """In-memory alert map persisted as a JSON snapshot (write temp, rename).

    Mutations are serialized; reads see the latest committed snapshot.
    """

    def __init__(self, feed: StaticFeed, path: str | Path | None = None, clock=time.time):
        self.feed = feed
        self.path = Path(path) if path is not None else None
        self._clock = clock
        self._lock = threading.Lock()
        self._alerts: dict[str, ServiceAlert] = {}
        self._next_id = 1
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        data = json.loads(self.path.read_text(encoding="utf-8"))
        for obj in data:
            alert = ServiceAlert(
                alert_id=obj["alert_id"],
                summary=obj["summary"],
                description=obj["description"],
                severity=obj["severity"],
                affected_route_ids=frozenset(obj["affected_route_ids"]),
                affected_stop_ids=frozenset(obj["affected_stop_ids"]),
                active_from=obj["active_from"],
                active_until=obj["active_until"],
                created_ts=obj["created_ts"],
                modified_ts=obj["modified_ts"],
            )
            self._alerts[alert.alert_id] = alert
        numeric = [int(a[6:]) for a in self._alerts if a.startswith("alert-") and a[6:].isdigit()]
        self._next_id = max(numeric, default=0) + 1

    def _persist(self) -> None:
        if self.path is None:
            return
        payload = json.dumps([a.to_json() for a in self._alerts.values()], indent=2, sort_keys=True)
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, self.path)

    def create(self, draft: AlertDraft) -> ServiceAlert:
        _validate_draft(draft, self.feed)
        with self._lock:
            now = int(self._clock())
            alert = ServiceAlert(
                alert_id=f"alert-{self._next_id}",
                summary=draft.summary,
                description=draft.description,
                severity=draft.severity,
                affected_route_ids=frozenset(draft.affected_route_ids),
                affected_stop_ids=frozenset(draft.affected_stop_ids),
                active_from=draft.active_from,
                active_until=draft.active_until,
                created_ts=now,
                modified_ts=now,
            )
            self._next_id += 1
            self._alerts[alert.alert_id] = alert
            self._persist()
            return alert

    def update(self, alert_id: str, draft: AlertDraft) -> ServiceAlert:
        _validate_draft(draft, self.feed)
        with self._lock:
            existing = self._alerts.get(alert_id)
            if existing is None:
                raise UnknownAlert(alert_id)
            updated = replace(
                existing,
                summary=draft.summary,
                description=draft.description,
                severity=draft.severity,
                affected_route_ids=frozenset(draft.affected_route_ids),
                affected_stop_ids=frozenset(draft.affected_stop_ids),
                active_from=draft.active_from,
                active_until=draft.active_until,
                modified_ts=max(int(self._clock()), existing.created_ts),
            )
            self._alerts[alert_id] = updated
            self._persist()
            return updated

    def delete(self, alert_id: str) -> None:
        with self._lock:
            if alert_id not in self._alerts:
                raise UnknownAlert(alert_id)
            del self._alerts[alert_id]
            self._persist()

    def get(self, alert_id: str) -> ServiceAlert:
        with self._lock:
            alert = self._alerts.get(alert_id)
        if alert is None:
            raise UnknownAlert(alert_id)
        return alert

    def all_alerts(self) -> list[ServiceAlert]:
        with self._lock:
            return list(self._alerts.values())

    def active_alerts_for(self, target: str, now: int) -> list[ServiceAlert]:
        """Active alerts for a stop_id, route_id, or "all". A stop target also
        inherits alerts on any route whose patterns serve that stop."""
        if target == "all":
            matches = lambda a: True  # noqa: E731
        elif target in self.feed.stops:
            stop_routes = self.feed.routes_serving_stop(target)
            matches = lambda a: (  # noqa: E731
                target in a.affected_stop_ids or bool(stop_routes & a.affected_route_ids)
            )
        elif target in self.feed.routes:
            matches = lambda a: target in a.affected_route_ids  # noqa: E731
        else:
            raise UnknownEntityRef(target)
        active = [
            a for a in self.all_alerts()
            if a.active_from <= now < a.active_until and matches(a)
        ]
        active.sort(key=lambda a: (-_SEVERITY_RANK[a.severity], a.active_from, a.alert_id))
        return active
