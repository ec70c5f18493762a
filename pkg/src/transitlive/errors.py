"""Exception types shared across the service."""


class TransitError(Exception):
    """Base class for all domain errors."""

    code = "error"


# --- feed loading (all fatal, load is all-or-nothing) ---

class FeedError(TransitError):
    code = "feed_error"


class MissingFile(FeedError):
    code = "missing_file"


class ParseError(FeedError):
    code = "parse_error"

    def __init__(self, filename: str, line: int, detail: str):
        super().__init__(f"{filename}:{line}: {detail}")
        self.filename = filename
        self.line = line


class DanglingRef(FeedError):
    code = "dangling_ref"

    def __init__(self, kind: str, ref_id: str):
        super().__init__(f"unknown {kind}: {ref_id}")
        self.kind = kind
        self.ref_id = ref_id


class InvariantViolation(FeedError):
    code = "invariant_violation"


# --- lookups ---

class UnknownStop(TransitError):
    code = "unknown_stop"


class UnknownRoute(TransitError):
    code = "unknown_route"


class UnknownTrip(TransitError):
    code = "unknown_trip"


class UnknownVehicle(TransitError):
    code = "unknown_vehicle"


class UnassignedVehicle(TransitError):
    code = "unassigned_vehicle"


class StopNotOnPattern(TransitError):
    code = "stop_not_on_pattern"


# --- geometry ---

class DegenerateInput(TransitError):
    code = "degenerate_input"


class DegenerateShape(TransitError):
    code = "degenerate_shape"


class OutOfRange(TransitError):
    code = "out_of_range"


# --- alerts ---

class UnknownAlert(TransitError):
    code = "unknown_alert"


class UnknownEntityRef(TransitError):
    code = "unknown_entity_ref"


class ValidationFailed(TransitError):
    code = "validation_failed"

    def __init__(self, field: str, detail: str):
        super().__init__(f"{field}: {detail}")
        self.field = field


# --- simulator ---

class InvalidSpec(TransitError):
    code = "invalid_spec"


class TargetUnreachable(TransitError):
    code = "target_unreachable"
