"""Timestamp helpers: unix seconds internally, ISO-8601 UTC on the wire."""

from __future__ import annotations

import datetime as dt

from .errors import ValidationError

_UTC = dt.timezone.utc


def to_iso(ts: float | int) -> str:
    """Format unix seconds as ISO-8601 UTC with a trailing ``Z``."""
    stamp = dt.datetime.fromtimestamp(ts, tz=_UTC)
    if stamp.microsecond == 0:
        return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")
    return stamp.isoformat().replace("+00:00", "Z")


def from_iso(text: str) -> float:
    """Parse an ISO-8601 timestamp (``Z`` or explicit offset) to unix seconds."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        stamp = dt.datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValidationError(f"bad ISO-8601 timestamp {text!r}: {exc}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=_UTC)
    return stamp.timestamp()


def parse_when(value: str | int | float) -> float:
    """Accept either unix seconds (numeric) or an ISO-8601 string."""
    if isinstance(value, (int, float)):
        return float(value)
    raw = value.strip()
    try:
        return float(raw)
    except ValueError:
        return from_iso(raw)
