"""Wiegand 26 frame codec and two-wire D0/D1 line simulation.

Frame layout, transmitted MSB-first:

    [E] [p23 .. p12] [p11 .. p0] [O]

- E: even parity over itself and the upper 12 payload bits
- O: odd parity over the lower 12 payload bits and itself
- 24-bit payload carries the floor-tag ID (6 uppercase hex characters)

The physical interface pulses line D0 for a 0-bit and line D1 for a
1-bit; ``emit_line_events``/``parse_line_events`` model that as timed
events with a configurable bit period and inter-frame timeout.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

FRAME_BITS = 26
PAYLOAD_BITS = 24
PAYLOAD_MAX = (1 << PAYLOAD_BITS) - 1

_UPPER_SHIFT = 12
_HALF_MASK = 0xFFF
_TAG_ID_RE = re.compile(r"[0-9A-F]{6}\Z")


class PayloadRangeError(ValidationError):
    """Payload does not fit in 24 bits."""


class FramingError(ValidationError):
    """Bit sequence is not exactly 26 bits."""


class ParityError(ValidationError):
    """A parity group check failed.

    ``half`` names the failing group: ``"upper"`` (even parity over the
    leading bit and payload bits 23..12) or ``"lower"`` (odd parity over
    payload bits 11..0 and the trailing bit).
    """

    def __init__(self, half: str):
        super().__init__(f"parity check failed in {half} half")
        self.half = half


class TruncationError(ValidationError):
    """Line-event stream was cut short or stalled past the timeout."""


@dataclass(frozen=True)
class Wiegand26Frame:
    leading_parity: int
    payload: int
    trailing_parity: int

    def bits(self) -> tuple[int, ...]:
        """All 26 bits in transmission order (leading parity first, payload MSB-first)."""
        payload_bits = tuple(
            (self.payload >> shift) & 1 for shift in range(PAYLOAD_BITS - 1, -1, -1)
        )
        return (self.leading_parity,) + payload_bits + (self.trailing_parity,)

    def bit_string(self) -> str:
        return "".join(str(b) for b in self.bits())


class Line(enum.Enum):
    D0 = "D0"
    D1 = "D1"


@dataclass(frozen=True)
class LineEvent:
    line: Line
    time_us: float


@dataclass(frozen=True)
class LineTiming:
    """Pulse/period/timeout defaults; the bit clock is not standardized."""

    pulse_us: float = 50.0
    period_us: float = 2_000.0
    timeout_us: float = 50_000.0


DEFAULT_TIMING = LineTiming()


def _check_payload(payload: int) -> None:
    if not isinstance(payload, int) or isinstance(payload, bool):
        raise PayloadRangeError(f"payload must be an int, got {type(payload).__name__}")
    if not 0 <= payload <= PAYLOAD_MAX:
        raise PayloadRangeError(f"payload 0x{payload:X} out of range (24 bits)")


def encode_frame(payload: int) -> Wiegand26Frame:
    """Wrap a 24-bit payload with its even/odd parity bits."""
    _check_payload(payload)
    upper = (payload >> _UPPER_SHIFT) & _HALF_MASK
    lower = payload & _HALF_MASK
    leading = upper.bit_count() & 1  # make {E, upper 12} even
    trailing = (lower.bit_count() & 1) ^ 1  # make {lower 12, O} odd
    return Wiegand26Frame(leading, payload, trailing)


def frame_from_bits(bits: Sequence[int]) -> Wiegand26Frame:
    """Reassemble and validate a frame from 26 bits in transmission order."""
    bits = list(bits)
    if len(bits) != FRAME_BITS:
        raise FramingError(f"expected {FRAME_BITS} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise FramingError("bits must be 0 or 1")
    leading = bits[0]
    trailing = bits[-1]
    payload = 0
    for bit in bits[1:-1]:
        payload = (payload << 1) | bit
    upper = (payload >> _UPPER_SHIFT) & _HALF_MASK
    lower = payload & _HALF_MASK
    if (leading + upper.bit_count()) % 2 != 0:
        raise ParityError("upper")
    if (lower.bit_count() + trailing) % 2 != 1:
        raise ParityError("lower")
    return Wiegand26Frame(leading, payload, trailing)


def decode_frame(bits: Sequence[int]) -> int:
    """Validate 26 bits and return the 24-bit payload."""
    return frame_from_bits(bits).payload


def parse_bit_string(text: str) -> list[int]:
    """Turn a string like ``"10100..."`` into a bit list (framing checked later)."""
    stripped = text.strip()
    if not stripped or set(stripped) - {"0", "1"}:
        raise FramingError(f"bit string must contain only 0/1, got {text!r}")
    return [int(c) for c in stripped]


def payload_to_tag_id(payload: int) -> str:
    """24-bit payload as 6 uppercase hex characters, zero-padded."""
    _check_payload(payload)
    return f"{payload:06X}"


def tag_id_to_payload(tag_id: str) -> int:
    """Inverse of :func:`payload_to_tag_id`."""
    if not _TAG_ID_RE.match(tag_id):
        raise ValidationError(
            f"tag id must be 6 uppercase hex characters, got {tag_id!r}"
        )
    return int(tag_id, 16)


def emit_line_events(
    frame: Wiegand26Frame, timing: LineTiming = DEFAULT_TIMING
) -> list[LineEvent]:
    """One pulse per bit, MSB-first, spaced by the configured bit period."""
    return [
        LineEvent(Line.D1 if bit else Line.D0, i * timing.period_us)
        for i, bit in enumerate(frame.bits())
    ]


def parse_line_events(
    events: Iterable[LineEvent], timing: LineTiming = DEFAULT_TIMING
) -> Wiegand26Frame:
    """Reconstruct a frame from pulses, enforcing ordering and the timeout."""
    events = list(events)
    last_time = None
    for event in events:
        if last_time is not None:
            if event.time_us <= last_time:
                raise FramingError(
                    f"line events must be strictly increasing in time "
                    f"({event.time_us} after {last_time})"
                )
            if event.time_us - last_time > timing.timeout_us:
                raise TruncationError(
                    f"gap of {event.time_us - last_time:.0f} us exceeds "
                    f"{timing.timeout_us:.0f} us timeout"
                )
        last_time = event.time_us
    if len(events) != FRAME_BITS:
        raise TruncationError(f"expected {FRAME_BITS} pulses, got {len(events)}")
    bits = [1 if e.line is Line.D1 else 0 for e in events]
    return frame_from_bits(bits)
