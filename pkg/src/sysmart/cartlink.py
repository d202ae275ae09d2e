"""Cart-to-server wire protocol and random-delay transmission model.

Position packet, 10 octets (80 bits) on the wire, big-endian:

    offset 0..1   store_id   u16
    offset 2..3   cart_id    u16
    offset 4..9   tag_id     6 ASCII characters, uppercase hex

The tag ID travels as ASCII rather than packed binary so the total stays
at 80 bits; link overhead is modeled as a configurable bit count only
(default 48, bringing a full transmission to 128 bits at 54 Mbps).

Carts avoid talking over each other by delaying each transmission by a
uniform random offset within a window.  ``detect_collisions`` finds
overlapping transmissions; ``analytic_collision_probability`` gives the
exact probability of at least one overlap for uniform independent
starts, and ``simulate_collision_rate`` estimates it by Monte Carlo.
"""

from __future__ import annotations

import math
import random
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

PACKET_OCTETS = 10
PACKET_BITS = PACKET_OCTETS * 8
DEFAULT_OVERHEAD_BITS = 48
DEFAULT_RATE_BPS = 54e6
DEFAULT_WINDOW_S = 1.0

_TAG_ID_RE = re.compile(r"[0-9A-F]{6}\Z")
_PACKET_STRUCT = struct.Struct(">HH6s")


class PacketFormatError(ValidationError):
    """Packet fields or serialized form are malformed."""


@dataclass(frozen=True)
class CartPositionPacket:
    store_id: int
    cart_id: int
    tag_id: str

    def __post_init__(self):
        for name, value in (("store_id", self.store_id), ("cart_id", self.cart_id)):
            if not isinstance(value, int) or not 0 <= value <= 0xFFFF:
                raise PacketFormatError(f"{name} must be a 16-bit unsigned int, got {value!r}")
        if not isinstance(self.tag_id, str) or not _TAG_ID_RE.match(self.tag_id):
            raise PacketFormatError(
                f"tag_id must be 6 uppercase hex characters, got {self.tag_id!r}"
            )


def encode_packet(packet: CartPositionPacket) -> bytes:
    """Serialize to exactly 10 octets."""
    return _PACKET_STRUCT.pack(
        packet.store_id, packet.cart_id, packet.tag_id.encode("ascii")
    )


def decode_packet(data: bytes) -> CartPositionPacket:
    """Inverse of :func:`encode_packet`."""
    if len(data) != PACKET_OCTETS:
        raise PacketFormatError(f"packet must be {PACKET_OCTETS} octets, got {len(data)}")
    store_id, cart_id, tag_bytes = _PACKET_STRUCT.unpack(data)
    try:
        tag_id = tag_bytes.decode("ascii")
    except UnicodeDecodeError:
        raise PacketFormatError(f"tag id bytes {tag_bytes!r} are not ASCII") from None
    return CartPositionPacket(store_id, cart_id, tag_id)


def packet_to_hex(packet: CartPositionPacket) -> str:
    """20 uppercase hex characters, the CLI/HTTP interchange form."""
    return encode_packet(packet).hex().upper()


def packet_from_hex(text: str) -> CartPositionPacket:
    """Parse the 20-hex-character form; input case is ignored."""
    cleaned = text.strip()
    if len(cleaned) != PACKET_OCTETS * 2:
        raise PacketFormatError(
            f"packet hex must be {PACKET_OCTETS * 2} characters, got {len(cleaned)}"
        )
    try:
        data = bytes.fromhex(cleaned)
    except ValueError:
        raise PacketFormatError(f"invalid hex in packet {text!r}") from None
    return decode_packet(data)


def packet_airtime(
    payload_bits: int = PACKET_BITS,
    overhead_bits: int = DEFAULT_OVERHEAD_BITS,
    rate_bps: float = DEFAULT_RATE_BPS,
) -> float:
    """Seconds on air for payload plus link overhead at a given bit rate."""
    if rate_bps <= 0:
        raise ValidationError(f"rate must be positive, got {rate_bps}")
    if payload_bits < 0 or overhead_bits < 0:
        raise ValidationError("bit counts must be non-negative")
    return (payload_bits + overhead_bits) / rate_bps


@dataclass(frozen=True)
class ScheduleEntry:
    cart_id: int
    start_time: float
    duration: float


@dataclass
class TransmissionSchedule:
    window: float
    entries: list[ScheduleEntry] = field(default_factory=list)


def schedule_transmissions(
    cart_ids: list[int],
    window: float,
    duration: float,
    seed: int | random.Random = 0,
) -> TransmissionSchedule:
    """Give each cart one uniform random start time in ``[0, window)``.

    Draw order follows ``cart_ids`` order, so a fixed seed (or a shared
    ``random.Random``) replays exactly.
    """
    if window <= 0:
        raise ValidationError(f"window must be positive, got {window}")
    if not 0 < duration < window:
        raise ValidationError(
            f"duration must be in (0, window); got duration={duration}, window={window}"
        )
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    entries = [
        ScheduleEntry(cart_id, rng.random() * window, duration) for cart_id in cart_ids
    ]
    return TransmissionSchedule(window=window, entries=entries)


def detect_collisions(schedule: TransmissionSchedule) -> set[tuple[int, int]]:
    """All cart pairs whose ``[start, start+duration)`` intervals overlap.

    Pairs are reported once, ordered ``(min_id, max_id)``.  Sweep over the
    entries sorted by start: an interval can only overlap neighbours whose
    starts precede its end.
    """
    ordered = sorted(schedule.entries, key=lambda e: (e.start_time, e.cart_id))
    pairs: set[tuple[int, int]] = set()
    for i, entry in enumerate(ordered):
        end = entry.start_time + entry.duration
        for other in ordered[i + 1 :]:
            if other.start_time >= end:
                break
            a, b = entry.cart_id, other.cart_id
            pairs.add((a, b) if a < b else (b, a))
    return pairs


def analytic_collision_probability(n: int, duration: float, window: float) -> float:
    """Probability that any pair of ``n`` uniform starts overlaps.

    For n independent starts uniform on [0, T) with equal transmission
    length tau, the chance that every pair is separated by at least tau
    is the classic spacing product, which collapses to the closed form
    (1 - (n-1)*tau/T)^n; the returned value is its complement.  Exact
    under this model (no wrap-around at the window edge), not an
    approximation.
    """
    if n < 1:
        raise ValidationError(f"cart count must be >= 1, got {n}")
    if window <= duration:
        raise ValidationError("window must exceed duration")
    if n == 1:
        return 0.0
    slack = 1.0 - (n - 1) * duration / window
    if slack <= 0.0:
        return 1.0
    return 1.0 - slack**n


def pairwise_overlap_probability(duration: float, window: float) -> float:
    """Chance two independent uniform starts land within one duration."""
    return analytic_collision_probability(2, duration, window)


def expected_colliding_pairs(n: int, duration: float, window: float) -> float:
    """Expected number of overlapping pairs per window (linearity over C(n,2))."""
    if n < 2:
        return 0.0
    return math.comb(n, 2) * pairwise_overlap_probability(duration, window)


@dataclass(frozen=True)
class CollisionStats:
    trials: int
    windows_with_collision: int
    colliding_pairs_total: int

    @property
    def collision_rate(self) -> float:
        return self.windows_with_collision / self.trials

    @property
    def pairs_per_window(self) -> float:
        return self.colliding_pairs_total / self.trials


def simulate_collision_rate(
    n: int,
    duration: float,
    window: float,
    trials: int,
    seed: int = 0,
    chunk: int = 250_000,
) -> CollisionStats:
    """Monte Carlo estimate of per-window collision statistics.

    Vectorized: each trial draws n uniform starts, sorts them, and counts
    sorted pairs closer than ``duration`` (checking successively wider
    rank offsets until none match, which for tiny durations terminates
    after one or two offsets).
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    rows_per_chunk = max(1, min(trials, max(chunk // max(n, 1), 1)))
    windows_hit = 0
    pairs_total = 0
    remaining = trials
    while remaining > 0:
        rows = min(rows_per_chunk, remaining)
        starts = rng.random((rows, n)) * window
        starts.sort(axis=1)
        row_pairs = np.zeros(rows, dtype=np.int64)
        for offset in range(1, n):
            close = starts[:, offset:] - starts[:, :-offset] < duration
            hits = close.sum(axis=1)
            if not hits.any():
                break
            row_pairs += hits
        windows_hit += int((row_pairs > 0).sum())
        pairs_total += int(row_pairs.sum())
        remaining -= rows
    return CollisionStats(trials, windows_hit, pairs_total)
