"""Dynamic-NFC food-tracker tag emulation.

The tag is a write-once, password-protected sensor logger.  Its memory
holds summary fields any NFC reader can fetch, plus a region of packed
48-bit log records:

    bits 47..26  minutes since the first record (22 bits, 1-minute steps)
    bits 25..14  raw temperature (12 bits)
    bits 13..0   raw humidity (14 bits)

A reading is logged only when it moves at least one configured threshold
away from the last logged record, so a steady fridge costs no memory.
When the region fills, logging stops and the overflow flag latches; the
early history is never silently discarded.

Raw sensor conversions (normative for tests):

    degC = raw * 165 / 4096 - 40        (12-bit temperature)
    %RH  = raw * 100 / 16384            (14-bit humidity)

All timestamps come from the caller-injected RTC value, never from the
ambient system clock, and every field write is rejected once the field
holds a value -- clearing anything requires a password-checked reset.

Memory dump layout (the CLI ``tag dump`` / HTTP read form), big-endian:

    0-1    magic "SM"
    2      version (1)
    3      flags: bit0 initialized, bit1 overflow,
                  bit2 production_date set, bit3 expiry_date set
    4-7    production_date  (unix seconds, 0 when unset)
    8-11   expiry_date
    12-15  first_log_time   (meaningful when log_count > 0)
    16-17  log_count
    18-19  max_temp_raw
    20-23  temp_sum
    24-25  temp threshold (raw)
    26-27  humidity threshold (raw)
    28-29  sample_interval (minutes)
    30     plant_event_count
    31+    plant events, 7 octets each: plant_id u16, kind u8, timestamp u32
    then   log records, 6 octets each

The password and the log-region size live in a write-protected trailer
that is excluded from every read operation; only the on-disk tag file
(``encode_tag_file``) carries it.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field, replace

from .errors import StateError, ValidationError

MINUTES_BITS = 22
TEMP_BITS = 12
HUM_BITS = 14
MINUTES_MAX = (1 << MINUTES_BITS) - 1
TEMP_RAW_MAX = (1 << TEMP_BITS) - 1
HUM_RAW_MAX = (1 << HUM_BITS) - 1
RECORD_OCTETS = 6

PASSWORD_LENGTH = 20
PLANT_EVENT_CAPACITY = 8
DEFAULT_LOG_REGION_OCTETS = 2040  # 340 records
DEFAULT_TEMP_THRESHOLD_RAW = 13  # ~0.52 degC, the sensor's stated accuracy
DEFAULT_HUM_THRESHOLD_RAW = 492  # ~3 %RH
DEFAULT_SAMPLE_INTERVAL_MIN = 15
DEFAULT_REFERENCE_TEMP_C = 4.0
DEFAULT_Q10 = 2.0

MEMORY_MAGIC = b"SM"
MEMORY_VERSION = 1
_HEADER = struct.Struct(">2sBBIIIHHIHHHB")  # through plant_event_count
_PLANT_EVENT = struct.Struct(">HBI")
_TRAILER = struct.Struct(">I20s")

_FLAG_INITIALIZED = 0x01
_FLAG_OVERFLOW = 0x02
_FLAG_PRODUCTION_SET = 0x04
_FLAG_EXPIRY_SET = 0x08

_U32_MAX = 0xFFFFFFFF


class TamperError(StateError):
    """Attempt to modify a pre-populated field without a reset."""


class AuthenticationError(StateError):
    """Password mismatch."""


class TagStateError(StateError):
    """Operation not allowed in the tag's current state."""


class PlantEventCapacityError(StateError):
    """The plant hand-off slots are full."""


class ClockError(ValidationError):
    """Reading timestamped before the first logged record."""


class RecordRangeError(ValidationError):
    """A log record field does not fit its bit width."""


class MemoryFormatError(ValidationError):
    """A serialized tag image fails structural checks."""


class TagState(enum.Enum):
    BLANK = "Blank"
    INITIALIZED = "Initialized"


class PlantEventKind(enum.IntEnum):
    ARRIVAL = 1
    DEPARTURE = 2


@dataclass(frozen=True)
class PlantEvent:
    plant_id: int
    kind: PlantEventKind
    timestamp: int


@dataclass(frozen=True)
class LogRecord:
    minutes_since_first: int
    temp_raw: int
    hum_raw: int


@dataclass(frozen=True)
class SensorReading:
    temp_raw: int
    hum_raw: int
    rtc_now: int

    def __post_init__(self):
        if not 0 <= self.temp_raw <= TEMP_RAW_MAX:
            raise RecordRangeError(f"temp_raw {self.temp_raw} outside 12-bit range")
        if not 0 <= self.hum_raw <= HUM_RAW_MAX:
            raise RecordRangeError(f"hum_raw {self.hum_raw} outside 14-bit range")


@dataclass(frozen=True)
class Thresholds:
    temp_raw: int = DEFAULT_TEMP_THRESHOLD_RAW
    hum_raw: int = DEFAULT_HUM_THRESHOLD_RAW


# -- Raw sensor conversions ---------------------------------------------------


def raw_to_celsius(temp_raw: int) -> float:
    if not 0 <= temp_raw <= TEMP_RAW_MAX:
        raise RecordRangeError(f"temp_raw {temp_raw} outside 12-bit range")
    return temp_raw * 165.0 / 4096.0 - 40.0


def celsius_to_raw(temp_c: float) -> int:
    raw = round((temp_c + 40.0) * 4096.0 / 165.0)
    return min(max(raw, 0), TEMP_RAW_MAX)


def raw_to_rh(hum_raw: int) -> float:
    if not 0 <= hum_raw <= HUM_RAW_MAX:
        raise RecordRangeError(f"hum_raw {hum_raw} outside 14-bit range")
    return hum_raw * 100.0 / 16384.0


def rh_to_raw(rh_pct: float) -> int:
    raw = round(rh_pct * 16384.0 / 100.0)
    return min(max(raw, 0), HUM_RAW_MAX)


# -- Record codec -------------------------------------------------------------


def encode_record(record: LogRecord) -> bytes:
    """Pack into the 48-bit big-endian layout."""
    if not 0 <= record.minutes_since_first <= MINUTES_MAX:
        raise RecordRangeError(
            f"minutes_since_first {record.minutes_since_first} outside 22-bit range"
        )
    if not 0 <= record.temp_raw <= TEMP_RAW_MAX:
        raise RecordRangeError(f"temp_raw {record.temp_raw} outside 12-bit range")
    if not 0 <= record.hum_raw <= HUM_RAW_MAX:
        raise RecordRangeError(f"hum_raw {record.hum_raw} outside 14-bit range")
    word = (record.minutes_since_first << 26) | (record.temp_raw << 14) | record.hum_raw
    return word.to_bytes(RECORD_OCTETS, "big")


def decode_record(data: bytes) -> LogRecord:
    """Inverse of :func:`encode_record`."""
    if len(data) != RECORD_OCTETS:
        raise MemoryFormatError(f"log record must be {RECORD_OCTETS} octets, got {len(data)}")
    word = int.from_bytes(data, "big")
    return LogRecord(
        minutes_since_first=word >> 26,
        temp_raw=(word >> 14) & TEMP_RAW_MAX,
        hum_raw=word & HUM_RAW_MAX,
    )


# -- Tag state machine --------------------------------------------------------


@dataclass
class TagMemory:
    """Mutable tag image.  All operations validate before mutating, so a
    failed call leaves the memory byte-identical (snapshot-testable via
    :func:`encode_tag_file`)."""

    state: TagState = TagState.BLANK
    password: str = ""
    production_date: int | None = None
    expiry_date: int | None = None
    plant_events: list[PlantEvent] = field(default_factory=list)
    first_log_time: int | None = None
    log: list[LogRecord] = field(default_factory=list)
    overflow: bool = False
    max_temp_raw: int = 0
    temp_sum: int = 0
    thresholds: Thresholds = field(default_factory=Thresholds)
    sample_interval_min: int = DEFAULT_SAMPLE_INTERVAL_MIN
    log_region_octets: int = DEFAULT_LOG_REGION_OCTETS

    @classmethod
    def blank(cls, log_region_octets: int = DEFAULT_LOG_REGION_OCTETS) -> "TagMemory":
        if log_region_octets < RECORD_OCTETS:
            raise ValidationError(
                f"log region must hold at least one record ({RECORD_OCTETS} octets)"
            )
        return cls(log_region_octets=log_region_octets)

    @property
    def log_capacity(self) -> int:
        return self.log_region_octets // RECORD_OCTETS

    def require_initialized(self) -> None:
        if self.state is not TagState.INITIALIZED:
            raise TagStateError("tag is blank; initialize it first")


def _check_unix_seconds(name: str, value: int) -> None:
    if not isinstance(value, int) or not 0 <= value <= _U32_MAX:
        raise ValidationError(f"{name} must be unix seconds in [0, 2^32), got {value!r}")


def init_tag(
    tag: TagMemory,
    password: str,
    production_date: int | None = None,
    expiry_date: int | None = None,
    thresholds: Thresholds | None = None,
    sample_interval_min: int = DEFAULT_SAMPLE_INTERVAL_MIN,
) -> TagMemory:
    """Provision a blank tag: set the password and initial configuration."""
    if tag.state is not TagState.BLANK:
        raise TagStateError("tag already initialized; reset it first")
    if len(password) != PASSWORD_LENGTH:
        raise ValidationError(
            f"password must be exactly {PASSWORD_LENGTH} characters, got {len(password)}"
        )
    if len(password.encode("utf-8")) != PASSWORD_LENGTH:
        raise ValidationError("password must be 20 single-byte (ASCII) characters")
    if production_date is not None:
        _check_unix_seconds("production_date", production_date)
    if expiry_date is not None:
        _check_unix_seconds("expiry_date", expiry_date)
    if sample_interval_min <= 0 or sample_interval_min > 0xFFFF:
        raise ValidationError(
            f"sample interval must be in [1, 65535] minutes, got {sample_interval_min}"
        )
    thresholds = thresholds or Thresholds()
    if not 0 < thresholds.temp_raw <= TEMP_RAW_MAX:
        raise ValidationError(f"temp threshold {thresholds.temp_raw} outside (0, 4095]")
    if not 0 < thresholds.hum_raw <= HUM_RAW_MAX:
        raise ValidationError(f"hum threshold {thresholds.hum_raw} outside (0, 16383]")

    tag.state = TagState.INITIALIZED
    tag.password = password
    tag.production_date = production_date
    tag.expiry_date = expiry_date
    tag.thresholds = thresholds
    tag.sample_interval_min = sample_interval_min
    return tag


_SETTABLE_FIELDS = ("production_date", "expiry_date")


def set_field(tag: TagMemory, field_name: str, value: int) -> TagMemory:
    """Populate a write-once field; a second write is a tamper error."""
    tag.require_initialized()
    if field_name not in _SETTABLE_FIELDS:
        raise ValidationError(
            f"unknown field {field_name!r}; settable fields: {', '.join(_SETTABLE_FIELDS)}"
        )
    _check_unix_seconds(field_name, value)
    if getattr(tag, field_name) is not None:
        raise TamperError(f"{field_name} is already set; reset the tag to change it")
    setattr(tag, field_name, value)
    return tag


def record_plant_event(
    tag: TagMemory, plant_id: int, kind: PlantEventKind, rtc_now: int
) -> TagMemory:
    """Append an arrival/departure hand-off stamped with the injected RTC."""
    tag.require_initialized()
    if not isinstance(plant_id, int) or not 0 <= plant_id <= 0xFFFF:
        raise ValidationError(f"plant_id must be a 16-bit unsigned int, got {plant_id!r}")
    kind = PlantEventKind(kind)
    _check_unix_seconds("rtc_now", rtc_now)
    if len(tag.plant_events) >= PLANT_EVENT_CAPACITY:
        raise PlantEventCapacityError(
            f"plant event log full ({PLANT_EVENT_CAPACITY} entries)"
        )
    tag.plant_events.append(PlantEvent(plant_id, kind, rtc_now))
    return tag


def sample(tag: TagMemory, reading: SensorReading) -> tuple[TagMemory, bool]:
    """Offer a sensor reading; returns (tag, appended).

    The first reading is always logged at relative minute 0.  Later ones
    are logged only when they differ from the last logged record by at
    least one threshold, in either channel.  A qualifying record that no
    longer fits sets the overflow flag and is dropped.
    """
    tag.require_initialized()
    _check_unix_seconds("rtc_now", reading.rtc_now)

    if not tag.log:
        record = LogRecord(0, reading.temp_raw, reading.hum_raw)
        tag.first_log_time = reading.rtc_now
        tag.log.append(record)
        tag.max_temp_raw = max(tag.max_temp_raw, record.temp_raw)
        tag.temp_sum += record.temp_raw
        return tag, True

    assert tag.first_log_time is not None
    if reading.rtc_now < tag.first_log_time:
        raise ClockError(
            f"reading at {reading.rtc_now} predates first log time {tag.first_log_time}"
        )
    last = tag.log[-1]
    temp_delta = abs(reading.temp_raw - last.temp_raw)
    hum_delta = abs(reading.hum_raw - last.hum_raw)
    if temp_delta < tag.thresholds.temp_raw and hum_delta < tag.thresholds.hum_raw:
        return tag, False

    minutes = (reading.rtc_now - tag.first_log_time) // 60
    if minutes > MINUTES_MAX:
        raise RecordRangeError(
            f"reading is {minutes} minutes after the first record; "
            f"22-bit timestamps top out at {MINUTES_MAX}"
        )
    if len(tag.log) >= tag.log_capacity:
        tag.overflow = True
        return tag, False
    record = LogRecord(minutes, reading.temp_raw, reading.hum_raw)
    tag.log.append(record)
    tag.max_temp_raw = max(tag.max_temp_raw, record.temp_raw)
    tag.temp_sum += record.temp_raw
    return tag, True


@dataclass(frozen=True)
class TagSummary:
    production_date: int | None
    expiry_date: int | None
    max_temp_c: float | None
    avg_temp_c: float | None
    estimated_expiry: int | None
    plant_events: tuple[PlantEvent, ...]
    log_count: int
    overflow: bool


def read_summary(tag: TagMemory) -> TagSummary:
    """Latest summary data; never includes the password."""
    tag.require_initialized()
    if tag.log:
        max_temp = raw_to_celsius(tag.max_temp_raw)
        avg_temp = (tag.temp_sum / len(tag.log)) * 165.0 / 4096.0 - 40.0
    else:
        max_temp = None
        avg_temp = None
    if tag.production_date is not None and tag.expiry_date is not None:
        estimated = estimate_expiry(tag)
    else:
        estimated = None
    return TagSummary(
        production_date=tag.production_date,
        expiry_date=tag.expiry_date,
        max_temp_c=max_temp,
        avg_temp_c=avg_temp,
        estimated_expiry=estimated,
        plant_events=tuple(tag.plant_events),
        log_count=len(tag.log),
        overflow=tag.overflow,
    )


def estimate_expiry(
    tag: TagMemory,
    reference_temp_c: float = DEFAULT_REFERENCE_TEMP_C,
    q10: float = DEFAULT_Q10,
) -> int:
    """Shelf-life estimate under a Q10 degradation model.

    The label gives a base shelf life S = expiry - production assuming
    storage at ``reference_temp_c``.  Each logged segment consumes life
    at rate q10^((T - ref)/10), with the temperature held from one record
    to the next; time outside the observed span is assumed on-reference.
    With no log the label expiry stands as-is.
    """
    tag.require_initialized()
    if tag.production_date is None or tag.expiry_date is None:
        raise TagStateError("estimate needs both production_date and expiry_date")
    shelf_life = tag.expiry_date - tag.production_date
    if not tag.log:
        return tag.expiry_date
    assert tag.first_log_time is not None
    consumed = float(tag.first_log_time - tag.production_date)
    for current, nxt in zip(tag.log, tag.log[1:]):
        span = (nxt.minutes_since_first - current.minutes_since_first) * 60.0
        rate = q10 ** ((raw_to_celsius(current.temp_raw) - reference_temp_c) / 10.0)
        consumed += span * rate
    observed_end = tag.first_log_time + tag.log[-1].minutes_since_first * 60
    remaining = shelf_life - consumed
    return int(round(observed_end + remaining))


def reset_tag(tag: TagMemory, password_attempt: str) -> TagMemory:
    """Clear everything after confirming the password."""
    tag.require_initialized()
    if password_attempt != tag.password:
        raise AuthenticationError("password mismatch; tag not reset")
    tag.state = TagState.BLANK
    tag.password = ""
    tag.production_date = None
    tag.expiry_date = None
    tag.plant_events = []
    tag.first_log_time = None
    tag.log = []
    tag.overflow = False
    tag.max_temp_raw = 0
    tag.temp_sum = 0
    tag.thresholds = Thresholds()
    tag.sample_interval_min = DEFAULT_SAMPLE_INTERVAL_MIN
    return tag


# -- Memory image codec -------------------------------------------------------


def encode_memory(tag: TagMemory) -> bytes:
    """Readable image: summary block then log region.  No password."""
    flags = 0
    if tag.state is TagState.INITIALIZED:
        flags |= _FLAG_INITIALIZED
    if tag.overflow:
        flags |= _FLAG_OVERFLOW
    if tag.production_date is not None:
        flags |= _FLAG_PRODUCTION_SET
    if tag.expiry_date is not None:
        flags |= _FLAG_EXPIRY_SET
    header = _HEADER.pack(
        MEMORY_MAGIC,
        MEMORY_VERSION,
        flags,
        tag.production_date or 0,
        tag.expiry_date or 0,
        tag.first_log_time or 0,
        len(tag.log),
        tag.max_temp_raw,
        tag.temp_sum,
        tag.thresholds.temp_raw,
        tag.thresholds.hum_raw,
        tag.sample_interval_min,
        len(tag.plant_events),
    )
    events = b"".join(
        _PLANT_EVENT.pack(e.plant_id, int(e.kind), e.timestamp) for e in tag.plant_events
    )
    records = b"".join(encode_record(r) for r in tag.log)
    return header + events + records


def decode_memory(
    data: bytes, log_region_octets: int | None = None
) -> TagMemory:
    """Rebuild tag state from a readable image.

    The image does not carry the password or the region geometry; the
    returned tag has an empty password and a region just large enough
    (at least the default) unless ``log_region_octets`` says otherwise.
    """
    if len(data) < _HEADER.size:
        raise MemoryFormatError(f"image too short: {len(data)} octets")
    (
        magic,
        version,
        flags,
        production,
        expiry,
        first_log,
        log_count,
        max_temp_raw,
        temp_sum,
        temp_threshold,
        hum_threshold,
        sample_interval,
        event_count,
    ) = _HEADER.unpack_from(data)
    if magic != MEMORY_MAGIC:
        raise MemoryFormatError(f"bad magic {magic!r}, expected {MEMORY_MAGIC!r}")
    if version != MEMORY_VERSION:
        raise MemoryFormatError(f"unsupported image version {version}")
    offset = _HEADER.size
    expected = offset + event_count * _PLANT_EVENT.size + log_count * RECORD_OCTETS
    if len(data) != expected:
        raise MemoryFormatError(
            f"image is {len(data)} octets; header promises {expected}"
        )
    events = []
    for _ in range(event_count):
        plant_id, kind, timestamp = _PLANT_EVENT.unpack_from(data, offset)
        try:
            events.append(PlantEvent(plant_id, PlantEventKind(kind), timestamp))
        except ValueError:
            raise MemoryFormatError(f"unknown plant event kind {kind}") from None
        offset += _PLANT_EVENT.size
    log = []
    for _ in range(log_count):
        log.append(decode_record(data[offset : offset + RECORD_OCTETS]))
        offset += RECORD_OCTETS
    if log_region_octets is None:
        log_region_octets = max(DEFAULT_LOG_REGION_OCTETS, log_count * RECORD_OCTETS)
    initialized = bool(flags & _FLAG_INITIALIZED)
    tag = TagMemory(
        state=TagState.INITIALIZED if initialized else TagState.BLANK,
        password="",
        production_date=production if flags & _FLAG_PRODUCTION_SET else None,
        expiry_date=expiry if flags & _FLAG_EXPIRY_SET else None,
        plant_events=events,
        first_log_time=first_log if log_count else None,
        log=log,
        overflow=bool(flags & _FLAG_OVERFLOW),
        max_temp_raw=max_temp_raw,
        temp_sum=temp_sum,
        thresholds=Thresholds(temp_raw=temp_threshold, hum_raw=hum_threshold),
        sample_interval_min=sample_interval,
        log_region_octets=log_region_octets,
    )
    return tag


def encode_tag_file(tag: TagMemory) -> bytes:
    """Full persisted image: readable block plus the protected trailer."""
    password = tag.password.encode("utf-8").ljust(PASSWORD_LENGTH, b"\x00")
    return encode_memory(tag) + _TRAILER.pack(tag.log_region_octets, password)


def decode_tag_file(data: bytes) -> TagMemory:
    """Inverse of :func:`encode_tag_file`."""
    if len(data) < _HEADER.size + _TRAILER.size:
        raise MemoryFormatError(f"tag file too short: {len(data)} octets")
    body, trailer = data[: -_TRAILER.size], data[-_TRAILER.size :]
    log_region_octets, password_bytes = _TRAILER.unpack(trailer)
    tag = decode_memory(body, log_region_octets=log_region_octets)
    tag.password = password_bytes.rstrip(b"\x00").decode("utf-8")
    if len(tag.log) > tag.log_capacity:
        raise MemoryFormatError(
            f"log holds {len(tag.log)} records but region fits {tag.log_capacity}"
        )
    return tag


def clone_tag(tag: TagMemory) -> TagMemory:
    """Deep-enough copy for what-if runs (lists copied, records shared)."""
    return replace(
        tag,
        plant_events=list(tag.plant_events),
        log=list(tag.log),
        thresholds=tag.thresholds,
    )
