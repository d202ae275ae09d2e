"""Database records mirroring the store schema.

Field names follow the schema: ``store_id``, ``product_id``,
``location_id``, ``product_location``, ``cart_location``.  Every record
carries ``updated_at`` (unix seconds) so journal replay and
local-to-main sync can apply last-write-wins per record.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

from ..errors import ValidationError


class TrafficStatus(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class TicketStatus(str, enum.Enum):
    OPEN = "Open"
    ACKNOWLEDGED = "Acknowledged"
    RESOLVED = "Resolved"


@dataclass
class StoreRecord:
    store_id: int
    name: str
    lat: float
    lon: float
    traffic_status: TrafficStatus = TrafficStatus.LOW
    parking_free: int = 0
    updated_at: float = 0.0


@dataclass
class ProductRecord:
    product_id: int
    name: str
    updated_at: float = 0.0


@dataclass
class InventoryRecord:
    store_id: int
    product_id: int
    count: int
    product_location: str
    updated_at: float = 0.0

    def __post_init__(self):
        if self.count < 0:
            raise ValidationError(f"inventory count must be >= 0, got {self.count}")


@dataclass
class LocationRecord:
    store_id: int
    location_id: str
    label: str
    x: float
    y: float
    updated_at: float = 0.0


@dataclass
class TagPlacementRecord:
    """Row of the mapping table: which floor tag marks which location."""

    store_id: int
    tag_id: str
    location_id: str
    x: float
    y: float
    updated_at: float = 0.0


@dataclass
class CartLocationRecord:
    store_id: int
    cart_id: int
    cart_location: str | None = None
    updated_at: float = 0.0


@dataclass
class LaneRecord:
    store_id: int
    lane_id: int
    queue: list[int] = field(default_factory=list)
    updated_at: float = 0.0

    def __post_init__(self):
        if any(count <= 0 for count in self.queue):
            raise ValidationError("queued item counts must be positive")


@dataclass
class AssistanceRequest:
    id: int
    store_id: int
    cart_id: int
    created_at: float
    status: TicketStatus = TicketStatus.OPEN
    updated_at: float = 0.0


@dataclass
class MalfunctionReport:
    id: int
    store_id: int
    cart_id: int
    created_at: float
    status: TicketStatus = TicketStatus.OPEN
    updated_at: float = 0.0


_RECORD_TYPES = {
    "store": StoreRecord,
    "product": ProductRecord,
    "inventory": InventoryRecord,
    "location": LocationRecord,
    "mapping": TagPlacementRecord,
    "cart_location": CartLocationRecord,
    "lane": LaneRecord,
    "assistance": AssistanceRequest,
    "malfunction": MalfunctionReport,
}

_KEY_FIELDS = {
    "store": ("store_id",),
    "product": ("product_id",),
    "inventory": ("store_id", "product_id"),
    "location": ("store_id", "location_id"),
    "mapping": ("store_id", "tag_id"),
    "cart_location": ("store_id", "cart_id"),
    "lane": ("store_id", "lane_id"),
    "assistance": ("id",),
    "malfunction": ("id",),
}


def record_table(record) -> str:
    for table, cls in _RECORD_TYPES.items():
        if type(record) is cls:
            return table
    raise ValidationError(f"unknown record type {type(record).__name__}")


def record_key(record) -> tuple:
    return tuple(getattr(record, name) for name in _KEY_FIELDS[record_table(record)])


def record_fields(record) -> dict:
    """JSON-safe field dict (enums as their string values)."""
    data = asdict(record)
    for name, value in data.items():
        if isinstance(value, enum.Enum):
            data[name] = value.value
    return data


def record_from_fields(table: str, fields_dict: dict):
    cls = _RECORD_TYPES.get(table)
    if cls is None:
        raise ValidationError(f"unknown table {table!r}")
    data = dict(fields_dict)
    try:
        if "traffic_status" in data:
            data["traffic_status"] = TrafficStatus(data["traffic_status"])
        if "status" in data:
            data["status"] = TicketStatus(data["status"])
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad {table} record fields: {exc}") from None


def key_fields(table: str) -> tuple[str, ...]:
    if table not in _KEY_FIELDS:
        raise ValidationError(f"unknown table {table!r}")
    return _KEY_FIELDS[table]


def tables() -> tuple[str, ...]:
    return tuple(_RECORD_TYPES)
