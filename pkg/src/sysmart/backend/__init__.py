"""Store backend: database model, journal persistence, sync, HTTP API."""

from .database import StoreDatabase, Snapshot, sync_push
from .journal import FileJournal, MemoryJournal
from .records import (
    AssistanceRequest,
    CartLocationRecord,
    InventoryRecord,
    LaneRecord,
    LocationRecord,
    MalfunctionReport,
    ProductRecord,
    StoreRecord,
    TicketStatus,
    TrafficStatus,
)

__all__ = [
    "StoreDatabase",
    "Snapshot",
    "sync_push",
    "FileJournal",
    "MemoryJournal",
    "AssistanceRequest",
    "CartLocationRecord",
    "InventoryRecord",
    "LaneRecord",
    "LocationRecord",
    "MalfunctionReport",
    "ProductRecord",
    "StoreRecord",
    "TicketStatus",
    "TrafficStatus",
]
