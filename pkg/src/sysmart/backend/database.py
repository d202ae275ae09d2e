"""Per-branch store database with journal persistence and main-server sync.

Concurrency: a single logical writer.  One re-entrant lock serializes
every mutation, mirroring a receiver that can only take data from one
cart at a time; reads take the same lock briefly and return records that
are never mutated in place afterwards (mutations always replace whole
records), so callers effectively see atomic snapshots.

Every mutation is normalized to a record upsert ``(table, key,
updated_at, fields)``.  Upserts are applied last-write-wins by
``updated_at`` (ties: incoming wins), journaled when a journal is
attached, and exchanged wholesale during local-to-main sync -- which
makes replay, re-sync, and duplicate delivery all idempotent.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable

from .. import foodtrack
from ..cartlink import CartPositionPacket
from ..errors import NotFoundError, StateError, ValidationError
from ..positioning import TagMap, TagPlacement, resolve_location
from . import records as rec
from .journal import JournalStore, validate_entry

EARTH_RADIUS_KM = 6371.0


class MissingReferenceError(NotFoundError):
    """A referenced store, cart, product, or ticket does not exist."""


class TransitionError(StateError):
    """Illegal assistance/malfunction status transition."""


class NoLanesError(StateError):
    """Store has no checkout lanes configured."""


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two (lat, lon) points in kilometers."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


@dataclass(frozen=True)
class ItemAvailability:
    count: int
    location_id: str


@dataclass(frozen=True)
class BranchOption:
    store_id: int
    count: int
    distance_km: float


@dataclass
class Snapshot:
    """A batch of record upserts from one branch, ready to push upstream."""

    source_store_id: int
    entries: list[dict] = field(default_factory=list)


class StoreDatabase:
    def __init__(
        self,
        journal: JournalStore | None = None,
        checkout_overhead_items: float = 0.0,
    ):
        self._lock = threading.RLock()
        self._tables: dict[str, dict[tuple, object]] = {t: {} for t in rec.tables()}
        self._journal = journal
        self._tag_maps: dict[int, TagMap] = {}
        self._food_tags: dict[str, bytes] = {}
        self._next_ticket_id = {"assistance": 1, "malfunction": 1}
        self.checkout_overhead_items = checkout_overhead_items

    # -- persistence -----------------------------------------------------------

    @classmethod
    def replay(cls, journal: JournalStore, **kwargs) -> "StoreDatabase":
        """Rebuild state from a journal, then keep appending to it."""
        db = cls(journal=None, **kwargs)
        for entry in journal.entries():
            db._apply_entry(validate_entry(entry), journal_it=False)
        db._journal = journal
        return db

    def _apply_entry(self, entry: dict, journal_it: bool = True) -> bool:
        table = entry["table"]
        if table == "food_tag":
            return self._apply_food_tag(entry, journal_it)
        record = rec.record_from_fields(table, entry["fields"])
        return self._put(record, journal_it=journal_it)

    def _put(self, record, journal_it: bool = True) -> bool:
        """Last-write-wins upsert; returns True when the record landed."""
        table = rec.record_table(record)
        key = rec.record_key(record)
        with self._lock:
            existing = self._tables[table].get(key)
            if existing is not None and existing.updated_at > record.updated_at:
                return False
            self._tables[table][key] = record
            if table == "mapping":
                self._index_tag_placement(record)
            if table in self._next_ticket_id:
                self._next_ticket_id[table] = max(
                    self._next_ticket_id[table], record.id + 1
                )
            if journal_it and self._journal is not None:
                self._journal.append(
                    {
                        "table": table,
                        "key": list(key),
                        "updated_at": record.updated_at,
                        "fields": rec.record_fields(record),
                    }
                )
        return True

    def _apply_food_tag(self, entry: dict, journal_it: bool = True) -> bool:
        tag_id = entry["key"][0]
        memory = bytes.fromhex(entry["fields"]["memory_hex"])
        foodtrack.decode_memory(memory)  # structural validation
        with self._lock:
            self._food_tags[tag_id] = memory
            if journal_it and self._journal is not None:
                self._journal.append(entry)
        return True

    def _index_tag_placement(self, record: rec.TagPlacementRecord) -> None:
        tag_map = self._tag_maps.setdefault(record.store_id, TagMap(record.store_id))
        tag_map.entries[record.tag_id] = TagPlacement(
            record.location_id, record.x, record.y
        )

    # -- setup upserts ----------------------------------------------------------

    def put_store(self, record: rec.StoreRecord) -> None:
        self._put(record)

    def put_product(self, record: rec.ProductRecord) -> None:
        self._put(record)

    def put_inventory(self, record: rec.InventoryRecord) -> None:
        self._require("store", (record.store_id,), "store")
        self._require("product", (record.product_id,), "product")
        self._put(record)

    def put_location(self, record: rec.LocationRecord) -> None:
        self._require("store", (record.store_id,), "store")
        self._put(record)

    def put_tag_placement(self, record: rec.TagPlacementRecord) -> None:
        self._require("store", (record.store_id,), "store")
        self._put(record)

    def register_cart(self, store_id: int, cart_id: int, updated_at: float = 0.0) -> None:
        self._require("store", (store_id,), "store")
        self._put(rec.CartLocationRecord(store_id, cart_id, None, updated_at))

    def put_lane(self, record: rec.LaneRecord) -> None:
        self._require("store", (record.store_id,), "store")
        self._put(record)

    # -- lookups ----------------------------------------------------------------

    def _require(self, table: str, key: tuple, what: str):
        with self._lock:
            record = self._tables[table].get(key)
        if record is None:
            raise MissingReferenceError(f"unknown {what} {key if len(key) > 1 else key[0]!r}")
        return record

    def store(self, store_id: int) -> rec.StoreRecord:
        return self._require("store", (store_id,), "store")

    def stores(self) -> list[rec.StoreRecord]:
        with self._lock:
            return sorted(self._tables["store"].values(), key=lambda s: s.store_id)

    def carts(self, store_id: int) -> list[rec.CartLocationRecord]:
        self._require("store", (store_id,), "store")
        with self._lock:
            return sorted(
                (r for r in self._tables["cart_location"].values() if r.store_id == store_id),
                key=lambda r: r.cart_id,
            )

    def cart(self, store_id: int, cart_id: int) -> rec.CartLocationRecord:
        return self._require("cart_location", (store_id, cart_id), "cart")

    def locations(self, store_id: int) -> list[rec.LocationRecord]:
        self._require("store", (store_id,), "store")
        with self._lock:
            return sorted(
                (r for r in self._tables["location"].values() if r.store_id == store_id),
                key=lambda r: r.location_id,
            )

    def lanes(self, store_id: int) -> list[rec.LaneRecord]:
        self._require("store", (store_id,), "store")
        with self._lock:
            return sorted(
                (r for r in self._tables["lane"].values() if r.store_id == store_id),
                key=lambda r: r.lane_id,
            )

    def tag_map(self, store_id: int) -> TagMap:
        with self._lock:
            tag_map = self._tag_maps.get(store_id)
        if tag_map is None:
            raise MissingReferenceError(f"store {store_id} has no tag mapping")
        return tag_map

    # -- position ingestion ------------------------------------------------------

    def ingest_position(
        self, packet: CartPositionPacket, now: float
    ) -> rec.CartLocationRecord:
        """Resolve the packet's tag and upsert the cart's location.

        Validation happens before any mutation, so a failed ingest leaves
        the previous row intact.  Last-write-wins by ``now`` keeps
        ``updated_at`` monotone per cart even under replays.
        """
        with self._lock:
            self._require("store", (packet.store_id,), "store")
            self._require("cart_location", (packet.store_id, packet.cart_id), "cart")
            tag_map = self.tag_map(packet.store_id)
            location_id = resolve_location(packet.tag_id, tag_map)
            self._put(
                rec.CartLocationRecord(packet.store_id, packet.cart_id, location_id, now)
            )
            return self._tables["cart_location"][(packet.store_id, packet.cart_id)]

    # -- item and branch queries ---------------------------------------------------

    def find_item(self, store_id: int, product_id: int) -> ItemAvailability:
        self._require("store", (store_id,), "store")
        self._require("product", (product_id,), "product")
        row = self._require("inventory", (store_id, product_id), "inventory entry")
        return ItemAvailability(count=row.count, location_id=row.product_location)

    def alternative_branches(
        self, product_id: int, origin_store_id: int
    ) -> list[BranchOption]:
        """Other branches stocking the product, nearest first."""
        origin = self._require("store", (origin_store_id,), "store")
        self._require("product", (product_id,), "product")
        with self._lock:
            rows = [
                r
                for r in self._tables["inventory"].values()
                if r.product_id == product_id
                and r.store_id != origin_store_id
                and r.count > 0
            ]
            options = []
            for row in rows:
                store = self._tables["store"].get((row.store_id,))
                if store is None:
                    continue
                distance = haversine_km(origin.lat, origin.lon, store.lat, store.lon)
                options.append(BranchOption(row.store_id, row.count, distance))
        options.sort(key=lambda o: (o.distance_km, o.store_id))
        return options

    # -- lanes -----------------------------------------------------------------------

    def fastest_lane(self, store_id: int, my_item_count: int) -> int:
        """Lane with the least queued work; ties go to the lowest lane id.

        The caller's own item count is the same additive term for every
        lane, so it cannot change the ranking; it is still validated.
        """
        self._require("store", (store_id,), "store")
        if my_item_count <= 0:
            raise ValidationError(f"item count must be positive, got {my_item_count}")
        lanes = self.lanes(store_id)
        if not lanes:
            raise NoLanesError(f"store {store_id} has no lanes")
        overhead = self.checkout_overhead_items

        def load(lane: rec.LaneRecord) -> float:
            return sum(lane.queue) + overhead * len(lane.queue)

        return min(lanes, key=lambda lane: (load(lane), lane.lane_id)).lane_id

    def join_lane(self, store_id: int, lane_id: int, item_count: int, now: float) -> rec.LaneRecord:
        if item_count <= 0:
            raise ValidationError(f"item count must be positive, got {item_count}")
        lane = self._require("lane", (store_id, lane_id), "lane")
        updated = rec.LaneRecord(store_id, lane_id, lane.queue + [item_count], now)
        self._put(updated)
        return updated

    # -- assistance / malfunction ------------------------------------------------------

    def _open_ticket(self, table: str, store_id: int, cart_id: int, now: float):
        with self._lock:
            self._require("store", (store_id,), "store")
            self._require("cart_location", (store_id, cart_id), "cart")
            ticket_id = self._next_ticket_id[table]
            cls = rec.AssistanceRequest if table == "assistance" else rec.MalfunctionReport
            ticket = cls(ticket_id, store_id, cart_id, created_at=now, updated_at=now)
            self._put(ticket)
            return ticket

    def request_assistance(self, store_id: int, cart_id: int, now: float) -> rec.AssistanceRequest:
        return self._open_ticket("assistance", store_id, cart_id, now)

    def report_malfunction(self, store_id: int, cart_id: int, now: float) -> rec.MalfunctionReport:
        return self._open_ticket("malfunction", store_id, cart_id, now)

    def _transition(self, table: str, ticket_id: int, target: rec.TicketStatus, now: float):
        with self._lock:
            ticket = self._require(table, (ticket_id,), f"{table} request")
            legal = {
                rec.TicketStatus.ACKNOWLEDGED: rec.TicketStatus.OPEN,
                rec.TicketStatus.RESOLVED: rec.TicketStatus.ACKNOWLEDGED,
            }
            if ticket.status is not legal[target]:
                raise TransitionError(
                    f"{table} {ticket_id} is {ticket.status.value}; cannot move to {target.value}"
                )
            updated = replace(ticket, status=target, updated_at=now)
            self._put(updated)
            return updated

    def acknowledge_assistance(self, ticket_id: int, now: float) -> rec.AssistanceRequest:
        return self._transition("assistance", ticket_id, rec.TicketStatus.ACKNOWLEDGED, now)

    def resolve_assistance(self, ticket_id: int, now: float) -> rec.AssistanceRequest:
        return self._transition("assistance", ticket_id, rec.TicketStatus.RESOLVED, now)

    def acknowledge_malfunction(self, ticket_id: int, now: float) -> rec.MalfunctionReport:
        return self._transition("malfunction", ticket_id, rec.TicketStatus.ACKNOWLEDGED, now)

    def resolve_malfunction(self, ticket_id: int, now: float) -> rec.MalfunctionReport:
        return self._transition("malfunction", ticket_id, rec.TicketStatus.RESOLVED, now)

    def tickets(
        self, table: str, store_id: int, status: rec.TicketStatus | None = None
    ) -> list:
        self._require("store", (store_id,), "store")
        with self._lock:
            rows = [
                r
                for r in self._tables[table].values()
                if r.store_id == store_id and (status is None or r.status is status)
            ]
        return sorted(rows, key=lambda r: r.id)

    # -- sync ---------------------------------------------------------------------------

    def snapshot(self, store_id: int, since: float | None = None) -> Snapshot:
        """Upserts for every record of one branch (plus the product catalog),
        optionally limited to records updated at or after ``since``."""
        self._require("store", (store_id,), "store")
        entries = []
        with self._lock:
            for table, rows in self._tables.items():
                for key, record in rows.items():
                    scoped = getattr(record, "store_id", None)
                    if table != "product" and scoped != store_id:
                        continue
                    if since is not None and record.updated_at < since:
                        continue
                    entries.append(
                        {
                            "table": table,
                            "key": list(key),
                            "updated_at": record.updated_at,
                            "fields": rec.record_fields(record),
                        }
                    )
        entries.sort(key=lambda e: (e["table"], e["key"]))
        return Snapshot(source_store_id=store_id, entries=entries)

    def apply_snapshot(self, snapshot: Snapshot) -> int:
        """Merge a branch snapshot; returns how many upserts landed."""
        with self._lock:
            if (snapshot.source_store_id,) not in self._tables["store"]:
                raise MissingReferenceError(
                    f"snapshot from unknown store {snapshot.source_store_id}"
                )
            applied = 0
            for entry in snapshot.entries:
                if self._apply_entry(validate_entry(dict(entry))):
                    applied += 1
            return applied

    # -- food tag registry -----------------------------------------------------------------

    def register_food_tag(self, tag_id: str, memory: bytes, now: float = 0.0) -> None:
        """Attach a readable tag image so HTTP clients can query it."""
        entry = {
            "table": "food_tag",
            "key": [tag_id],
            "updated_at": now,
            "fields": {"memory_hex": memory.hex()},
        }
        self._apply_entry(entry)

    def food_tag_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._food_tags)

    def food_tag_memory(self, tag_id: str) -> foodtrack.TagMemory:
        with self._lock:
            image = self._food_tags.get(tag_id)
        if image is None:
            raise MissingReferenceError(f"no food tag registered as {tag_id!r}")
        return foodtrack.decode_memory(image)


def sync_push(snapshot: Snapshot, main_db: StoreDatabase) -> int:
    """Push one branch's snapshot into the main database (last-write-wins)."""
    return main_db.apply_snapshot(snapshot)
