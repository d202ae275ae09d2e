"""HTTP/JSON service over the store database (all routes under /v1).

Timestamps are ISO-8601 UTC strings on the wire and unix seconds
internally.  Error mapping: unknown references 404, malformed input 422,
illegal state transitions 409.
"""

from __future__ import annotations

import time
from typing import Callable

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .. import foodtrack
from ..cartlink import CartPositionPacket, packet_from_hex
from ..errors import NotFoundError, StateError, SysmartError, ValidationError
from ..timeutil import parse_when, to_iso
from . import records as rec
from .database import Snapshot, StoreDatabase

_TIME_FIELDS = {"updated_at", "created_at"}


def record_json(record) -> dict:
    data = rec.record_fields(record)
    for name in _TIME_FIELDS & data.keys():
        data[name] = to_iso(data[name])
    return data


class PositionIn(BaseModel):
    packet_hex: str | None = None
    store_id: int | None = None
    cart_id: int | None = None
    tag_id: str | None = None


class TagImageIn(BaseModel):
    memory_hex: str


def create_app(db: StoreDatabase, clock: Callable[[], float] = time.time) -> FastAPI:
    app = FastAPI(title="sysmart backend", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(SysmartError)
    async def _sysmart_error(request: Request, exc: SysmartError):
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, StateError):
            status = 409
        else:
            status = 422
        return JSONResponse({"detail": str(exc)}, status_code=status)

    @app.post("/v1/positions")
    def ingest_position(body: PositionIn):
        if body.packet_hex is not None:
            packet = packet_from_hex(body.packet_hex)
        else:
            missing = [
                name
                for name in ("store_id", "cart_id", "tag_id")
                if getattr(body, name) is None
            ]
            if missing:
                raise ValidationError(
                    f"provide packet_hex or store_id/cart_id/tag_id (missing {', '.join(missing)})"
                )
            packet = CartPositionPacket(body.store_id, body.cart_id, body.tag_id)
        record = db.ingest_position(packet, now=clock())
        return record_json(record)

    @app.get("/v1/stores/{store_id}")
    def get_store(store_id: int):
        return record_json(db.store(store_id))

    @app.get("/v1/stores/{store_id}/carts")
    def list_carts(store_id: int):
        return [record_json(r) for r in db.carts(store_id)]

    @app.get("/v1/stores/{store_id}/products/{product_id}")
    def get_item(store_id: int, product_id: int):
        item = db.find_item(store_id, product_id)
        return {"count": item.count, "location_id": item.location_id}

    @app.get("/v1/products/{product_id}/branches")
    def get_branches(product_id: int, origin: int = Query(...)):
        options = db.alternative_branches(product_id, origin)
        return [
            {"store_id": o.store_id, "count": o.count, "distance_km": o.distance_km}
            for o in options
        ]

    @app.get("/v1/stores/{store_id}/locations")
    def list_locations(store_id: int):
        return [record_json(r) for r in db.locations(store_id)]

    @app.get("/v1/stores/{store_id}/lanes")
    def list_lanes(store_id: int):
        return [record_json(r) for r in db.lanes(store_id)]

    @app.get("/v1/stores/{store_id}/lanes/fastest")
    def get_fastest_lane(store_id: int, items: int = Query(...)):
        return {"lane_id": db.fastest_lane(store_id, items)}

    @app.post("/v1/stores/{store_id}/carts/{cart_id}/assistance")
    def post_assistance(store_id: int, cart_id: int):
        return record_json(db.request_assistance(store_id, cart_id, now=clock()))

    @app.post("/v1/stores/{store_id}/carts/{cart_id}/malfunction")
    def post_malfunction(store_id: int, cart_id: int):
        return record_json(db.report_malfunction(store_id, cart_id, now=clock()))

    def _status_filter(status: str | None) -> rec.TicketStatus | None:
        if status is None:
            return None
        try:
            return rec.TicketStatus(status)
        except ValueError:
            raise ValidationError(
                f"unknown status {status!r}; expected Open, Acknowledged, or Resolved"
            ) from None

    @app.get("/v1/stores/{store_id}/assistance")
    def list_assistance(store_id: int, status: str | None = None):
        rows = db.tickets("assistance", store_id, _status_filter(status))
        return [record_json(r) for r in rows]

    @app.get("/v1/stores/{store_id}/malfunctions")
    def list_malfunctions(store_id: int, status: str | None = None):
        rows = db.tickets("malfunction", store_id, _status_filter(status))
        return [record_json(r) for r in rows]

    @app.post("/v1/assistance/{ticket_id}/ack")
    def ack_assistance(ticket_id: int):
        return record_json(db.acknowledge_assistance(ticket_id, now=clock()))

    @app.post("/v1/assistance/{ticket_id}/resolve")
    def resolve_assistance(ticket_id: int):
        return record_json(db.resolve_assistance(ticket_id, now=clock()))

    @app.post("/v1/malfunctions/{ticket_id}/ack")
    def ack_malfunction(ticket_id: int):
        return record_json(db.acknowledge_malfunction(ticket_id, now=clock()))

    @app.post("/v1/malfunctions/{ticket_id}/resolve")
    def resolve_malfunction(ticket_id: int):
        return record_json(db.resolve_malfunction(ticket_id, now=clock()))

    @app.post("/v1/sync")
    def post_sync(body: dict):
        snapshot = snapshot_from_json(body)
        applied = db.apply_snapshot(snapshot)
        return {"received": len(snapshot.entries), "applied": applied}

    @app.post("/v1/foodtags/{tag_id}")
    def register_food_tag(tag_id: str, body: TagImageIn):
        try:
            memory = bytes.fromhex(body.memory_hex)
        except ValueError:
            raise ValidationError("memory_hex is not valid hex") from None
        db.register_food_tag(tag_id, memory, now=clock())
        return {"tag_id": tag_id, "octets": len(memory)}

    @app.get("/v1/foodtags")
    def list_food_tags():
        return {"tag_ids": db.food_tag_ids()}

    @app.get("/v1/foodtags/{tag_id}/summary")
    def food_tag_summary(tag_id: str):
        tag = db.food_tag_memory(tag_id)
        summary = foodtrack.read_summary(tag)
        return {
            "tag_id": tag_id,
            "production_date": _iso_or_none(summary.production_date),
            "expiry_date": _iso_or_none(summary.expiry_date),
            "max_temp_c": summary.max_temp_c,
            "avg_temp_c": summary.avg_temp_c,
            "estimated_expiry": _iso_or_none(summary.estimated_expiry),
            "plant_events": [
                {
                    "plant_id": e.plant_id,
                    "kind": e.kind.name.title(),
                    "timestamp": to_iso(e.timestamp),
                }
                for e in summary.plant_events
            ],
            "log_count": summary.log_count,
            "overflow": summary.overflow,
        }

    @app.get("/v1/foodtags/{tag_id}/log")
    def food_tag_log(tag_id: str, format: str = "json"):
        tag = db.food_tag_memory(tag_id)
        rows = []
        for record in tag.log:
            absolute = tag.first_log_time + record.minutes_since_first * 60
            rows.append(
                {
                    "minutes": record.minutes_since_first,
                    "time": to_iso(absolute),
                    "temp_c": foodtrack.raw_to_celsius(record.temp_raw),
                    "rh_pct": foodtrack.raw_to_rh(record.hum_raw),
                }
            )
        if format == "csv":
            lines = ["minutes,time,temp_c,rh_pct"]
            lines += [
                f"{r['minutes']},{r['time']},{r['temp_c']:.4f},{r['rh_pct']:.4f}"
                for r in rows
            ]
            return PlainTextResponse("\n".join(lines) + "\n", media_type="text/csv")
        if format != "json":
            raise ValidationError(f"format must be json or csv, got {format!r}")
        return {"tag_id": tag_id, "count": len(rows), "records": rows}

    return app


def _iso_or_none(ts: float | int | None) -> str | None:
    return None if ts is None else to_iso(ts)


def snapshot_to_json(snapshot: Snapshot) -> dict:
    """Wire form of a snapshot: ISO timestamps, JSON-safe fields."""
    entries = []
    for entry in snapshot.entries:
        fields = dict(entry["fields"])
        for name in _TIME_FIELDS & fields.keys():
            fields[name] = to_iso(fields[name])
        entries.append(
            {
                "table": entry["table"],
                "key": entry["key"],
                "updated_at": to_iso(entry["updated_at"]),
                "fields": fields,
            }
        )
    return {"source_store_id": snapshot.source_store_id, "records": entries}


def snapshot_from_json(body: dict) -> Snapshot:
    """Parse the wire form; timestamps may be ISO strings or unix numbers."""
    if not isinstance(body, dict) or "source_store_id" not in body:
        raise ValidationError("sync body must carry source_store_id and records")
    raw_entries = body.get("records", [])
    if not isinstance(raw_entries, list):
        raise ValidationError("records must be a list")
    entries = []
    for raw in raw_entries:
        if not isinstance(raw, dict) or not {"table", "key", "fields"} <= raw.keys():
            raise ValidationError(f"bad snapshot record: {raw!r}")
        fields = dict(raw["fields"])
        for name in _TIME_FIELDS & fields.keys():
            fields[name] = parse_when(fields[name])
        entries.append(
            {
                "table": raw["table"],
                "key": raw["key"],
                "updated_at": parse_when(raw.get("updated_at", 0)),
                "fields": fields,
            }
        )
    return Snapshot(source_store_id=int(body["source_store_id"]), entries=entries)
