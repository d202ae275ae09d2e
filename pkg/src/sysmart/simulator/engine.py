"""Discrete-event store simulation driving every subsystem end-to-end.

Timeline model:
  - Shoppers walk BFS routes between waypoint shelves at constant speed;
    each tick (default 100 ms) a moving cart reads the nearest floor tag
    within 20 cm, keeping its previous tag while between tags.
  - Time is divided into fixed transmission windows (default 1 s).  A
    cart that knew a tag at the window start transmits once, delayed
    uniformly at random inside the window; the payload carries the tag
    as of the transmission instant.  Overlapping transmissions collide,
    are dropped, and retry in the next window (flagged ``retry``).
  - Delivered packets hit the local store database; the local database
    pushes delta snapshots to a main database every sync period.
  - Food-tracker tags sample their environment profile on their own
    interval, independent of cart traffic.

Determinism: the only randomness is the per-window delay draw, taken
from one seeded generator in ascending cart-id order, so identical
scenarios replay byte-identically (event log and final state).
Event times are simulation seconds; database timestamps are
``rtc_epoch + simulation time``.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .. import foodtrack
from ..cartlink import (
    CartPositionPacket,
    ScheduleEntry,
    TransmissionSchedule,
    detect_collisions,
    encode_packet,
    packet_airtime,
)
from ..backend import records as rec
from ..backend.database import StoreDatabase, sync_push
from ..backend.journal import JournalStore
from ..errors import ValidationError
from ..positioning import (
    DEFAULT_READ_RANGE_M,
    TagIndex,
    location_cell,
    shortest_path,
)
from .scenario import FoodTagSpec, Scenario, ScenarioError


@dataclass(slots=True)
class Event:
    time: float
    kind: str
    data: dict

    def to_json(self) -> str:
        return json.dumps(
            {"time": self.time, "kind": self.kind, "data": self.data},
            sort_keys=True,
            separators=(",", ":"),
        )


class EventLog:
    """Time-ordered, replayable record of everything the run did."""

    def __init__(self):
        self._events: list[Event] = []

    def append(self, time: float, kind: str, data: dict) -> None:
        self._events.append(Event(time, kind, data))

    def finalize(self) -> None:
        self._events.sort(key=lambda e: e.time)

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def counts(self) -> Counter:
        return Counter(e.kind for e in self._events)

    def by_kind(self, kind: str) -> list[Event]:
        return [e for e in self._events if e.kind == kind]

    def to_jsonl(self, fp) -> None:
        for event in self._events:
            fp.write(event.to_json())
            fp.write("\n")

    def to_csv(self, fp) -> None:
        fp.write("time,kind,data\n")
        for event in self._events:
            data = json.dumps(event.data, sort_keys=True, separators=(",", ":"))
            fp.write(f"{event.time!r},{event.kind},\"{data.replace(chr(34), chr(34) * 2)}\"\n")

    def digest(self) -> str:
        h = hashlib.sha256()
        for event in self._events:
            h.update(event.to_json().encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


# -- kinematics ---------------------------------------------------------------


class _Motion:
    """Piecewise-linear motion along cell centers at constant speed."""

    __slots__ = ("cart_id", "points", "step", "total", "speed", "finish_time")

    def __init__(self, cart_id: int, points: list[tuple[float, float]], step: float, speed: float):
        self.cart_id = cart_id
        self.points = points
        self.step = step  # distance between consecutive points (grid cell size)
        self.total = (len(points) - 1) * step
        self.speed = speed
        self.finish_time = self.total / speed if self.total > 0 else 0.0

    def position(self, t: float) -> tuple[float, float]:
        if t <= 0 or self.total == 0.0:
            return self.points[0]
        s = self.speed * t
        if s >= self.total:
            return self.points[-1]
        idx = s / self.step
        i = int(idx)
        frac = idx - i
        x0, y0 = self.points[i]
        x1, y1 = self.points[i + 1]
        return (x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac)


@dataclass(frozen=True)
class GroundTruthEntry:
    cart_id: int
    x: float
    y: float
    nearest_tag_id: str
    nearest_location_id: str
    distance_m: float
    within_range: bool


class Kinematics:
    """Exact cart trajectories, independent of the sensed RFID pipeline."""

    def __init__(self, scenario: Scenario, read_range: float = DEFAULT_READ_RANGE_M):
        self.scenario = scenario
        self.read_range = read_range
        grid = scenario.grid
        inventory_by_product = {row["product_id"]: row for row in scenario.inventory}
        shoppers = {s.cart_id: s for s in scenario.shoppers}
        self.motions: dict[int, _Motion] = {}
        for cart in scenario.carts:
            cells = [cart.start_cell]
            shopper = shoppers.get(cart.cart_id)
            speed = shopper.speed_mps if shopper else 1.0
            if shopper:
                for pid in shopper.waypoint_products:
                    loc = inventory_by_product[pid]["location_id"]
                    cells.append(location_cell(loc, scenario.tags, grid))
            points = [grid.center(cells[0])]
            for a, b in zip(cells, cells[1:]):
                try:
                    path = shortest_path(grid, a, b)
                except ValidationError as exc:
                    raise ScenarioError(
                        f"cart {cart.cart_id}: no route {a} -> {b}: {exc}"
                    ) from None
                points.extend(grid.center(c) for c in path)
            self.motions[cart.cart_id] = _Motion(cart.cart_id, points, grid.cell_size, speed)

    def position(self, cart_id: int, t: float) -> tuple[float, float]:
        return self.motions[cart_id].position(t)

    def finish_time(self, cart_id: int) -> float:
        return self.motions[cart_id].finish_time

    def nearest_tag(self, x: float, y: float) -> tuple[str, str, float]:
        """Unconditionally nearest tag: (tag_id, location_id, distance)."""
        best = None
        for tag_id, p in self.scenario.tags.entries.items():
            d2 = (p.x - x) ** 2 + (p.y - y) ** 2
            candidate = (d2, tag_id, p.location_id)
            if best is None or candidate < best:
                best = candidate
        if best is None:
            raise ValidationError("scenario has no tags")
        return best[1], best[2], best[0] ** 0.5

    def entry(self, cart_id: int, t: float) -> GroundTruthEntry:
        x, y = self.position(cart_id, t)
        tag_id, location_id, distance = self.nearest_tag(x, y)
        return GroundTruthEntry(
            cart_id=cart_id,
            x=x,
            y=y,
            nearest_tag_id=tag_id,
            nearest_location_id=location_id,
            distance_m=distance,
            within_range=distance <= self.read_range,
        )

    def at(self, t: float) -> dict[int, GroundTruthEntry]:
        return {cart_id: self.entry(cart_id, t) for cart_id in sorted(self.motions)}


def ground_truth(
    scenario: Scenario, time: float, kinematics: Kinematics | None = None
) -> dict[int, GroundTruthEntry]:
    """Exact positions and nearest-tag locations at one instant."""
    if not 0 <= time <= scenario.duration_s:
        raise ValidationError(
            f"time {time} outside the scenario duration [0, {scenario.duration_s}]"
        )
    kin = kinematics or Kinematics(scenario)
    return kin.at(time)


# -- database seeding -----------------------------------------------------------


def seed_database(db: StoreDatabase, scenario: Scenario, now: float) -> None:
    """Load a database with the scenario's static world state."""
    store = scenario.store
    db.put_store(
        rec.StoreRecord(
            store_id=store["store_id"],
            name=store["name"],
            lat=store["lat"],
            lon=store["lon"],
            traffic_status=rec.TrafficStatus(store.get("traffic_status", "Low")),
            parking_free=store.get("parking_free", 0),
            updated_at=now,
        )
    )
    for remote in scenario.remote_stores:
        r = remote["store"]
        db.put_store(
            rec.StoreRecord(
                store_id=r["store_id"],
                name=r["name"],
                lat=r["lat"],
                lon=r["lon"],
                traffic_status=rec.TrafficStatus(r.get("traffic_status", "Low")),
                parking_free=r.get("parking_free", 0),
                updated_at=now,
            )
        )
    for product in scenario.products:
        db.put_product(rec.ProductRecord(product["product_id"], product["name"], now))

    store_id = store["store_id"]
    seen_locations = set()
    for tag_id in sorted(scenario.tags.entries):
        p = scenario.tags.entries[tag_id]
        if p.location_id not in seen_locations:
            seen_locations.add(p.location_id)
            db.put_location(
                rec.LocationRecord(store_id, p.location_id, p.location_id, p.x, p.y, now)
            )
        db.put_tag_placement(
            rec.TagPlacementRecord(store_id, tag_id, p.location_id, p.x, p.y, now)
        )
    for row in scenario.inventory:
        db.put_inventory(
            rec.InventoryRecord(store_id, row["product_id"], row["count"], row["location_id"], now)
        )
    for remote in scenario.remote_stores:
        for row in remote.get("inventory", []):
            db.put_inventory(
                rec.InventoryRecord(
                    remote["store"]["store_id"],
                    row["product_id"],
                    row["count"],
                    row["location_id"],
                    now,
                )
            )
    for lane in scenario.lanes:
        db.put_lane(rec.LaneRecord(store_id, lane["lane_id"], list(lane.get("queue", [])), now))
    for cart in scenario.carts:
        db.register_cart(store_id, cart.cart_id, updated_at=now)


# -- food tag simulation -----------------------------------------------------------


def simulate_food_tag(
    spec: FoodTagSpec,
    duration_s: float,
    rtc_epoch: int,
    on_event: Callable[[float, str, dict], None] | None = None,
) -> foodtrack.TagMemory:
    """Run one tag's plant hand-offs and sensor sampling over the horizon."""
    tag = foodtrack.TagMemory.blank(spec.log_region_octets)
    foodtrack.init_tag(
        tag,
        spec.password,
        production_date=spec.production_date,
        expiry_date=spec.expiry_date,
        thresholds=spec.thresholds,
        sample_interval_min=spec.sample_interval_min,
    )
    interval_s = spec.sample_interval_min * 60
    timeline: list[tuple[float, int, str, object]] = []
    for i, plant in enumerate(spec.plant_events):
        timeline.append((plant.at_s, i, "plant", plant))
    n_samples = int(duration_s // interval_s) + 1
    for j in range(n_samples):
        timeline.append((j * interval_s, j, "sample", None))
    timeline.sort(key=lambda item: (item[0], item[2]))

    for t, _, what, payload in timeline:
        rtc_now = rtc_epoch + int(t)
        if what == "plant":
            foodtrack.record_plant_event(tag, payload.plant_id, payload.kind, rtc_now)
            if on_event:
                on_event(
                    t,
                    "plant-event",
                    {
                        "tag_id": spec.tag_id,
                        "plant_id": payload.plant_id,
                        "kind": payload.kind.name.title(),
                    },
                )
        else:
            env = spec.value_at(t)
            reading = foodtrack.SensorReading(
                temp_raw=foodtrack.celsius_to_raw(env.temp_c),
                hum_raw=foodtrack.rh_to_raw(env.rh_pct),
                rtc_now=rtc_now,
            )
            _, appended = foodtrack.sample(tag, reading)
            if on_event:
                on_event(
                    t,
                    "sensor-sample",
                    {
                        "tag_id": spec.tag_id,
                        "temp_raw": reading.temp_raw,
                        "hum_raw": reading.hum_raw,
                        "appended": appended,
                    },
                )
    return tag


# -- the run ---------------------------------------------------------------------


@dataclass
class SimulationResult:
    scenario: Scenario
    events: EventLog
    db: StoreDatabase
    main_db: StoreDatabase | None
    food_tags: dict[str, foodtrack.TagMemory]
    kinematics: Kinematics = field(repr=False)

    def ground_truth(self, time: float) -> dict[int, GroundTruthEntry]:
        return ground_truth(self.scenario, time, self.kinematics)

    def state_digest(self) -> str:
        """Digest of the final world state (database + tag memories)."""
        h = hashlib.sha256()
        snapshot = self.db.snapshot(self.scenario.store["store_id"])
        h.update(
            json.dumps(snapshot.entries, sort_keys=True, separators=(",", ":")).encode()
        )
        for tag_id in sorted(self.food_tags):
            h.update(tag_id.encode())
            h.update(foodtrack.encode_tag_file(self.food_tags[tag_id]))
        return h.hexdigest()


def run(scenario: Scenario, journal: JournalStore | None = None) -> SimulationResult:
    """Execute a scenario; see the module docstring for the timeline model."""
    store_id = scenario.store["store_id"]
    epoch = float(scenario.rtc_epoch)
    local = StoreDatabase(journal=journal)
    seed_database(local, scenario, now=epoch)
    main: StoreDatabase | None = None
    if scenario.sync_period_s > 0:
        main = StoreDatabase()
        seed_database(main, scenario, now=epoch)

    log = EventLog()
    food_tags: dict[str, foodtrack.TagMemory] = {}
    for spec in scenario.food_tags:
        food_tags[spec.tag_id] = simulate_food_tag(
            spec, scenario.duration_s, scenario.rtc_epoch, on_event=log.append
        )

    kinematics = Kinematics(scenario)
    index = TagIndex(scenario.tags, DEFAULT_READ_RANGE_M)
    rng = random.Random(scenario.seed)
    airtime = packet_airtime(80, scenario.radio.overhead_bits, scenario.radio.rate_bps)
    window = scenario.radio.window_s
    tick = scenario.tick_s
    ticks_per_window = round(window / tick)
    n_windows = round(scenario.duration_s / window)
    sync_every = round(scenario.sync_period_s / window) if scenario.sync_period_s > 0 else 0

    shopper_items = {s.cart_id: len(s.waypoint_products) for s in scenario.shoppers}
    cart_ids = sorted(m for m in kinematics.motions)
    current: dict[int, tuple[str, str] | None] = {cid: None for cid in cart_ids}
    active = [kinematics.motions[cid] for cid in cart_ids]
    retry_pending: set[int] = set()
    last_sync = epoch
    tick_index = 0

    for k in range(n_windows):
        senders = [cid for cid in cart_ids if current[cid] is not None]
        start_tags = {cid: current[cid] for cid in senders}
        window_changes: dict[int, list[tuple[float, tuple[str, str]]]] = {}

        for _ in range(ticks_per_window):
            t = tick_index * tick
            tick_index += 1
            if not active:
                continue
            still = []
            for motion in active:
                cid = motion.cart_id
                x, y = motion.position(t)
                hit = index.read(x, y)
                if hit is not None and (current[cid] is None or hit[0] != current[cid][0]):
                    current[cid] = hit
                    window_changes.setdefault(cid, []).append((t, hit))
                    log.append(
                        t, "tag-read", {"cart_id": cid, "tag_id": hit[0], "location_id": hit[1]}
                    )
                if t >= motion.finish_time:
                    items = shopper_items.get(cid)
                    if items:
                        lane_id = local.fastest_lane(store_id, items)
                        local.join_lane(
                            store_id, lane_id, items, now=epoch + motion.finish_time
                        )
                        log.append(
                            motion.finish_time,
                            "lane-join",
                            {"cart_id": cid, "lane_id": lane_id, "items": items},
                        )
                else:
                    still.append(motion)
            active = still

        if senders:
            window_start = k * window
            draws = [(window_start + rng.random() * window, cid) for cid in senders]
            schedule = TransmissionSchedule(
                window=window,
                entries=[ScheduleEntry(cid, tx, airtime) for tx, cid in draws],
            )
            pairs = detect_collisions(schedule)
            losers = {cid for pair in pairs for cid in pair}
            starts = {cid: tx for tx, cid in draws}
            for tx, cid in sorted(draws):
                changes = window_changes.get(cid)
                tag_loc = start_tags[cid]
                if changes:
                    for change_t, change in changes:
                        if change_t <= tx:
                            tag_loc = change
                tag_id = tag_loc[0]
                packet = CartPositionPacket(store_id, cid, tag_id)
                log.append(
                    tx,
                    "packet-sent",
                    {
                        "cart_id": cid,
                        "packet": encode_packet(packet).hex().upper(),
                        "tag_id": tag_id,
                        "retry": cid in retry_pending,
                    },
                )
                if cid not in losers:
                    arrival = tx + airtime
                    record = local.ingest_position(packet, now=epoch + arrival)
                    log.append(
                        arrival,
                        "db-upsert",
                        {
                            "cart_id": cid,
                            "tag_id": tag_id,
                            "location_id": record.cart_location,
                        },
                    )
            for a, b in sorted(pairs):
                log.append(
                    max(starts[a], starts[b]), "collision", {"cart_ids": [a, b]}
                )
            retry_pending = losers

        if sync_every and (k + 1) % sync_every == 0:
            boundary = (k + 1) * window
            snapshot = local.snapshot(store_id, since=last_sync)
            applied = sync_push(snapshot, main)
            log.append(
                boundary,
                "sync-push",
                {"store_id": store_id, "records": len(snapshot.entries), "applied": applied},
            )
            last_sync = epoch + boundary

    if main is not None and (not sync_every or n_windows % sync_every != 0):
        snapshot = local.snapshot(store_id, since=last_sync)
        applied = sync_push(snapshot, main)
        log.append(
            scenario.duration_s,
            "sync-push",
            {"store_id": store_id, "records": len(snapshot.entries), "applied": applied},
        )

    for tag_id in sorted(food_tags):
        local.register_food_tag(
            tag_id,
            foodtrack.encode_memory(food_tags[tag_id]),
            now=epoch + scenario.duration_s,
        )

    log.finalize()
    return SimulationResult(
        scenario=scenario,
        events=log,
        db=local,
        main_db=main,
        food_tags=food_tags,
        kinematics=kinematics,
    )
