"""Scenario files: JSON schema validation and cross-reference checks.

A scenario pins everything a run needs -- seed, store layout, tags,
carts, shoppers, lanes, inventory, food tags with their environment
profiles, and radio parameters -- so two runs of the same file are
byte-identical.  Structural validation runs against
``scenario.schema.json``; the checks jsonschema cannot express
(cross-references, geometry) raise :class:`ScenarioError` with the
offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ValidationError
from ..foodtrack import PlantEventKind, Thresholds
from ..positioning import StoreGrid, TagMap, tag_map_from_entries


class ScenarioError(ValidationError):
    """Scenario fails schema or cross-reference validation."""


def _schema() -> dict:
    text = resources.files("sysmart.simulator").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


_SCHEMA = _schema()


@dataclass(frozen=True)
class CartSpec:
    cart_id: int
    start_cell: tuple[int, int]


@dataclass(frozen=True)
class ShopperSpec:
    cart_id: int
    waypoint_products: tuple[int, ...]
    speed_mps: float = 1.2


@dataclass(frozen=True)
class EnvSegment:
    start_s: float
    temp_c: float
    rh_pct: float


@dataclass(frozen=True)
class PlantEventSpec:
    plant_id: int
    kind: PlantEventKind
    at_s: float


@dataclass(frozen=True)
class FoodTagSpec:
    tag_id: str
    password: str
    sample_interval_min: int
    environment: tuple[EnvSegment, ...]
    production_date: int | None = None
    expiry_date: int | None = None
    thresholds: Thresholds = Thresholds()
    log_region_octets: int = 2040
    plant_events: tuple[PlantEventSpec, ...] = ()

    def value_at(self, t: float) -> EnvSegment:
        current = self.environment[0]
        for segment in self.environment:
            if segment.start_s <= t:
                current = segment
            else:
                break
        return current


@dataclass(frozen=True)
class RadioConfig:
    window_s: float = 1.0
    overhead_bits: int = 48
    rate_bps: float = 54e6


@dataclass
class Scenario:
    seed: int
    duration_s: float
    tick_s: float
    rtc_epoch: int
    sync_period_s: float
    store: dict
    grid: StoreGrid
    tags: TagMap
    products: list[dict]
    inventory: list[dict]
    lanes: list[dict]
    carts: list[CartSpec]
    shoppers: list[ShopperSpec]
    food_tags: list[FoodTagSpec]
    radio: RadioConfig
    remote_stores: list[dict]
    raw: dict = field(repr=False, default_factory=dict)


def load_scenario_file(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from None
    return load_scenario(raw)


def load_scenario(raw: dict) -> Scenario:
    try:
        jsonschema.validate(raw, _SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "(top level)"
        raise ScenarioError(f"{path}: {exc.message}") from None

    grid_raw = raw["grid"]
    grid = StoreGrid(
        width=grid_raw["width"],
        height=grid_raw["height"],
        cell_size=grid_raw.get("cell_size_m", 1.0),
        blocked=frozenset(tuple(c) for c in grid_raw.get("blocked", [])),
    )
    for i, cell in enumerate(grid_raw.get("blocked", [])):
        if not grid.contains(tuple(cell)):
            raise ScenarioError(f"grid.blocked.{i}: cell {cell} outside grid")

    store_id = raw["store"]["store_id"]
    try:
        tags = tag_map_from_entries(store_id, raw["tags"])
    except ValidationError as exc:
        raise ScenarioError(f"tags: {exc}") from None
    max_x = grid.width * grid.cell_size
    max_y = grid.height * grid.cell_size
    for i, entry in enumerate(raw["tags"]):
        if not (0 <= entry["x"] < max_x and 0 <= entry["y"] < max_y):
            raise ScenarioError(
                f"tags.{i}: ({entry['x']}, {entry['y']}) outside the "
                f"{max_x:g} x {max_y:g} m floor"
            )

    carts = []
    seen_carts = set()
    for i, entry in enumerate(raw["carts"]):
        cart_id = entry["cart_id"]
        if cart_id in seen_carts:
            raise ScenarioError(f"carts.{i}: duplicate cart_id {cart_id}")
        seen_carts.add(cart_id)
        cell = tuple(entry["start_cell"])
        if not grid.passable(cell):
            raise ScenarioError(f"carts.{i}.start_cell: {cell} blocked or outside grid")
        carts.append(CartSpec(cart_id, cell))

    products = raw.get("products", [])
    product_ids = {p["product_id"] for p in products}
    location_ids = {p.location_id for p in tags.entries.values()}
    inventory = raw.get("inventory", [])
    inventory_by_product = {}
    for i, row in enumerate(inventory):
        if row["product_id"] not in product_ids:
            raise ScenarioError(f"inventory.{i}.product_id: unknown product {row['product_id']}")
        if row["location_id"] not in location_ids:
            raise ScenarioError(
                f"inventory.{i}.location_id: no tag marks location {row['location_id']!r}"
            )
        inventory_by_product[row["product_id"]] = row

    lanes = raw.get("lanes", [])
    shoppers = []
    for i, entry in enumerate(raw.get("shoppers", [])):
        if entry["cart_id"] not in seen_carts:
            raise ScenarioError(f"shoppers.{i}.cart_id: unknown cart {entry['cart_id']}")
        for j, pid in enumerate(entry["waypoint_products"]):
            if pid not in inventory_by_product:
                raise ScenarioError(
                    f"shoppers.{i}.waypoint_products.{j}: product {pid} has no inventory row"
                )
        shoppers.append(
            ShopperSpec(
                cart_id=entry["cart_id"],
                waypoint_products=tuple(entry["waypoint_products"]),
                speed_mps=entry.get("speed_mps", 1.2),
            )
        )
    if shoppers and not lanes:
        raise ScenarioError("lanes: shoppers need at least one checkout lane")

    food_tags = []
    for i, entry in enumerate(raw.get("food_tags", [])):
        segments = tuple(
            EnvSegment(s["start_s"], s["temp_c"], s["rh_pct"]) for s in entry["environment"]
        )
        if segments[0].start_s != 0:
            raise ScenarioError(f"food_tags.{i}.environment.0.start_s: profile must start at 0")
        if any(b.start_s <= a.start_s for a, b in zip(segments, segments[1:])):
            raise ScenarioError(
                f"food_tags.{i}.environment: segment starts must strictly increase"
            )
        events = tuple(
            PlantEventSpec(e["plant_id"], PlantEventKind[e["kind"].upper()], e["at_s"])
            for e in entry.get("plant_events", [])
        )
        thresholds = Thresholds(
            temp_raw=entry.get("temp_threshold_raw", Thresholds().temp_raw),
            hum_raw=entry.get("hum_threshold_raw", Thresholds().hum_raw),
        )
        food_tags.append(
            FoodTagSpec(
                tag_id=entry["tag_id"],
                password=entry["password"],
                sample_interval_min=entry["sample_interval_min"],
                environment=segments,
                production_date=entry.get("production_date"),
                expiry_date=entry.get("expiry_date"),
                thresholds=thresholds,
                log_region_octets=entry.get("log_region_octets", 2040),
                plant_events=events,
            )
        )

    radio_raw = raw.get("radio", {})
    radio = RadioConfig(
        window_s=radio_raw.get("window_s", 1.0),
        overhead_bits=radio_raw.get("overhead_bits", 48),
        rate_bps=radio_raw.get("rate_bps", 54e6),
    )

    tick_s = raw.get("tick_s", 0.1)
    duration_s = raw["duration_s"]
    ticks_per_window = radio.window_s / tick_s
    if abs(ticks_per_window - round(ticks_per_window)) > 1e-9 or round(ticks_per_window) < 1:
        raise ScenarioError(
            f"tick_s: radio window {radio.window_s} s must be a whole number of "
            f"{tick_s} s ticks"
        )
    windows = duration_s / radio.window_s
    if abs(windows - round(windows)) > 1e-9 or round(windows) < 1:
        raise ScenarioError(
            f"duration_s: {duration_s} s must be a whole number of "
            f"{radio.window_s} s transmission windows"
        )
    sync_period_s = raw.get("sync_period_s", 5.0)
    if sync_period_s > 0:
        periods = sync_period_s / radio.window_s
        if abs(periods - round(periods)) > 1e-9 or round(periods) < 1:
            raise ScenarioError(
                f"sync_period_s: {sync_period_s} s must be a whole number of windows"
            )

    return Scenario(
        seed=raw["seed"],
        duration_s=duration_s,
        tick_s=tick_s,
        rtc_epoch=raw.get("rtc_epoch", 1735689600),
        sync_period_s=sync_period_s,
        store=dict(raw["store"]),
        grid=grid,
        tags=tags,
        products=products,
        inventory=inventory,
        lanes=lanes,
        carts=carts,
        shoppers=shoppers,
        food_tags=food_tags,
        radio=radio,
        remote_stores=raw.get("remote_stores", []),
        raw=raw,
    )
