"""Canonical busy-branch scenario: 150 carts and 230 floor tags.

The layout is a 46 x 30 m floor with ten vertical shelf runs, a wide
entrance corridor at the bottom, and a back corridor at the top.  200
tags mark product shelves, 30 mark corridor waypoints.  Every cart gets
a shopper with a handful of waypoints, so the whole fleet transmits
heartbeats while the run exercises reads, collisions, lane joins, sync,
and five food-tracker tags with distinct storage histories.

``build_case_study()`` is deterministic for a given seed; the committed
``scenarios/case_study.json`` is exactly ``build_case_study()`` dumped
with sorted keys.
"""

from __future__ import annotations

import json
import random

from .scenario import Scenario, load_scenario

DEFAULT_SEED = 2018
RTC_EPOCH = 1_735_689_600  # 2025-01-01T00:00:00Z

GRID_WIDTH = 46
GRID_HEIGHT = 30
SHELF_COLUMNS = range(4, 44, 4)  # ten shelf runs
SHELF_Y = range(4, 26)
CART_COUNT = 150
TAG_COUNT = 230
PRODUCT_TAGS = 200
DAY = 86_400


def _tag_id(i: int) -> str:
    return f"{0x000101 + i:06X}"


def build_case_study_raw(seed: int = DEFAULT_SEED) -> dict:
    """Scenario dict (JSON-shaped); see build_case_study for the parsed form."""
    gen = random.Random(seed)

    blocked = [[x, y] for x in SHELF_COLUMNS for y in SHELF_Y]

    # product tags hug the shelves; corridor tags line the walkways
    shelf_sides = [
        (x + dx, y) for x in SHELF_COLUMNS for dx in (-1, 1) for y in SHELF_Y
    ]
    product_cells = sorted(shelf_sides)[::2][:PRODUCT_TAGS]
    corridor_cells = [(x, 1) for x in range(1, 44, 3)] + [(x, 27) for x in range(1, 44, 3)]
    corridor_cells = corridor_cells[: TAG_COUNT - PRODUCT_TAGS]
    tag_cells = product_cells + corridor_cells
    assert len(tag_cells) == TAG_COUNT

    tags = [
        {
            "tag_id": _tag_id(i),
            "location_id": f"L{i + 1:03d}",
            "x": cx + 0.5,
            "y": cy + 0.5,
        }
        for i, (cx, cy) in enumerate(tag_cells)
    ]

    products = [
        {"product_id": 1001 + i, "name": f"product-{1001 + i}"}
        for i in range(PRODUCT_TAGS)
    ]
    inventory = []
    for i, product in enumerate(products):
        count = 0 if gen.random() < 0.08 else gen.randint(1, 40)
        inventory.append(
            {
                "product_id": product["product_id"],
                "count": count,
                "location_id": f"L{i + 1:03d}",
            }
        )
    stocked = [row["product_id"] for row in inventory if row["count"] > 0]

    carts = [
        {"cart_id": 1 + i, "start_cell": [1 + (i % 44), i // 44]}
        for i in range(CART_COUNT)
    ]
    shoppers = []
    for cart in carts:
        waypoints = gen.sample(stocked, gen.randint(3, 6))
        shoppers.append(
            {
                "cart_id": cart["cart_id"],
                "waypoint_products": waypoints,
                "speed_mps": round(gen.uniform(0.9, 1.4), 2),
            }
        )

    lanes = [
        {"lane_id": lane_id, "queue": [gen.randint(1, 12) for _ in range(gen.randint(0, 3))]}
        for lane_id in range(1, 9)
    ]

    food_tags = [
        {
            "tag_id": "FT-COLD-01",
            "password": "fridge-chain-2025-ok",
            "production_date": RTC_EPOCH - 2 * DAY,
            "expiry_date": RTC_EPOCH + 10 * DAY,
            "sample_interval_min": 5,
            "environment": [{"start_s": 0, "temp_c": 4.0, "rh_pct": 45.0}],
            "plant_events": [
                {"plant_id": 11, "kind": "Arrival", "at_s": 0.0},
                {"plant_id": 11, "kind": "Departure", "at_s": 1800.0},
            ],
        },
        {
            "tag_id": "FT-ABUSE-02",
            "password": "left-on-the-dock-007",
            "production_date": RTC_EPOCH - 1 * DAY,
            "expiry_date": RTC_EPOCH + 6 * DAY,
            "sample_interval_min": 5,
            "environment": [
                {"start_s": 0, "temp_c": 4.0, "rh_pct": 50.0},
                {"start_s": 1200, "temp_c": 25.0, "rh_pct": 60.0},
                {"start_s": 2400, "temp_c": 5.0, "rh_pct": 50.0},
            ],
        },
        {
            "tag_id": "FT-FRZ-03",
            "password": "deep-freeze-aisle-09",
            "production_date": RTC_EPOCH - 30 * DAY,
            "expiry_date": RTC_EPOCH + 180 * DAY,
            "sample_interval_min": 10,
            "environment": [{"start_s": 0, "temp_c": -18.0, "rh_pct": 30.0}],
        },
        {
            "tag_id": "FT-AMB-04",
            "password": "dry-goods-pallet-442",
            "production_date": RTC_EPOCH - 10 * DAY,
            "expiry_date": RTC_EPOCH + 90 * DAY,
            "sample_interval_min": 10,
            "environment": [
                {"start_s": 0, "temp_c": 22.0, "rh_pct": 35.0},
                {"start_s": 900, "temp_c": 22.5, "rh_pct": 65.0},
                {"start_s": 1800, "temp_c": 21.5, "rh_pct": 38.0},
                {"start_s": 2700, "temp_c": 23.0, "rh_pct": 70.0},
            ],
        },
        {
            "tag_id": "FT-CHILL-05",
            "password": "dairy-backroom-cool1",
            "production_date": RTC_EPOCH - 3 * DAY,
            "expiry_date": RTC_EPOCH + 14 * DAY,
            "sample_interval_min": 5,
            "environment": [
                {"start_s": 0, "temp_c": 8.0, "rh_pct": 55.0},
                {"start_s": 1500, "temp_c": 6.0, "rh_pct": 52.0},
            ],
        },
    ]

    remote_inventory = []
    for row in inventory[:60]:
        remote_inventory.append(
            {
                "product_id": row["product_id"],
                "count": gen.randint(1, 25),
                "location_id": row["location_id"],
            }
        )

    return {
        "seed": seed,
        "duration_s": 3600.0,
        "tick_s": 0.1,
        "rtc_epoch": RTC_EPOCH,
        "sync_period_s": 5.0,
        "store": {
            "store_id": 1,
            "name": "busiest-branch",
            "lat": 29.3759,
            "lon": 47.9774,
            "traffic_status": "High",
            "parking_free": 42,
        },
        "grid": {
            "width": GRID_WIDTH,
            "height": GRID_HEIGHT,
            "cell_size_m": 1.0,
            "blocked": blocked,
        },
        "tags": tags,
        "products": products,
        "inventory": inventory,
        "lanes": lanes,
        "carts": carts,
        "shoppers": shoppers,
        "food_tags": food_tags,
        "radio": {"window_s": 1.0, "overhead_bits": 48, "rate_bps": 54e6},
        "remote_stores": [
            {
                "store": {
                    "store_id": 2,
                    "name": "north-branch",
                    "lat": 29.45,
                    "lon": 47.95,
                },
                "inventory": remote_inventory[:40],
            },
            {
                "store": {
                    "store_id": 3,
                    "name": "coast-branch",
                    "lat": 29.30,
                    "lon": 48.10,
                },
                "inventory": remote_inventory[40:],
            },
        ],
    }


def build_case_study(seed: int = DEFAULT_SEED) -> Scenario:
    return load_scenario(build_case_study_raw(seed))


def write_case_study(path, seed: int = DEFAULT_SEED) -> None:
    raw = build_case_study_raw(seed)
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(raw, fp, indent=1, sort_keys=True)
        fp.write("\n")
