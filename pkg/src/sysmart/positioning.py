"""Floor-tag positioning: tag map, cart reader simulation, grid routing.

Position granularity is "nearest tag": the reader mounted under a cart
sees the closest floor tag within its effective range (20 cm once the
cart frame attenuates the nominal 1 m) and the tag resolves to a store
location.  Routing runs 4-connected BFS over the store grid, where
blocked cells are shelving.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import NotFoundError, ValidationError

DEFAULT_READ_RANGE_M = 0.2

Cell = tuple[int, int]


class UnknownTagError(NotFoundError):
    """Tag ID not present in the store's tag map."""


class UnknownLocationError(NotFoundError):
    """Location ID has no tag placement."""


class RoutingError(ValidationError):
    """Endpoints unusable or destination unreachable."""


@dataclass(frozen=True)
class TagPlacement:
    location_id: str
    x: float
    y: float


@dataclass
class TagMap:
    store_id: int
    entries: dict[str, TagPlacement] = field(default_factory=dict)

    def add(self, tag_id: str, location_id: str, x: float, y: float) -> None:
        if tag_id in self.entries:
            raise ValidationError(f"duplicate tag id {tag_id!r} in store {self.store_id}")
        self.entries[tag_id] = TagPlacement(location_id, x, y)


@dataclass(frozen=True)
class StoreGrid:
    width: int
    height: int
    cell_size: float = 1.0
    blocked: frozenset[Cell] = frozenset()

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError("grid dimensions must be positive")
        if self.cell_size <= 0:
            raise ValidationError("cell_size must be positive")
        for cell in self.blocked:
            if not self.contains(cell):
                raise ValidationError(f"blocked cell {cell} outside {self.width}x{self.height} grid")

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def cell_of(self, x: float, y: float) -> Cell:
        return (int(x // self.cell_size), int(y // self.cell_size))

    def center(self, cell: Cell) -> tuple[float, float]:
        return (
            (cell[0] + 0.5) * self.cell_size,
            (cell[1] + 0.5) * self.cell_size,
        )

    def passable(self, cell: Cell) -> bool:
        return self.contains(cell) and cell not in self.blocked


def simulate_read(
    cart_position: tuple[float, float],
    tags: TagMap,
    read_range: float = DEFAULT_READ_RANGE_M,
) -> str | None:
    """Nearest tag within range, or None; equidistant ties go to the
    lexicographically smallest tag ID."""
    if read_range <= 0:
        raise ValidationError(f"read range must be positive, got {read_range}")
    x, y = cart_position
    limit_sq = read_range * read_range
    best: tuple[float, str] | None = None
    for tag_id, placement in tags.entries.items():
        dist_sq = (placement.x - x) ** 2 + (placement.y - y) ** 2
        if dist_sq <= limit_sq:
            candidate = (dist_sq, tag_id)
            if best is None or candidate < best:
                best = candidate
    return best[1] if best else None


def resolve_location(tag_id: str, tags: TagMap) -> str:
    """Location ID for a known tag."""
    placement = tags.entries.get(tag_id)
    if placement is None:
        raise UnknownTagError(f"tag {tag_id!r} not in store {tags.store_id} map")
    return placement.location_id


class TagIndex:
    """Spatial hash over tag placements for fast in-range queries.

    Bucket size equals the read range, so a query only inspects the 3x3
    block of buckets around the cart.  Results are identical to
    :func:`simulate_read` (property-tested).
    """

    def __init__(self, tags: TagMap, read_range: float = DEFAULT_READ_RANGE_M):
        if read_range <= 0:
            raise ValidationError(f"read range must be positive, got {read_range}")
        self.read_range = read_range
        self._limit_sq = read_range * read_range
        self._buckets: dict[Cell, list[tuple[float, float, str, str]]] = {}
        for tag_id, p in sorted(tags.entries.items()):
            key = (int(p.x // read_range), int(p.y // read_range))
            self._buckets.setdefault(key, []).append((p.x, p.y, tag_id, p.location_id))

    def read(self, x: float, y: float) -> tuple[str, str] | None:
        """(tag_id, location_id) of the nearest in-range tag, or None."""
        bx, by = int(x // self.read_range), int(y // self.read_range)
        best: tuple[float, str, str] | None = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for tx, ty, tag_id, loc in self._buckets.get((bx + dx, by + dy), ()):
                    dist_sq = (tx - x) ** 2 + (ty - y) ** 2
                    if dist_sq <= self._limit_sq:
                        candidate = (dist_sq, tag_id, loc)
                        if best is None or candidate < best:
                            best = candidate
        if best is None:
            return None
        return best[1], best[2]


def location_cell(location_id: str, tags: TagMap, grid: StoreGrid) -> Cell:
    """Grid cell of a location, taken from its tag placement.

    Locations carrying several tags resolve through the smallest tag ID.
    """
    placements = [
        (tag_id, p) for tag_id, p in tags.entries.items() if p.location_id == location_id
    ]
    if not placements:
        raise UnknownLocationError(f"location {location_id!r} has no tag placement")
    _, placement = min(placements)
    return grid.cell_of(placement.x, placement.y)


_NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def shortest_path(grid: StoreGrid, start: Cell, goal: Cell) -> list[Cell]:
    """4-connected BFS path from start to goal, excluding the start cell.

    Returns [] when start == goal.  Deterministic: neighbours expand in a
    fixed order, so equal-length routes always resolve the same way.
    """
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.contains(cell):
            raise RoutingError(f"{name} cell {cell} outside grid")
        if cell in grid.blocked:
            raise RoutingError(f"{name} cell {cell} is blocked")
    if start == goal:
        return []
    parents: dict[Cell, Cell] = {start: start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for dx, dy in _NEIGHBOR_STEPS:
            nxt = (current[0] + dx, current[1] + dy)
            if nxt in parents or not grid.passable(nxt):
                continue
            parents[nxt] = current
            if nxt == goal:
                path = [nxt]
                while parents[path[-1]] != start:
                    path.append(parents[path[-1]])
                path.reverse()
                return path
            queue.append(nxt)
    raise RoutingError(f"no route from {start} to {goal}")


def route_to_item(
    from_location: str, to_location: str, grid: StoreGrid, tags: TagMap
) -> list[Cell]:
    """Shortest aisle route between two tagged locations."""
    start = location_cell(from_location, tags, grid)
    goal = location_cell(to_location, tags, grid)
    return shortest_path(grid, start, goal)


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def euclidean(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def tag_map_from_entries(store_id: int, entries: Iterable[dict]) -> TagMap:
    """Build a TagMap from scenario-style dicts
    ``{"tag_id", "location_id", "x", "y"}``."""
    tags = TagMap(store_id=store_id)
    for entry in entries:
        tags.add(entry["tag_id"], entry["location_id"], float(entry["x"]), float(entry["y"]))
    return tags
