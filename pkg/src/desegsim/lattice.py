"""Cellular-automaton world: region ids, occupancy, neighborhoods and the influence field.

Cell state lives in parallel numpy grids indexed ``[y, x]`` so that the
per-tick scans in :mod:`desegsim.segregation` can be vectorized.  The
:class:`Cell` dataclass is a read-only snapshot for callers that want a
single cell.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

EMPTY = -1
NO_EXPIRY = -1


class Coord(NamedTuple):
    x: int
    y: int


class InfluenceTag(enum.IntEnum):
    NULL = 0
    COOPERATION = 1
    NON_COOPERATION = 2


class AgentType(enum.IntEnum):
    EXPAT = 1
    NATIVE = 2

    @property
    def other(self) -> "AgentType":
        return AgentType.NATIVE if self is AgentType.EXPAT else AgentType.EXPAT


class RegionType(enum.Enum):
    EXPAT = "expat"
    NATIVE = "native"
    NEUTRAL = "neutral"


@dataclass
class Region:
    id: int
    area: int
    region_type: RegionType = RegionType.NEUTRAL
    quota: int = 0


@dataclass(frozen=True)
class Cell:
    region_id: int
    occupant: int | None
    infected_with: InfluenceTag
    influence_expires_at: int | None


class World:
    """Row-major lattice of cells partitioned into regions.

    Parameters
    ----------
    region_grid : array_like, shape (height, width)
        Region id of every cell.
    num_regions : int, optional
        Number of regions; inferred from the grid when omitted.
    """

    def __init__(self, region_grid, num_regions: int | None = None):
        grid = np.asarray(region_grid, dtype=np.int64)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("region grid must be a non-empty 2-D array")
        if num_regions is None:
            num_regions = int(grid.max()) + 1
        if grid.min() < 0 or grid.max() >= num_regions:
            raise ValueError("region id out of range")
        self.height, self.width = grid.shape
        self.region_id = grid
        areas = np.bincount(grid.ravel(), minlength=num_regions)
        self.regions = [Region(id=i, area=int(a)) for i, a in enumerate(areas)]
        self.occupant = np.full(grid.shape, EMPTY, dtype=np.int64)
        # 0 = empty, otherwise AgentType value of the occupant
        self.kind = np.zeros(grid.shape, dtype=np.int8)
        self.infected = np.zeros(grid.shape, dtype=np.int8)
        self.expires = np.full(grid.shape, NO_EXPIRY, dtype=np.int64)

    @property
    def num_cells(self) -> int:
        return self.width * self.height

    def in_bounds(self, c: Coord) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def _check(self, c: Coord) -> None:
        if not self.in_bounds(c):
            raise ValueError(f"coordinate {tuple(c)} outside {self.width}x{self.height} world")

    def cell(self, c: Coord) -> Cell:
        self._check(c)
        x, y = c
        occ = int(self.occupant[y, x])
        tag = InfluenceTag(int(self.infected[y, x]))
        exp = int(self.expires[y, x])
        return Cell(
            region_id=int(self.region_id[y, x]),
            occupant=None if occ == EMPTY else occ,
            infected_with=tag,
            influence_expires_at=None if exp == NO_EXPIRY else exp,
        )

    def region_of(self, c: Coord) -> int:
        return int(self.region_id[c[1], c[0]])

    def is_free(self, c: Coord) -> bool:
        return self.occupant[c[1], c[0]] == EMPTY

    def place(self, agent_id: int, agent_type: AgentType, c: Coord) -> None:
        x, y = c
        if self.occupant[y, x] != EMPTY:
            raise ValueError(f"cell {tuple(c)} already occupied")
        self.occupant[y, x] = agent_id
        self.kind[y, x] = int(agent_type)

    def vacate(self, c: Coord) -> None:
        x, y = c
        self.occupant[y, x] = EMPTY
        self.kind[y, x] = 0

    def free_cell_count(self) -> int:
        return int(np.count_nonzero(self.occupant == EMPTY))


def moore_neighbors(world: World, c: Coord) -> list[Coord]:
    """In-bounds cells of the 8-neighborhood of ``c``, row-major, no wrap."""
    world._check(c)
    x0, y0 = c
    out = []
    for dy in (-1, 0, 1):
        y = y0 + dy
        if y < 0 or y >= world.height:
            continue
        for dx in (-1, 0, 1):
            x = x0 + dx
            if (dx or dy) and 0 <= x < world.width:
                out.append(Coord(x, y))
    return out


def _disc_mask(world: World, c: Coord, r: float):
    """Bounding-box slices and boolean mask of cells within Euclidean ``r`` of ``c``."""
    if r < 0:
        raise ValueError(f"radius must be non-negative, got {r}")
    x0, y0 = c
    reach = int(math.floor(r))
    xs = slice(max(0, x0 - reach), min(world.width, x0 + reach + 1))
    ys = slice(max(0, y0 - reach), min(world.height, y0 + reach + 1))
    dx = np.arange(xs.start, xs.stop) - x0
    dy = np.arange(ys.start, ys.stop) - y0
    # integer squared distances compared against r*r; exact for integer r
    mask = (dy[:, None] ** 2 + dx[None, :] ** 2) <= r * r
    return ys, xs, mask


def cells_within(world: World, c: Coord, r: float) -> list[Coord]:
    """All in-bounds cells whose centre lies within Euclidean distance ``r`` of ``c``."""
    world._check(c)
    ys, xs, mask = _disc_mask(world, c, r)
    iy, ix = np.nonzero(mask)
    return [Coord(int(x) + xs.start, int(y) + ys.start) for y, x in zip(iy, ix)]


def stamp_influence(world: World, center: Coord, r: float, tag: InfluenceTag, expires_at: int) -> int:
    """Tag every cell within ``r`` of ``center``; returns the number of cells stamped."""
    if tag == InfluenceTag.NULL:
        raise ValueError("cannot stamp the Null tag")
    world._check(center)
    ys, xs, mask = _disc_mask(world, center, r)
    world.infected[ys, xs][mask] = int(tag)
    world.expires[ys, xs][mask] = expires_at
    return int(mask.sum())


def expire_influence(world: World, now: int) -> int:
    stale = (world.expires != NO_EXPIRY) & (world.expires <= now)
    n = int(stale.sum())
    if n:
        world.infected[stale] = int(InfluenceTag.NULL)
        world.expires[stale] = NO_EXPIRY
    return n


def clear_influence(world: World) -> None:
    world.infected[:] = int(InfluenceTag.NULL)
    world.expires[:] = NO_EXPIRY
