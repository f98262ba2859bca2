"""Household agents: neighbourhood dissimilarity, happiness rules and relocation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .lattice import AgentType, Coord, InfluenceTag, RegionType, World, moore_neighbors


class AgentState(enum.Enum):
    HAPPY = "happy"
    UNHAPPY = "unhappy"


class HappinessRule(enum.Enum):
    """How neighbourhood dissimilarity and the influence tag combine.

    ``BASE``
        Classic Schelling: unhappy when the unlike share exceeds the threshold.
    ``LITERAL_EQ2``
        Happy only when the unlike share is at least the threshold and the
        cell carries Cooperation or no influence.
    ``RECONCILED``
        Under Cooperation the agent seeks diversity (happy when the unlike
        share is at least the threshold); otherwise the classic rule applies.
    """

    BASE = "base"
    LITERAL_EQ2 = "literal"
    RECONCILED = "reconciled"


@dataclass
class Agent:
    id: int
    agent_type: AgentType
    position: Coord
    state: AgentState = AgentState.HAPPY


_ALLOWED_REGIONS = {
    AgentType.EXPAT: (RegionType.EXPAT, RegionType.NEUTRAL),
    AgentType.NATIVE: (RegionType.NATIVE, RegionType.NEUTRAL),
}


def iid(world: World, a: Agent) -> float:
    """Share of ``a``'s occupied Moore neighbours holding the other type (0 if none)."""
    occupied = other = 0
    for x, y in moore_neighbors(world, a.position):
        k = world.kind[y, x]
        if k:
            occupied += 1
            if k != a.agent_type:
                other += 1
    return other / occupied if occupied else 0.0


def neighbor_counts(world: World) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell counts of expat and native Moore neighbours (no wrap)."""
    padded = np.pad(world.kind, 1)
    h, w = world.height, world.width
    expat = np.zeros((h, w), dtype=np.int16)
    native = np.zeros((h, w), dtype=np.int16)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            if dy == 1 and dx == 1:
                continue
            window = padded[dy:dy + h, dx:dx + w]
            expat += window == AgentType.EXPAT
            native += window == AgentType.NATIVE
    return expat, native


def positions(agents) -> tuple[np.ndarray, np.ndarray]:
    if not agents:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    # fromiter over a flat stream avoids numpy inspecting every tuple
    flat = np.fromiter((v for a in agents for v in a.position), dtype=np.int64, count=2 * len(agents))
    return flat[0::2], flat[1::2]


def iid_vector(world: World, agents) -> np.ndarray:
    """Vectorized :func:`iid` for every agent, in list order."""
    xs, ys = positions(agents)
    if xs.size == 0:
        return np.zeros(0)
    expat, native = neighbor_counts(world)
    e = expat[ys, xs].astype(np.int64)
    n = native[ys, xs].astype(np.int64)
    own = world.kind[ys, xs]
    other = np.where(own == AgentType.EXPAT, n, e)
    occupied = e + n
    out = np.zeros(xs.size)
    np.divide(other, occupied, out=out, where=occupied > 0)
    return out


def is_happy(iid_value, tag, rule: HappinessRule, pdtu: float):
    """Happiness under ``rule``; accepts scalars or equal-shape arrays."""
    if rule is HappinessRule.BASE:
        return iid_value <= pdtu
    if rule is HappinessRule.LITERAL_EQ2:
        return (iid_value >= pdtu) & (tag != InfluenceTag.NON_COOPERATION)
    if rule is HappinessRule.RECONCILED:
        coop = tag == InfluenceTag.COOPERATION
        return np.where(coop, iid_value >= pdtu, iid_value <= pdtu)
    raise ValueError(f"unknown happiness rule {rule!r}")


def evaluate_happiness(world: World, a: Agent, rule: HappinessRule, pdtu: float) -> AgentState:
    if not 0.0 <= pdtu <= 1.0:
        raise ValueError("pdtu must lie in [0, 1]")
    tag = InfluenceTag(int(world.infected[a.position[1], a.position[0]]))
    happy = bool(is_happy(iid(world, a), tag, rule, pdtu))
    return AgentState.HAPPY if happy else AgentState.UNHAPPY


def happiness_vector(world: World, agents, rule: HappinessRule, pdtu: float) -> np.ndarray:
    """Boolean happy flag for every agent, evaluated against the current world."""
    if not 0.0 <= pdtu <= 1.0:
        raise ValueError("pdtu must lie in [0, 1]")
    if not agents:
        return np.zeros(0, dtype=bool)
    xs, ys = positions(agents)
    tags = world.infected[ys, xs]
    return np.asarray(is_happy(iid_vector(world, agents), tags, rule, pdtu), dtype=bool)


class FreeCells:
    """Free cells grouped by region with O(1) take/release.

    Each region keeps a list of flat cell indices; ``slot`` maps a flat index
    back to its position so removal is a swap with the last element.
    """

    def __init__(self, world: World):
        self.width = world.width
        self.region_flat = world.region_id.ravel()
        self.lists: list[list[int]] = [[] for _ in world.regions]
        self.slot = np.full(world.num_cells, -1, dtype=np.int64)
        free = np.flatnonzero(world.occupant.ravel() < 0)
        for flat in free.tolist():
            lst = self.lists[self.region_flat[flat]]
            self.slot[flat] = len(lst)
            lst.append(flat)

    def count(self, region: int) -> int:
        return len(self.lists[region])

    def take(self, flat: int) -> None:
        lst = self.lists[self.region_flat[flat]]
        i = self.slot[flat]
        last = lst.pop()
        if last != flat:
            lst[i] = last
            self.slot[last] = i
        self.slot[flat] = -1

    def release(self, flat: int) -> None:
        lst = self.lists[self.region_flat[flat]]
        self.slot[flat] = len(lst)
        lst.append(flat)


def select_destination(world: World, a: Agent, rng, free: FreeCells | None = None) -> Coord | None:
    """Uniform free cell in a uniformly drawn region of ``a``'s type or Neutral.

    Returns ``None`` when no such region has a free cell.
    """
    if free is None:
        free = FreeCells(world)
    allowed = _ALLOWED_REGIONS[a.agent_type]
    candidates = [
        r.id for r in world.regions if r.region_type in allowed and free.lists[r.id]
    ]
    if not candidates:
        return None
    cells = free.lists[candidates[int(rng.integers(len(candidates)))]]
    flat = cells[int(rng.integers(len(cells)))]
    return Coord(flat % world.width, flat // world.width)


def relocate(world: World, a: Agent, dest: Coord, free: FreeCells | None = None) -> None:
    old = a.position
    world.vacate(old)
    world.place(a.id, a.agent_type, dest)
    a.position = dest
    if free is not None:
        free.take(dest[1] * world.width + dest[0])
        free.release(old[1] * world.width + old[0])


def movement_phase(world: World, agents, rule: HappinessRule, pdtu: float, rng) -> int:
    """Evaluate everyone on a frozen snapshot, then relocate the unhappy in random order.

    Moves are applied immediately, so later movers see earlier moves.
    Returns the number of agents that relocated.
    """
    happy = happiness_vector(world, agents, rule, pdtu)
    for a, h in zip(agents, happy.tolist()):
        a.state = AgentState.HAPPY if h else AgentState.UNHAPPY
    unhappy = np.flatnonzero(~happy)
    if unhappy.size == 0:
        return 0
    free = FreeCells(world)
    moves = 0
    for i in rng.permutation(unhappy).tolist():
        a = agents[i]
        dest = select_destination(world, a, rng, free)
        if dest is None:
            continue
        relocate(world, a, dest, free)
        moves += 1
    return moves
