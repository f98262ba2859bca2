"""Virtual leader layer: one generation of reproduce, cluster, fight, compete, influence.

Leaders are either cooperative or fierce.  Each generation is placed afresh
at uniformly random cells, gathers into nests, fights inside nests, and the
surviving nests compete by a quadratic survival score before stamping an
influence disc onto the world.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field

from .lattice import Coord, InfluenceTag, World, stamp_influence

# quadratic nest survival score, coefficients from Bartz & Hoelldobler (1982)
SURV_INTERCEPT = -2.88
SURV_LINEAR = 4.28
SURV_QUADRATIC = -0.377

# probability that a fierce initiator dies when it attacks a cooperative leader
FIERCE_LOSES_TO_COOPERATIVE = 0.6


class LeaderType(enum.Enum):
    COOPERATIVE = "cooperative"
    FIERCE = "fierce"

    @property
    def flipped(self) -> "LeaderType":
        return LeaderType.FIERCE if self is LeaderType.COOPERATIVE else LeaderType.COOPERATIVE


@dataclass
class Leader:
    id: int
    leader_type: LeaderType
    position: Coord
    alive: bool = True


@dataclass
class Nest:
    site: Coord
    members: list[int]
    alive: bool = True

    @property
    def nest_pop(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class FoundressConfig:
    nol: int = 0
    fc: float = 0.1
    pmutation: float = 0.01
    cluster_radius: float = 10.0
    radius_competition: float = 50.0
    pif: float = 0.1

    def __post_init__(self):
        if self.nol < 0:
            raise ValueError("nol must be >= 0")
        for name in ("fc", "pmutation", "pif"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.cluster_radius < 0 or self.radius_competition < 0:
            raise ValueError("radii must be non-negative")


@dataclass
class FoundressState:
    """What carries over between generations: the surviving leaders."""

    survivors: list[Leader] = field(default_factory=list)
    nests: list[Nest] = field(default_factory=list)

    @property
    def survivor_types(self) -> list[LeaderType]:
        return [l.leader_type for l in self.survivors]


@dataclass(frozen=True)
class GenerationSummary:
    offspring: int = 0
    leaders_cooperative: int = 0
    leaders_fierce: int = 0
    nests_formed: int = 0
    nests_destroyed: int = 0
    nests_surviving: int = 0
    deaths_in_fights: int = 0


def surv(nest_pop: int) -> float:
    if nest_pop < 1:
        raise ValueError("nest_pop must be >= 1")
    return SURV_INTERCEPT + SURV_LINEAR * nest_pop + SURV_QUADRATIC * nest_pop * nest_pop


def initial_cooperative_count(cfg: FoundressConfig) -> int:
    # fc*nol can land just below an integer (e.g. 0.29*100)
    return min(cfg.nol, math.floor(cfg.fc * cfg.nol + 1e-9))


def reproduce(survivor_types, cfg: FoundressConfig, world: World, rng) -> list[Leader]:
    """Exactly ``cfg.nol`` offspring at uniformly random cells.

    Types are resampled from the survivors and flipped with probability
    ``pmutation``; with no survivors the generation restarts from the
    ``fc`` split (cooperatives first).
    """
    n = cfg.nol
    if n == 0:
        return []
    survivor_types = list(survivor_types)
    if survivor_types:
        picks = rng.integers(len(survivor_types), size=n)
        flips = rng.random(n) < cfg.pmutation
        types = [
            survivor_types[p].flipped if f else survivor_types[p]
            for p, f in zip(picks.tolist(), flips.tolist())
        ]
    else:
        n_coop = initial_cooperative_count(cfg)
        types = [LeaderType.COOPERATIVE] * n_coop + [LeaderType.FIERCE] * (n - n_coop)
    cells = rng.integers(world.num_cells, size=n).tolist()
    return [
        Leader(i, t, Coord(c % world.width, c // world.width))
        for i, (t, c) in enumerate(zip(types, cells))
    ]


def _row_major(c: Coord):
    return (c[1], c[0])


def cluster(leaders, cluster_radius: float, rng) -> list[Nest]:
    """Sequential max-count clustering.

    Leaders take turns in a random permutation.  On its turn a leader looks
    at every cell within ``cluster_radius`` that holds other leaders, and
    moves to the one holding the most (uniform among ties, candidates in
    row-major order).  Its own cell counts only the others already there.
    """
    if cluster_radius < 0:
        raise ValueError("cluster_radius must be non-negative")
    counts: Counter = Counter(l.position for l in leaders)
    r2 = cluster_radius * cluster_radius
    for i in rng.permutation(len(leaders)).tolist():
        leader = leaders[i]
        x0, y0 = leader.position
        counts[leader.position] -= 1
        best, best_n = [], 0
        for cell, n in counts.items():
            if n <= 0 or (cell[0] - x0) ** 2 + (cell[1] - y0) ** 2 > r2:
                continue
            if n > best_n:
                best, best_n = [cell], n
            elif n == best_n:
                best.append(cell)
        if best:
            best.sort(key=_row_major)
            choice = best[int(rng.integers(len(best)))] if len(best) > 1 else best[0]
            leader.position = choice
        counts[leader.position] += 1
    by_site: dict[Coord, list[int]] = {}
    for l in leaders:
        by_site.setdefault(l.position, []).append(l.id)
    return [Nest(site, members) for site, members in sorted(by_site.items(), key=lambda kv: _row_major(kv[0]))]


def nest_fights(nest: Nest, leaders: dict, pif: float, rng) -> list[int]:
    """One round of turns inside a nest; returns the ids still alive.

    ``leaders`` maps id to :class:`Leader`; losers have ``alive`` cleared and
    are dropped from ``nest.members``.
    """
    order = rng.permutation(len(nest.members)).tolist()
    living = list(nest.members)
    for idx in order:
        me = leaders[nest.members[idx]]
        if not me.alive:
            continue
        if len(living) < 2 or all(leaders[m].leader_type is LeaderType.COOPERATIVE for m in living):
            break
        if me.leader_type is LeaderType.COOPERATIVE:
            continue
        if not pif > rng.random():
            continue
        others = [m for m in living if m != me.id]
        foe = leaders[others[int(rng.integers(len(others)))]]
        if foe.leader_type is LeaderType.FIERCE:
            loser = me if rng.random() < 0.5 else foe
        else:
            loser = me if rng.random() < FIERCE_LOSES_TO_COOPERATIVE else foe
        loser.alive = False
        living.remove(loser.id)
    nest.members = living
    return living


def group_competition(nests, radius_competition: float, rng) -> list[Nest]:
    """Pairwise elimination between nests within ``radius_competition``.

    One pass in row-major site order; the lower survival score loses, equal
    scores are settled by a fair coin.  Destroyed nests take their members
    with them.
    """
    ordered = sorted(nests, key=lambda n: _row_major(n.site))
    r2 = radius_competition * radius_competition
    for nest in ordered:
        for rival in ordered:
            if not nest.alive:
                break
            if rival is nest or not rival.alive:
                continue
            dx = nest.site[0] - rival.site[0]
            dy = nest.site[1] - rival.site[1]
            if dx * dx + dy * dy > r2:
                continue
            mine, theirs = surv(nest.nest_pop), surv(rival.nest_pop)
            if mine == theirs:
                loser = nest if rng.random() < 0.5 else rival
            else:
                loser = nest if mine < theirs else rival
            loser.alive = False
    return [n for n in ordered if n.alive]


def influence_tag(nest: Nest, leaders: dict, rng) -> InfluenceTag:
    pick = leaders[nest.members[int(rng.integers(len(nest.members)))]]
    if pick.leader_type is LeaderType.COOPERATIVE:
        return InfluenceTag.COOPERATION
    return InfluenceTag.NON_COOPERATION


def emit_influence(nests, leaders: dict, world: World, radius_competition: float, now: int, duration: int, rng) -> None:
    """Stamp one disc of radius ``nest_pop * radius_competition`` per nest.

    Nests are processed in row-major site order; overlaps keep the last tag.
    """
    for nest in sorted(nests, key=lambda n: _row_major(n.site)):
        tag = influence_tag(nest, leaders, rng)
        stamp_influence(world, nest.site, nest.nest_pop * radius_competition, tag, now + duration)


def run_cycle(
    state: FoundressState,
    cfg: FoundressConfig,
    world: World,
    now: int,
    rng,
    duration: int = 1,
    tiebreak_rng=None,
) -> GenerationSummary:
    """Run one full generation and update ``state`` with its survivors.

    ``tiebreak_rng`` settles equal-score competitions; it defaults to ``rng``.
    """
    if tiebreak_rng is None:
        tiebreak_rng = rng
    offspring = reproduce(state.survivor_types, cfg, world, rng)
    if not offspring:
        state.survivors, state.nests = [], []
        return GenerationSummary()
    by_id = {l.id: l for l in offspring}
    nests = cluster(offspring, cfg.cluster_radius, rng)
    formed = len(nests)
    deaths = 0
    for nest in nests:
        before = nest.nest_pop
        nest_fights(nest, by_id, cfg.pif, rng)
        deaths += before - nest.nest_pop
    surviving = group_competition(nests, cfg.radius_competition, tiebreak_rng)
    for nest in nests:
        if not nest.alive:
            for m in nest.members:
                by_id[m].alive = False
    emit_influence(surviving, by_id, world, cfg.radius_competition, now, duration, rng)
    survivors = [by_id[m] for n in surviving for m in n.members]
    state.survivors, state.nests = survivors, surviving
    n_coop = sum(l.leader_type is LeaderType.COOPERATIVE for l in survivors)
    return GenerationSummary(
        offspring=len(offspring),
        leaders_cooperative=n_coop,
        leaders_fierce=len(survivors) - n_coop,
        nests_formed=formed,
        nests_destroyed=formed - len(surviving),
        nests_surviving=len(surviving),
        deaths_in_fights=deaths,
    )
