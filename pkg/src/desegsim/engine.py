"""Tick scheduler binding the household layer to the leader layer.

Randomness
----------
Every run draws from named substreams of one root seed::

    SeedSequence(seed, spawn_key=(crc32(name),))

with ``name`` one of ``placement`` (initial households), ``movement``
(relocation order and destinations), ``leaders`` (the leader generation)
and ``tiebreak`` (equal-score nest competitions).  Adding a stream never
perturbs the draws of an existing one.

Tick order
----------
At tick ``t`` (1-based):

1. if ``nol > 0`` and ``t % ir == 0``, run one leader generation whose
   influence expires at ``t + influence_duration``;
2. clear influence that has expired by ``t``;
3. reclassify regions from current occupancy;
4. run the household movement phase;
5. record a :class:`~desegsim.metrics.MetricsRow`.
"""

from __future__ import annotations

import logging
import zlib
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .foundress import FoundressConfig, FoundressState, GenerationSummary, run_cycle
from .lattice import EMPTY, InfluenceTag, World, expire_influence
from .mapgen import (
    RegionRaster,
    area_check,
    classify_regions,
    generate_voronoi_map,
    load_region_raster,
    seed_population,
)
from .metrics import MetricsRow, indices, series_csv
from .segregation import Agent, HappinessRule, movement_phase

log = logging.getLogger(__name__)

STREAMS = ("placement", "movement", "leaders", "tiebreak")


class SimulationStopped(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one run.

    The map is read from ``map_path`` when given, otherwise generated as a
    ``map_width`` x ``map_height`` Voronoi partition into ``map_regions``
    regions using ``map_seed`` (or ``seed`` when ``map_seed`` is None).
    """

    map_path: str | None = None
    map_width: int = 100
    map_height: int = 100
    map_regions: int = 54
    map_seed: int | None = None
    population: int = 5000
    pdtu: float = 0.4
    segregation_threshold: float = 0.4
    happiness: HappinessRule = HappinessRule.RECONCILED
    foundress: FoundressConfig = field(default_factory=FoundressConfig)
    ir: int = 5
    influence_duration: int = 1
    max_ticks: int = 100
    equilibrium_window: int = 1
    seed: int = 0
    expat_fraction: float = 0.5

    def __post_init__(self):
        if isinstance(self.happiness, str):
            object.__setattr__(self, "happiness", HappinessRule(self.happiness))
        checks = [
            (self.ir >= 1, "ir must be >= 1"),
            (self.influence_duration >= 1, "influence_duration must be >= 1"),
            (self.max_ticks >= 1, "max_ticks must be >= 1"),
            (self.equilibrium_window >= 1, "equilibrium_window must be >= 1"),
            (self.population >= 0, "population must be >= 0"),
            (0.0 <= self.pdtu <= 1.0, "pdtu must lie in [0, 1]"),
            (0.0 <= self.segregation_threshold <= 1.0, "segregation_threshold must lie in [0, 1]"),
            (0.0 <= self.expat_fraction <= 1.0, "expat_fraction must lie in [0, 1]"),
            (self.seed >= 0, "seed must be non-negative"),
            (self.map_width >= 1 and self.map_height >= 1, "map dimensions must be positive"),
            (1 <= self.map_regions <= self.map_width * self.map_height, "map_regions out of range"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def nol(self) -> int:
        return self.foundress.nol

    def with_foundress(self, **changes) -> "SimConfig":
        return replace(self, foundress=replace(self.foundress, **changes))

    def load_raster(self) -> RegionRaster:
        if self.map_path is not None:
            return load_region_raster(self.map_path)
        map_seed = self.seed if self.map_seed is None else self.map_seed
        return generate_voronoi_map(self.map_width, self.map_height, self.map_regions, map_seed)


def substream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("ascii"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


@dataclass
class SimState:
    cfg: SimConfig
    world: World
    agents: list[Agent]
    leaders: FoundressState
    rngs: dict[str, np.random.Generator]
    type_counts: Counter
    tick: int = 0
    rows: list[MetricsRow] = field(default_factory=list)
    generations: list[tuple[int, GenerationSummary]] = field(default_factory=list)
    last_generation: GenerationSummary = field(default_factory=GenerationSummary)
    zero_streak: int = 0
    stop_reason: str | None = None

    @property
    def stopped(self) -> bool:
        return self.stop_reason is not None


@dataclass
class RunResult:
    rows: list[MetricsRow]
    stop_reason: str
    summary: dict

    def to_csv(self) -> str:
        return series_csv(self.rows)


def initialize(cfg: SimConfig, raster: RegionRaster | None = None) -> SimState:
    """Build the world, seed households and type the regions; no leaders yet."""
    if raster is None:
        raster = cfg.load_raster()
    world = raster.to_world()
    area_check(cfg.population, world)
    rngs = {name: substream(cfg.seed, name) for name in STREAMS}
    agents = seed_population(world, cfg.population, rngs["placement"], cfg.expat_fraction)
    classify_regions(world, cfg.segregation_threshold)
    return SimState(
        cfg=cfg,
        world=world,
        agents=agents,
        leaders=FoundressState(),
        rngs=rngs,
        type_counts=Counter(a.agent_type for a in agents),
    )


def is_cycle_tick(cfg: SimConfig, t: int) -> bool:
    return cfg.nol > 0 and t % cfg.ir == 0


def _cycle_pending(cfg: SimConfig, t: int) -> bool:
    """True if a leader generation is still scheduled after tick ``t``."""
    if cfg.nol == 0:
        return False
    next_cycle = (t // cfg.ir + 1) * cfg.ir
    return next_cycle <= cfg.max_ticks


def step(state: SimState) -> MetricsRow:
    if state.stopped:
        raise SimulationStopped(f"run already stopped ({state.stop_reason})")
    cfg, world = state.cfg, state.world
    t = state.tick + 1
    cycle = is_cycle_tick(cfg, t)
    if cycle:
        summary = run_cycle(
            state.leaders,
            cfg.foundress,
            world,
            t,
            state.rngs["leaders"],
            duration=cfg.influence_duration,
            tiebreak_rng=state.rngs["tiebreak"],
        )
        state.last_generation = summary
        state.generations.append((t, summary))
        log.debug("tick %d: generation %s", t, summary)
    expire_influence(world, t)
    classify_regions(world, cfg.segregation_threshold)
    moves = movement_phase(world, state.agents, cfg.happiness, cfg.pdtu, state.rngs["movement"])
    deseg, happy = indices(world, state.agents, cfg.happiness, cfg.pdtu)
    gen = state.last_generation
    row = MetricsRow(
        tick=t,
        desegregation_index=deseg,
        happiness_index=happy,
        moves=moves,
        leaders_cooperative=gen.leaders_cooperative,
        leaders_fierce=gen.leaders_fierce,
        nests=gen.nests_surviving,
    )
    state.rows.append(row)
    state.tick = t

    if moves == 0 and not cycle:
        state.zero_streak += 1
    else:
        state.zero_streak = 0
    influence_live = bool(world.infected.any())
    if (
        state.zero_streak >= cfg.equilibrium_window
        and not influence_live
        and not _cycle_pending(cfg, t)
    ):
        state.stop_reason = "equilibrium"
    elif t >= cfg.max_ticks:
        state.stop_reason = "max_ticks"
    return row


def summarize(state: SimState) -> dict:
    world = state.world
    return {
        "ticks": state.tick,
        "agents": len(state.agents),
        "agents_by_type": {t.name.lower(): n for t, n in sorted(state.type_counts.items())},
        "region_types": dict(sorted(Counter(r.region_type.value for r in world.regions).items())),
        "leaders": len(state.leaders.survivors),
        "nests": len(state.leaders.nests),
        "generations": len(state.generations),
    }


def run(cfg: SimConfig, raster: RegionRaster | None = None, on_step=None) -> RunResult:
    """Step until ``max_ticks`` or a zero-move fixpoint no leader cycle can break.

    ``on_step(state, row)`` is called after every tick when given.
    """
    state = initialize(cfg, raster)
    while not state.stopped:
        row = step(state)
        if on_step is not None:
            on_step(state, row)
    return RunResult(rows=list(state.rows), stop_reason=state.stop_reason, summary=summarize(state))


def check_invariants(state: SimState) -> None:
    """Raise AssertionError if occupancy or population bookkeeping is broken."""
    world = state.world
    occupied = np.count_nonzero(world.occupant != EMPTY)
    assert occupied == len(state.agents), "occupied cells != agent count"
    for a in state.agents:
        x, y = a.position
        assert world.occupant[y, x] == a.id, f"agent {a.id} not on its cell"
        assert world.kind[y, x] == a.agent_type, f"kind grid stale at {a.position}"
    assert Counter(a.agent_type for a in state.agents) == state.type_counts, "type counts drifted"
    live = world.infected != InfluenceTag.NULL
    assert np.array_equal(live, world.expires >= 0), "influence tag / expiry mismatch"
