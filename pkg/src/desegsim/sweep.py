"""Parameter sweeps over (nol, fc, ir, pif) with seeded replicates.

Replicate ``k`` of grid cell ``c`` (cells enumerated in nested
nol/fc/ir/pif order, starting at 0) runs with seed::

    SeedSequence([base_seed, c, k]).generate_state(1, numpy.uint64)[0]

so any subset of a sweep reproduces the same rows.  All cells share one
map: when the base config has no ``map_seed`` it is pinned to the base seed.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .engine import SimConfig, run
from .lattice import World
from .mapgen import RegionRaster, area_check
from .metrics import SWEEP_HEADER, aggregate_run, fmt

SUMMARY_HEADER = (
    "nol,fc,ir,pif,replicates,mean_desegregation,std_desegregation,"
    "mean_happiness,std_happiness"
)


@dataclass(frozen=True)
class SweepSpec:
    nol: tuple[int, ...]
    fc: tuple[float, ...]
    ir: tuple[int, ...]
    pif: tuple[float, ...]
    replicates: int = 10
    base: SimConfig = SimConfig()
    warmup: int = 0

    def __post_init__(self):
        for name in ("nol", "fc", "ir", "pif"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"sweep list {name!r} is empty")
            object.__setattr__(self, name, values)
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")

    def cells(self):
        return list(itertools.product(self.nol, self.fc, self.ir, self.pif))


@dataclass(frozen=True)
class SweepRow:
    nol: int
    fc: float
    ir: int
    pif: float
    replicate: int
    mean_desegregation: float
    mean_happiness: float


def replicate_seed(base_seed: int, cell_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence([base_seed, cell_index, replicate])
    return int(ss.generate_state(1, np.uint64)[0])


def cell_config(spec: SweepSpec, cell_index: int, replicate: int) -> SimConfig:
    nol, fc, ir, pif = spec.cells()[cell_index]
    base = spec.base
    map_seed = base.seed if base.map_seed is None else base.map_seed
    cfg = replace(base, ir=ir, map_seed=map_seed, seed=replicate_seed(base.seed, cell_index, replicate))
    return cfg.with_foundress(nol=nol, fc=fc, pif=pif)


def plan(spec: SweepSpec) -> list[tuple[int, int, SimConfig]]:
    """Every (cell, replicate, config) in output order; raises before any run on a bad cell."""
    tasks = []
    for c in range(len(spec.cells())):
        for k in range(spec.replicates):
            cfg = cell_config(spec, c, k)
            if spec.warmup >= cfg.max_ticks:
                raise ValueError(f"warmup {spec.warmup} leaves no ticks (max_ticks {cfg.max_ticks})")
            tasks.append((c, k, cfg))
    return tasks


def _run_one(args) -> tuple[float, float]:
    cfg, raster, warmup = args
    result = run(cfg, raster=raster)
    return aggregate_run(result.rows, warmup)


def run_sweep(spec: SweepSpec, workers: int = 1, raster: RegionRaster | None = None) -> list[SweepRow]:
    tasks = plan(spec)
    if raster is None:
        raster = tasks[0][2].load_raster()
    area_check(spec.base.population, World(raster.grid, raster.num_regions))
    jobs = [(cfg, raster, spec.warmup) for _, _, cfg in tasks]
    if workers <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    cells = spec.cells()
    return [
        SweepRow(*cells[c], k, d, h)
        for (c, k, _), (d, h) in zip(tasks, results)
    ]


def summarize(rows: list[SweepRow]) -> list[dict]:
    """Cross-replicate mean and sample standard deviation per grid cell."""
    groups: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.nol, r.fc, r.ir, r.pif), []).append(r)
    out = []
    for key, grp in groups.items():
        d = np.array([r.mean_desegregation for r in grp])
        h = np.array([r.mean_happiness for r in grp])
        ddof = 1 if len(grp) > 1 else 0
        out.append(
            dict(
                zip(("nol", "fc", "ir", "pif"), key),
                replicates=len(grp),
                mean_desegregation=float(d.mean()),
                std_desegregation=float(d.std(ddof=ddof)),
                mean_happiness=float(h.mean()),
                std_happiness=float(h.std(ddof=ddof)),
            )
        )
    return out


def sweep_csv(rows: list[SweepRow]) -> str:
    """Replicate rows, each cell followed by one ``mean`` summary row."""
    lines = [SWEEP_HEADER]
    summaries = {(s["nol"], s["fc"], s["ir"], s["pif"]): s for s in summarize(rows)}
    for i, r in enumerate(rows):
        lines.append(",".join(fmt(v) for v in (r.nol, r.fc, r.ir, r.pif, r.replicate,
                                                r.mean_desegregation, r.mean_happiness)))
        key = (r.nol, r.fc, r.ir, r.pif)
        last_of_cell = i + 1 == len(rows) or (rows[i + 1].nol, rows[i + 1].fc, rows[i + 1].ir, rows[i + 1].pif) != key
        if last_of_cell:
            s = summaries[key]
            lines.append(",".join(fmt(v) for v in (*key, "mean", s["mean_desegregation"], s["mean_happiness"])))
    return "\n".join(lines) + "\n"


def summary_csv(rows: list[SweepRow]) -> str:
    lines = [SUMMARY_HEADER]
    for s in summarize(rows):
        lines.append(",".join(fmt(v) for v in s.values()))
    return "\n".join(lines) + "\n"
