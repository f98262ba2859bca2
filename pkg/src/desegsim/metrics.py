"""Global indices, the per-tick row schema, and CSV formatting."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .lattice import InfluenceTag, World
from .segregation import HappinessRule, iid_vector, is_happy, positions


@dataclass(frozen=True)
class MetricsRow:
    tick: int
    desegregation_index: float
    happiness_index: float
    moves: int
    leaders_cooperative: int
    leaders_fierce: int
    nests: int


METRICS_HEADER = ",".join(f.name for f in fields(MetricsRow))
SWEEP_COLUMNS = ("nol", "fc", "ir", "pif", "replicate", "mean_desegregation", "mean_happiness")
SWEEP_HEADER = ",".join(SWEEP_COLUMNS)


def desegregation_index(world: World, agents) -> float:
    """Mean neighbourhood dissimilarity over all agents (0 with no agents)."""
    if not agents:
        return 0.0
    return float(iid_vector(world, agents).mean())


def happiness_index(world: World, agents, rule: HappinessRule, pdtu: float) -> float:
    if not agents:
        return 0.0
    return float(np.mean(_happy_flags(world, agents, iid_vector(world, agents), rule, pdtu)))


def _happy_flags(world, agents, iids, rule, pdtu):
    xs, ys = positions(agents)
    return np.asarray(is_happy(iids, world.infected[ys, xs], rule, pdtu), dtype=bool)


def indices(world: World, agents, rule: HappinessRule, pdtu: float) -> tuple[float, float]:
    """Both indices from a single neighbourhood scan."""
    if not agents:
        return 0.0, 0.0
    iids = iid_vector(world, agents)
    happy = _happy_flags(world, agents, iids, rule, pdtu)
    return float(iids.mean()), float(happy.mean())


def aggregate_run(series, warmup: int = 0) -> tuple[float, float]:
    """Mean desegregation and happiness over rows with ``tick > warmup``."""
    window = [r for r in series if r.tick > warmup]
    if not window:
        raise ValueError(f"no rows after warmup={warmup} (series has {len(series)} rows)")
    deseg = sum(r.desegregation_index for r in window) / len(window)
    happy = sum(r.happiness_index for r in window) / len(window)
    return deseg, happy


def fmt(value) -> str:
    """Fixed CSV number format: integers verbatim, floats with 6 decimals."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6f}"
    return str(value)


def series_csv(rows) -> str:
    lines = [METRICS_HEADER]
    lines.extend(",".join(fmt(v) for v in astuple(r)) for r in rows)
    return "\n".join(lines) + "\n"


def parse_series_csv(text: str) -> list[MetricsRow]:
    lines = text.strip("\n").split("\n")
    if lines[0] != METRICS_HEADER:
        raise ValueError(f"unexpected header {lines[0]!r}")
    out = []
    for line in lines[1:]:
        t, d, h, m, lc, lf, n = line.split(",")
        out.append(MetricsRow(int(t), float(d), float(h), int(m), int(lc), int(lf), int(n)))
    return out


def influence_coverage(world: World) -> dict[InfluenceTag, int]:
    counts = np.bincount(world.infected.ravel(), minlength=3)
    return {tag: int(counts[tag]) for tag in InfluenceTag}
