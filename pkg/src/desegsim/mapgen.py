"""Region maps: the raster text format, synthetic Voronoi cities, population seeding
and region typing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import AgentType, Coord, RegionType, World


class RasterParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class RasterValidationError(ValueError):
    pass


class CapacityError(ValueError):
    def __init__(self, message: str, region: int | None = None):
        super().__init__(message)
        self.region = region


@dataclass(frozen=True)
class RegionRaster:
    width: int
    height: int
    num_regions: int
    grid: np.ndarray  # (height, width) region ids

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.int64)
        if grid.shape != (self.height, self.width):
            raise RasterValidationError(
                f"grid shape {grid.shape} does not match {self.height}x{self.width}"
            )
        if self.num_regions < 1:
            raise RasterValidationError("num_regions must be >= 1")
        if grid.min() < 0 or grid.max() >= self.num_regions:
            bad = int(grid.max()) if grid.max() >= self.num_regions else int(grid.min())
            raise RasterValidationError(
                f"region id {bad} outside 0..{self.num_regions - 1}"
            )
        missing = np.setdiff1d(np.arange(self.num_regions), grid)
        if missing.size:
            raise RasterValidationError(f"region id {int(missing[0])} never appears")
        object.__setattr__(self, "grid", grid)

    def areas(self) -> np.ndarray:
        return np.bincount(self.grid.ravel(), minlength=self.num_regions)

    def to_world(self) -> World:
        return World(self.grid, self.num_regions)

    def __eq__(self, other):
        if not isinstance(other, RegionRaster):
            return NotImplemented
        return (
            (self.width, self.height, self.num_regions)
            == (other.width, other.height, other.num_regions)
            and np.array_equal(self.grid, other.grid)
        )


def _parse_ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise RasterParseError(f"non-integer token in {line!r}", lineno) from None


def parse_region_raster(text: str) -> RegionRaster:
    """Parse the ``width height num_regions`` header followed by ``height`` rows of ids."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise RasterParseError("empty input", 1)
    header = _parse_ints(lines[0], 1)
    if len(header) != 3:
        raise RasterParseError("header must be 'width height num_regions'", 1)
    width, height, num_regions = header
    if width < 1 or height < 1:
        raise RasterParseError("width and height must be positive", 1)
    rows = []
    for i in range(height):
        lineno = i + 2
        if lineno - 1 >= len(lines):
            raise RasterParseError(f"expected {height} rows, got {i}", lineno)
        row = _parse_ints(lines[lineno - 1], lineno)
        if len(row) != width:
            raise RasterParseError(f"row has {len(row)} values, expected {width}", lineno)
        rows.append(row)
    if len(lines) > height + 1:
        raise RasterParseError("trailing content after last row", height + 2)
    return RegionRaster(width, height, num_regions, np.array(rows, dtype=np.int64))


def emit_region_raster(raster: RegionRaster) -> str:
    out = [f"{raster.width} {raster.height} {raster.num_regions}"]
    out.extend(" ".join(str(int(v)) for v in row) for row in raster.grid)
    return "\n".join(out) + "\n"


def load_region_raster(path) -> RegionRaster:
    with open(path, "r", encoding="ascii", newline="") as fh:
        return parse_region_raster(fh.read())


def voronoi_sites(width: int, height: int, k: int, seed: int) -> list[tuple[int, int]]:
    """``k`` distinct cells drawn uniformly without replacement, as (x, y)."""
    if width < 1 or height < 1:
        raise ValueError("width and height must be positive")
    if not 1 <= k <= width * height:
        raise ValueError(f"region count {k} outside 1..{width * height}")
    rng = np.random.default_rng(seed)
    flat = rng.choice(width * height, size=k, replace=False)
    return [(int(f) % width, int(f) // width) for f in flat]


def nearest_site_grid(width: int, height: int, sites) -> np.ndarray:
    """Index of the nearest site for every cell; ties go to the lower index."""
    ys, xs = np.mgrid[0:height, 0:width]
    best = np.zeros((height, width), dtype=np.int64)
    best_d = np.full((height, width), np.iinfo(np.int64).max, dtype=np.int64)
    # one site at a time keeps memory O(cells); strict < keeps lowest-index ties
    for i, (sx, sy) in enumerate(sites):
        d = (xs - sx) ** 2 + (ys - sy) ** 2
        closer = d < best_d
        best[closer] = i
        best_d[closer] = d[closer]
    return best


def generate_voronoi_map(width: int, height: int, k: int, seed: int) -> RegionRaster:
    """Nearest-site partition of a ``width`` x ``height`` grid into ``k`` regions."""
    sites = voronoi_sites(width, height, k, seed)
    return RegionRaster(width, height, k, nearest_site_grid(width, height, sites))


def apportion(total: int, areas) -> np.ndarray:
    """Largest-remainder split of ``total`` proportional to ``areas``.

    Remainder ties go to the lower region index.
    """
    areas = np.asarray(areas, dtype=np.int64)
    area_total = int(areas.sum())
    if total < 0:
        raise ValueError("total must be non-negative")
    # exact integer arithmetic: floor and remainder of total*area/area_total
    scaled = total * areas
    quotas = scaled // area_total
    remainders = scaled - quotas * area_total
    short = total - int(quotas.sum())
    order = sorted(range(len(areas)), key=lambda r: (-int(remainders[r]), r))
    for r in order[:short]:
        quotas[r] += 1
    return quotas


def seed_population(world: World, total: int, rng, expat_fraction: float = 0.5):
    """Place ``total`` agents region by region and return them as a list.

    Each region receives its area-proportional quota on uniformly drawn free
    cells; types are independent draws with P(expat) = ``expat_fraction``.
    """
    from .segregation import Agent

    quotas = apportion(total, [r.area for r in world.regions])
    region_flat = world.region_id.ravel()
    free_flat = world.occupant.ravel() < 0
    free_by_region = []
    for region, q in zip(world.regions, quotas):
        cells = np.flatnonzero((region_flat == region.id) & free_flat)
        if q > cells.size:
            raise CapacityError(
                f"region {region.id} needs {int(q)} households but has {cells.size} free cells",
                region=region.id,
            )
        free_by_region.append(cells)
    agents = []
    for region, q, cells in zip(world.regions, quotas, free_by_region):
        region.quota = int(q)
        if q == 0:
            continue
        chosen = rng.choice(cells, size=int(q), replace=False)
        expat = rng.random(int(q)) < expat_fraction
        for flat, is_expat in zip(chosen, expat):
            c = Coord(int(flat) % world.width, int(flat) // world.width)
            a = Agent(len(agents), AgentType.EXPAT if is_expat else AgentType.NATIVE, c)
            world.place(a.id, a.agent_type, c)
            agents.append(a)
    return agents


def classify_regions(world: World, segregation_threshold: float) -> None:
    """Set each region's type from the majority margin of its current occupants."""
    if not 0.0 <= segregation_threshold <= 1.0:
        raise ValueError("segregation_threshold must lie in [0, 1]")
    n = len(world.regions)
    ids = world.region_id.ravel()
    kind = world.kind.ravel()
    n_e = np.bincount(ids[kind == AgentType.EXPAT], minlength=n)
    n_n = np.bincount(ids[kind == AgentType.NATIVE], minlength=n)
    for region, e, nat in zip(world.regions, n_e, n_n):
        occupied = int(e + nat)
        if occupied == 0:
            region.region_type = RegionType.NEUTRAL
            continue
        # slack for rounding in threshold * occupied, e.g. 0.07 * 100 > 7
        if (nat - e) >= segregation_threshold * occupied - 1e-12:
            region.region_type = RegionType.NATIVE
        elif (e - nat) >= segregation_threshold * occupied - 1e-12:
            region.region_type = RegionType.EXPAT
        else:
            region.region_type = RegionType.NEUTRAL


def area_check(total: int, world: World) -> None:
    """Raise :class:`CapacityError` if ``total`` households cannot fit."""
    quotas = apportion(total, [r.area for r in world.regions])
    for region, q in zip(world.regions, quotas):
        if q > region.area:
            raise CapacityError(
                f"region {region.id} needs {int(q)} households but has area {region.area}",
                region=region.id,
            )


__all__ = [
    "CapacityError",
    "RasterParseError",
    "RasterValidationError",
    "RegionRaster",
    "apportion",
    "area_check",
    "classify_regions",
    "emit_region_raster",
    "generate_voronoi_map",
    "load_region_raster",
    "nearest_site_grid",
    "voronoi_sites",
    "parse_region_raster",
    "seed_population",
]
