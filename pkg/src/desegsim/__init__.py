"""Two-layer segregation simulator: Schelling households steered by evolving leader nests."""

from .engine import RunResult, SimConfig, SimState, initialize, run, step
from .foundress import FoundressConfig, LeaderType, surv
from .lattice import AgentType, Coord, InfluenceTag, RegionType, World
from .mapgen import RegionRaster, generate_voronoi_map, parse_region_raster, emit_region_raster
from .metrics import MetricsRow, aggregate_run, desegregation_index, happiness_index
from .segregation import Agent, AgentState, HappinessRule

__version__ = "0.1.0"
