"""
A synthetic city map
====================

Households live on a grid of cells, and every cell belongs to a region.
With no GIS data at hand we carve the grid into Voronoi regions.
"""

import numpy as np

from desegsim import emit_region_raster, generate_voronoi_map, parse_region_raster

# a 100 x 100 grid split into 54 regions; the seed fixes the site draw
raster = generate_voronoi_map(100, 100, 54, seed=0)
areas = raster.areas()
print(f"{raster.num_regions} regions, areas {areas.min()}..{areas.max()} cells")

# a coarse picture: one letter per region, every 4th row and 2nd column
letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ01"
for row in raster.grid[::4, ::2]:
    print("".join(letters[i] for i in row))

# the text form is what the CLI reads and writes; it round-trips exactly
text = emit_region_raster(raster)
print(text.splitlines()[0], "...")
assert parse_region_raster(text) == raster

# households are apportioned to regions by area
from desegsim.mapgen import apportion

quotas = apportion(5000, areas)
print("largest quota", quotas.max(), "smallest", quotas.min(), "total", quotas.sum())
