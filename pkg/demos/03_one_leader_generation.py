"""
One generation of leaders
=========================

Leaders live on a virtual layer.  Each generation they are scattered at
random, huddle into nests, fight inside nests, and nests compete with
their neighbours.  Survivors broadcast an influence pulse over a disc
whose radius grows with nest size.
"""

import numpy as np

from desegsim import FoundressConfig, World
from desegsim.foundress import FoundressState, run_cycle, surv
from desegsim.metrics import influence_coverage

# the survival score peaks at six members: bigger is not always better
for n in range(1, 10):
    print(f"nest of {n}: score {surv(n):6.3f}")

world = World(np.zeros((100, 100), dtype=int))
cfg = FoundressConfig(nol=50, fc=0.1, pif=0.5)
state = FoundressState()
rng = np.random.default_rng(3)

for t in (5, 10, 15):
    summary = run_cycle(state, cfg, world, now=t, rng=rng)
    print(f"\ngeneration at tick {t}: {summary}")
    for nest in state.nests:
        types = [l.leader_type.name[0] for l in state.survivors if l.id in nest.members]
        print(f"  nest at {tuple(nest.site)} members {''.join(types)}")
    print("  cells covered:", {k.name: v for k, v in influence_coverage(world).items()})
