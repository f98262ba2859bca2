"""
A small parameter sweep
=======================

Sweeps run every combination of leader count, cooperative fraction,
influence period and fight probability, with independent replicate
seeds.  Rows come back in grid order whatever the worker count.
"""

from desegsim import SimConfig
from desegsim.sweep import SweepSpec, run_sweep, summarize, sweep_csv

spec = SweepSpec(
    nol=(25, 50),
    fc=(0.1,),
    ir=(5, 25),
    pif=(0.1,),
    replicates=3,
    base=SimConfig(max_ticks=40, seed=0),
)
rows = run_sweep(spec, workers=2)
print(sweep_csv(rows))

for cell in summarize(rows):
    print(
        f"nol={cell['nol']:2d} ir={cell['ir']:2d}  "
        f"desegregation {cell['mean_desegregation']:.4f} +/- {cell['std_desegregation']:.4f}"
    )
