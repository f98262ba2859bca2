"""
Baseline segregation
====================

Without leaders the model is a region-constrained Schelling process: a
household whose unlike-neighbour share exceeds 0.4 moves to a free cell
in a region of its own type or a neutral one.  The population sorts
itself within a couple of dozen ticks.
"""

from desegsim import HappinessRule, SimConfig, run

cfg = SimConfig(seed=1, happiness=HappinessRule.BASE, max_ticks=200)
result = run(cfg)

print("tick  desegregation  happiness  moves")
for row in result.rows:
    print(f"{row.tick:4d}  {row.desegregation_index:13.4f}  {row.happiness_index:9.4f}  {row.moves:5d}")

print("stopped:", result.stop_reason, result.summary)
