"""
Influence pulses and the sawtooth
=================================

With leaders switched on, a cooperative pulse makes tagged households
seek mixed neighbourhoods for one tick; afterwards the classic rule
pulls them back.  Desegregation jumps on cycle ticks and decays between
them.  Smaller radii keep several nests alive on a 100-cell map.
"""

from desegsim import FoundressConfig, SimConfig, run

for label, leaders in [
    ("default radii", FoundressConfig(nol=50, fc=0.1, pif=0.1)),
    ("radii / 5", FoundressConfig(nol=50, fc=0.1, pif=0.1, cluster_radius=2, radius_competition=10)),
]:
    result = run(SimConfig(seed=0, ir=5, max_ticks=60, foundress=leaders))
    print(f"\n{label}")
    for row in result.rows:
        bar = "#" * int(row.desegregation_index * 150)
        mark = "*" if row.tick % 5 == 0 else " "
        print(f"{row.tick:3d}{mark} {row.desegregation_index:.3f} {bar}")
