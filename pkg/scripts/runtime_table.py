#!/usr/bin/env python3
"""Wall clock of DEC and the leapfrog reference on the bare fluxon, per resolution."""
import argparse

from sgdec.experiments import runtime_table

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--resolutions", default="0.05,0.1,0.2,0.4")
p.add_argument("--T", type=float, default=50000.0)
p.add_argument("--repeats", type=int, default=1)
a = p.parse_args()
res = [float(v) for v in a.resolutions.split(",")]
tab = runtime_table(res, a.T, a.repeats)
for dx in res:
    print(f"dx={dx:<5g} dec {tab.seconds('dec', dx):8.2f}s  euler {tab.seconds('euler', dx):8.2f}s")
if len(res) > 1:
    print(f"log-log slopes: dec {tab.slope('dec'):.3f}, euler {tab.slope('euler'):.3f}")
