#!/usr/bin/env python3
"""Long-time bare fluxon: boundary collisions, final winding and speed."""
import argparse

from sgdec.experiments import fluxon_collisions

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--methods", default="dec,euler")
p.add_argument("--dx", type=float, default=0.4)
p.add_argument("--dt", type=float, default=None, help="default 0.8*dx")
p.add_argument("--T", type=float, default=50000.0)
a = p.parse_args()
dt = a.dt or 0.8 * a.dx
for m in a.methods.split(","):
    r = fluxon_collisions(m, a.dx, dt, a.T)
    print(f"{m:>6}: {r.collisions} collisions, winding {r.winding:+.6f}, late speed {r.speed:.4f} ({r.seconds:.1f}s)")
