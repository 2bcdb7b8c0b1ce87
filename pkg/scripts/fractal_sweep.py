#!/usr/bin/env python3
"""Bound-versus-scattered sweep over the pair velocity (g=0.32, d/u=20)."""
import argparse

from sgdec.experiments import fractal_sweep

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--report", default="fractal_sweep.csv")
p.add_argument("--cache", default="fractal_sweep.cache.jsonl", help="resume cache")
p.add_argument("--jobs", type=int, default=None)
a = p.parse_args()
s = fractal_sweep(a.report, a.cache, a.jobs)
print("".join("B" if o == "bound" else "." for o in s.outcome))
print(f"{s.alternations} alternations over u = {s.u[0]:.2f} .. {s.u[-1]:.2f}; report in {a.report}")
