#!/usr/bin/env python3
"""Massless capacitor discharge: energy per method, then the meson probe at x=100."""
import argparse
import csv

import numpy as np

from sgdec.experiments import capacitor_energy, capacitor_meson

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--T-energy", type=float, default=1000.0)
p.add_argument("--T-meson", type=float, default=5000.0)
p.add_argument("--settle", type=float, default=100.0)
p.add_argument("--csv", help="write the energy series here")
a = p.parse_args()

series = capacitor_energy(T=a.T_energy)
for m, s in series.items():
    print(f"{m:>6}: E {s.energy[0]:.6g} -> {s.energy[-1]:.6g}, std after {a.settle:g}: {s.std_after(a.settle):.6g}, "
          f"largest rise {s.max_rise_after(a.settle):.2e}, {s.seconds:.1f}s")
if a.csv:
    n = min(len(s.t) for s in series.values())
    with open(a.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *series])
        for k in range(n):
            w.writerow([repr(float(series["dec"].t[k]))] + [repr(float(s.energy[k])) for s in series.values()])

sig = capacitor_meson(T=a.T_meson)
_, w = sig.frequency()
print(f"meson frequency over the last 10 periods: {np.mean(w[-10:]):.5f} (g = {sig.g})")
print("block deviations:", np.array2string(sig.block_deviation(1000.0), precision=5))
fit = sig.envelope((a.T_meson / 2, a.T_meson))
print(f"envelope exponent on [{a.T_meson / 2:g}, {a.T_meson:g}]: {fit.exponent}")
