#!/usr/bin/env python3
"""Schwinger atom (with and without the dynamical mass) and positronium."""
import argparse

import numpy as np

from sgdec.experiments import positronium, schwinger_atom

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--T-atom", type=float, default=2000.0)
p.add_argument("--T-pair", type=float, default=4000.0)
a = p.parse_args()

atom = schwinger_atom("schwinger_atom_x0_0", a.T_atom)
print(f"atom: max|x| {np.nanmax(np.abs(atom.x)):.3f}, quarter amplitudes",
      [round(atom.amplitude(k), 4) for k in range(4)])
free = schwinger_atom("schwinger_atom_unscreened", a.T_atom)
slope, r2 = free.linear_fit_last_quarter()
print(f"without g^2 phi: last-quarter velocity {slope:.4f}, R^2 {r2:.9f}")

pair = positronium(a.T_pair)
print("positronium window energy, relative change per 100:",
      np.array2string(pair.relative_change_per_100(a.T_pair / 2), precision=2))
print(f"central swing over the last 200: {pair.central_swing():.3f}")
