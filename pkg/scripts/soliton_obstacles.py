#!/usr/bin/env python3
"""Microshort pinning versus passage, and the triple-constriction radiation budget."""
import numpy as np

from sgdec.experiments import constriction_budget, microshort

for name in ("microshort_pinned", "microshort_pass"):
    r = microshort(name)
    late = r.x[r.t > 0.75 * r.t[-1]]
    print(f"{name}: u_t {r.u_terminal:.3f}, x_e {r.x_e:.3f}, late x in [{late.min():.3f}, {late.max():.3f}], "
          f"min x {np.min(r.x):.2f}")
b = constriction_budget()
print(f"constriction_triple: u {b.u_in:.4f} -> {b.u_out:.4f}, kinetic loss {100 * b.loss_fraction:.2f}%")
