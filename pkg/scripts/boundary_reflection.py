#!/usr/bin/env python3
"""Reflected energy of a Klein-Gordon packet at the outgoing closures, against a 4x-domain run."""
from sgdec.experiments import reflected_energy_fraction

for order, f in reflected_energy_fraction((0, 1)).items():
    print(f"order {order}: reflected fraction {f:.3e}")
