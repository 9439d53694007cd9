"""Gaffney quotient of the axial field Gamma on tori of aspect ratio a = R/r.

The quotient peaks at a = 2, where the reach min(r, R - r) switches branch.
"""
import numpy as np

from gaffkorn import argmax_sweep, torus_lower_bound
from gaffkorn.oracles import torus_lower_bound_quadrature

for a in (1.25, 1.5, 2.0, 2.5, 3.0, 5.0):
    print(f"a={a:<5} closed form {torus_lower_bound(a):.10f}  quadrature {torus_lower_bound_quadrature(a):.10f}")

a_star, val = argmax_sweep(np.round(np.arange(1.01, 4.0, 0.01), 10))
print(f"argmax on a 0.01 grid: a*={a_star:.2f}, quotient {val:.7f}")
