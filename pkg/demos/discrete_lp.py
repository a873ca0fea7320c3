"""Finite-alphabet D(C, R) from the atom linear program.

First the classical check: a fair coin under Hamming distortion with the
class constraint slack reproduces the binary distortion-rate function.
Then a ternary source whose label merges two letters, swept along C.
"""

import math

import numpy as np
from scipy.optimize import brentq

from rdc_lab.discrete_dcr import build_grid, solve_dcr, try_solve
from rdc_lab.model import DiscreteSource


def shannon(R):
    hb = lambda d: -d * math.log(d) - (1 - d) * math.log(1 - d)
    return 0.0 if R >= math.log(2) else brentq(lambda d: math.log(2) - hb(d) - R, 1e-12, 0.5)


coin = DiscreteSource.hamming([0.5, 0.5], np.eye(2))
grid = build_grid(coin, 64)
print(f"{'R':>6} {'LP D':>8} {'Shannon':>8}")
for R in np.linspace(0.05, math.log(2), 6):
    print(f"{R:6.3f} {solve_dcr(coin, grid, coin.label_entropy, R).D:8.4f} {shannon(R):8.4f}")

src = DiscreteSource.hamming([0.5, 0.3, 0.2], np.array([[1, 1, 0], [0, 0, 1]]))
grid = build_grid(src, 24)
R = 0.3
print(f"\nternary source, R = {R}: tightening the class level costs distortion")
for C in np.linspace(src.label_equivocation, src.label_entropy, 6):
    print(f"  C = {C:.3f}  D = {try_solve(src, grid, float(C), R):.4f}")
