"""Decoder regions of fixed representations.

Part one takes three representations from the atom LP at one rate: the
optimum with a slack class level, one halfway to the least reachable level,
and one at that level. Each gets its LP point and region corners printed
next to the CLI call that writes the same region as CSV. When the MMSE values
of a representation are distinct, the MMSE decoder is injective and also
reaches the least class loss, so the two corners coincide.

Part two builds a representation whose MMSE estimate merges two letters
with different label posteriors. Its region is a genuine curve.
"""

import numpy as np

from rdc_lab.discrete_dcr import build_grid, min_class_loss_at_rate, solve_dcr
from rdc_lab.fixed_rep_region import (
    FixedRepresentation,
    estimate_region,
    representation_from_weights,
)
from rdc_lab.model import DiscreteSource

src = DiscreteSource.mse([0.3, 0.3, 0.4], np.array([[0.9, 0.2, 0.1], [0.1, 0.8, 0.9]]),
                         [0.0, 1.0, 2.0])
grid = build_grid(src, 16)
R = 0.4

slack = solve_dcr(src, grid, src.label_entropy + 1.0, R)
c_min = min_class_loss_at_rate(src, grid, R)
levels = [src.label_entropy + 1.0, 0.5 * (c_min + slack.class_loss), c_min + 1e-9]
for name, C in zip(("slack C", "halfway C", "least C"), levels):
    sol = solve_dcr(src, grid, C, R)
    rep = representation_from_weights(src, grid, sol.weights)
    region = estimate_region(rep, stochastic_grid=10, num_outer=5)
    print(f"{name}: |Z| = {rep.size}, LP point (D, C) = ({sol.D:.4f}, {sol.class_loss:.4f})")
    print(f"  corner a = ({region.extreme_a[0]:.4f}, {region.extreme_a[1]:.4f}), "
          f"corner b = ({region.extreme_b[0]:.4f}, {region.extreme_b[1]:.4f})")
    print(f"  rdc-lab region --q 0.3,0.3,0.4 --T '0.9,0.2,0.1;0.1,0.8,0.9' --distortion mse "
          f"--values 0,1,2 --resolution 16 --rate {R} --class-level {C:.9f} -o region.csv")

# labels say whether |X| = 1; both letters of Z have E[X | Z] = 0
sym = DiscreteSource.mse([0.25, 0.5, 0.25], np.array([[1, 0, 1], [0, 1, 0]]), [-1.0, 0.0, 1.0])
rep = FixedRepresentation(sym, np.array([[0.8, 0.1, 0.8], [0.2, 0.9, 0.2]]))
region = estimate_region(rep, stochastic_grid=10, num_outer=6)
print(f"\nmerged MMSE values {rep.mmse_values}: corner a = {region.extreme_a}, "
      f"corner b = {region.extreme_b}")
print(f"{'C':>7} {'best decoder D':>15} {'outer bound D':>14}")
inner = sorted(region.inner_points, key=lambda p: p.C)
for d_out, c in region.outer_curve:
    best = min(p.D for p in inner if p.C <= c + 1e-12)
    print(f"{c:7.4f} {best:15.4f} {d_out:14.4f}")
