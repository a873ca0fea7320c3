"""Gaussian D(C, R) at the rates of the universality experiment.

Prints the published closed form next to the corrected one. Below the
rate-limited class floor the published value is finite, but no
reconstruction at that rate reaches the class level.
"""

import numpy as np

from rdc_lab.gaussian_rdc import distortion_of, exact_distortion, min_class_loss
from rdc_lab.model import GaussianPair, feasibility_threshold

pair = GaussianPair(mu_x=0.0, sigma2_x=1.0, mu_s=0.0, sigma2_s=1.0, theta1=0.7)
print(f"h(S) = {pair.h_s:.4f} nats, feasibility threshold = {feasibility_threshold(pair):.4f}")

for R in (0.05, 0.2, 0.34):
    print(f"\nrate {R}: least reachable H(S|Xhat) = {min_class_loss(pair, R):.4f}")
    print(f"{'C':>8} {'published D':>12} {'exact D':>10}  case")
    for C in np.linspace(feasibility_threshold(pair), pair.h_s, 6):
        opt = distortion_of(pair, float(C), R)
        print(f"{C:8.4f} {opt.distortion:12.4f} {exact_distortion(pair, float(C), R):10.4f}  "
              f"{opt.case_label.value}")
