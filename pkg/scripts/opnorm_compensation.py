"""Operator norms of pi_lambda(mu^z) for the rotated unit circle.

For this family mu_k^(xi) = 2 pi J0(2 pi lambda) in every direction, so
||pi(mu^0)|| = 2 pi |J0(2 pi lambda)| decays like lambda^{-1/2}, and the
E_{-1/2} factor multiplies it by (2 pi lambda)^{1/2} at |xi_1| = lambda.
The ratio of the two scans therefore grows like lambda^{1/2}.
"""

import math

import numpy as np
from scipy.special import j0

from motionconv.geometry import RotatedFamily, circle
from motionconv.motiongroup import geometric_grid, opnorm_scan

fam = RotatedFamily(circle(), None)
lams = geometric_grid(1, 64, per_octave=8)
z0 = opnorm_scan(fam, 0.0, lams, 128, z=0)
zh = opnorm_scan(fam, 0.0, lams, 128)
zs = opnorm_scan(fam, 1.0, lams, 128)

print(f"{'lambda':>9} {'z=0':>11} {'2pi|J0|':>11} {'z=-1/2':>11} {'z=-1/2+i':>11}")
for lam, a, b, c in zip(lams, z0.values, zh.values, zs.values):
    print(f"{lam:9.4f} {a:11.5f} {2 * math.pi * abs(j0(2 * math.pi * lam)):11.5f} {b:11.5f} {c:11.5f}")
keep = z0.values > 1e-3 * z0.values.max()
ratio_slope = np.polyfit(np.log(lams[keep]), np.log(zh.values[keep] / z0.values[keep]), 1)[0]
print(f"z=0 slope {z0.slope():+.3f}; ratio slope {ratio_slope:+.3f}")
print(f"sup/median: z=-1/2 {zh.sup_over_median:.3f}, z=-1/2+i {zs.sup_over_median:.3f}")
