"""Recompute the Plancherel constant from the 5 calibration functions.

Prints the per-function ratios, their median (the frozen OMEGA_2) and the
polar-coordinates value 1/(2 pi) for comparison, then the held-out errors.
"""

import math

import numpy as np

from motionconv.core import lp_norm
from motionconv.motiongroup import OMEGA_2, calibration_functions, geometric_grid, heldout_functions, plancherel_check, plancherel_lhs

lams = geometric_grid(0.25, 8, 64)
ratios = [plancherel_lhs(f, lams) / lp_norm(f, 2) ** 2 for f in calibration_functions()]
for k, r in enumerate(ratios):
    print(f"calibration {k}: lhs / ||f||^2 = {r:.10f}")
omega = float(np.median(ratios))
print(f"median          {omega:.16f}")
print(f"frozen OMEGA_2  {OMEGA_2:.16f}")
print(f"1 / (2 pi)      {1 / (2 * math.pi):.16f}   (rel diff {omega * 2 * math.pi - 1:+.3%})")
for k, f in enumerate(heldout_functions()):
    print(f"held-out {k}: rel err {plancherel_check(f, lams):.3%}  (with 1/(2 pi): {plancherel_check(f, lams, omega=1 / (2 * math.pi)):.3%})")
