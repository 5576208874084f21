"""Average decay A(R) for the built-in curves, and the stadium's edge normal.

Along the stadium's flat-edge normal the two edges at x2 = +-r add as
2 L cos(2 pi R r): the envelope does not decay, but with r = 1/2 the samples
vanish near half-integer R.  Both R grids are printed to show this.
"""

import math

import numpy as np

from motionconv.fourier import decay_table, fit_decay_exponent, pointwise_decay
from motionconv.geometry import BUILTIN_CURVES, build_measure, default_cutoff

radii = [float(2**k) for k in range(2, 8)]
for name in sorted(BUILTIN_CURVES):
    curve = BUILTIN_CURVES[name]()
    mu = build_measure(curve, default_cutoff(curve), math.ceil(8 * 128 * curve.diameter))
    rows = decay_table(mu, radii)
    fit = fit_decay_exponent([(r, a) for r, a, _ in rows])
    ra = [x for _, _, x in rows]
    print(f"{name:13s} slope {fit.slope:+.3f} +- {fit.stderr:.3f}   R*A: " + " ".join(f"{x:.4f}" for x in ra))

mu = build_measure(BUILTIN_CURVES["stadium"](), None, 3072)
for label, grid in (("integer R", radii), ("half-octave R", list(2.0 ** np.arange(2, 7.5, 0.5)))):
    pts = [(r, pointwise_decay(mu, r, (0, 1))) for r in grid]
    print(f"stadium edge normal, {label}: slope {fit_decay_exponent(pts).slope:+.3f}   " + " ".join(f"{v:.3g}" for _, v in pts))
