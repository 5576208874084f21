"""Convolution by singular measures on the Euclidean motion group M_2.

Modules:
    core         group law, grid functions, L^p norms
    geometry     convex curves, cutoffs, discrete measures, surface families
    fourier      measure transforms and spherical-average decay
    radon        Tf(x, k) = (f * gamma_k)(x), improving and sharpness scans
    fractional   Riesz distributions i_z and the multiplier E_z^
    motiongroup  representation kernels, Plancherel, operator-norm scans
    cli          scenario runner
"""

from .core import (
    IDENTITY,
    ExtentError,
    MotionElement,
    MotionGridFunction,
    PlaneGridFunction,
    PreconditionError,
    UnderResolvedError,
    compose,
    inverse,
    lp_norm,
)
from .fourier import average_decay, fit_decay_exponent, measure_ft
from .fractional import ft_riesz, pair_iz
from .geometry import (
    ConvexCurve,
    CutoffWindow,
    DiscreteMeasure,
    GraphFamily,
    NonConvexError,
    RotatedFamily,
    build_measure,
    circle,
    parabola,
    rotate_measure,
    slice_family,
    stadium,
    superellipse,
)
from .motiongroup import OMEGA_2, hs_norm, op_norm, opnorm_scan, plancherel_check, repn_kernel, repn_measure_kernel
from .radon import apply_direct, apply_spectral, improving_ratio, rotated_plan, sharpness_scan

__version__ = "0.1.0"
