"""Independent reference values used by the tests.

Nothing here imports the package under test.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate


def bessel_j0(x: float, dps: int = 40) -> float:
    """J0 by its power series sum_k (-1)^k (x/2)^{2k} / (k!)^2 at high precision.

    Terms grow to about e^x before cancelling, so x / ln(10) extra digits are carried.
    """
    dps = dps + int(abs(x) / math.log(10)) + 1
    with mpmath.workdps(dps):
        q = -(mpmath.mpf(x) / 2) ** 2
        term = mpmath.mpf(1)
        total = term
        k = 0
        while True:
            k += 1
            term *= q / (k * k)
            total += term
            if abs(term) < mpmath.mpf(10) ** (-dps + 5) and k > abs(x):
                break
        return float(total)


def circle_ft(radius: float) -> float:
    """Fourier transform of arc length on the unit circle at |xi| = radius."""
    return 2 * math.pi * bessel_j0(2 * math.pi * radius)


def damped_riesz(z_half_eps: float, xi1: float = 1.0) -> complex:
    """(1/Gamma(1/2)) int_0^inf t^{-1/2} e^{-eps t} e^{-2 pi i xi1 t} dt by quadrature.

    [0, 1] uses t = u^2 to remove the endpoint singularity; [1, inf) uses
    QUADPACK's Fourier-integral rule.
    """
    eps = z_half_eps
    w = 2 * math.pi * xi1

    def head(part):
        f = (lambda u: 2 * math.exp(-eps * u * u) * math.cos(w * u * u)) if part == "re" else (
            lambda u: -2 * math.exp(-eps * u * u) * math.sin(w * u * u)
        )
        return integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13, limit=400)[0]

    def tail(weight):
        return integrate.quad(lambda t: t**-0.5 * math.exp(-eps * t), 1, np.inf, weight=weight, wvar=w, epsabs=1e-13, limlst=200)[0]

    re = head("re") + tail("cos")
    im = head("im") - tail("sin")
    return complex(re, im) / math.sqrt(math.pi)


def damped_riesz_limit(xi1: float = 1.0) -> complex:
    """Quadratic extrapolation to eps = 0 from eps in {1e-2, 1e-3, 1e-4}."""
    eps = np.array([1e-2, 1e-3, 1e-4])
    vals = np.array([damped_riesz(e, xi1) for e in eps])
    coef_re = np.polyfit(eps, vals.real, 2)
    coef_im = np.polyfit(eps, vals.imag, 2)
    return complex(coef_re[-1], coef_im[-1])
