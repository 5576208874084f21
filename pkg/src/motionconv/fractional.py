"""Riesz-type distributions i_z = t_+^{z-1} / Gamma(z) and their transforms.

<i_z, eta> = (1/Gamma(z)) int_0^inf eta(t) t^{z-1} dt for Re z > 0, continued
to Re z > -m by <i_z, eta> = (-1)^m <i_{z+m}, eta^{(m)}>.  E_z = i_z(x_1) x
delta(x_2) has Fourier transform (2 pi i xi_1)^{-z}, with the branch fixed by
the support half-line x_1 >= 0:

    E_z^(xi) = (2 pi |xi_1|)^{-z} exp(-i pi z sign(xi_1) / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial, hermite
from scipy import integrate, special

from .core import PreconditionError
from .fourier import measure_ft
from .geometry import DiscreteMeasure, GraphFamily

MAX_ORDER = 4


class SingularFrequencyError(PreconditionError):
    """E_z^ evaluated at xi_1 = 0 for z != 0."""


def gamma(z: complex) -> complex:
    return complex(special.gamma(complex(z)))


def rgamma(z: complex) -> complex:
    """1 / Gamma(z), entire (zero at the poles of Gamma)."""
    return complex(special.rgamma(complex(z)))


@dataclass(frozen=True)
class SmoothTest:
    """Test function on [0, inf) supported in [0, upper]; derivs[k] is the k-th derivative."""

    derivs: tuple[Callable[[np.ndarray], np.ndarray], ...]
    upper: float
    name: str = ""

    @property
    def order(self) -> int:
        return len(self.derivs) - 1


def gaussian_test(order: int = MAX_ORDER, upper: float = 12.0) -> SmoothTest:
    """eta(t) = exp(-t^2), derivatives (-1)^k H_k(t) exp(-t^2); negligible past ``upper``."""

    def make(k):
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        return lambda t: (-1) ** k * hermite.hermval(t, coef) * np.exp(-np.asarray(t) ** 2)

    return SmoothTest(tuple(make(k) for k in range(order + 1)), upper, "gaussian")


def polynomial_bump(length: float = 1.0, power: int = 6) -> SmoothTest:
    """eta(t) = (1 - t^2/L^2)^power on [0, L], zero beyond: C^{power-1} at t = L."""
    base = Polynomial([1.0, 0.0, -1.0 / length**2]) ** power
    polys = [base]
    for _ in range(power - 1):
        polys.append(polys[-1].deriv())

    def make(p):
        return lambda t: np.where(np.asarray(t) < length, p(np.asarray(t, float)), 0.0)

    return SmoothTest(tuple(make(p) for p in polys), length, f"bump^{power}")


def _quad_complex(fn, a, b, **kw):
    re = integrate.quad(lambda t: fn(t).real, a, b, **kw)[0]
    im = integrate.quad(lambda t: fn(t).imag, a, b, **kw)[0]
    return re + 1j * im


def _moment(g, w: complex, upper: float) -> complex:
    """int_0^upper g(t) t^{w-1} dt for Re w > 0."""
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-12)
    ts = min(1.0, upper)
    # t = ts e^{-v} on (0, ts]: the endpoint singularity becomes exponential decay
    lts = math.log(ts)
    near = _quad_complex(lambda v: complex(g(ts * math.exp(-v))) * np.exp(w * (lts - v)), 0.0, math.inf, **opts)
    far = 0.0
    if upper > 1.0:
        far = _quad_complex(lambda t: complex(g(t)) * t ** (w - 1), 1.0, upper, **opts)
    return near + far


def pair_iz(z: complex, eta: SmoothTest | Sequence[Callable], m: int = 0, upper: float | None = None) -> complex:
    """<i_z, eta> through the order-m continuation; needs Re z + m > 0."""
    z = complex(z)
    if isinstance(eta, SmoothTest):
        derivs, upper = eta.derivs, eta.upper if upper is None else upper
    else:
        derivs = tuple(eta)
    if upper is None:
        raise ValueError("support bound 'upper' is required for a bare derivative list")
    if m < 0 or m > MAX_ORDER:
        raise PreconditionError(f"continuation order m = {m} outside 0..{MAX_ORDER}")
    if z.real + m <= 0:
        raise PreconditionError(f"Re z + m = {z.real + m:g} must be positive")
    if m >= len(derivs):
        raise PreconditionError(f"test function provides only {len(derivs) - 1} derivatives, m = {m}")
    w = z + m
    return (-1) ** m * rgamma(w) * _moment(derivs[m], w, upper)


def ft_riesz(z: complex, xi1):
    """E_z^(xi_1) = (2 pi |xi_1|)^{-z} exp(-i pi z sign(xi_1)/2); scalar or array."""
    z = complex(z)
    x = np.asarray(xi1, dtype=float)
    if np.any(x == 0):
        if z != 0:
            raise SingularFrequencyError(f"E_z^ is singular at xi_1 = 0 for z = {z}")
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(
            x == 0,
            1.0 + 0j,
            np.exp(-z * np.log(2 * math.pi * np.abs(np.where(x == 0, 1.0, x)))) * np.exp(-0.5j * math.pi * z * np.sign(x)),
        )
    return complex(val) if val.ndim == 0 else val


def riesz_multiplier(z: complex, xi1):
    """ft_riesz on a grid with the xi_1 = 0 entries set to zero (principal-value convention)."""
    x = np.asarray(xi1, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    val = np.asarray(ft_riesz(z, safe))
    return np.where(x == 0, 0.0, val)


def mollify_measure_spectrum(mu: DiscreteMeasure, z: complex, xi):
    """Spectrum of mu * E_z at xi: mu^(xi) E_z^(xi_1)."""
    xi = np.asarray(xi, dtype=float)
    return measure_ft(mu, xi) * ft_riesz(z, xi[..., 0])


def density_mu_1_is(family: GraphFamily, s: float, x, theta: float):
    """Density of mu^{1+is} on the slice theta: (x_1 - phi)_+^{is} nu / Gamma(1+is).

    ``x`` has shape (..., 2) with x[..., 0] = x_1 and x[..., 1] = x'.  The value
    is 0 for x_1 <= phi (t^{is} has no limit at t = 0 when s != 0).
    """
    x = np.asarray(x, dtype=float)
    x1, xp = x[..., 0], x[..., 1]
    phi = np.asarray(family.phi(xp, theta), dtype=float)
    nu = np.asarray(family.nu(xp, theta), dtype=float)
    t = x1 - phi
    pos = t > 0
    tis = np.exp(1j * s * np.log(np.where(pos, t, 1.0)))
    val = np.where(pos, tis * nu * rgamma(1 + 1j * s), 0.0)
    return complex(val) if val.ndim == 0 else val
