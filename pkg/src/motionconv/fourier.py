"""Fourier transforms of discrete measures and the spherical-average decay functional.

Convention: mu^(xi) = sum_j w_j exp(-2 pi i xi . p_j), xi in cycles per unit length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TWO_PI, PreconditionError, UnderResolvedError
from .geometry import DiscreteMeasure

_CHUNK = 1 << 22  # complex exponentials evaluated per block


def measure_ft(mu: DiscreteMeasure, xi) -> complex | np.ndarray:
    """Fourier transform of ``mu`` at one frequency (shape (n,)) or many (shape (..., n))."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != mu.dim:
        raise ValueError(f"frequency dimension {xi.shape[-1]} != measure dimension {mu.dim}")
    flat = xi.reshape(-1, mu.dim)
    out = np.empty(len(flat), dtype=complex)
    w = mu.weights.astype(complex)
    step = max(1, _CHUNK // max(mu.size, 1))
    for s in range(0, len(flat), step):
        phase = flat[s : s + step] @ mu.points.T
        out[s : s + step] = np.exp(-2j * math.pi * phase) @ w
    if xi.ndim == 1:
        return complex(out[0])
    return out.reshape(xi.shape[:-1])


@dataclass(frozen=True)
class SpectralSamples:
    frequencies: np.ndarray
    values: np.ndarray
    measure: str
    nodes: int


def spectral_samples(mu: DiscreteMeasure, xi) -> SpectralSamples:
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    return SpectralSamples(xi, measure_ft(mu, xi), mu.label, mu.size)


def sphere_directions(dim: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions on S^{dim-1} with weights summing to 1.

    dim = 2: uniform angles.  dim = 3: equal-area latitude bands with uniform
    longitudes per band, so every weight is exactly 1/count.
    """
    if dim == 2:
        phi = TWO_PI * np.arange(count) / count
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(count, 1.0 / count)
    if dim != 3:
        raise ValueError("only S^1 and S^2 are supported")
    bands = max(1, round(math.sqrt(math.pi * count) / 2))
    edges = np.linspace(0.0, math.pi, bands + 1)
    share = np.cos(edges[:-1]) - np.cos(edges[1:])  # band areas / 2
    per = np.floor(share / share.sum() * count).astype(int)
    per[np.argsort(-(share / share.sum() * count - per))[: count - per.sum()]] += 1
    # re-cut the bands so that band area is exactly proportional to its point count
    z_edges = 1.0 - 2.0 * np.concatenate([[0], np.cumsum(per)]) / count
    dirs = []
    for k, nk in enumerate(per):
        if nk == 0:
            continue
        z = 0.5 * (z_edges[k] + z_edges[k + 1])
        rho = math.sqrt(max(0.0, 1.0 - z * z))
        lon = TWO_PI * (np.arange(nk) + 0.5 * (k % 2)) / nk
        dirs.append(np.stack([rho * np.cos(lon), rho * np.sin(lon), np.full(nk, z)], axis=-1))
    return np.concatenate(dirs), np.full(count, 1.0 / count)


def resolved_nodes(mu: DiscreteMeasure, radius: float) -> float:
    """Node count needed at frequency radius R: 8 R diam per surface dimension."""
    return (8.0 * radius * mu.diameter) ** (mu.dim - 1)


def check_resolved(mu: DiscreteMeasure, radius: float) -> None:
    need = resolved_nodes(mu, radius)
    if mu.size < need:
        raise UnderResolvedError(
            f"measure '{mu.label}' has {mu.size} nodes; R = {radius:g} needs >= {math.ceil(need)}"
        )


def default_angle_count(mu: DiscreteMeasure, radius: float) -> int:
    """Angles that integrate |mu^(R w)|^2 exactly for a centred measure (n = 2)."""
    rmax = float(np.sqrt((mu.points**2).sum(-1)).max()) if mu.size else 0.0
    need = 4 * math.pi * radius * rmax + 64
    return int(4 * math.ceil(need / 4))


def average_decay(mu: DiscreteMeasure, radius: float, n_angles: int | None = None, check: bool = True) -> float:
    """Normalized spherical mean of |mu^(R w)|^2 over w in S^{n-1}.

    The measure is first translated to its weighted centroid (|mu^| is
    translation invariant) so the automatic angle count stays small.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if check and radius > 0:
        check_resolved(mu, radius)
    mu = mu.effective()
    if mu.size == 0:
        return 0.0
    if radius == 0:
        return mu.mass**2
    centre = (mu.weights @ mu.points) / mu.mass
    mu = mu.translate(-centre)
    if n_angles is None:
        n_angles = default_angle_count(mu, radius) if mu.dim == 2 else 4096
    if n_angles < 64:
        raise PreconditionError(f"n_angles = {n_angles} is below the minimum 64")
    dirs, wts = sphere_directions(mu.dim, n_angles)
    vals = measure_ft(mu, radius * dirs)
    return float(np.sum(wts * np.abs(vals) ** 2))


def pointwise_decay(mu: DiscreteMeasure, radius: float, direction) -> float:
    d = np.asarray(direction, dtype=float)
    return abs(measure_ft(mu, radius * d / np.linalg.norm(d))) ** 2


def decay_table(mu: DiscreteMeasure, radii, n_angles: int | None = None, check: bool = True) -> list[tuple]:
    """Rows (R, A(R), R^{n-1} A(R))."""
    rows = []
    for r in radii:
        a = average_decay(mu, r, n_angles, check)
        rows.append((float(r), a, r ** (mu.dim - 1) * a))
    return rows


@dataclass(frozen=True)
class DecayFit:
    slope: float
    stderr: float
    intercept: float
    used: int
    excluded: tuple[float, ...] = ()


def fit_decay_exponent(pairs) -> DecayFit:
    """Least-squares slope of log A against log R, with its standard error.

    Pairs with non-positive A (or R) are excluded and listed in ``excluded``.
    """
    pairs = [(float(r), float(a)) for r, a in pairs]
    good = [(r, a) for r, a in pairs if r > 0 and a > 0]
    excluded = tuple(r for r, a in pairs if not (r > 0 and a > 0))
    if len(good) < 6:
        raise PreconditionError(f"need at least 6 usable radii, got {len(good)}")
    x = np.log([r for r, _ in good])
    y = np.log([a for _, a in good])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    dof = len(x) - 2
    stderr = math.sqrt(float((resid**2).sum()) / dof / sxx)
    return DecayFit(slope, stderr, intercept, len(good), excluded)
