"""Seeded test functions on the plane grid.

Random inputs draw from numpy's PCG64 generator (``np.random.default_rng``)
seeded with the given integer.
"""

from __future__ import annotations

import math

import numpy as np

from .core import PlaneGridFunction, grid_coords


def gaussian(n: int, extent: float, sigma: float, centre=(0.0, 0.0)) -> PlaneGridFunction:
    c = grid_coords(n, extent)
    x1, x2 = np.meshgrid(c - centre[0], c - centre[1], indexing="ij")
    return PlaneGridFunction(np.exp(-(x1**2 + x2**2) / (2 * sigma**2)), extent)


def ball(n: int, extent: float, radius: float, centre=(0.0, 0.0), supersample: int = 1) -> PlaneGridFunction:
    """Indicator of the disc B(centre, radius); ``supersample`` > 1 gives cell-coverage values."""
    return annulus(n, extent, 0.0, radius, centre, supersample)


def annulus(n: int, extent: float, r0: float, r1: float, centre=(0.0, 0.0), supersample: int = 1) -> PlaneGridFunction:
    h = 2 * extent / n
    c = grid_coords(n, extent)
    off = (np.arange(supersample) + 0.5) / supersample - 0.5 if supersample > 1 else np.zeros(1)
    acc = np.zeros((n, n))
    for ox in off:
        for oy in off:
            x1, x2 = np.meshgrid(c + ox * h - centre[0], c + oy * h - centre[1], indexing="ij")
            r2 = x1**2 + x2**2
            acc += (r2 >= r0**2) & (r2 < r1**2)
    return PlaneGridFunction(acc / len(off) ** 2, extent)


def bandlimited(n: int, extent: float, seed: int, kmax: float, window: float | None = None, modes: int = 24) -> PlaneGridFunction:
    """Real random trigonometric field with frequencies |k| <= kmax (cycles per length).

    Frequencies lie on the torus lattice Z^2 / (2 extent), so without a window
    the field is exactly band-limited on the periodic grid.  ``window`` = rho
    multiplies by the C^1 bump (1 - r^2/rho^2)^2_+ to give compact support.
    """
    rng = np.random.default_rng(seed)
    period = 2.0 * extent
    kint = int(math.floor(kmax * period))
    lattice = [(a, b) for a in range(-kint, kint + 1) for b in range(0, kint + 1) if (b > 0 or a > 0) and math.hypot(a, b) <= kmax * period]
    if not lattice:
        raise ValueError("kmax is below the lowest lattice frequency 1/(2 extent)")
    pick = rng.choice(len(lattice), size=min(modes, len(lattice)), replace=False)
    c = grid_coords(n, extent)
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    f = np.zeros((n, n))
    for idx in sorted(pick):
        a, b = lattice[idx]
        amp = rng.normal() + 1j * rng.normal()
        f += 2 * np.real(amp * np.exp(2j * math.pi * (a * x1 + b * x2) / period))
    if window is not None:
        r2 = (x1**2 + x2**2) / window**2
        f *= np.where(r2 < 1, (1 - r2) ** 2, 0.0)
    return PlaneGridFunction(f, extent)


def smooth_blobs(n: int, extent: float, seed: int, sigma: float, count: int = 6, spread: float = 0.3) -> PlaneGridFunction:
    """Random signed sum of Gaussians of width ``sigma`` centred within ``spread`` of 0."""
    rng = np.random.default_rng(seed)
    c = grid_coords(n, extent)
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    f = np.zeros((n, n))
    for _ in range(count):
        cx, cy = rng.uniform(-spread, spread, 2)
        f += rng.normal() * np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2) / (2 * sigma**2))
    return PlaneGridFunction(f, extent)


def function_dictionary(n: int, extent: float, seed: int = 0) -> list[tuple[str, PlaneGridFunction]]:
    """The fixed 20-member dictionary: Gaussians, balls, annuli, windowed random fields."""
    out = []
    for s in (0.05, 0.1, 0.15, 0.2, 0.3, 0.4):
        out.append((f"gaussian sigma={s}", gaussian(n, extent, s)))
    for d in (1 / 32, 1 / 16, 1 / 8, 1 / 4, 0.375):
        out.append((f"ball delta={d:g}", ball(n, extent, d)))
    for r0, r1 in ((0.1, 0.15), (0.2, 0.3), (0.05, 0.25), (0.3, 0.4)):
        out.append((f"annulus {r0}-{r1}", annulus(n, extent, r0, r1)))
    for k in range(5):
        out.append((f"bandlimited seed={seed + k}", bandlimited(n, extent, seed + k, kmax=3.0, window=0.4)))
    return out
