"""Thin wrappers over finufft for the two transforms the package needs.

Both run single-threaded so results do not depend on the worker count.
"""

from __future__ import annotations

import math

import finufft
import numpy as np

EPS = 1e-13


def _wrap(x):
    return np.mod(x + math.pi, 2 * math.pi) - math.pi


def measure_grid_spectrum(points: np.ndarray, weights: np.ndarray, n: int, extent: float) -> np.ndarray:
    """sum_l w_l exp(-2 pi i xi_k . p_l) at xi_k = k / (2 extent), k in FFT order, shape (n, n)."""
    if len(points) == 0:
        return np.zeros((n, n), dtype=complex)
    scale = math.pi / extent
    x = _wrap(scale * points[:, 0])
    y = _wrap(scale * points[:, 1])
    return finufft.nufft2d1(
        x, y, weights.astype(complex), (n, n), isign=-1, eps=EPS, modeord=1, nthreads=1
    )


def grid_ft_at(samples: np.ndarray, extent: float, xi: np.ndarray) -> np.ndarray:
    """Riemann-sum Fourier transform h^2 sum_p f[p] exp(-2 pi i xi . x_p) of a grid function.

    ``samples`` is (n, n) or a stack (ntrans, n, n) on the package grid
    x_p = -extent + p h; ``xi`` is (K, 2).  Returns (K,) or (ntrans, K).
    """
    n = samples.shape[-1]
    h = 2.0 * extent / n
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    x = _wrap(2 * math.pi * h * xi[:, 0])
    y = _wrap(2 * math.pi * h * xi[:, 1])
    # x_p = h (p - n/2): the array is already in CMCL order k = -n/2 .. n/2 - 1
    vals = finufft.nufft2d2(x, y, np.ascontiguousarray(samples, dtype=complex), isign=-1, eps=EPS, modeord=0, nthreads=1)
    return h * h * vals
