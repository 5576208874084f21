"""Motion-group algebra, sampling grids and discrete L^p norms.

The motion group M_2 is R^2 x SO(2) with product (x, k)(y, h) = (x + k y, k h).
Rotations are stored as angles in [0, 2*pi).

Grid convention used throughout the package: an N x N grid on the square
[-extent, extent)^2 with nodes x_i = -extent + i*h, h = 2*extent/N, indexed
``samples[i, j] <-> (x_i, x_j)``.  Grids are periodic.  The angle grid has
M nodes theta_a = 2*pi*a/M and Haar measure normalized to total mass 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class PreconditionError(ValueError):
    """A numerical precondition of an operation is violated."""


class ExtentError(PreconditionError):
    """The computational box is too small for the supports involved."""


class UnderResolvedError(PreconditionError):
    """A quadrature or grid is too coarse for the requested frequency/scale."""


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def reduce_angle(theta: float) -> float:
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a value just below a multiple of 2*pi can round up to 2*pi
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class MotionElement:
    """Rigid motion (x, k) of the plane: translation x, rotation by ``angle``."""

    translation: tuple[float, float] = (0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        x = tuple(float(v) for v in self.translation)
        if len(x) != 2:
            raise ValueError("only n = 2 motions are supported")
        object.__setattr__(self, "translation", x)
        object.__setattr__(self, "angle", reduce_angle(float(self.angle)))

    @property
    def matrix(self) -> np.ndarray:
        return rotation(self.angle)

    def act(self, y) -> np.ndarray:
        """Apply the motion to points y (shape (..., 2)): y -> x + k y."""
        y = np.asarray(y, dtype=float)
        return y @ self.matrix.T + np.asarray(self.translation)


IDENTITY = MotionElement()


def compose(a: MotionElement, b: MotionElement) -> MotionElement:
    x = np.asarray(a.translation) + a.matrix @ np.asarray(b.translation)
    return MotionElement(tuple(x), a.angle + b.angle)


def inverse(a: MotionElement) -> MotionElement:
    x = -(a.matrix.T @ np.asarray(a.translation))
    return MotionElement(tuple(x), -a.angle)


def grid_coords(n: int, extent: float) -> np.ndarray:
    h = 2.0 * extent / n
    return -extent + h * np.arange(n)


def angle_grid(m: int) -> np.ndarray:
    return TWO_PI * np.arange(m) / m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex if np.iscomplexobj(a) else float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PlaneGridFunction:
    """Samples of a function on R^2 on the periodic N x N grid of half-width ``extent``."""

    samples: np.ndarray
    extent: float

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"expected an N x N array, got shape {s.shape}")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**2

    @property
    def coords(self) -> np.ndarray:
        return grid_coords(self.n, self.extent)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.coords
        return np.meshgrid(c, c, indexing="ij")

    @classmethod
    def from_callable(cls, func, n: int, extent: float) -> "PlaneGridFunction":
        c = grid_coords(n, extent)
        x1, x2 = np.meshgrid(c, c, indexing="ij")
        return cls(func(x1, x2), extent)

    def support_radius(self, rel_tol: float = 1e-6) -> float:
        """Radius of the smallest origin-centred disc holding all samples above rel_tol*max."""
        return _support_radius(np.abs(self.samples), self.mesh(), rel_tol)


@dataclass(frozen=True)
class MotionGridFunction:
    """Samples of a function on M_2 on an N x N x M grid (space x angle)."""

    samples: np.ndarray
    extent: float

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.ndim != 3 or s.shape[0] != s.shape[1]:
            raise ValueError(f"expected an N x N x M array, got shape {s.shape}")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def n_angles(self) -> int:
        return self.samples.shape[2]

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**2 / self.n_angles

    @property
    def coords(self) -> np.ndarray:
        return grid_coords(self.n, self.extent)

    @property
    def angles(self) -> np.ndarray:
        return angle_grid(self.n_angles)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        c = self.coords
        return np.meshgrid(c, c, indexing="ij")

    def slab(self, a: int) -> PlaneGridFunction:
        return PlaneGridFunction(self.samples[:, :, a], self.extent)

    @classmethod
    def from_plane(cls, f: PlaneGridFunction, n_angles: int) -> "MotionGridFunction":
        """Embed f as F(x, k) = f(x)."""
        return cls(np.repeat(f.samples[:, :, None], n_angles, axis=2), f.extent)

    def support_radius(self, rel_tol: float = 1e-6) -> float:
        return _support_radius(np.abs(self.samples).max(axis=2), self.mesh(), rel_tol)


def _support_radius(mod, mesh, rel_tol):
    peak = mod.max()
    if peak == 0:
        return 0.0
    x1, x2 = mesh
    r = np.hypot(x1, x2)[mod > rel_tol * peak]
    return float(r.max())


def lp_norm(g: PlaneGridFunction | MotionGridFunction, p: float) -> float:
    """Weighted discrete L^p norm; p = inf gives the max modulus."""
    if p == math.inf:
        return float(np.abs(g.samples).max()) if g.samples.size else 0.0
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    mod = np.abs(g.samples)
    peak = float(mod.max()) if mod.size else 0.0
    if peak == 0.0:
        return 0.0
    # scale by the peak so |g|^p neither underflows nor overflows
    return peak * float((np.sum((mod / peak) ** p) * g.cell_volume) ** (1.0 / p))


def total_measure(g: PlaneGridFunction | MotionGridFunction) -> float:
    """Measure of the computational domain (Haar mass of SO(2) is 1)."""
    return (2.0 * g.extent) ** 2
