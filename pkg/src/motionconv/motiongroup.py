"""Group Fourier analysis on M_2 (trivial sigma only, so H(SO(2)) = L^2 of the circle).

pi_lam(x, k) phi(l) = exp(2 pi i lam l^{-1} e_1 . x) phi(l k) and
pi_lam(f) = int f(x, k) pi_lam((x, k)^{-1}) dx dk.  Substituting v = u k^{-1}
(so k u^{-1} e_1 = v^{-1} e_1) gives the integral kernel

    (pi_lam(f) phi)(u) = int K(u, v) phi(v) dv,   K(u, v) = f^(lam R_{-v} e_1, u - v),

where f^(xi, k) is the Euclidean transform in x at fixed angle k.  Matrices
are indexed [u_i, v_j] on the uniform angle grid and act as
(K phi)(u_i) = (1/M) sum_j K[i, j] phi(v_j).

With the composition f * g (a) = int f(a b^{-1}) g(b) db one has
pi(f * g) = pi(g) pi(f), i.e. kernel(f * g) = K_g @ K_f / M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _nufft
from .core import TWO_PI, MotionGridFunction, PreconditionError, UnderResolvedError, angle_grid, lp_norm
from .fourier import measure_ft
from .fractional import riesz_multiplier
from .geometry import GraphFamily, RotatedFamily

# Plancherel constant for n = 2, calibrated once by ``calibrate_omega`` on
# ``calibration_functions()`` (median ratio, N = 64, M = 32, 64 lambdas in
# [0.25, 8]); see tests/test_motiongroup.py for the recalibration check.
OMEGA_2 = 0.1595214113026847


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, bracket: tuple[float, float]):
        super().__init__(f"{msg}; operator norm bracket [{bracket[0]:.6g}, {bracket[1]:.6g}]")
        self.bracket = bracket


class SpectralLeakageError(PreconditionError):
    pass


@dataclass(frozen=True)
class RepnKernel:
    lam: float
    matrix: np.ndarray

    @property
    def n_angles(self) -> int:
        return self.matrix.shape[0]

    def weighted(self) -> np.ndarray:
        return self.matrix / self.n_angles

    def __sub__(self, other: "RepnKernel") -> "RepnKernel":
        return RepnKernel(self.lam, self.matrix - other.matrix)

    def compose(self, other: "RepnKernel") -> "RepnKernel":
        """Kernel of (this operator) o (other)."""
        return RepnKernel(self.lam, self.matrix @ other.matrix / self.n_angles)


def identity_kernel(lam: float, n_angles: int) -> RepnKernel:
    return RepnKernel(lam, n_angles * np.eye(n_angles, dtype=complex))


def frequency_directions(n_angles: int, shift: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Angles v_j and unit vectors R_{-v_j} e_1 = (cos v_j, -sin v_j)."""
    v = angle_grid(n_angles) + shift
    return v, np.stack([np.cos(v), -np.sin(v)], axis=-1)


def max_band(f: MotionGridFunction) -> float:
    return f.n / (4.0 * f.extent)


def repn_kernel(f: MotionGridFunction, lam: float) -> RepnKernel:
    if not 0 < lam <= max_band(f) * (1 + 1e-12):
        raise PreconditionError(f"lambda = {lam:g} outside the resolved band (0, {max_band(f):g}]")
    m_ang = f.n_angles
    _, dirs = frequency_directions(m_ang)
    xi = lam * dirs
    # fhat[a, j] = f^(xi_j, theta_a)
    fhat = _nufft.grid_ft_at(np.moveaxis(f.samples, -1, 0), f.extent, xi)
    i, j = np.meshgrid(np.arange(m_ang), np.arange(m_ang), indexing="ij")
    return RepnKernel(float(lam), fhat[(i - j) % m_ang, j])


def hs_norm(k: RepnKernel) -> float:
    return float(np.sqrt(np.sum(np.abs(k.matrix) ** 2))) / k.n_angles


def op_norm(k: RepnKernel, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value of K/M by power iteration on (K/M)^* (K/M).

    Converged when ||B x - rho x|| <= tol * rho.  Clustered top singular
    values converge slowly; past max_iter a ConvergenceError carries the
    bracket [sqrt(rho), ||K/M||_F].
    """
    a = k.weighted()
    if not np.any(a):
        return 0.0
    m = a.shape[1]
    x = np.ones(m, dtype=complex) + 0.5 * np.cos(np.arange(m) * 1.618)  # fixed, not orthogonal to generic vectors
    x /= np.linalg.norm(x)
    rho = 0.0
    for _ in range(max_iter):
        y = a.conj().T @ (a @ x)
        rho = float(np.vdot(x, y).real)
        if rho > 0 and np.linalg.norm(y - rho * x) <= tol * rho:
            return math.sqrt(rho)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps", (math.sqrt(max(rho, 0.0)), float(np.linalg.norm(a)))
    )


# ---------------------------------------------------------------- Plancherel


def geometric_grid(lo: float, hi: float, count: int | None = None, per_octave: int = 8) -> np.ndarray:
    if count is None:
        count = int(round(per_octave * math.log2(hi / lo))) + 1
    return np.geomspace(lo, hi, count)


def spectral_leakage(f: MotionGridFunction, lo: float, hi: float) -> float:
    """Fraction of ||f||_2^2 at Euclidean frequencies outside lo <= |xi| <= hi."""
    k = np.fft.fftfreq(f.n, d=f.h)
    r = np.hypot(*np.meshgrid(k, k, indexing="ij"))
    energy = np.abs(np.fft.fft2(f.samples, axes=(0, 1))) ** 2
    total = energy.sum()
    if total == 0:
        return 0.0
    outside = (r < lo) | (r > hi)
    return float(energy[outside].sum() / total)


def plancherel_lhs(f: MotionGridFunction, lams) -> float:
    """Trapezoid rule for int ||pi_lam(f)||_HS^2 lam dlam on the given grid."""
    lams = np.asarray(lams, dtype=float)
    vals = np.array([hs_norm(repn_kernel(f, l)) ** 2 * l for l in lams])
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(lams)))


def plancherel_check(f: MotionGridFunction, lams, omega: float = OMEGA_2, max_leakage: float = 1e-2) -> float:
    """Relative error |LHS - omega ||f||_2^2| / (omega ||f||_2^2)."""
    lams = np.asarray(lams, dtype=float)
    leak = spectral_leakage(f, lams[0], lams[-1])
    if leak > max_leakage:
        raise SpectralLeakageError(f"{leak:.2%} of the energy lies outside [{lams[0]:g}, {lams[-1]:g}]")
    rhs = omega * lp_norm(f, 2) ** 2
    if rhs == 0:
        return 0.0
    return abs(plancherel_lhs(f, lams) - rhs) / rhs


def calibrate_omega(funcs, lams) -> float:
    """Median over funcs of LHS / ||f||_2^2."""
    return float(np.median([plancherel_lhs(f, lams) / lp_norm(f, 2) ** 2 for f in funcs]))


def band_limited_motion_function(n: int, extent: float, n_angles: int, seed: int, kmin: float = 2.0, kmax: float = 4.0, width: float = 0.4, terms: int = 4) -> MotionGridFunction:
    """Seeded f(x, theta) = sum_q c_q(theta) g_q(x) with g_q a Gaussian-modulated plane wave.

    Each carrier |k| lies in [kmin, kmax] and the envelope width is ``width``,
    so the spectrum sits in an annulus; c_q are random trigonometric
    polynomials of degree <= 2 in theta.  Generator: PCG64.
    """
    rng = np.random.default_rng(seed)
    c = -extent + (2 * extent / n) * np.arange(n)
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    env = np.exp(-(x1**2 + x2**2) / (2 * width**2))
    th = angle_grid(n_angles)
    out = np.zeros((n, n, n_angles), dtype=complex)
    for _ in range(terms):
        kr = rng.uniform(kmin, kmax)
        ka = rng.uniform(0, TWO_PI)
        wave = env * np.exp(2j * math.pi * kr * (math.cos(ka) * x1 + math.sin(ka) * x2))
        coef = rng.normal(size=5) + 1j * rng.normal(size=5)
        ang = sum(coef[d + 2] * np.exp(1j * d * th) for d in range(-2, 3))
        out += wave[:, :, None] * ang[None, None, :]
    return MotionGridFunction(out, extent)


def calibration_functions(n: int = 64, extent: float = 2.0, n_angles: int = 32) -> list[MotionGridFunction]:
    return [band_limited_motion_function(n, extent, n_angles, seed) for seed in range(5)]


def heldout_functions(n: int = 64, extent: float = 2.0, n_angles: int = 32) -> list[MotionGridFunction]:
    return [band_limited_motion_function(n, extent, n_angles, seed) for seed in range(100, 105)]


# ------------------------------------------------------- measure kernels


def _slice(family, theta: float, m: int):
    return family.slice(theta, m)


def default_nodes(family, lam: float) -> int:
    return max(256, math.ceil(8 * lam * family.diameter))


def repn_measure_kernel(
    family: RotatedFamily | GraphFamily,
    z: complex,
    lam: float,
    n_angles: int,
    m: int | None = None,
    singular: str = "zero",
) -> RepnKernel:
    """Kernel of pi_lam(mu^z): K(u, v) = mu_{u-v}^(lam R_{-v} e_1) E_z^(lam cos v).

    ``singular`` handles the columns cos v = 0 when Re z < 0: "zero" sets the
    multiplier there to 0, "shift" displaces the v grid by half a step instead.
    """
    if lam <= 0:
        raise PreconditionError("lambda must be positive")
    if singular not in ("zero", "shift"):
        raise ValueError("singular must be 'zero' or 'shift'")
    m = default_nodes(family, lam) if m is None else m
    shift = math.pi / n_angles if singular == "shift" else 0.0
    v, dirs = frequency_directions(n_angles, shift)
    xi = lam * dirs
    u = angle_grid(n_angles)
    # u_i - v_j depends only on (i - j) mod M
    slice_angles = [(u[a] - shift) % TWO_PI for a in range(n_angles)]
    muhat = np.stack([measure_ft(_slice(family, k, m), xi) for k in slice_angles])
    xi1 = np.where(np.abs(xi[:, 0]) < 1e-12 * lam, 0.0, xi[:, 0])
    mult = np.ones(n_angles, dtype=complex) if complex(z) == 0 else riesz_multiplier(z, xi1)
    i, j = np.meshgrid(np.arange(n_angles), np.arange(n_angles), indexing="ij")
    return RepnKernel(float(lam), muhat[(i - j) % n_angles, j] * mult[None, :])


@dataclass(frozen=True)
class OpnormScan:
    rows: tuple[tuple[float, float], ...]
    z: complex

    @property
    def values(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def lams(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def sup_over_median(self) -> float:
        vals = self.values
        med = float(np.median(vals))
        return float(vals.max() / med) if med > 0 else math.nan

    def slope(self) -> float:
        from .radon import loglog_slope

        return loglog_slope(self.lams, self.values)


def opnorm_scan(
    family: RotatedFamily | GraphFamily,
    s: float,
    lams,
    n_angles: int = 128,
    z: complex | None = None,
    singular: str = "zero",
) -> OpnormScan:
    """Operator norms of pi_lam(mu^z) over lams; z defaults to -1/2 + i s (n = 2)."""
    z = complex(-0.5, s) if z is None else complex(z)
    rows = tuple((float(l), op_norm(repn_measure_kernel(family, z, l, n_angles, singular=singular))) for l in lams)
    return OpnormScan(rows, z)
