"""The operator Tf(x, k) = (f * gamma_k)(x) on M_2, its group-convolution form, and L^p experiments.

Two independent routes compute the same periodic convolution on the grid:

* ``apply_direct``: bilinear interpolation of f at x - p for every node p of
  the per-angle measure.  The sum is organized by first depositing the
  measure's hat weights onto integer grid offsets, then accumulating shifted
  copies of f, which is the same quadrature grouped by offset.
* ``apply_spectral``: multiply the FFT of f by the exact spectrum of the
  discrete measure on the FFT frequency grid (NUFFT) and invert.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _nufft
from .core import (
    ExtentError,
    MotionGridFunction,
    PlaneGridFunction,
    PreconditionError,
    UnderResolvedError,
    angle_grid,
    lp_norm,
)
from .geometry import (
    ConvexCurve,
    CutoffWindow,
    DiscreteMeasure,
    GraphFamily,
    RotatedFamily,
    build_measure,
    default_cutoff,
    point_set_diameter,
    rotate_measure,
)


@dataclass(frozen=True, eq=False)
class OperatorPlan:
    """Angle grid and one discrete measure per angle.

    ``kind`` is "rotated" when measures[a] is the base measure rotated by
    angles[a] (so the plan is the family gamma_k), else "family".
    """

    measures: tuple[DiscreteMeasure, ...]
    kind: str = "family"
    label: str = ""
    base: DiscreteMeasure | None = None
    _tables: dict = field(default_factory=dict, repr=False)

    @property
    def n_angles(self) -> int:
        return len(self.measures)

    @property
    def angles(self) -> np.ndarray:
        return angle_grid(self.n_angles)

    @property
    def nodes(self) -> int:
        return max((mu.size for mu in self.measures), default=0)

    @property
    def is_zero(self) -> bool:
        return all(mu.mass == 0 for mu in self.measures)

    @cached_property
    def diameter(self) -> float:
        return max((mu.diameter for mu in self.measures), default=0.0)

    @cached_property
    def reach(self) -> float:
        """Largest |p| over all nodes with positive weight."""
        r = [float(np.sqrt((mu.effective().points ** 2).sum(-1)).max()) for mu in self.measures if mu.mass > 0]
        return max(r, default=0.0)

    def spectral_table(self, a: int, n: int, extent: float, cache: bool = True) -> np.ndarray:
        """Exact spectrum of measures[a] on the FFT grid of an (n, extent) grid."""
        key = (a, n, float(extent))
        tab = self._tables.get(key)
        if tab is None:
            mu = self.measures[a].effective()
            tab = _nufft.measure_grid_spectrum(mu.points, mu.weights, n, extent)
            if cache:
                self._tables[key] = tab
        return tab

    def rotated_table(self, b: int, j: int, n: int, extent: float) -> np.ndarray:
        """Spectrum of measures[j] rotated by angles[b]."""
        if self.kind == "rotated":
            return self.spectral_table((b + j) % self.n_angles, n, extent)
        key = ("rot", b, j, n, float(extent))
        tab = self._tables.get(key)
        if tab is None:
            mu = rotate_measure(self.measures[j].effective(), self.angles[b])
            tab = _nufft.measure_grid_spectrum(mu.points, mu.weights, n, extent)
            self._tables[key] = tab
        return tab

    def clear_cache(self) -> None:
        self._tables.clear()


def rotated_plan(curve: ConvexCurve, cutoff: CutoffWindow | None, m: int, n_angles: int) -> OperatorPlan:
    cutoff = default_cutoff(curve) if cutoff is None else cutoff
    base = build_measure(curve, cutoff, m)
    measures = tuple(rotate_measure(base, t) for t in angle_grid(n_angles))
    return OperatorPlan(measures, "rotated", f"rotated {curve.descriptor}|m={m}|M={n_angles}", base)


def family_plan(family: RotatedFamily | GraphFamily, m: int, n_angles: int) -> OperatorPlan:
    if isinstance(family, RotatedFamily):
        return rotated_plan(family.curve, family.cutoff, m, n_angles)
    measures = tuple(family.slice(t, m) for t in angle_grid(n_angles))
    return OperatorPlan(measures, "family", f"{family.descriptor}|m={m}|M={n_angles}")


def zero_plan(n_angles: int, m: int = 16) -> OperatorPlan:
    mu = DiscreteMeasure(np.zeros((m, 2)), np.zeros(m), "zero")
    return OperatorPlan(tuple(mu for _ in range(n_angles)), "rotated", "zero", mu)


def check_grid(f: PlaneGridFunction | MotionGridFunction, plan: OperatorPlan, periodic: bool = False) -> None:
    """Enforce the resolution and extent preconditions of the operator.

    Resolution: consecutive measure nodes are at most 2h apart.  Extent:
    support radius of f + max(curve diameter, reach) + 2h <= extent, unless
    ``periodic`` (inputs meant as functions on the torus, e.g. band-limited).
    """
    if plan.is_zero:
        return
    h = f.h
    gap = max(mu.effective().max_spacing for mu in plan.measures)
    if gap > 2 * h:
        raise UnderResolvedError(f"measure node spacing {gap:.4g} exceeds 2h = {2 * h:.4g}; increase m")
    if periodic:
        return
    need = f.support_radius() + max(plan.diameter, plan.reach) + 2 * h
    if need > f.extent:
        raise ExtentError(f"extent {f.extent:g} < support radius + curve size + 2h = {need:.4g}")


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def direct_slab(f: np.ndarray, mu: DiscreteMeasure, h: float) -> np.ndarray:
    """(f * mu)(x_i) with f bilinearly interpolated, periodic grid of spacing h."""
    n = f.shape[0]
    mu = mu.effective()
    out = np.zeros((n, n), dtype=complex)
    if mu.size == 0:
        return out
    u = mu.points / h
    i0 = np.floor(u).astype(np.int64)
    fr = u - i0
    lo = i0.min(axis=0)
    span = i0.max(axis=0) - lo + 2
    stencil = np.zeros(tuple(span))
    for dx, wx in ((0, 1 - fr[:, 0]), (1, fr[:, 0])):
        for dy, wy in ((0, 1 - fr[:, 1]), (1, fr[:, 1])):
            np.add.at(stencil, (i0[:, 0] + dx - lo[0], i0[:, 1] + dy - lo[1]), mu.weights * wx * wy)
    # f(x_i - p) = sum_d hat(d - p/h) f[i - d]  =>  Tf[i] = sum_d stencil[d] f[i - d]
    r = int(max(np.abs(lo).max(), np.abs(lo + span).max())) + 1
    fp = np.pad(np.asarray(f, dtype=complex), r, mode="wrap")
    for a, b in zip(*np.nonzero(stencil)):
        dx, dy = a + lo[0], b + lo[1]
        out += stencil[a, b] * fp[r - dx : r - dx + n, r - dy : r - dy + n]
    return out


def apply_direct(f: PlaneGridFunction, plan: OperatorPlan, periodic: bool = False, workers: int = 1) -> MotionGridFunction:
    check_grid(f, plan, periodic)
    slabs = _map(lambda a: direct_slab(f.samples, plan.measures[a], f.h), range(plan.n_angles), workers)
    return MotionGridFunction(np.stack(slabs, axis=-1), f.extent)


def spectral_slab(fhat: np.ndarray, plan: OperatorPlan, a: int, extent: float, cache: bool = True) -> np.ndarray:
    n = fhat.shape[0]
    return np.fft.ifft2(fhat * plan.spectral_table(a, n, extent, cache))


def apply_spectral(f: PlaneGridFunction, plan: OperatorPlan, periodic: bool = False, workers: int = 1, cache: bool = True) -> MotionGridFunction:
    check_grid(f, plan, periodic)
    fhat = np.fft.fft2(f.samples)
    slabs = _map(lambda a: spectral_slab(fhat, plan, a, f.extent, cache), range(plan.n_angles), workers)
    return MotionGridFunction(np.stack(slabs, axis=-1), f.extent)


def apply(f: PlaneGridFunction, plan: OperatorPlan, method: str = "spectral", **kw) -> MotionGridFunction:
    if method == "spectral":
        return apply_spectral(f, plan, **kw)
    if method == "direct":
        return apply_direct(f, plan, **kw)
    raise ValueError(f"unknown method {method!r}")


def motion_convolve(F: MotionGridFunction, plan: OperatorPlan, periodic: bool = False) -> MotionGridFunction:
    """Group convolution (F *_{M_2} mu)(x, k) = int F(x - k h^{-1} y, k h^{-1}) dmu_h(y) dh.

    On the angle grid k = theta_i, h = theta_j, k h^{-1} = theta_{i-j}:
        (F * mu)(., theta_i) = (1/M) sum_j F(., theta_{i-j}) * (R_{theta_{i-j}} mu_j).
    """
    if F.n_angles != plan.n_angles:
        raise PreconditionError(f"angle grids differ: F has {F.n_angles}, plan has {plan.n_angles}")
    check_grid(F, plan, periodic)
    n, m_ang = F.n, F.n_angles
    fhat = np.fft.fft2(F.samples, axes=(0, 1))
    out = np.empty_like(fhat)
    for i in range(m_ang):
        acc = np.zeros((n, n), dtype=complex)
        for b in range(m_ang):
            j = (i - b) % m_ang
            acc += fhat[:, :, b] * plan.rotated_table(b, j, n, F.extent)
        out[:, :, i] = np.fft.ifft2(acc) / m_ang
    return MotionGridFunction(out, F.extent)


def motion_convolve_functions(F: MotionGridFunction, G: MotionGridFunction) -> MotionGridFunction:
    """(F *_{M_2} G)(x, theta_i) = (1/M) sum_j [F(., theta_{i-j}) * G(R_{-theta_{i-j}} ., theta_j)](x).

    The rotated copies of G are taken through its Riemann-sum Fourier transform
    at rotated frequencies, so G should be band-limited on the grid.
    """
    if F.samples.shape != G.samples.shape or F.extent != G.extent:
        raise PreconditionError("F and G must live on the same grid")
    n, m_ang, ext = F.n, F.n_angles, F.extent
    h = F.h
    k = np.fft.fftfreq(n, d=h)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    xi = np.stack([k1.ravel(), k2.ravel()], axis=-1)
    # FFT of samples relates to the Riemann-sum FT by a phase from x_0 = -extent
    phase = np.exp(-2j * math.pi * (k1 + k2) * (-ext)) * h * h
    fhat = np.fft.fft2(F.samples, axes=(0, 1)) * phase[:, :, None]
    angles = F.angles
    gstack = np.ascontiguousarray(np.moveaxis(G.samples, -1, 0))
    ghat_rot = []
    for b in range(m_ang):
        c, s = math.cos(angles[b]), math.sin(angles[b])
        # FT of G(R_{-a} .) at xi is Ghat(R_{-a} xi)
        rot = xi @ np.array([[c, s], [-s, c]]).T
        ghat_rot.append(_nufft.grid_ft_at(gstack, ext, rot).reshape(m_ang, n, n))
    out = np.empty((n, n, m_ang), dtype=complex)
    for i in range(m_ang):
        acc = np.zeros((n, n), dtype=complex)
        for b in range(m_ang):
            acc += fhat[:, :, b] * ghat_rot[b][(i - b) % m_ang]
        out[:, :, i] = np.fft.ifft2(acc / phase) / m_ang
    return MotionGridFunction(out, ext)


# ------------------------------------------------------------ L^p experiments


def _tf_power_sum(f: PlaneGridFunction | MotionGridFunction, plan: OperatorPlan, p: float, method: str, periodic: bool, cache: bool):
    """sum |Tf|^p * cell volume, streamed over angles when possible."""
    if isinstance(f, PlaneGridFunction) and plan.kind == "rotated":
        check_grid(f, plan, periodic)
        total = 0.0
        if method == "spectral":
            fhat = np.fft.fft2(f.samples)
            for a in range(plan.n_angles):
                total += float(np.sum(np.abs(spectral_slab(fhat, plan, a, f.extent, cache)) ** p))
        else:
            for a in range(plan.n_angles):
                total += float(np.sum(np.abs(direct_slab(f.samples, plan.measures[a], f.h)) ** p))
        return total * f.h**2 / plan.n_angles
    F = f if isinstance(f, MotionGridFunction) else MotionGridFunction.from_plane(f, plan.n_angles)
    tf = motion_convolve(F, plan, periodic)
    return lp_norm(tf, p) ** p


def improving_ratio(
    f: PlaneGridFunction | MotionGridFunction,
    plan: OperatorPlan,
    n: int = 2,
    method: str = "spectral",
    periodic: bool = False,
    cache: bool = True,
) -> float:
    """||Tf||_{L^{n+1}(M_n)} / ||f||_{L^{(n+1)/n}(M_n)}.

    A plane function is embedded as F(x, k) = f(x); for a rotated plan
    F * mu = f * gamma_k slab by slab, otherwise the group convolution is used.
    """
    if n != 2:
        raise ValueError("only n = 2 is implemented")
    p_out, p_in = n + 1.0, (n + 1.0) / n
    fn = lp_norm(f, p_in)
    if fn == 0:
        raise PreconditionError("improving_ratio of the zero function is undefined")
    if plan.is_zero:
        return 0.0
    return _tf_power_sum(f, plan, p_out, method, periodic, cache) ** (1.0 / p_out) / fn


def loglog_slope(xs, ys) -> float:
    x, y = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(x, y, 1)[0])


def _fft_size(n: int) -> int:
    """Smallest even 2^a 3^b 5^c >= n."""
    best = None
    for a in range(1, 20):
        for b in range(0, 13):
            for c in range(0, 9):
                v = 2**a * 3**b * 5**c
                if v >= n and (best is None or v < best):
                    best = v
    return best


def sharpness_grid(plan: OperatorPlan, deltas) -> tuple[int, float]:
    """Grid (N, extent) with h = min(delta)/4 and room for the largest ball."""
    h = min(deltas) / 4
    extent = max(deltas) + max(plan.diameter, plan.reach) + 3 * h
    n = _fft_size(math.ceil(2 * extent / h))
    return n, n * h / 2


@dataclass(frozen=True)
class SharpnessResult:
    rows: tuple[tuple[float, float, float, float], ...]  # delta, ||f||_{3/2}, ||Tf||_3, ratio
    exponent_f: float
    exponent_tf: float
    ratio_variation: float
    n: int
    extent: float


def sharpness_scan(plan: OperatorPlan, deltas, n: int | None = None, extent: float | None = None, method: str = "spectral", supersample: int = 1) -> SharpnessResult:
    """Small-ball scan f_delta = indicator of B(delta) with log-log exponents."""
    from .inputs import ball

    deltas = sorted(float(d) for d in deltas)
    if n is None or extent is None:
        n, extent = sharpness_grid(plan, deltas)
    h = 2 * extent / n
    small = [d for d in deltas if d < 4 * h]
    if small:
        raise UnderResolvedError(f"balls of radius {small} are below 4h = {4 * h:.4g}")
    rows = []
    for d in deltas:
        f = ball(n, extent, d, supersample=supersample)
        nf = lp_norm(f, 1.5)
        ntf = _tf_power_sum(f, plan, 3.0, method, False, True) ** (1 / 3)
        rows.append((d, nf, ntf, ntf / nf))
    plan.clear_cache()
    ratios = [r[3] for r in rows]
    return SharpnessResult(
        tuple(rows),
        loglog_slope(deltas, [r[1] for r in rows]),
        loglog_slope(deltas, [r[2] for r in rows]),
        max(ratios) / min(ratios),
        n,
        extent,
    )
