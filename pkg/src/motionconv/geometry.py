"""Convex curves, cutoffs, weighted point measures and surface families in M_2.

A ``DiscreteMeasure`` is the quadrature image of chi * (arc length) on a
convex curve: points p_j with weights w_j = chi(t_j) |Gamma'(t_j)| dt
(composite midpoint rule, uniform in the parameter).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .core import TWO_PI, PreconditionError, rotation

CHECK_NODES = 2048
_TURN_TOL = 1e-9


class NonConvexError(PreconditionError):
    def __init__(self, report: "ConvexityReport"):
        self.report = report
        where = ", ".join(f"{t:.6g}" for t in report.violations[:5])
        super().__init__(f"curve '{report.name}' is not convex; violations near t = {where}")


@dataclass(frozen=True)
class ConvexityReport:
    name: str
    ok: bool
    violations: tuple[float, ...]
    total_turning: float


@dataclass(frozen=True)
class ConvexCurve:
    """Parametrized curve t -> (x1(t), x2(t)) on [t0, t1].

    ``point`` and ``deriv`` are vectorized and return arrays of shape (..., 2).
    Closed curves are traversed counter-clockwise; graph-type curves are
    (t, g(t)) with g convex.  Construction runs the convexity check unless
    ``check=False``.
    """

    name: str
    point: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    t0: float
    t1: float
    closed: bool
    params: dict = field(default_factory=dict)
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("empty parameter interval")
        if self.check:
            report = check_convex(self)
            if not report.ok:
                raise NonConvexError(report)

    def nodes(self, m: int) -> np.ndarray:
        return self.t0 + (np.arange(m) + 0.5) * (self.t1 - self.t0) / m

    @property
    def descriptor(self) -> str:
        args = " ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name} {args}".strip()

    @cached_property
    def diameter(self) -> float:
        return point_set_diameter(self.point(self.nodes(CHECK_NODES)))


def check_convex(curve: ConvexCurve, nodes: int = CHECK_NODES) -> ConvexityReport:
    """Tangent-angle monotonicity test at midpoint nodes.

    Closed curves must additionally turn by exactly 2*pi; graph-type curves
    must have non-negative second differences of the second coordinate.
    One-sided differences mean convex corners (angle jumps) pass.
    """
    t = curve.nodes(nodes)
    d = curve.deriv(t)
    ang = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    steps = np.diff(ang)
    bad = list(t[1:][steps < -_TURN_TOL])
    turning = float(ang[-1] - ang[0])
    if curve.closed:
        last = math.remainder(ang[0] - ang[-1], TWO_PI)
        if last < -_TURN_TOL:
            bad.append(float(t[0]))
        turning += last
        if abs(turning - TWO_PI) > 1e-6:
            bad.append(float(t[-1]))
    else:
        g = curve.point(t)[:, 1]
        second = g[2:] - 2 * g[1:-1] + g[:-2]
        scale = max(1.0, float(np.abs(g).max()))
        bad.extend(t[1:-1][second < -1e-12 * scale])
    bad = tuple(sorted(set(float(b) for b in bad)))
    return ConvexityReport(curve.name, not bad, bad, turning)


def point_set_diameter(pts: np.ndarray) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        pass  # degenerate (collinear) sets: fall back to all points
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


# ---------------------------------------------------------------- built-ins


def circle(r: float = 1.0) -> ConvexCurve:
    def point(t):
        return r * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def deriv(t):
        return r * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    return ConvexCurve("circle", point, deriv, 0.0, TWO_PI, True, {"r": r})


def graph_curve(g, dg, a: float, b: float, name: str = "graph", check: bool = True) -> ConvexCurve:
    """Graph-type curve t -> (t, g(t)) on [a, b]."""

    def point(t):
        t = np.asarray(t, dtype=float)
        return np.stack([t, g(t)], axis=-1)

    def deriv(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.ones_like(t), dg(t)], axis=-1)

    return ConvexCurve(name, point, deriv, a, b, False, {}, check)


def parabola() -> ConvexCurve:
    """The piece Gamma(t) = (t, t^2 + 1), t in [-1, 1]."""
    c = graph_curve(lambda t: t**2 + 1.0, lambda t: 2.0 * t, -1.0, 1.0, "parabola")
    return c


def superellipse(p: float = 4.0) -> ConvexCurve:
    """|x1|^p + |x2|^p = 1, parametrized by the polar angle."""
    if p < 1:
        raise ValueError("superellipse needs p >= 1 to be convex")

    def radius(t):
        c, s = np.abs(np.cos(t)), np.abs(np.sin(t))
        return (c**p + s**p) ** (-1.0 / p)

    def dradius(t):
        c, s = np.cos(t), np.sin(t)
        ac, as_ = np.abs(c), np.abs(s)
        q = ac**p + as_**p
        # d/dt q = p(|s|^{p-1} sgn(s) c - |c|^{p-1} sgn(c) s)
        dq = p * (as_ ** (p - 1) * np.sign(s) * c - ac ** (p - 1) * np.sign(c) * s)
        return -(1.0 / p) * q ** (-1.0 / p - 1.0) * dq

    def point(t):
        r = radius(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def deriv(t):
        r, dr = radius(t), dradius(t)
        c, s = np.cos(t), np.sin(t)
        return np.stack([dr * c - r * s, dr * s + r * c], axis=-1)

    return ConvexCurve("superellipse", point, deriv, 0.0, TWO_PI, True, {"p": p})


def stadium(a: float = 1.0, r: float = 0.5) -> ConvexCurve:
    """Two flat edges of length 2a joined by semicircular caps of radius r.

    Arc-length parametrization starting at (-a, -r) along the bottom edge.
    """
    length = 4 * a + TWO_PI * r
    s1, s2, s3 = 2 * a, 2 * a + math.pi * r, 4 * a + math.pi * r

    def _pieces(t):
        t = np.mod(np.asarray(t, dtype=float), length)
        phi_r = (t - s1) / r - math.pi / 2  # right cap angle
        phi_l = (t - s3) / r + math.pi / 2  # left cap angle
        return t, phi_r, phi_l

    def point(t):
        t, phi_r, phi_l = _pieces(t)
        x = np.select(
            [t < s1, t < s2, t < s3],
            [-a + t, a + r * np.cos(phi_r), a - (t - s2)],
            -a + r * np.cos(phi_l),
        )
        y = np.select(
            [t < s1, t < s2, t < s3],
            [np.full_like(t, -r), r * np.sin(phi_r), np.full_like(t, r)],
            r * np.sin(phi_l),
        )
        return np.stack([x, y], axis=-1)

    def deriv(t):
        t, phi_r, phi_l = _pieces(t)
        one = np.ones_like(t)
        dx = np.select([t < s1, t < s2, t < s3], [one, -np.sin(phi_r), -one], -np.sin(phi_l))
        dy = np.select([t < s1, t < s2, t < s3], [0 * t, np.cos(phi_r), 0 * t], np.cos(phi_l))
        return np.stack([dx, dy], axis=-1)

    return ConvexCurve("stadium", point, deriv, 0.0, length, True, {"a": a, "r": r})


BUILTIN_CURVES = {
    "circle": circle,
    "parabola": parabola,
    "superellipse": superellipse,
    "stadium": stadium,
}


def curve_from_descriptor(desc: str) -> ConvexCurve:
    """Parse ``circle r=1.0``, ``parabola``, ``superellipse p=4``, ``stadium a=1 r=0.5``."""
    parts = desc.split()
    if not parts or parts[0] not in BUILTIN_CURVES:
        raise ValueError(f"unknown curve descriptor {desc!r}; expected one of {sorted(BUILTIN_CURVES)}")
    kwargs = {}
    for tok in parts[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed curve argument {tok!r} in {desc!r}")
        kwargs[key] = float(val)
    try:
        return BUILTIN_CURVES[parts[0]](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad arguments for curve {parts[0]!r}: {exc}") from None


# ------------------------------------------------------------------ cutoffs


@dataclass(frozen=True)
class CutoffWindow:
    """C^1 window chi(t) in [0, 1]; ``support`` is None for chi == const."""

    kind: str
    support: tuple[float, float] | None = None
    level: float = 1.0

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.support is None:
            return np.full_like(t, self.level)
        lo, hi = self.support
        c, hw = 0.5 * (lo + hi), 0.5 * (hi - lo)
        u = (t - c) / hw
        return np.where(np.abs(u) < 1, (1 - u**2) ** 2, 0.0)

    def deriv(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.support is None:
            return np.zeros_like(t)
        lo, hi = self.support
        c, hw = 0.5 * (lo + hi), 0.5 * (hi - lo)
        u = (t - c) / hw
        return np.where(np.abs(u) < 1, -4 * u * (1 - u**2) / hw, 0.0)

    @classmethod
    def ones(cls) -> "CutoffWindow":
        return cls("ones")

    @classmethod
    def zero(cls) -> "CutoffWindow":
        return cls("zero", None, 0.0)

    @classmethod
    def bump(cls, lo: float, hi: float) -> "CutoffWindow":
        if not hi > lo:
            raise ValueError("bump support must be a non-empty interval")
        return cls("bump", (float(lo), float(hi)))


def default_cutoff(curve: ConvexCurve, shrink: float = 0.95) -> CutoffWindow:
    """chi == 1 on closed curves; polynomial bump strictly inside the interval otherwise."""
    if curve.closed:
        return CutoffWindow.ones()
    c, hw = 0.5 * (curve.t0 + curve.t1), 0.5 * (curve.t1 - curve.t0) * shrink
    return CutoffWindow.bump(c - hw, c + hw)


# ----------------------------------------------------------------- measures


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud sum_j w_j delta_{p_j} in R^n."""

    points: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        if p.ndim != 2 or w.shape != (p.shape[0],):
            raise ValueError("points must be (m, n) and weights (m,)")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def effective(self) -> "DiscreteMeasure":
        """The same measure with zero-weight nodes dropped."""
        keep = self.weights > 0
        return DiscreteMeasure(self.points[keep], self.weights[keep], self.label)

    @cached_property
    def diameter(self) -> float:
        return point_set_diameter(self.points[self.weights > 0])

    @property
    def max_spacing(self) -> float:
        """Largest gap between consecutive nodes (curve order)."""
        if self.size < 2:
            return 0.0
        return float(np.sqrt((np.diff(self.points, axis=0) ** 2).sum(-1)).max())

    def translate(self, a) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points + np.asarray(a, dtype=float), self.weights, self.label)

    def scale_weights(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights * c, self.label)


def build_measure(curve: ConvexCurve, cutoff: CutoffWindow | None = None, m: int = 1024) -> DiscreteMeasure:
    if m < 16:
        raise PreconditionError(f"node count m = {m} is below the minimum 16")
    report = check_convex(curve)
    if not report.ok:
        raise NonConvexError(report)
    cutoff = default_cutoff(curve) if cutoff is None else cutoff
    t = curve.nodes(m)
    dt = (curve.t1 - curve.t0) / m
    speed = np.sqrt((curve.deriv(t) ** 2).sum(-1))
    w = cutoff(t) * speed * dt
    return DiscreteMeasure(curve.point(t), w, f"{curve.descriptor}|m={m}")


def rotate_measure(mu: DiscreteMeasure, theta: float) -> DiscreteMeasure:
    if mu.dim != 2:
        raise ValueError("rotate_measure supports planar measures only")
    if theta == 0:
        return mu
    return DiscreteMeasure(mu.points @ rotation(theta).T, mu.weights, mu.label)


# ----------------------------------------------------------------- families


@dataclass(frozen=True)
class RotatedFamily:
    """Y = union over k of (k Gamma, k): the slices are the rotated curve measures."""

    curve: ConvexCurve
    cutoff: CutoffWindow | None = None

    @property
    def descriptor(self) -> str:
        return f"rotated {self.curve.descriptor}"

    def slice(self, theta: float, m: int) -> DiscreteMeasure:
        return rotate_measure(build_measure(self.curve, self.cutoff, m), theta)

    @property
    def diameter(self) -> float:
        return self.curve.diameter


@dataclass(frozen=True)
class GraphFamily:
    """Y given as the graph x1 = phi(x', theta) with weight nu(x', theta), x' in [a, b].

    ``angles`` is None for the full circle, else a closed interval (lo, hi).
    """

    phi: Callable
    nu: Callable
    a: float
    b: float
    angles: tuple[float, float] | None = None
    name: str = "graph"
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("empty x' interval")
        if self.check:
            xs = self.a + (np.arange(CHECK_NODES) + 0.5) * (self.b - self.a) / CHECK_NODES
            for theta in self._probe_angles():
                g = np.asarray(self.phi(xs, theta), dtype=float)
                second = g[2:] - 2 * g[1:-1] + g[:-2]
                if np.any(second < -1e-12 * max(1.0, float(np.abs(g).max()))):
                    bad = tuple(xs[1:-1][second < 0][:5])
                    raise NonConvexError(ConvexityReport(f"{self.name}@theta={theta:.4g}", False, bad, math.nan))
            theta0 = 0.0 if self.angles is None else self.angles[0]
            ends = np.abs(np.asarray(self.nu(np.array([self.a, self.b]), theta0), dtype=float))
            scale = float(np.abs(np.asarray(self.nu(xs, theta0), dtype=float)).max())
            if np.any(ends > 1e-12 * max(scale, 1e-300)):
                # compact support in x' is required of nu
                raise PreconditionError(f"nu of family '{self.name}' does not vanish at the ends of [a, b]")

    def _probe_angles(self):
        lo, hi = (0.0, TWO_PI) if self.angles is None else self.angles
        return np.linspace(lo, hi, 16, endpoint=self.angles is not None)

    @property
    def descriptor(self) -> str:
        return f"graph {self.name}"

    def contains_angle(self, theta: float) -> bool:
        if self.angles is None:
            return True
        lo, hi = self.angles
        return lo - 1e-12 <= theta <= hi + 1e-12

    def slice(self, theta: float, m: int) -> DiscreteMeasure:
        if not self.contains_angle(theta):
            raise PreconditionError(f"theta = {theta} is outside the family's angle domain {self.angles}")
        if m < 16:
            raise PreconditionError(f"node count m = {m} is below the minimum 16")
        dx = (self.b - self.a) / m
        xs = self.a + (np.arange(m) + 0.5) * dx
        x1 = np.asarray(self.phi(xs, theta), dtype=float) * np.ones_like(xs)
        w = np.asarray(self.nu(xs, theta), dtype=float) * np.ones_like(xs) * dx
        return DiscreteMeasure(np.stack([x1, xs], axis=-1), w, f"{self.descriptor}|theta={theta:.6g}|m={m}")

    @cached_property
    def diameter(self) -> float:
        pts = np.concatenate([self.slice(t, 256).points for t in self._probe_angles() if self.contains_angle(t)])
        return point_set_diameter(pts)

    @classmethod
    def with_surface_weight(cls, phi, dphi, a, b, cutoff: CutoffWindow | None = None, **kw) -> "GraphFamily":
        """nu = chi(x') sqrt(1 + |d phi/dx'|^2): the slices are chi * arc length."""
        chi = CutoffWindow.bump(a, b) if cutoff is None else cutoff

        def nu(x, theta):
            return chi(x) * np.sqrt(1.0 + np.asarray(dphi(x, theta)) ** 2)

        return cls(phi, nu, a, b, **kw)


SurfaceFamily = RotatedFamily | GraphFamily


def slice_family(family: SurfaceFamily, theta: float, m: int) -> DiscreteMeasure:
    """The Euclidean measure mu_k of the family at rotation angle theta."""
    return family.slice(theta, m)


# ------------------------------------------------------- family descriptors

_ALLOWED = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh", "arctan", "pi", "where")
}


def _expression(src: str) -> Callable:
    code = compile(src, "<family expression>", "eval")
    unknown = set(code.co_names) - set(_ALLOWED) - {"x", "theta"}
    if unknown:
        raise ValueError(f"expression {src!r} uses unknown names {sorted(unknown)}")

    def fn(x, theta):
        return eval(code, {"__builtins__": {}}, {**_ALLOWED, "x": x, "theta": theta})

    return fn


def _numeric_derivative(fn, step=1e-6):
    def d(x, theta):
        x = np.asarray(x, dtype=float)
        return (np.asarray(fn(x + step, theta)) - np.asarray(fn(x - step, theta))) / (2 * step)

    return d


def table_family(path, name: str | None = None) -> GraphFamily:
    """Family from a sampled table with columns theta, x, phi[, nu] on a regular grid.

    phi is interpolated with bicubic splines (theta periodic); without a nu
    column the surface weight with a bump cutoff over the x range is used.
    """
    from scipy.interpolate import RectBivariateSpline

    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    thetas, xs = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(thetas) * len(xs) != len(data):
        raise ValueError(f"{path}: table is not a full theta x x grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    data = data[order]
    cols = [data[:, c].reshape(len(thetas), len(xs)) for c in range(2, data.shape[1])]
    # periodic extension in theta: one period on either side
    t_ext = np.concatenate([thetas - TWO_PI, thetas, thetas + TWO_PI])
    splines = [RectBivariateSpline(t_ext, xs, np.concatenate([c, c, c]), kx=3, ky=3) for c in cols]
    a, b = float(xs[0]), float(xs[-1])

    def wrap(theta):
        return np.mod(theta, TWO_PI)

    def phi(x, theta):
        return splines[0].ev(np.full_like(np.asarray(x, float), wrap(theta)), x)

    label = name or str(path)
    if len(splines) > 1:

        def nu(x, theta):
            return splines[1].ev(np.full_like(np.asarray(x, float), wrap(theta)), x)

        return GraphFamily(phi, nu, a, b, name=label)

    def dphi(x, theta):
        return splines[0].ev(np.full_like(np.asarray(x, float), wrap(theta)), x, dx=0, dy=1)

    return GraphFamily.with_surface_weight(phi, dphi, a, b, name=label)


def family_from_descriptor(desc: str) -> SurfaceFamily:
    """Parse ``rotated <curve>``, ``graph phi=<expr> [nu=<expr>] [a=..] [b=..]`` or ``graph table=<csv>``.

    Expressions are numpy expressions in ``x`` (the x' coordinate) and ``theta``
    and must not contain spaces.
    """
    head, _, rest = desc.strip().partition(" ")
    if head == "rotated":
        curve = curve_from_descriptor(rest)
        return RotatedFamily(curve, default_cutoff(curve))
    if head != "graph":
        raise ValueError(f"unknown family descriptor {desc!r}")
    kv = dict(tok.split("=", 1) for tok in re.findall(r"\S+=\S+", rest))
    unknown = set(kv) - {"phi", "nu", "a", "b", "table"}
    if unknown:
        raise ValueError(f"unknown family keys {sorted(unknown)} in {desc!r}")
    if "table" in kv:
        return table_family(kv["table"])
    if "phi" not in kv:
        raise ValueError(f"graph family needs phi=<expr> or table=<path>: {desc!r}")
    a, b = float(kv.get("a", -1.0)), float(kv.get("b", 1.0))
    phi = _expression(kv["phi"])
    if "nu" in kv:
        return GraphFamily(phi, _expression(kv["nu"]), a, b, name=kv["phi"])
    return GraphFamily.with_surface_weight(phi, _numeric_derivative(phi), a, b, name=kv["phi"])
