"""Scenario runner: ``motionconv <subcommand> --config <path> [--out <dir>] [--threads <k>]``.

Every subcommand validates its inputs, computes all rows, and only then writes
``<out>/<scenario>_<subcommand>.csv`` atomically.  The CSV has a header row,
data rows, then '#'-prefixed summary and provenance lines.  Exit status: 0 on
success, 2 on a configuration error, 3 on a numerical precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .core import PlaneGridFunction, PreconditionError, lp_norm
from .fourier import check_resolved, decay_table, fit_decay_exponent, pointwise_decay
from .geometry import RotatedFamily, build_measure, curve_from_descriptor, default_cutoff, family_from_descriptor
from .inputs import ball, bandlimited, function_dictionary, gaussian
from .motiongroup import (
    OMEGA_2,
    band_limited_motion_function,
    geometric_grid,
    max_band,
    opnorm_scan,
    plancherel_lhs,
    spectral_leakage,
)
from .radon import (
    apply_direct,
    apply_spectral,
    direct_slab,
    family_plan,
    improving_ratio,
    rotated_plan,
    sharpness_scan,
    spectral_slab,
    zero_plan,
)

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION = 0, 2, 3


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    plot: tuple[str, str] | None = None  # (x column, y column) for a log-log plot
    extra: dict = field(default_factory=dict)  # file name -> bytes


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    for k, v in table.summary.items():
        buf.write(f"# summary {k}={_fmt(v)}\n")
    for k, v in table.provenance.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    return buf.getvalue()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _svg(table: Table, title: str) -> bytes:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xcol, ycol = table.plot
    xi, yi = table.columns.index(xcol), table.columns.index(ycol)
    xs = np.array([float(r[xi]) for r in table.rows])
    ys = np.array([float(r[yi]) for r in table.rows])
    keep = (xs > 0) & (ys > 0)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(xs[keep], ys[keep], "o-")
    ax.set_xlabel(xcol)
    ax.set_ylabel(ycol)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


# ----------------------------------------------------------- scenario parts


def _require(cfg: ScenarioConfig, *keys):
    missing = [k for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"{', '.join(missing)}: required for this subcommand")


def _curve(cfg: ScenarioConfig):
    if cfg.curve is None:
        raise ConfigError("curve: required for this subcommand")
    try:
        return curve_from_descriptor(cfg.curve)
    except PreconditionError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"curve: {exc}") from None


def _family(cfg: ScenarioConfig):
    try:
        if cfg.family is not None:
            return family_from_descriptor(cfg.family)
        if cfg.curve is not None:
            curve = curve_from_descriptor(cfg.curve)
            return RotatedFamily(curve, default_cutoff(curve))
    except PreconditionError:
        raise
    except (ValueError, TypeError, SyntaxError, NameError, OSError) as exc:
        raise ConfigError(f"family: {exc}") from None
    raise ConfigError("family: required for this subcommand (or give curve for a rotated family)")


def _plan(cfg: ScenarioConfig, m: int):
    if cfg.family is not None:
        return family_plan(_family(cfg), m, cfg.angles)
    return rotated_plan(_curve(cfg), None, m, cfg.angles)


def _input(cfg: ScenarioConfig) -> tuple[PlaneGridFunction, bool]:
    """Input field and whether it is meant as a periodic (torus) function."""
    n, ext = cfg.n, cfg.extent
    if cfg.input == "zero":
        return PlaneGridFunction(np.zeros((n, n)), ext), True
    if cfg.input == "bandlimited":
        kmax = cfg.kmax if cfg.kmax is not None else n / (128 * ext)
        return bandlimited(n, ext, cfg.seed, kmax), True
    width = cfg.width if cfg.width is not None else 0.25
    if cfg.input == "gaussian":
        return gaussian(n, ext, width), False
    if cfg.input == "ball":
        return ball(n, ext, width), False
    kmax = cfg.kmax if cfg.kmax is not None else 3.0
    return bandlimited(n, ext, cfg.seed, kmax, window=width), False


def _base_provenance(cfg: ScenarioConfig, command: str) -> dict:
    return {"command": command, "scenario": cfg.scenario, "config_sha256": cfg.digest, "seed": cfg.seed, "version": __version__}


def run_decay_scan(cfg: ScenarioConfig, threads: int) -> Table:
    curve = _curve(cfg)
    radii = cfg.radii or tuple(float(2**k) for k in range(2, 8))
    m = cfg.nodes or max(256, math.ceil(8 * max(radii) * curve.diameter))
    mu = build_measure(curve, default_cutoff(curve), m)
    for r in radii:
        if r > 0:
            check_resolved(mu, r)
    rows = decay_table(mu, radii, cfg.decay_angles)
    cols = ["R", "A", "R*A"]
    if cfg.direction is not None:
        cols.append("pointwise")
        rows = [row + (pointwise_decay(mu, row[0], cfg.direction),) for row in rows]
    t = Table(cols, rows, plot=("R", "A"))
    fit = fit_decay_exponent([(r[0], r[1]) for r in rows])
    ra = np.array([r[2] for r in rows if r[0] > 0])
    t.summary = {"slope": fit.slope, "stderr": fit.stderr, "sup_over_median_RA": float(ra.max() / np.median(ra))}
    if cfg.direction is not None:
        t.summary["pointwise_slope"] = fit_decay_exponent([(r[0], r[3]) for r in rows]).slope
    t.provenance = _base_provenance(cfg, "decay-scan") | {"curve": curve.descriptor, "nodes": mu.size, "angles": cfg.decay_angles or "auto"}
    return t


def run_radon_apply(cfg: ScenarioConfig, threads: int) -> Table:
    _require(cfg, "n", "extent", "angles")
    f, periodic = _input(cfg)
    m = cfg.nodes or 1024
    plan = _plan(cfg, m)
    d = apply_direct(f, plan, periodic=periodic, workers=threads)
    s = apply_spectral(f, plan, periodic=periodic, workers=threads)
    rows = []
    for a, theta in enumerate(plan.angles):
        nd = float(np.linalg.norm(d.samples[:, :, a])) * f.h
        ns = float(np.linalg.norm(s.samples[:, :, a])) * f.h
        diff = float(np.linalg.norm(d.samples[:, :, a] - s.samples[:, :, a])) * f.h
        rows.append((a, float(theta), nd, ns, diff / nd if nd > 0 else 0.0))
    t = Table(["angle_index", "theta", "norm_direct", "norm_spectral", "rel_diff"], rows)
    total = lp_norm(d, 2)
    t.summary = {
        "rel_diff_total": lp_norm(type(d)(d.samples - s.samples, d.extent), 2) / total if total > 0 else 0.0,
        "max_abs_spectral": float(np.abs(s.samples).max()),
    }
    t.provenance = _base_provenance(cfg, "radon-apply") | {
        "plan": plan.label, "nodes": plan.nodes, "n": cfg.n, "extent": cfg.extent, "angles": cfg.angles, "input": cfg.input,
    }
    buf = io.BytesIO()
    np.save(buf, s.samples)
    t.extra["field.npy"] = buf.getvalue()
    return t


def run_improving_scan(cfg: ScenarioConfig, threads: int) -> Table:
    _require(cfg, "n", "extent", "angles")
    plan = _plan(cfg, cfg.nodes or 1024)
    rows = []
    for name, f in function_dictionary(cfg.n, cfg.extent, cfg.seed):
        nin = lp_norm(f, 1.5)
        r = improving_ratio(f, plan, method=cfg.method)
        rows.append((name, nin, r * nin, r))
    ratios = [r[3] for r in rows]
    t = Table(["function", "norm_in_3/2", "norm_out_3", "ratio"], rows)
    t.summary = {"max_over_min": max(ratios) / min(ratios), "max": max(ratios), "min": min(ratios)}
    t.provenance = _base_provenance(cfg, "improving-scan") | {"plan": plan.label, "nodes": plan.nodes, "n": cfg.n, "extent": cfg.extent}
    return t


def run_sharpness(cfg: ScenarioConfig, threads: int) -> Table:
    _require(cfg, "angles")
    deltas = cfg.deltas or (1 / 64, 1 / 32, 1 / 16, 1 / 8)
    plan = _plan(cfg, cfg.nodes or 1024)
    res = sharpness_scan(plan, deltas, cfg.n, cfg.extent, method=cfg.method)
    t = Table(["delta", "norm_f_3/2", "norm_Tf_3", "ratio"], list(res.rows), plot=("delta", "norm_Tf_3"))
    t.summary = {"exponent_f": res.exponent_f, "exponent_Tf": res.exponent_tf, "ratio_variation": res.ratio_variation}
    t.provenance = _base_provenance(cfg, "sharpness") | {"plan": plan.label, "nodes": plan.nodes, "n": res.n, "extent": res.extent}
    return t


def run_plancherel(cfg: ScenarioConfig, threads: int) -> Table:
    n = cfg.n or 64
    ext = cfg.extent or 2.0
    m_ang = cfg.angles or 32
    lams = np.asarray(cfg.lams or geometric_grid(0.25, n / (4 * ext), 64))
    omega = cfg.omega or OMEGA_2
    funcs = [band_limited_motion_function(n, ext, m_ang, cfg.seed + k) for k in range(cfg.count)]
    band = max_band(funcs[0])
    if lams.max() > band * (1 + 1e-12):
        raise PreconditionError(f"lambda grid reaches {lams.max():g} beyond the resolved band {band:g}")
    rows = []
    for k, f in enumerate(funcs):
        leak = spectral_leakage(f, lams[0], lams[-1])
        if leak > 1e-2:
            raise PreconditionError(f"seed {cfg.seed + k}: {leak:.2%} of the energy lies outside the lambda grid")
        lhs = plancherel_lhs(f, lams)
        rhs = omega * lp_norm(f, 2) ** 2
        rows.append((cfg.seed + k, lhs, rhs, abs(lhs - rhs) / rhs, leak))
    t = Table(["seed", "lhs", "rhs", "rel_err", "leakage"], rows)
    t.summary = {"omega": omega, "max_rel_err": max(r[3] for r in rows), "median_lhs_over_norm2": float(np.median([r[1] / r[2] * omega for r in rows]))}
    t.provenance = _base_provenance(cfg, "plancherel") | {"n": n, "extent": ext, "angles": m_ang, "lambda_points": len(lams)}
    return t


def run_opnorm_scan(cfg: ScenarioConfig, threads: int) -> Table:
    fam = _family(cfg)
    m_ang = cfg.angles or 128
    lams = cfg.lams or tuple(float(2**k) for k in range(0, 7))
    res = opnorm_scan(fam, cfg.s, lams, m_ang, z=cfg.z, singular=cfg.singular)
    t = Table(["lambda", "opnorm"], list(res.rows), plot=("lambda", "opnorm"))
    t.summary = {"z": res.z, "sup_over_median": res.sup_over_median, "slope": res.slope()}
    t.provenance = _base_provenance(cfg, "opnorm-scan") | {"family": fam.descriptor, "angles": m_ang, "singular": cfg.singular}
    return t


def _time_per_angle(fn, plan, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a in range(plan.n_angles):
            fn(a)
        best = min(best, time.perf_counter() - t0)
    return best / plan.n_angles


def run_bench(cfg: ScenarioConfig, threads: int) -> Table:
    m_ang = cfg.angles or 64
    m = cfg.nodes or 1024
    sizes = [int(v) for v in (cfg.sizes or (128, 256))]
    zero = cfg.curve == "zero"
    plan = zero_plan(m_ang, m) if zero else rotated_plan(_curve(cfg), None, m, m_ang)
    rows = []
    for n in sizes:
        ext = cfg.extent or 4.0
        f = bandlimited(n, ext, cfg.seed, max(n / (128 * ext), 1 / ext))
        fhat = np.fft.fft2(f.samples)
        # tables are built once outside the timed region, as a plan would reuse them
        for a in range(m_ang):
            plan.spectral_table(a, n, ext)
        td = _time_per_angle(lambda a: direct_slab(f.samples, plan.measures[a], f.h), plan, cfg.repeats)
        ts = _time_per_angle(lambda a: spectral_slab(fhat, plan, a, ext), plan, cfg.repeats)
        speed = "n/a" if zero else td / ts
        rows.append((n, td, ts, speed))
        plan.clear_cache()
    t = Table(["n", "direct_s_per_angle", "spectral_s_per_angle", "speedup"], rows)
    t.provenance = _base_provenance(cfg, "bench") | {"plan": plan.label, "nodes": plan.nodes, "angles": m_ang}
    return t


COMMANDS = {
    "decay-scan": run_decay_scan,
    "radon-apply": run_radon_apply,
    "improving-scan": run_improving_scan,
    "sharpness": run_sharpness,
    "plancherel": run_plancherel,
    "opnorm-scan": run_opnorm_scan,
    "bench": run_bench,
}


def run(command: str, cfg: ScenarioConfig, out: str | None = None, threads: int = 1) -> Path:
    """Run one scenario and write its artifacts; returns the CSV path."""
    table = COMMANDS[command](cfg, threads)
    outdir = Path(out or cfg.out)
    stem = f"{cfg.scenario}_{command}"
    files = {f"{stem}.csv": render_csv(table).encode()}
    for name, data in table.extra.items():
        files[f"{stem}_{name}"] = data
    if cfg.plot and table.plot is not None and table.rows:
        files[f"{stem}.svg"] = _svg(table, f"{cfg.scenario}: {command}")
    for name, data in files.items():
        _atomic_write(outdir / name, data)
    return outdir / f"{stem}.csv"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="motionconv", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="scenario file of key = value lines")
    parser.add_argument("--out", help="output directory (overrides the config's 'out')")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for per-angle work")
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        cfg = load_config(args.config)
        path = run(args.command, cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, ValueError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
