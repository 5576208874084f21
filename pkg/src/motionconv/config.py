"""Scenario configuration: one ``key = value`` per line, '#' comments, no sections.

Lists are comma separated (``radii = 4, 8, 16``) or geometric
(``lams = geom 0.25 8 64`` for 64 points from 0.25 to 8).  Numbers may be
written as fractions (``1/64``).
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def _number(key: str, text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{key}: '{text}' is not a number") from None


def _int(key: str, text: str) -> int:
    v = _number(key, text)
    if v != int(v):
        raise ConfigError(f"{key}: expected an integer, got '{text}'")
    return int(v)


def _list(key: str, text: str) -> tuple[float, ...]:
    parts = text.split()
    if parts and parts[0] == "geom":
        if len(parts) != 4:
            raise ConfigError(f"{key}: geometric list needs 'geom lo hi count'")
        lo, hi, count = _number(key, parts[1]), _number(key, parts[2]), _int(key, parts[3])
        if not (0 < lo < hi) or count < 2:
            raise ConfigError(f"{key}: need 0 < lo < hi and count >= 2")
        return tuple(float(v) for v in np.geomspace(lo, hi, count))
    vals = tuple(_number(key, p) for p in text.split(",") if p.strip())
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def _bool(key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got '{text}'")


def _complex(key: str, text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"{key}: '{text}' is not a complex number") from None


def _choice(options):
    def parse(key: str, text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ConfigError(f"{key}: '{t}' not in {sorted(options)}")
        return t

    return parse


def _str(key: str, text: str) -> str:
    return text.strip()


INPUT_KINDS = ("bandlimited", "zero", "gaussian", "ball", "windowed")

_PARSERS = {
    "scenario": _str,
    "curve": _str,
    "family": _str,
    "n": _int,
    "extent": _number,
    "angles": _int,
    "nodes": _int,
    "decay_angles": _int,
    "radii": _list,
    "direction": _list,
    "deltas": _list,
    "lams": _list,
    "s": _number,
    "z": _complex,
    "singular": _choice({"zero", "shift"}),
    "seed": _int,
    "count": _int,
    "method": _choice({"spectral", "direct"}),
    "input": _choice(set(INPUT_KINDS)),
    "kmax": _number,
    "width": _number,
    "sizes": _list,
    "repeats": _int,
    "out": _str,
    "plot": _bool,
    "omega": _number,
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "scenario"
    curve: str | None = None
    family: str | None = None
    n: int | None = None
    extent: float | None = None
    angles: int | None = None
    nodes: int | None = None
    decay_angles: int | None = None
    radii: tuple[float, ...] | None = None
    direction: tuple[float, ...] | None = None
    deltas: tuple[float, ...] | None = None
    lams: tuple[float, ...] | None = None
    s: float = 0.0
    z: complex | None = None
    singular: str = "zero"
    seed: int = 0
    count: int = 5
    method: str = "spectral"
    input: str = "bandlimited"
    kmax: float | None = None
    width: float | None = None
    sizes: tuple[float, ...] | None = None
    repeats: int = 1
    out: str = "results"
    plot: bool = False
    omega: float | None = None
    source: str = dataclasses.field(default="", repr=False, compare=False)

    def __post_init__(self):
        validate(self)

    @property
    def digest(self) -> str:
        """SHA-256 over the canonical key = value listing (``out`` and ``plot`` excluded)."""
        skip = {"out", "plot", "source"}
        lines = [f"{f.name}={getattr(self, f.name)!r}" for f in dataclasses.fields(self) if f.name not in skip]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


def _positive(cfg, key, strict=True):
    v = getattr(cfg, key)
    if v is None:
        return
    vals = v if isinstance(v, tuple) else (v,)
    for x in vals:
        if not math.isfinite(x) or (x <= 0 if strict else x < 0):
            raise ConfigError(f"{key}: values must be {'positive' if strict else 'non-negative'}, got {x:g}")


def validate(cfg: ScenarioConfig) -> None:
    """Range checks that mirror the library preconditions."""
    if cfg.n is not None and (cfg.n < 8 or cfg.n % 2):
        raise ConfigError(f"n: grid size must be an even integer >= 8, got {cfg.n}")
    _positive(cfg, "extent")
    if cfg.angles is not None and cfg.angles < 1:
        raise ConfigError(f"angles: need at least 1 angle, got {cfg.angles}")
    if cfg.nodes is not None and cfg.nodes < 16:
        raise ConfigError(f"nodes: need m >= 16, got {cfg.nodes}")
    if cfg.decay_angles is not None and cfg.decay_angles < 64:
        raise ConfigError(f"decay_angles: need >= 64, got {cfg.decay_angles}")
    _positive(cfg, "radii", strict=False)
    _positive(cfg, "deltas")
    _positive(cfg, "lams")
    _positive(cfg, "kmax")
    _positive(cfg, "width")
    _positive(cfg, "omega")
    if cfg.direction is not None and (len(cfg.direction) != 2 or math.hypot(*cfg.direction) == 0):
        raise ConfigError("direction: need a non-zero 2-vector such as '0, 1'")
    if cfg.sizes is not None:
        for v in cfg.sizes:
            if v != int(v) or v < 8 or int(v) % 2:
                raise ConfigError(f"sizes: grid sizes must be even integers >= 8, got {v:g}")
    if not math.isfinite(cfg.s):
        raise ConfigError("s: must be finite")
    if cfg.seed < 0:
        raise ConfigError(f"seed: must be non-negative, got {cfg.seed}")
    if cfg.count < 1:
        raise ConfigError(f"count: must be >= 1, got {cfg.count}")
    if cfg.repeats < 1:
        raise ConfigError(f"repeats: must be >= 1, got {cfg.repeats}")
    if cfg.curve is not None and cfg.family is not None:
        raise ConfigError("curve, family: give one of the two, not both")


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        if key in values:
            raise ConfigError(f"{key}: given twice (line {lineno})")
        if not value:
            raise ConfigError(f"{key}: empty value (line {lineno})")
        values[key] = _PARSERS[key](key, value)
    return ScenarioConfig(**values, source=text)


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
