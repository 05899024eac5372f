"""Experiment configuration: parsing and admissibility checks.

The file format is line-oriented ``key = value`` text with ``[section]``
headers; keys before the first header are top-level. ``#`` and ``;`` start
comments. Example::

    experiment = BoundCheck31
    seed = 7
    paths = 200

    [grid]
    T = 1.0
    n = 1024

    [fractional]
    hurst = 0.75
    alpha = 0.3

    [model]
    family = sinusoidal
    x0 = 0.5

    [family]
    amplitude = 1.0
"""

from __future__ import annotations

import configparser
import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..errors import ConfigError, FracVolterraError
from ..families import FAMILIES, build_family

_ROOT = "__top__"


class ExperimentKind(enum.Enum):
    BOUND_BOUNDED_SIGMA = "BoundCheck31"
    BOUND_GENERAL = "BoundCheck32"
    BOUND_LINEAR_SYSTEM = "BoundCheck34"
    GRADIENT = "GradientCheck"
    DENSITY = "DensityStudy"
    SCALING = "ScalingStudy"
    FBM = "FbmValidate"
    INTEGRAL = "IntegralValidate"

    @property
    def is_bound(self) -> bool:
        return self in (ExperimentKind.BOUND_BOUNDED_SIGMA, ExperimentKind.BOUND_GENERAL,
                        ExperimentKind.BOUND_LINEAR_SYSTEM)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    seed: int
    paths: int
    T: float
    n: int
    hurst: float
    alpha: float
    beta: float = 1.0
    delta: float = 1.0
    mu: float = 1.0
    family: str = "constant"
    d: int = 1
    m: int = 1
    x0: tuple = (0.0,)
    family_params: dict = field(default_factory=dict)
    lambdas: Optional[tuple] = None
    density_points: int = 101
    out_dir: str = "results"

    def canonical(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["x0"] = list(self.x0)
        out["lambdas"] = None if self.lambdas is None else list(self.lambdas)
        out["family_params"] = dict(sorted(self.family_params.items()))
        del out["out_dir"]
        return out

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def coefficients(self):
        return build_family(self.family, d=self.d, m=self.m, T=self.T, **self.family_params)

    def with_overrides(self, seed=None, out_dir=None) -> "ExperimentConfig":
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if out_dir is not None:
            changes["out_dir"] = str(out_dir)
        return replace(self, **changes)


def _read(text: str) -> configparser.RawConfigParser:
    parser = configparser.RawConfigParser(strict=True, inline_comment_prefixes=("#", ";"),
                                          default_section="__defaults_unused__")
    parser.optionxform = str
    try:
        parser.read_string(f"[{_ROOT}]\n" + text)
    except configparser.ParsingError as exc:
        lines = ", ".join(str(lineno - 1) for lineno, _ in exc.errors)
        raise ConfigError(f"parse error at line {lines}: cannot read a key = value pair") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"parse error at line {exc.lineno - 1}: duplicate section "
                          f"[{exc.section}]") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"parse error at line {exc.lineno - 1}: duplicate key "
                          f"{exc.option!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc.message}") from None
    return parser


class _Fields:
    """Typed lookups that record problems instead of raising at the first one."""

    def __init__(self, parser):
        self.parser = parser
        self.problems: list[str] = []

    def get(self, section, key, conv, default=...):
        label = key if section == _ROOT else f"{section}.{key}"
        if not self.parser.has_option(section, key):
            if default is ...:
                self.problems.append(f"missing required field {label!r}")
            return None if default is ... else default
        raw = self.parser.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError):
            self.problems.append(f"{label}: cannot read {raw!r} as {conv.__name__}")
            return None


def _int(raw):
    value = float(raw)
    if value != int(value):
        raise ValueError(raw)
    return int(value)


def _floats(raw):
    return tuple(float(v) for v in raw.replace(",", " ").split())


def _kind(raw):
    return ExperimentKind(raw)


_kind.__name__ = "experiment kind (" + ", ".join(k.value for k in ExperimentKind) + ")"
_int.__name__ = "integer"
_floats.__name__ = "list of numbers"

_KNOWN = {
    _ROOT: {"experiment", "seed", "paths"},
    "grid": {"T", "n"},
    "fractional": {"hurst", "alpha", "beta", "delta", "mu"},
    "model": {"family", "d", "m", "x0"},
    "scaling": {"lambdas"},
    "density": {"points"},
    "output": {"dir"},
}


def admissibility_problems(H, alpha, beta, delta, mu) -> list[str]:
    """Every violated parameter inequality, one message each."""
    out = []
    if not 0.5 < H < 1.0:
        out.append(f"hurst must lie in (1/2, 1), got {H:g}")
    for name, v in (("β", beta), ("δ", delta), ("μ", mu)):
        if not 0.0 < v <= 1.0:
            out.append(f"{name} must lie in (0, 1], got {v:g}")
    if not alpha > 1.0 - H:
        out.append(f"α must exceed 1−H={1.0 - H:g}")
    if not alpha < 0.5:
        out.append(f"α must be below 1/2, got {alpha:g}")
    if not alpha < beta:
        out.append(f"α must be below β={beta:g}")
    dd = delta / (1.0 + delta)
    if not alpha < dd:
        out.append(f"α must be below δ/(1+δ)={dd:g}")
    if not alpha > 1.0 - mu:
        out.append(f"α must exceed 1−μ={1.0 - mu:g}")
    if not min(beta, dd) > 1.0 - mu:
        out.append(f"min(β, δ/(1+δ))={min(beta, dd):g} must exceed 1−μ={1.0 - mu:g}")
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    parser = _read(text)
    f = _Fields(parser)
    for section in parser.sections():
        if section == "family":
            continue
        if section not in _KNOWN:
            f.problems.append(f"unknown section [{section}]")
            continue
        for key in parser.options(section):
            if key not in _KNOWN[section]:
                where = "top level" if section == _ROOT else f"[{section}]"
                f.problems.append(f"unknown key {key!r} in {where}")

    kind = f.get(_ROOT, "experiment", _kind)
    seed = f.get(_ROOT, "seed", _int)
    paths = f.get(_ROOT, "paths", _int)
    T = f.get("grid", "T", float)
    n = f.get("grid", "n", _int)
    H = f.get("fractional", "hurst", float)
    alpha = f.get("fractional", "alpha", float)
    beta = f.get("fractional", "beta", float, 1.0)
    delta = f.get("fractional", "delta", float, 1.0)
    mu = f.get("fractional", "mu", float, 1.0)
    family = f.get("model", "family", str, "constant")
    d = f.get("model", "d", _int, 1)
    m = f.get("model", "m", _int, 1)
    x0 = f.get("model", "x0", _floats, (0.0,))
    lambdas = f.get("scaling", "lambdas", _floats, None)
    points = f.get("density", "points", _int, 101)
    out_dir = f.get("output", "dir", str, "results")
    params = {}
    if parser.has_section("family"):
        for key in parser.options("family"):
            params[key] = f.get("family", key, float)

    problems = f.problems
    if seed is not None and not 0 <= seed < 2 ** 64:
        problems.append(f"seed must be an unsigned 64-bit integer, got {seed}")
    if paths is not None and paths < 1:
        problems.append(f"paths must be >= 1, got {paths}")
    if n is not None and n < 16:
        problems.append(f"grid.n must be >= 16, got {n}")
    if T is not None and not T > 0:
        problems.append(f"grid.T must be positive, got {T:g}")
    for name, v in (("model.d", d), ("model.m", m)):
        if v is not None and v < 1:
            problems.append(f"{name} must be >= 1, got {v}")
    if None not in (H, alpha, beta, delta, mu):
        problems.extend(admissibility_problems(H, alpha, beta, delta, mu))
    if kind is not None and kind.is_bound and mu is not None and mu != 1.0:
        problems.append(f"sup-norm bound experiments need μ = 1, got {mu:g}")
    if points is not None and points < 2:
        problems.append(f"density.points must be >= 2, got {points}")
    if x0 is not None and d is not None and len(x0) not in (1, d):
        problems.append(f"model.x0 needs 1 or {d} values, got {len(x0)}")
    if kind is ExperimentKind.SCALING:
        if lambdas is None:
            problems.append("missing required field 'scaling.lambdas'")
        elif len(lambdas) < 4 or any(b <= a for a, b in zip(lambdas, lambdas[1:])) or lambdas[0] <= 0:
            problems.append("scaling.lambdas must be at least 4 increasing positive values")
    if family is not None and family not in FAMILIES:
        problems.append(f"model.family: unknown family {family!r}; choose from {sorted(FAMILIES)}")
    if problems:
        raise ConfigError(problems)

    cfg = ExperimentConfig(kind=kind, seed=seed, paths=paths, T=T, n=n, hurst=H, alpha=alpha,
                           beta=beta, delta=delta, mu=mu, family=family, d=d, m=m,
                           x0=tuple(x0), family_params=params,
                           lambdas=None if lambdas is None else tuple(lambdas),
                           density_points=points, out_dir=out_dir)
    try:
        coeffs = cfg.coefficients()
    except (TypeError, FracVolterraError) as exc:
        raise ConfigError(f"model: cannot build family {family!r}: {exc}") from None
    if kind is ExperimentKind.BOUND_BOUNDED_SIGMA and not coeffs.constants.bounded_sigma:
        raise ConfigError(f"BoundCheck31 needs a bounded diffusion; family {family!r} is unbounded")
    if kind is ExperimentKind.BOUND_LINEAR_SYSTEM:
        c = coeffs.constants
        if c.sigma_sup is None or c.h_sup is None or c.f_sup is None:
            raise ConfigError(f"BoundCheck34 needs bounded sigma and derivative bounds; "
                              f"family {family!r} does not provide them")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not valid UTF-8") from None
    return parse_config(text)
