"""Declarative audit configs: YAML documents naming a function, a weight and a grid.

Example::

    command: check
    function: {preset: log}
    weight: {kind: power, alpha: 0.5}
    grid: {K: 10, J: 64, N: 1024, boundary_samples: 64}
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import quadrature as quad
from .boundary import BoundaryData
from .errors import ConfigError, DomainError
from .functions import (
    MAX_DEGREE_DISK,
    AffineZero,
    Herglotz,
    HoloFunction,
    PowerSeries,
    Product,
    Pullback,
    ShiftedZeroPoly,
    Slice,
)
from .weights import Weight

COMMANDS = ("check", "lemma", "thm2", "little-bloch", "weights")
MAX_K = 16
MAX_J = 1024
MAX_N = 2**16
MAX_BOUNDARY_SAMPLES = 4096


# --------------------------------------------------------------------------
# boundary densities


def _psi_constant(c):
    return lambda z: np.full(z.shape, float(c))


DENSITY_PRESETS = {
    "one": lambda p: None,
    "e": lambda p: _psi_constant(np.e),
    "constant": lambda p: _psi_constant(p.get("value", 1.0)),
    "exp_cos": lambda p: (lambda z, a=float(p.get("amplitude", 1.0)): np.exp(a * z.real)),
    "exp_cos_minus_one": lambda p: (lambda z: np.exp(z.real - 1.0)),
    "abs_one_minus": lambda p: (lambda z: np.abs(1.0 - z)),
    "two_plus_cos": lambda p: (lambda z: 2.0 + z.real),
}


def read_samples(path) -> np.ndarray:
    """Density samples from a text file of 'index value' lines."""
    try:
        data = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read density samples from {path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ConfigError(f"{path}: expected 'index value' pairs")
    idx = data[:, 0].astype(int)
    if not np.array_equal(np.sort(idx), np.arange(idx.size)):
        raise ConfigError(f"{path}: indices must be 0..M-1")
    vals = np.empty(idx.size)
    vals[idx] = data[:, 1]
    return vals


def parse_density(spec, base_dir: Path):
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        return _psi_constant(spec)
    if isinstance(spec, str):
        spec = {"preset": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"bad density spec {spec!r}")
    if "file" in spec:
        return read_samples(base_dir / spec["file"])
    name = spec.get("preset")
    if name not in DENSITY_PRESETS:
        raise ConfigError(f"unknown density preset {name!r}; choose from {sorted(DENSITY_PRESETS)}")
    return DENSITY_PRESETS[name](spec)


def parse_boundary(spec, base_dir: Path) -> BoundaryData:
    if not isinstance(spec, dict):
        raise ConfigError("boundary must be a mapping with 'density' and/or 'atoms'")
    atoms = spec.get("atoms", []) or []
    try:
        atoms = [(float(a), float(m)) for a, m in atoms]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"atoms must be [angle, mass] pairs: {exc}") from exc
    label = spec.get("label", "")
    return BoundaryData.from_angles(parse_density(spec.get("density"), base_dir), atoms, label=label)


# --------------------------------------------------------------------------
# functions


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number as [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    try:
        return complex(str(x).replace(" ", "")) if isinstance(x, str) else complex(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {x!r} as a complex number") from exc


def _vector(x) -> np.ndarray:
    if not isinstance(x, (list, tuple)):
        x = [x]
    return np.array([parse_complex(v) for v in x], dtype=complex)


def _series(spec) -> np.ndarray:
    kind = spec.get("kind")
    deg = int(spec.get("degree", MAX_DEGREE_DISK))
    if not 1 <= deg <= MAX_DEGREE_DISK:
        raise ConfigError(f"series degree must be in [1, {MAX_DEGREE_DISK}]")
    k = np.arange(1, deg + 1)
    if kind == "log":
        return np.r_[0.0, 1.0 / k]
    if kind == "geometric":
        return np.ones(deg + 1)
    if kind == "exp":
        from scipy.special import gammaln

        return np.exp(-gammaln(np.arange(deg + 1) + 1.0))
    raise ConfigError(f"unknown series kind {kind!r}")


def _zeros(spec, n):
    out = []
    for z in spec:
        if isinstance(z, dict):
            out.append(AffineZero.at(_vector(z["point"]), _vector(z["normal"]) if "normal" in z else None))
        elif n == 1:
            out.append(AffineZero.at(parse_complex(z)))
        else:
            out.append(AffineZero.at(_vector(z)))
    return out


FUNCTION_PRESETS = {
    "identity": {"tag": "power_series", "coefficients": [0, 1]},
    "constant": {"tag": "power_series", "coefficients": [1]},
    "half": {"tag": "power_series", "coefficients": [0.5]},
    "square": {"tag": "power_series", "coefficients": [0, 0, 1]},
    "log": {"tag": "power_series", "series": {"kind": "log"}},
    "log_squared": {"tag": "product", "factors": [{"preset": "log"}, {"preset": "log"}]},
    "geometric": {"tag": "power_series", "series": {"kind": "geometric"}},
    "singular_inner": {"tag": "herglotz", "boundary": {"atoms": [[0.0, 1.0]]}},
    "two_atoms": {"tag": "herglotz", "boundary": {"atoms": [[0.0, 0.5], [3.141592653589793, 0.5]]}},
    "outer_exp_cos": {"tag": "herglotz", "boundary": {"density": "exp_cos"}},
    "outer_two_plus_cos": {"tag": "herglotz", "boundary": {"density": "two_plus_cos"}},
    "outer_abs_one_minus": {"tag": "herglotz", "boundary": {"density": "abs_one_minus"}},
    "exp_shift": {"tag": "herglotz", "boundary": {"density": "exp_cos_minus_one"}},
    "zero_measure": {"tag": "herglotz", "boundary": {}},
    "one_plus_half_z": {"tag": "power_series", "coefficients": [1, 0.5]},
}


def parse_function(spec, base_dir: Path = Path("."), nodes: int = quad.DEFAULT_NODES) -> HoloFunction:
    """Build a HoloFunction from its declarative spec."""
    if isinstance(spec, str):
        spec = {"preset": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"function spec must be a mapping, got {spec!r}")
    if "preset" in spec:
        name = spec["preset"]
        if name not in FUNCTION_PRESETS:
            raise ConfigError(f"unknown function preset {name!r}; choose from {sorted(FUNCTION_PRESETS)}")
        merged = {**FUNCTION_PRESETS[name], **{k: v for k, v in spec.items() if k != "preset"}}
        f = parse_function(merged, base_dir, nodes)
        f.label = f.label or name
        return f
    tag = spec.get("tag")
    n = int(spec.get("n", 1))
    label = spec.get("label", "")
    try:
        if tag == "power_series":
            zeros = _zeros(spec["zeros"], n) if "zeros" in spec else None
            if "terms" in spec:
                terms = {tuple(int(i) for i in idx): parse_complex(c) for idx, c in spec["terms"]}
                return PowerSeries(terms=terms, n=n, declared_zeros=zeros, label=label)
            if "series" in spec:
                coef = _series(spec["series"])
            else:
                coef = [parse_complex(c) for c in spec.get("coefficients", [])]
            return PowerSeries(np.asarray(coef) * parse_complex(spec.get("scale", 1)), declared_zeros=zeros, label=label)
        if tag == "herglotz":
            bd = parse_boundary(spec.get("boundary", {}), base_dir)
            return Herglotz(bd, int(spec.get("nodes", nodes)), label=label)
        if tag == "product":
            return Product([parse_function(s, base_dir, nodes) for s in spec["factors"]], label=label)
        if tag == "shifted_zero_poly":
            zeros = _zeros(spec.get("zeros", []), n)
            return ShiftedZeroPoly(zeros, n=n, scale=parse_complex(spec.get("scale", 1)), label=label)
        if tag == "pullback":
            return Pullback(parse_function(spec["function"], base_dir, nodes), _vector(spec["direction"]), label=label)
        if tag == "slice":
            return Slice(parse_function(spec["function"], base_dir, nodes), _vector(spec["direction"]), label=label)
    except KeyError as exc:
        raise ConfigError(f"function spec with tag {tag!r} is missing {exc}") from exc
    except ConfigError:
        raise
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed function spec with tag {tag!r}: {exc}") from exc
    raise ConfigError(f"unknown function tag {tag!r}")


def parse_weight(spec) -> Weight:
    if spec is None:
        return Weight.constant()
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    try:
        if kind == "power":
            return Weight.power(spec["alpha"])
        if kind == "constant":
            return Weight.constant()
        if kind == "log_growth":
            return Weight.log_growth(spec["beta"])
        if kind == "power_growth":
            return Weight.power_growth(spec["beta"])
    except KeyError as exc:
        raise ConfigError(f"weight {kind!r} needs parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameter for weight {kind!r}: {exc}") from exc
    if kind == "tabulated":
        raise ConfigError("tabulated weights are available from the Python API only")
    raise ConfigError(f"unknown weight kind {kind!r}")


# --------------------------------------------------------------------------


@dataclass
class AuditConfig:
    command: str
    function: Any = None
    weight: Any = None
    K: int = 10
    J: int = 64
    N: int = quad.DEFAULT_NODES
    boundary_samples: int = 64
    p: float = float("inf")
    delta: float = 0.5
    k_max: int = 20
    tolerance: float = 1e-9
    seed: int = 0
    out: Optional[str] = None
    format: str = "both"
    workers: int = 1
    base_dir: str = field(default=".", repr=False)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if not 1 <= self.K <= MAX_K:
            raise ConfigError(f"K must be in [1, {MAX_K}]")
        if not 1 <= self.J <= MAX_J:
            raise ConfigError(f"J must be in [1, {MAX_J}]")
        if self.N < 64 or self.N > MAX_N or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two in [64, {MAX_N}]")
        if not 4 <= self.boundary_samples <= MAX_BOUNDARY_SAMPLES:
            raise ConfigError(f"boundary_samples must be in [4, {MAX_BOUNDARY_SAMPLES}]")
        if self.format not in ("csv", "json", "both"):
            raise ConfigError("format must be csv, json or both")
        if not self.tolerance >= 0:
            raise ConfigError("tolerance must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.command != "weights" and self.function is None:
            raise ConfigError(f"command {self.command!r} needs a function spec")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.k_max < 2:
            raise ConfigError("k_max must be >= 2")
        return self

    def echo(self) -> dict:
        """Config fields that determine the results (no paths, no worker count)."""
        d = asdict(self)
        for k in ("out", "workers", "base_dir", "format"):
            d.pop(k)
        if d["p"] == float("inf"):
            d["p"] = "inf"
        return d


def load_config(source, overrides: Optional[dict] = None) -> AuditConfig:
    """Read a YAML config file (path) or a mapping; apply flag overrides."""
    if isinstance(source, dict):
        raw, base = dict(source), Path(".")
    else:
        path = Path(source)
        try:
            raw = yaml.safe_load(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
        base = path.parent
    if not isinstance(raw, dict):
        raise ConfigError("config must be a YAML mapping")
    grid = raw.pop("grid", {}) or {}
    output = raw.pop("output", {}) or {}
    merged = {**raw, **grid, **output}
    if "dir" in merged:
        merged["out"] = merged.pop("dir")
    if "seed" not in merged:
        env = os.environ.get("BLOCHGAUGE_SEED", "0")
        try:
            merged["seed"] = int(env)
        except ValueError as exc:
            raise ConfigError(f"BLOCHGAUGE_SEED must be an integer, got {env!r}") from exc
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    known = set(AuditConfig.__dataclass_fields__)
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "command" not in merged:
        raise ConfigError("config does not name a command")
    try:
        cfg = AuditConfig(**merged, base_dir=str(base)) if "base_dir" not in merged else AuditConfig(**merged)
        for name in ("K", "J", "N", "boundary_samples", "seed", "workers", "k_max"):
            setattr(cfg, name, int(getattr(cfg, name)))
        for name in ("p", "delta", "tolerance"):
            setattr(cfg, name, float(getattr(cfg, name)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg.validate()


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("blochgauge.presets").iterdir() if p.name.endswith(".yaml"))


def preset_path(name: str):
    p = resources.files("blochgauge.presets") / f"{name}.yaml"
    if not p.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return p
