"""blochgauge command-line front end.

Usage:
    blochgauge check --config audit.yaml --out results/
    blochgauge --preset check_identity_bloch --out results/
    blochgauge lemma --preset lemma_singular_inner --out results/

Exit codes: 0 completed (whatever the verdict), 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import (
    COMMANDS,
    AuditConfig,
    load_config,
    parse_function,
    parse_weight,
    preset_names,
    preset_path,
)
from .errors import BlochGaugeError, ConfigError, InconsistencyError, PreconditionError, SingularityError
from .functions import Herglotz, hp_norm
from .weights import classify, fast_majorant_ratio, moderateness_constant

log = logging.getLogger("blochgauge")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class NumericalFailure(Exception):
    pass


def _num(x):
    """JSON-safe float: non-finite values become strings."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    path.write_text(buf.getvalue())


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit(cfg: AuditConfig, out: Path, stem: str, header, rows, summary):
    if cfg.format in ("csv", "both") and header is not None:
        _write_csv(out / f"{stem}.csv", header, rows)
    if cfg.format in ("json", "both"):
        _write_json(out / f"{stem}_summary.json", summary)


def _boundary_of(cfg: AuditConfig):
    f = parse_function(cfg.function, Path(cfg.base_dir), cfg.N)
    if not isinstance(f, Herglotz):
        raise ConfigError(f"{cfg.command} needs a herglotz (boundary data) function spec")
    return f.boundary


def _verdict(trends: dict) -> str:
    vals = set(trends.values())
    return vals.pop() if len(vals) == 1 else "inconclusive"


# --------------------------------------------------------------------------
# commands


def run_check(cfg: AuditConfig, out: Path) -> int:
    f = parse_function(cfg.function, Path(cfg.base_dir), cfg.N)
    w = parse_weight(cfg.weight)
    grid = analysis.SampleGrid(f.n, cfg.K, cfg.J, cfg.seed)
    rep = analysis.audit(f, w, grid, cfg.boundary_samples, cfg.workers)
    header = ["k", "direction", "d_z", "in_E", "lhs_i", "lhs_ii", "lhs_iii", "lhs_iv"]
    rows = [[r[c] if c != "in_E" else int(r[c]) for c in header] for r in rep.rows]
    summary = {
        "command": "check",
        "empirical_constants": {k: _num(v) for k, v in rep.empirical_constants.items()},
        "row_maxima": {k: [_num(x) for x in v] for k, v in rep.row_maxima.items()},
        "trend_flags": rep.trend_flags,
        "verdict": _verdict(rep.trend_flags),
        "moderateness_constant": _num(rep.moderateness),
        "flags": rep.flags,
        "config_echo": cfg.echo(),
    }
    _emit(cfg, out, "check", header, rows, summary)
    log.info("check: verdict %s, constants %s", summary["verdict"], summary["empirical_constants"])
    return EXIT_OK


def run_lemma(cfg: AuditConfig, out: Path) -> int:
    g = parse_function(cfg.function, Path(cfg.base_dir), cfg.N)
    grid = analysis.SampleGrid(g.n, cfg.K, cfg.J, cfg.seed)
    Z = analysis.lemma_points(g.n, grid)
    ks = [0] + [k for k in grid.ks for _ in range(grid.J)]
    js = [0] + [j for _ in grid.ks for j in range(grid.J)]
    margins = analysis.schwarz_pick_margins(g, Z, cfg.tolerance)
    abs_g = np.exp(g.log_abs(Z))
    grad = np.linalg.norm(g.grad(Z), axis=1)
    i = int(np.argmin(margins))
    header = ["k", "direction", "d_z", "abs_g", "grad_norm", "margin"]
    dz = 1.0 - np.linalg.norm(Z, axis=1)
    rows = [[ks[m], js[m], float(dz[m]), float(abs_g[m]), float(grad[m]), float(margins[m])] for m in range(len(Z))]
    violated = bool(margins[i] < -cfg.tolerance)
    summary = {
        "command": "lemma",
        "min_margin": _num(margins[i]),
        "median_margin": _num(np.median(margins)),
        "argmin": {"k": ks[i], "direction": js[i], "point": [[_num(c.real), _num(c.imag)] for c in Z[i]]},
        "violated": violated,
        "config_echo": cfg.echo(),
    }
    _emit(cfg, out, "lemma", header, rows, summary)
    if violated:
        raise NumericalFailure(f"Schwarz-Pick margin {margins[i]:.3e} < -{cfg.tolerance:g} at {Z[i]}")
    return EXIT_OK


def run_thm2(cfg: AuditConfig, out: Path) -> int:
    bd = _boundary_of(cfg)
    w = parse_weight(cfg.weight)
    grid = analysis.SampleGrid(1, cfg.K, cfg.J, cfg.seed)
    rows = analysis.theorem2_grid(bd, w, grid, cfg.boundary_samples, cfg.N, cfg.workers)
    maxima = [max(v for k, _, _, v in rows if k == kk) for kk in grid.ks]
    hp = hp_norm(bd, cfg.p)
    tr = analysis.trend(maxima)
    summary = {
        "command": "thm2",
        "empirical_constant": _num(max(maxima)),
        "row_maxima": [_num(x) for x in maxima],
        "trend_flags": {"thm2": tr},
        "verdict": tr,
        "hp_check": {"p": _num(cfg.p), "norm": _num(hp.norm), "log_integrable": hp.log_integrable},
        "moderateness_constant": _num(moderateness_constant(w, cfg.K + 2)),
        "config_echo": cfg.echo(),
    }
    _emit(cfg, out, "thm2", ["k", "direction", "d_z", "thm2"], [list(r) for r in rows], summary)
    return EXIT_OK


def run_little_bloch(cfg: AuditConfig, out: Path) -> int:
    bd = _boundary_of(cfg)
    Q = analysis.little_bloch_scan(bd, cfg.K, cfg.J, cfg.boundary_samples, cfg.N, workers=cfg.workers)
    ratio = Q[-1] / Q[0] if Q[0] > 0 else 0.0
    hp = hp_norm(bd, math.inf)
    summary = {
        "command": "little-bloch",
        "Q": [_num(q) for q in Q],
        "last_over_first": _num(ratio),
        "decaying": bool(Q[-1] <= 0.01 * Q[0]) if Q[0] > 0 else True,
        "psi_sup": _num(hp.norm),
        "config_echo": cfg.echo(),
    }
    _emit(cfg, out, "little_bloch", ["k", "d_z", "Q"], [[k, 2.0**-k, q] for k, q in enumerate(Q, 1)], summary)
    return EXIT_OK


def run_weights(cfg: AuditConfig, out: Path) -> int:
    w = parse_weight(cfg.weight)
    fm = fast_majorant_ratio(w, cfg.delta)
    summary = {
        "command": "weights",
        "weight": w.describe(),
        "moderateness_constant": _num(moderateness_constant(w, cfg.k_max)),
        "fast_majorant_ratio": None if math.isinf(fm) else _num(fm),
        "fast_majorant_divergent": math.isinf(fm),
        "class": classify(w),
        "config_echo": cfg.echo(),
    }
    _emit(cfg, out, "weights", None, None, summary)
    return EXIT_OK


RUNNERS = {
    "check": run_check,
    "lemma": run_lemma,
    "thm2": run_thm2,
    "little-bloch": run_little_bloch,
    "weights": run_weights,
}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blochgauge", description=__doc__.split("\n\n")[0])
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config's command")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="YAML audit config")
    src.add_argument("--preset", help="name of a shipped config (see --list-presets)")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--out", help="output directory (default: ./blochgauge-out)")
    p.add_argument("--grid-k", type=int, dest="K")
    p.add_argument("--grid-j", type=int, dest="J")
    p.add_argument("--nodes", type=int, dest="N")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--format", choices=("csv", "json", "both"))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _prepare_out(path) -> Path:
    out = Path(path or "blochgauge-out")
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.list_presets:
        print("\n".join(preset_names()))
        return EXIT_OK
    try:
        if args.preset:
            source = Path(str(preset_path(args.preset)))
        elif args.config:
            source = args.config
        else:
            raise ConfigError("one of --config or --preset is required")
        overrides = {
            "command": args.command,
            "K": args.K,
            "J": args.J,
            "N": args.N,
            "workers": args.workers,
            "tolerance": args.tolerance,
            "format": args.format,
        }
        cfg = load_config(source, overrides)
        out = _prepare_out(args.out or cfg.out)
        return RUNNERS[cfg.command](cfg, out)
    except (ConfigError, PreconditionError) as exc:
        print(f"blochgauge: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, SingularityError, InconsistencyError, FloatingPointError) as exc:
        where = getattr(exc, "point", None)
        suffix = f" (sample point {where})" if where is not None else ""
        print(f"blochgauge: numerical failure: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC
    except BlochGaugeError as exc:
        print(f"blochgauge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
