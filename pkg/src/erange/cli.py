"""Command-line front end.

Every subcommand reads an optional YAML/JSON config file, applies flag
overrides (flags win), checks the output path, computes, and writes CSV or
JSON.  Exit codes: 0 success, 1 numeric failure, 2 invalid input.

Example::

    erange phase-shift --potential barrier --kmin 0.01 --kmax 10 --kpoints 50
    erange effective-range --config run.yaml --format json --out er.json
    erange scan --s-list 2.5,3.5,6 --ell-list 0,1
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import numbers
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
import yaml

from . import __version__
from ._accel import backend
from .errors import ConfigError, ErangeError, InputError
from .grid import DEFAULT_PPD, DEFAULT_R_MIN, make_grid
from .observables import (Divergent, direct_effective_range, is_divergent, levinson,
                          low_k_expansion, phase_shift_curve)
from .potential import (PotentialSpec, builtin_catalog, from_dict, is_nonnegative,
                        predict_finiteness, to_dict)
from .radial import bound_states

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2

DEFAULTS: dict = {
    "potential": {"type": "square_barrier", "height": 4.0, "radius": 1.0},
    "ell": 0,
    "method": "both",
    "k_grid": {"k_min": 0.01, "k_max": 10.0, "points": 50, "spacing": "log"},
    "grid": {"r_min": DEFAULT_R_MIN, "R_max": None, "points_per_decade": DEFAULT_PPD},
    "tolerances": {"levinson": 0.05, "resonance": 1e-8},
    "scan": {"s_list": [2.5, 3.5, 4.5, 6.0, 10.0], "ell_list": [0, 1], "amplitude": 1.0,
             "core": 1.0, "R_values": [10.0, 20.0, 40.0, 80.0, 160.0, 320.0]},
    "output": {"format": "csv", "path": None},
}
METHODS = ("integral", "matching", "both")


# ------------------------------------------------------------------ config


@dataclass
class RunConfig:
    potential: PotentialSpec
    ell: int
    method: str
    k_grid: dict
    grid: dict
    tolerances: dict
    scan: dict
    output: dict
    raw: dict = field(repr=False, default_factory=dict)

    def k_values(self) -> np.ndarray:
        kg = self.k_grid
        if kg["points"] == 1:
            return np.array([kg["k_min"]])
        if kg["spacing"] == "log":
            return np.geomspace(kg["k_min"], kg["k_max"], kg["points"])
        return np.linspace(kg["k_min"], kg["k_max"], kg["points"])

    def make_grid(self, k_max: float = 0.0):
        """A grid from the config, or None to let each routine pick its own."""
        g = self.grid
        if g["R_max"] is None and g["r_min"] == DEFAULT_R_MIN and g["points_per_decade"] == DEFAULT_PPD:
            return None
        return make_grid(self.potential, k_max=k_max, r_min=g["r_min"], r_max=g["R_max"],
                         points_per_decade=g["points_per_decade"])

    def resolved(self) -> dict:
        """Plain-data view embedded in JSON output."""
        out = copy.deepcopy(self.raw)
        out["potential"] = to_dict(self.potential)
        return out


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        path = f"{where}.{key}" if where else str(key)
        if key not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[key], dict) and key != "potential":
            if not isinstance(val, dict):
                raise ConfigError(path, "expected a mapping")
            out[key] = _merge(base[key], val, path)
        else:
            out[key] = val
    return out


def _number(raw: dict, section: str, key: str, kind=float, positive: bool = True,
            allow_none: bool = False):
    val = raw[section][key] if section else raw[key]
    name = f"{section}.{key}" if section else key
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(name, f"expected a number, got {val!r}")
    if kind is int and int(val) != val:
        raise ConfigError(name, f"expected an integer, got {val!r}")
    val = kind(val)
    if not math.isfinite(val):
        raise ConfigError(name, "must be finite")
    if positive and not val > 0:
        raise ConfigError(name, f"must be positive, got {val!r}")
    return val


def _potential(value: Any) -> PotentialSpec:
    if isinstance(value, str):
        catalog = builtin_catalog()
        if value in catalog:
            return catalog[value]
        try:
            value = json.loads(value)
        except json.JSONDecodeError:
            raise ConfigError("potential", f"unknown built-in {value!r}; expected one of "
                              f"{sorted(catalog)} or a JSON mapping") from None
    return from_dict(value)


def build_config(file_data: Optional[dict], overrides: dict) -> RunConfig:
    """Merge defaults, file values and flag overrides, then validate."""
    raw = _merge(DEFAULTS, file_data or {})
    raw = _merge(raw, overrides)
    pot = _potential(raw["potential"])
    ell = _number(raw, "", "ell", int, positive=False)
    if ell < 0:
        raise ConfigError("ell", "must be a non-negative integer")
    if raw["method"] not in METHODS:
        raise ConfigError("method", f"expected one of {METHODS}, got {raw['method']!r}")
    k_min = _number(raw, "k_grid", "k_min")
    k_max = _number(raw, "k_grid", "k_max")
    points = _number(raw, "k_grid", "points", int)
    if raw["k_grid"]["spacing"] not in ("linear", "log"):
        raise ConfigError("k_grid.spacing", "expected 'linear' or 'log'")
    if k_max < k_min or (points > 1 and k_max == k_min):
        raise ConfigError("k_grid.k_max", "must exceed k_min")
    r_min = _number(raw, "grid", "r_min")
    R_max = _number(raw, "grid", "R_max", allow_none=True)
    if R_max is not None and R_max <= r_min:
        raise ConfigError("grid.R_max", "must exceed grid.r_min")
    ppd = _number(raw, "grid", "points_per_decade", int)
    for key in raw["tolerances"]:
        _number(raw, "tolerances", key)
    scan = raw["scan"]
    for key in ("s_list", "ell_list", "R_values"):
        if not isinstance(scan[key], (list, tuple)) or not scan[key]:
            raise ConfigError(f"scan.{key}", "expected a non-empty list")
        for item in scan[key]:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"scan.{key}", f"expected numbers, got {item!r}")
    if any(int(l) != l or l < 0 for l in scan["ell_list"]):
        raise ConfigError("scan.ell_list", "entries must be non-negative integers")
    _number(raw, "scan", "amplitude")
    _number(raw, "scan", "core")
    out = raw["output"]
    if out["format"] not in ("csv", "json"):
        raise ConfigError("output.format", f"expected 'csv' or 'json', got {out['format']!r}")
    if out["path"] is not None and not isinstance(out["path"], str):
        raise ConfigError("output.path", "expected a string")
    raw["k_grid"].update(k_min=k_min, k_max=k_max, points=points)
    raw["grid"].update(r_min=r_min, R_max=R_max, points_per_decade=ppd)
    return RunConfig(pot, ell, raw["method"], raw["k_grid"], raw["grid"], raw["tolerances"],
                     scan, out, raw)


def load_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"cannot parse {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("--config", "top level must be a mapping")
    return data


def check_writable(path: Optional[str]) -> None:
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise ConfigError("output.path", f"directory {parent} does not exist")
    if os.path.isdir(path):
        raise ConfigError("output.path", f"{path} is a directory")
    target = path if os.path.exists(path) else parent
    if not os.access(target, os.W_OK):
        raise ConfigError("output.path", f"{path} is not writable")


# ------------------------------------------------------------------ output


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Divergent):
        return "divergent"
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return fmt_float(float(v))
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def to_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(obj) -> str:
    """JSON text with floats fixed at 17 significant digits.

    Non-finite floats become the strings "nan", "inf", "-inf".
    """
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, Divergent):
        return '"divergent"'
    if isinstance(obj, numbers.Integral):
        return str(int(obj))
    if isinstance(obj, numbers.Real):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class Report:
    columns: list
    rows: list
    diagnostics: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def render(self, cfg: RunConfig) -> str:
        if cfg.output["format"] == "json":
            diag = {"version": __version__, "backend": backend()}
            diag.update(self.diagnostics)
            doc = {"config": cfg.resolved(), "results": [{c: r.get(c) for c in self.columns}
                                                         for r in self.rows],
                   "diagnostics": diag}
            return to_json(doc) + "\n"
        return to_csv(self.columns, self.rows)


# ---------------------------------------------------------------- commands


def phase_shift_report(cfg: RunConfig) -> Report:
    pot, ell, k = cfg.potential, cfg.ell, cfg.k_values()
    grid = cfg.make_grid(float(k[-1]))
    want_int = cfg.method in ("integral", "both")
    want_match = cfg.method in ("matching", "both")
    notes = {}
    d_int = d_match = None
    if want_int:
        if is_nonnegative(pot):
            d_int = phase_shift_curve(pot, ell, k, "integral", grid).delta
        elif cfg.method == "integral":
            # raises the precondition error naming the V >= 0 requirement
            phase_shift_curve(pot, ell, k, "integral", grid)
        else:
            notes["integral"] = "skipped: the integral formula requires V(r) >= 0"
    if want_match:
        d_match = phase_shift_curve(pot, ell, k, "matching", grid).delta
    cols = ["k [1/length]", "delta_integral [rad]", "delta_matching [rad]", "abs_difference [rad]"]
    rows = []
    for i, kk in enumerate(k):
        di = None if d_int is None else float(d_int[i])
        dm = None if d_match is None else float(d_match[i])
        diff = abs(di - dm) if di is not None and dm is not None else None
        rows.append(dict(zip(cols, (float(kk), di, dm, diff))))
    return Report(cols, rows, {"ell": ell, **notes})


def _er_row(method, ell, a, b, r, exponent=None, note=""):
    return {"method": method, "ell": ell, "a [length^(2l+1)]": a, "b [length^(2l+3)]": b,
            "r_eff [length^(1-2l)]": r, "growth_exponent": exponent, "note": note}


def _growth(*values):
    for v in values:
        if is_divergent(v) and v.growth_exponent is not None:
            return float(v.growth_exponent)
    return None


def effective_range_report(cfg: RunConfig) -> Report:
    pot, ell = cfg.potential, cfg.ell
    grid = cfg.make_grid(0.0)
    cols = list(_er_row("", 0, 0, 0, 0))
    pred = predict_finiteness(pot, ell)
    direct = direct_effective_range(pot, ell, grid)
    r_direct = direct.r_eff
    note = direct.diagnostics.get("r_eff_note", "")
    if note:
        r_direct = note
    rows = [_er_row("direct_integral", ell, direct.a, direct.b, r_direct,
                    _growth(direct.a, direct.r_eff), note)]
    diag = {"predicted_finite": pred, "direct": _plain(direct.diagnostics)}
    if not pred["a_finite"]:
        rows.append(_er_row("low_k_fit", ell, direct.a, direct.b, direct.r_eff,
                            _growth(direct.a), "skipped: scattering length divergent"))
    elif not direct.a:
        rows.append(_er_row("low_k_fit", ell, 0.0, 0.0, "a=0: undefined", None,
                            "skipped: phase shift vanishes identically"))
    else:
        method = None if cfg.method == "both" else cfg.method
        fit = low_k_expansion(pot, ell, grid=grid, method=method)
        b, r, fnote = fit.b, fit.r_eff, ""
        if not pred["r_finite"]:
            b, r, fnote = direct.b, direct.r_eff, "r_eff divergent: only a is fitted"
        rows.append(_er_row("low_k_fit", ell, fit.a, b, r, _growth(r), fnote))
        diag["low_k_fit"] = _plain(fit.diagnostics)
    return Report(cols, rows, diag)


def scan_report(cfg: RunConfig) -> Report:
    from .scans import theorem_matrix
    sc = cfg.scan
    mat = theorem_matrix([int(l) for l in sc["ell_list"]], [float(s) for s in sc["s_list"]],
                         float(sc["amplitude"]), float(sc["core"]), [float(r) for r in sc["R_values"]])
    rows = mat.rows()
    cols = list(rows[0]) if rows else ["ell", "s", "pass"]
    return Report(cols, rows, {"passed": mat.passed}, EXIT_OK if mat.passed else EXIT_NUMERIC)


def levinson_report(cfg: RunConfig) -> Report:
    tol = cfg.tolerances["levinson"]
    res = levinson(cfg.potential, cfg.ell, cfg.make_grid(50.0 / cfg.potential.range_scale()),
                   resonance_tol=cfg.tolerances["resonance"])
    ok = res.residual < tol and res.node_count == res.n
    cols = ["n", "delta_at_kmin [rad]", "residual [rad]", "node_count", "k_min [1/length]",
            "near_resonance", "pass"]
    row = dict(zip(cols, (res.n, res.delta_at_kmin, res.residual, res.node_count, res.k_min,
                          res.near_resonance, ok)))
    return Report(cols, [row], {"resonance_metric": res.resonance_metric, "tolerance": tol},
                  EXIT_OK if ok else EXIT_NUMERIC)


def bound_states_report(cfg: RunConfig) -> Report:
    spec = bound_states(cfg.potential, cfg.ell, cfg.make_grid(0.0))
    cols = ["index", "gamma [1/length]", "energy [1/length^2]"]
    rows = [dict(zip(cols, (j, g, -g * g))) for j, g in enumerate(spec.gammas)]
    return Report(cols, rows, {"node_count": spec.node_count, "matching_radius": spec.matching_radius})


def validate_report(cfg: RunConfig) -> Report:
    from .validate import run_all
    results = run_all()
    cols = ["module", "check", "status", "detail"]
    rows = [{"module": r.module, "check": r.name, "status": r.status, "detail": r.detail}
            for r in results]
    passed = all(r.status != "FAIL" for r in results)
    return Report(cols, rows, {"passed": passed}, EXIT_OK if passed else EXIT_NUMERIC)


def _plain(d):
    if isinstance(d, dict):
        return {str(k): _plain(v) for k, v in d.items()}
    if isinstance(d, (list, tuple, np.ndarray)):
        return [_plain(v) for v in d]
    return d


REPORTS: dict[str, Callable[[RunConfig], Report]] = {
    "phase-shift": phase_shift_report,
    "effective-range": effective_range_report,
    "scan": scan_report,
    "levinson": levinson_report,
    "bound-states": bound_states_report,
    "validate": validate_report,
}


def execute(command: str, cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Compute one subcommand, write its output, and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        check_writable(cfg.output["path"])
        with np.errstate(all="ignore"):
            report = REPORTS[command](cfg)
        text = report.render(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (ErangeError, ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    if cfg.output["path"] is None:
        stdout.write(text)
    else:
        with open(cfg.output["path"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return report.exit_code


def cmd_phase_shift(cfg: RunConfig, **streams) -> int:
    return execute("phase-shift", cfg, **streams)


def cmd_effective_range(cfg: RunConfig, **streams) -> int:
    return execute("effective-range", cfg, **streams)


def cmd_scan(cfg: RunConfig, **streams) -> int:
    return execute("scan", cfg, **streams)


def cmd_levinson(cfg: RunConfig, **streams) -> int:
    return execute("levinson", cfg, **streams)


def cmd_bound_states(cfg: RunConfig, **streams) -> int:
    return execute("bound-states", cfg, **streams)


def cmd_validate(cfg: Optional[RunConfig] = None, **streams) -> int:
    return execute("validate", cfg or build_config(None, {}), **streams)


# --------------------------------------------------------------------- main


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list:
    vals = _float_list(text)
    if any(int(v) != v for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML or JSON run configuration")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--potential", metavar="SPEC",
                        help="built-in name or JSON mapping, e.g. '{\"type\": \"power_tail\", ...}'")
    common.add_argument("--ell", type=int, metavar="N")
    common.add_argument("--kmin", type=float)
    common.add_argument("--kmax", type=float)
    common.add_argument("--kpoints", type=int)
    common.add_argument("--spacing", choices=("linear", "log"))
    common.add_argument("--rmax", type=float, help="outer radius of the grid")
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--s-list", type=_float_list, metavar="S1,S2,...")
    common.add_argument("--ell-list", type=_int_list, metavar="L1,L2,...")

    parser = argparse.ArgumentParser(prog="erange", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "phase-shift": "phase shifts on a k grid by the integral and matching formulas",
        "effective-range": "scattering length, b and effective range by two routes",
        "scan": "truncation-scan theorem matrix for power tails",
        "levinson": "compare the zero-energy phase with the bound-state count",
        "bound-states": "binding momenta of an attractive potential",
        "validate": "run the invariant checks and print a pass/fail table",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _overrides(args) -> dict:
    ov: dict = {}
    if args.potential is not None:
        ov["potential"] = args.potential
    if args.ell is not None:
        ov["ell"] = args.ell
    if args.method is not None:
        ov["method"] = args.method
    kg = {k: v for k, v in (("k_min", args.kmin), ("k_max", args.kmax), ("points", args.kpoints),
                            ("spacing", args.spacing)) if v is not None}
    if kg:
        ov["k_grid"] = kg
    if args.rmax is not None:
        ov["grid"] = {"R_max": args.rmax}
    sc = {k: v for k, v in (("s_list", args.s_list), ("ell_list", args.ell_list)) if v is not None}
    if sc:
        ov["scan"] = sc
    out = {k: v for k, v in (("format", args.format), ("path", args.out)) if v is not None}
    if out:
        ov["output"] = out
    return ov


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        file_data = load_file(args.config) if args.config else None
        cfg = build_config(file_data, _overrides(args))
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    return execute(args.command, cfg, stdout, stderr)


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
