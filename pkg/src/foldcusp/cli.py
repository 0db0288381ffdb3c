"""Command line: ``foldcusp {classify,portrait,sweep,returnmap,validate-bump}``.

Every flag can also come from a TOML file given with ``--config``; flags on
the command line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .bifurcation import GridSpec, L1NotFoundError, classify_case, equivalence_class, signature, sweep
from .families import (
    BumpConstructionError,
    GST_MU_FRACTION,
    FoldCuspParams,
    ParameterError,
    bump_construct,
    default_window,
    gst_slice,
    make_invisible_family,
    make_visible_family,
    printed_bump_function,
    standard_form,
    validate_bump,
)
from .planefield import IntegrationError
from .render import diagram_svg, portrait_svg
from .retmaps import DomainError, psi_map
from .switching import find_pseudo_equilibria, find_tangencies, region_layout

EXIT_OK, EXIT_USAGE, EXIT_UNRESOLVED, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "family": "invisible",
    "lambda": 0.0,
    "beta": 1.0,
    "mu": 0.0,
    "window": None,
    "grid": 200,
    "out": None,
    "format": None,
    "rho": "1,-1,-1,-1",
    "lam_range": "-2,2",
    "beta_range": "-1,1",
    "mu_scaled": False,
    "source": "both",
}


class UsageError(ValueError):
    pass


def _common(p):
    p.add_argument("--family", choices=["invisible", "visible", "standard", "gst-slice"])
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--window", type=float, help="half-width R of the analysis square")
    p.add_argument("--grid", type=int, help="grid resolution (sweep nodes per axis, return-map samples)")
    p.add_argument("--out", help="output path")
    p.add_argument("--config", help="TOML file with default values for these flags")
    p.add_argument("--format", choices=["csv", "json", "svg"])
    p.add_argument("--rho", help="standard-form signs, e.g. 1,-1,-1,-1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foldcusp", description="Fold-cusp Filippov system analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="case label and signature of a parameter point")
    _common(p)
    p = sub.add_parser("portrait", help="SVG phase portrait")
    _common(p)
    p = sub.add_parser("sweep", help="bifurcation diagram over a lambda x beta grid")
    _common(p)
    p.add_argument("--lam-range", dest="lam_range")
    p.add_argument("--beta-range", dest="beta_range")
    p.add_argument("--mu-scaled", dest="mu_scaled", action="store_const", const=True, help="read --mu as a multiple of sqrt|beta|")
    p = sub.add_parser("returnmap", help="tabulate the first-return map")
    _common(p)
    p = sub.add_parser("validate-bump", help="property report for the bump functions")
    _common(p)
    p.add_argument("--source", choices=["constructed", "printed", "both"])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        for k, v in data.items():
            key = k.replace("-", "_")
            if key not in cfg:
                raise UsageError(f"unknown config key {k!r}")
            cfg[key] = v
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        cfg[k] = v
    for key in ("lam_range", "beta_range"):
        if isinstance(cfg[key], str):
            cfg[key] = _pair(cfg[key])
    if isinstance(cfg["rho"], str):
        try:
            cfg["rho"] = tuple(int(v) for v in cfg["rho"].split(","))
        except ValueError as exc:
            raise UsageError(f"bad --rho {cfg['rho']!r}") from exc
    return cfg


def _pair(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected 'lo,hi', got {text!r}") from exc
    if not lo < hi:
        raise UsageError(f"empty range {text!r}")
    return (lo, hi)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    return str(o)


def _emit(text: str, out):
    if out:
        path = Path(out)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _system(cfg):
    fam = cfg["family"]
    lam, beta, mu = float(cfg["lambda"]), float(cfg["beta"]), float(cfg["mu"])
    if fam == "standard":
        return standard_form(cfg["rho"], window=cfg["window"] or 1.0), None
    if fam == "gst-slice":
        params = gst_slice(mu, lam)
        params.validate(lam0=math.inf, mu_fraction=GST_MU_FRACTION)
        r = cfg["window"] or default_window(*params.as_tuple())
        return make_invisible_family(params, window=r, validate=False), params
    if fam == "visible":
        r = cfg["window"] or default_window(lam, beta)
        return make_visible_family(lam, beta, window=r), FoldCuspParams(lam, beta, 0.0)
    params = FoldCuspParams(lam, beta, mu)
    params.validate(lam0=math.inf)
    r = cfg["window"] or default_window(lam, beta, mu)
    return make_invisible_family(params, window=r, validate=False), params


def cmd_classify(cfg) -> int:
    Z, params = _system(cfg)
    fam = cfg["family"]
    record = {"family": fam}
    status = EXIT_OK
    if fam in ("invisible", "visible", "gst-slice"):
        if fam == "gst-slice":
            res = classify_case(params, "invisible", cfg["window"], mu_fraction=GST_MU_FRACTION)
            fam = "invisible"
        else:
            res = classify_case(params, fam, cfg["window"])
        record["case"] = res.text
        record["equiv_class"] = None if res.label is None else equivalence_class(res.label)
        record["boundaries_matched"] = list(res.matched)
        sig = signature(params, fam, Z.window, Z=Z)
        record["signature"] = sig.as_dict()
        record["two_fold"] = sig.two_fold
        record["loop"] = bool(sig.loops.get("rho_X(a)=c", False))
        if res.unresolved:
            status = EXIT_UNRESOLVED
    else:
        record["case"] = None
        record["tangencies"] = [
            {"owner": t.owner, "location": t.location, "kind": t.kind.value, "base_kind": t.base_kind.value,
             "lie2": t.lie2, "lie3": t.lie3, "visible": t.visible}
            for t in find_tangencies(Z)
        ]
        record["regions"] = [[lo, hi, c] for lo, hi, c in region_layout(Z)]
        record["pseudo_equilibria"] = [{"location": p.location, "kind": p.kind.value} for p in find_pseudo_equilibria(Z)]
        if params is not None:
            record["lambda"], record["beta"], record["mu"] = params.as_tuple()
    _emit(_dumps(record), cfg["out"])
    return status


def cmd_portrait(cfg) -> int:
    Z, params = _system(cfg)
    title = cfg["family"]
    if params is not None:
        title += f" lambda={params.lam:g} beta={params.beta:g} mu={params.mu:g}"
    _emit(portrait_svg(Z, title=title), cfg["out"] or "portrait.svg")
    return EXIT_OK


def sweep_csv(diagram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "beta", "mu", "case_label", "equiv_class", "n_pseudo", "n_cycles", "boundary_flag"])
    for lam, beta, mu, lab, cls, npe, ncy, flag in diagram.rows():
        w.writerow([f"{lam:.17g}", f"{beta:.17g}", f"{mu:.17g}", lab, cls, npe, ncy, flag])
    return buf.getvalue()


def cmd_sweep(cfg) -> int:
    fam = cfg["family"]
    if fam not in ("invisible", "visible"):
        raise UsageError("sweep supports the invisible and visible families")
    n = int(cfg["grid"])
    if n < 2:
        raise UsageError("--grid must be at least 2")
    spec = GridSpec(cfg["lam_range"], cfg["beta_range"], n, n, float(cfg["mu"]), bool(cfg["mu_scaled"]), fam)
    diagram = sweep(spec, cfg["window"])
    out = Path(cfg["out"] or "sweep.csv")
    stem = out.with_suffix("")
    fmt = cfg["format"]
    summary = {
        "family": fam,
        "mu": spec.mu,
        "mu_scaled": spec.mu_scaled,
        "grid": [spec.n_lam, spec.n_beta],
        "lam_range": list(spec.lam_range),
        "beta_range": list(spec.beta_range),
        "distinct_labels": diagram.distinct_labels(),
        "n_distinct_labels": len(diagram.distinct_labels()),
        "distinct_classes": diagram.distinct_classes(),
        "region_counts": diagram.region_counts(),
        "unresolved_cells": int(np.count_nonzero(diagram.boundary_flag == "unresolved")),
        "census_mismatches": diagram.census_mismatch,
        "failures": [list(f) for f in diagram.failures],
        "boundary_curves": diagram.boundary_curves(),
    }
    if fmt in (None, "csv"):
        _emit(sweep_csv(diagram), str(stem) + ".csv")
    if fmt in (None, "json"):
        _emit(_dumps(summary), str(stem) + ".json")
    if fmt in (None, "svg"):
        _emit(diagram_svg(diagram), str(stem) + ".svg")
    return EXIT_OK


def cmd_returnmap(cfg) -> int:
    if cfg["family"] != "invisible":
        raise UsageError("the first-return map is tabulated for the invisible family")
    params = FoldCuspParams(float(cfg["lambda"]), float(cfg["beta"]), float(cfg["mu"]))
    params.validate(lam0=math.inf)
    if params.beta <= 0:
        raise UsageError("the first-return map needs beta > 0")
    smap = psi_map(params)
    lo, hi = smap.domain
    n = int(cfg["grid"])
    xs = np.linspace(lo, hi, n + 2)[1:-1]
    ps = smap(xs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "psi_x", "psi_x_minus_x"])
    for x, p in zip(xs, ps):
        w.writerow([f"{x:.17g}", f"{p:.17g}", f"{p - x:.17g}"])
    _emit(buf.getvalue(), cfg["out"])
    return EXIT_OK


def cmd_validate_bump(cfg) -> int:
    beta, mu = float(cfg["beta"]), float(cfg["mu"])
    FoldCuspParams(0.0, beta, mu).validate()
    report = {"beta": beta, "mu": mu}
    if cfg["source"] in ("constructed", "both"):
        report["Constructed"] = (validate_bump(bump_construct(beta, mu, verify=False), beta, mu))
    if cfg["source"] in ("printed", "both"):
        report["PaperPrinted"] = (validate_bump(printed_bump_function(beta, mu), beta, mu))
    _emit(_dumps(report), cfg["out"])
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "portrait": cmd_portrait,
    "sweep": cmd_sweep,
    "returnmap": cmd_returnmap,
    "validate-bump": cmd_validate_bump,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ParameterError) as exc:
        print(f"foldcusp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, L1NotFoundError, BumpConstructionError, DomainError, FloatingPointError) as exc:
        print(f"foldcusp: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
