"""Batch front end: ``speedmeasure run | list-oracles | verify``.

A curve-spec file is JSON; see ``docs/spec_format.md``.  Reports are
deterministic: keys come out in a fixed order, no timestamps, and any
randomized step takes the seed from the spec file or ``--seed``.

Exit codes: 0 success, 1 invariant violated under ``verify``, 2 spec or
argument error, 3 numeric inconsistency in the decomposition.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ac_analysis import NestedNullSet, ac_measure_test, banach_zaretsky_verdict, luzin_n_upper_bound
from .curves import Composite, Curve, Interval, PiecewiseLinear, Restriction, SampledCadlag
from .decomposition import DECOMP_TOL, acp_classify, decompose, density_profile
from .errors import ConfigError, InconsistencyError, NotBVError, SpeedMeasureError
from .invariants import verify_curve
from .metric_spaces import space_from_dict
from .oracles import ORACLE_NAMES, list_oracles, non_cadlag_step, oracle_library
from .speed_measure import (DEFAULT_CELLS, build_speed_measure, continuity_verdict, measure_interval,
                            speed_measure_csv)
from .variation import DEFAULT_BLOWUP, DEFAULT_MAX_DEPTH, DEFAULT_TOL, variation

ANALYSES = ("variation", "speed-measure", "decompose", "ac", "luzin", "acp", "verify")
EXIT_OK, EXIT_VIOLATION, EXIT_PARSE, EXIT_INCONSISTENT = 0, 1, 2, 3
#: extra named curves accepted by ``verify --oracle``
EXTRA_CURVES = {"noncadlag_step": non_cadlag_step}


class SpecError(Exception):
    """Spec problem at a JSON location such as ``$.curve.params``."""

    def __init__(self, where: str, msg: str):
        super().__init__(f"{where}: {msg}")
        self.where = where


@dataclass
class CurveSpec:
    curve: Curve
    analyses: list
    acp_exponents: list
    intervals: list
    tolerances: dict
    null_set: dict | None
    seed: int
    source: dict = field(default_factory=dict)


# -- parsing ---------------------------------------------------------------------

def _space(desc, where):
    if desc is None:
        return None
    if isinstance(desc, str):
        desc = {"kind": desc}
    if not isinstance(desc, dict):
        raise SpecError(where, "expected an object such as {\"kind\": \"real-line\"}")
    try:
        return space_from_dict(desc)
    except (ValueError, TypeError) as exc:
        raise SpecError(where, str(exc)) from None


def _points(rows, where):
    if not isinstance(rows, list) or not rows:
        raise SpecError(where, "expected a non-empty list of [t, point] pairs")
    out = []
    for i, r in enumerate(rows):
        if not (isinstance(r, list) and len(r) == 2):
            raise SpecError(f"{where}[{i}]", "expected a [t, point] pair")
        out.append((r[0], r[1]))
    return out


def _curve(body, space, where) -> Curve:
    if not isinstance(body, dict):
        raise SpecError(where, "expected an object")
    kinds = [k for k in ("oracle", "samples", "piecewise_linear", "composite") if k in body]
    if len(kinds) != 1:
        raise SpecError(where, "exactly one of oracle, samples, piecewise_linear, composite is required")
    kind = kinds[0]
    try:
        if kind == "oracle":
            name = body["oracle"]
            params = dict(body.get("params", {}))
            if not isinstance(name, str):
                raise SpecError(f"{where}.oracle", "expected a name")
            if name in EXTRA_CURVES:
                return EXTRA_CURVES[name](**params)
            if space is not None:
                params.setdefault("space", space)
            return oracle_library(name, **params)
        if kind == "samples":
            if space is None:
                raise SpecError("$.space", "a sampled curve needs a space")
            return SampledCadlag(space, _points(body["samples"], f"{where}.samples"))
        if kind == "piecewise_linear":
            if space is None:
                raise SpecError("$.space", "a piecewise-linear curve needs a space")
            return PiecewiseLinear(space, _points(body["piecewise_linear"], f"{where}.piecewise_linear"))
        parts = body["composite"]
        if not isinstance(parts, list) or not parts:
            raise SpecError(f"{where}.composite", "expected a non-empty list of curve bodies")
        return Composite([_curve(p, None, f"{where}.composite[{i}]") for i, p in enumerate(parts)])
    except SpecError:
        raise
    except (SpeedMeasureError, TypeError, ValueError) as exc:
        raise SpecError(f"{where}.{kind}", str(exc)) from None


def _interval(text, where) -> Interval:
    if not isinstance(text, str):
        raise SpecError(where, "expected bracket notation such as \"(0, 0.5]\"")
    try:
        return Interval.parse(text)
    except (ConfigError, ValueError) as exc:
        raise SpecError(where, str(exc)) from None


def _analyses(items, where):
    if not isinstance(items, list) or not items:
        raise SpecError(where, "expected a non-empty list of analyses")
    names, exps = [], []
    for i, a in enumerate(items):
        loc = f"{where}[{i}]"
        if isinstance(a, dict) and set(a) == {"acp"}:
            p = a["acp"]
        elif isinstance(a, str) and a.startswith("acp(") and a.endswith(")"):
            try:
                p = float(a[4:-1])
            except ValueError:
                raise SpecError(loc, f"bad exponent in {a!r}") from None
        elif isinstance(a, str) and a in ANALYSES and a != "acp":
            if a not in names:
                names.append(a)
            continue
        else:
            raise SpecError(loc, f"unknown analysis {a!r}; known: {', '.join(ANALYSES)}")
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not p >= 1:
            raise SpecError(loc, "the acp exponent must be a number >= 1")
        if "acp" not in names:
            names.append("acp")
        if float(p) not in exps:
            exps.append(float(p))
    return names, exps


def parse_spec(text: str) -> CurveSpec:
    """Parse a curve-spec document; raises :class:`SpecError` with a location."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise SpecError("$", "expected a JSON object")
    unknown = set(doc) - {"space", "curve", "domain", "analyses", "intervals", "tolerances",
                          "null_set", "seed"}
    if unknown:
        raise SpecError("$", f"unknown keys: {', '.join(sorted(unknown))}")
    if "curve" not in doc:
        raise SpecError("$", "missing key 'curve'")
    space = _space(doc.get("space"), "$.space")
    curve = _curve(doc["curve"], space, "$.curve")
    if "domain" in doc:
        J = _interval(doc["domain"], "$.domain")
        if J != curve.domain:
            try:
                curve = Restriction(curve, J)
            except SpeedMeasureError as exc:
                raise SpecError("$.domain", str(exc)) from None
    names, exps = _analyses(doc.get("analyses", ["variation"]), "$.analyses")
    intervals = [_interval(s, f"$.intervals[{i}]") for i, s in enumerate(doc.get("intervals", []))]
    for i, J in enumerate(intervals):
        if not curve.domain.contains_interval(J):
            raise SpecError(f"$.intervals[{i}]", f"{J} is not inside the domain {curve.domain}")
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise SpecError("$.tolerances", "expected an object")
    for k, v in tols.items():
        if k not in ("variation", "decompose", "sc", "acp"):
            raise SpecError(f"$.tolerances.{k}", "unknown tolerance")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise SpecError(f"$.tolerances.{k}", "tolerances must be positive numbers")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SpecError("$.seed", "expected an integer")
    ns = doc.get("null_set")
    if ns is not None:
        try:
            NestedNullSet.from_dict(ns, curve.domain)
        except (SpeedMeasureError, KeyError, TypeError, ValueError) as exc:
            raise SpecError("$.null_set", str(exc)) from None
    return CurveSpec(curve, names, exps, intervals, {k: float(v) for k, v in tols.items()}, ns,
                     seed, doc)


# -- report helpers --------------------------------------------------------------

def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    return x


def _variation_block(res) -> dict:
    return {"value": res.value, "converged": res.converged, "depth": res.depth,
            "infinite": res.infinite, "diverging": res.diverging, "bounded": res.bounded}


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        elif isinstance(v, list) and v and all(isinstance(e, dict) for e in v):
            lines.append(f"{pad}{k}:")
            for e in v:
                lines.append(_text(e, indent + 1))
                lines.append(f"{pad}  -")
            lines.pop()
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(line for line in lines if line)


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- orchestration ---------------------------------------------------------------

@dataclass
class RunResult:
    report: dict
    exit_code: int
    csv_files: dict = field(default_factory=dict)


def run_spec(spec: CurveSpec, tol=None, max_depth=DEFAULT_MAX_DEPTH, blowup_bound=DEFAULT_BLOWUP,
             grid=None, seed=None) -> RunResult:
    """Run the requested analyses in dependency order."""
    curve = spec.curve
    tol = tol if tol is not None else spec.tolerances.get("variation", DEFAULT_TOL)
    dtol = spec.tolerances.get("decompose", DECOMP_TOL)
    sc_tol = spec.tolerances.get("sc", 1e-3)
    acp_tol = spec.tolerances.get("acp", 1e-3)
    seed = spec.seed if seed is None else seed
    n_cells = grid or DEFAULT_CELLS
    requested = set(spec.analyses)
    results: dict = {}
    csvs: dict = {}
    code = EXIT_OK

    report = {
        "curve": {"name": curve.name, "space": curve.space.describe(), "domain": str(curve.domain)},
        "analyses": [a for a in ANALYSES if a in requested],
        "results": results,
        "provenance": {
            "version": __version__,
            "tolerances": {"variation": tol, "decompose": dtol, "sc": sc_tol, "acp": acp_tol},
            "max_depth": max_depth, "blowup_bound": blowup_bound, "grid_cells": n_cells,
            "seed": seed,
        },
    }

    if "variation" in requested:
        block = {"domain": _variation_block(variation(curve, None, tol, max_depth, blowup_bound))}
        if spec.intervals:
            block["intervals"] = [dict(interval=str(J), **_variation_block(
                variation(curve, J, tol, max_depth, blowup_bound))) for J in spec.intervals]
        results["variation"] = block

    needs_nu = requested & {"speed-measure", "decompose", "ac", "luzin"}
    nu = None
    if needs_nu:
        try:
            nu = build_speed_measure(curve, tol, n_cells=n_cells, max_depth=max_depth,
                                     blowup_bound=blowup_bound)
        except NotBVError as exc:
            results["speed-measure"] = {"bv": False, "note": str(exc)}

    if nu is not None and "speed-measure" in requested:
        block = {
            "bv": True,
            "total_mass": measure_interval(nu, curve.domain),
            "continuous": continuity_verdict(nu),
            "base_point": nu.profile.base_point,
            "converged": nu.profile.converged,
            "refinement_depth": nu.profile.refinement_depth,
            "atoms": [{"t": a.t, "left_gap": a.left_gap, "right_gap": a.right_gap,
                       "mass": a.mass, "status": a.status} for a in nu.atoms],
            "left_endpoint_mass": nu.left_endpoint_mass,
        }
        if spec.intervals:
            block["intervals"] = [{"interval": str(J), "nu": measure_interval(nu, J)}
                                  for J in spec.intervals]
        results["speed-measure"] = block
        csvs["speed_measure_profile.csv"], csvs["speed_measure_atoms.csv"] = speed_measure_csv(nu)

    if nu is not None and "decompose" in requested:
        try:
            dec = decompose(curve, nu, tol=dtol)
        except InconsistencyError as exc:
            results["decompose"] = {"error": str(exc)}
            code = EXIT_INCONSISTENT
        else:
            results["decompose"] = dec.summary()
            csvs["decomposition_cells.csv"] = dec.cells_csv()
            csvs["density.csv"] = density_profile(curve, dec.grid, nu=nu).to_csv()

    if "ac" in requested:
        if nu is None:
            verdict = banach_zaretsky_verdict(curve, sc_tol=sc_tol)
            results["ac"] = {"verdict": verdict.summary()}
        else:
            verdict = banach_zaretsky_verdict(curve, nu, sc_tol=sc_tol)
            total = float(variation(curve, None, tol).value)
            block = {"verdict": verdict.summary()}
            if total > 0:
                mt = ac_measure_test(nu, 0.25 * total)
                block["measure_test"] = {"epsilon": mt.epsilon, "passes": mt.passes,
                                         "delta": mt.delta, "candidates": mt.candidates}
            results["ac"] = block

    if nu is not None and "luzin" in requested:
        desc = spec.null_set or {"kind": "cantor_generations", "depth": 10}
        lz = luzin_n_upper_bound(curve, NestedNullSet.from_dict(desc, curve.domain), nu)
        results["luzin"] = dict(null_set=desc, **lz.summary())

    if "acp" in requested:
        out = []
        ac_loc = None
        for p in spec.acp_exponents:
            r = acp_classify(curve, p, acp_tol, ac_loc=ac_loc, seed=seed)
            ac_loc = r.ac_loc
            out.append({"p": r.p, "member": r.member, "ac_loc": r.ac_loc, "integral": r.integral,
                        "integral_finite": r.integral_finite, "integral_history": r.integral_history,
                        "stronger_condition": r.stronger_condition,
                        "stronger_checked": r.stronger_checked})
        results["acp"] = out

    if "verify" in requested:
        vr = verify_curve(curve, tol=tol, seed=seed)
        results["verify"] = vr.summary()
        if not vr.passed and code == EXIT_OK:
            code = EXIT_VIOLATION

    return RunResult(_clean(report), code, csvs)


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        return _text(report) + "\n"
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


# -- commands --------------------------------------------------------------------

def _cmd_run(args) -> int:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        print(f"error: {args.spec}: {exc.strerror}", file=sys.stderr)
        return EXIT_PARSE
    try:
        spec = parse_spec(text)
    except SpecError as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        res = run_spec(spec, args.tol, args.max_depth, args.blowup_bound, args.grid, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    res.report["provenance"]["spec"] = Path(args.spec).name
    body = render(res.report, args.format)
    if args.out:
        out = Path(args.out)
        write_atomic(out / ("report.txt" if args.format == "text" else "report.json"), body)
        if args.format == "csv":
            for name, content in sorted(res.csv_files.items()):
                write_atomic(out / name, content)
    else:
        sys.stdout.write(body)
    return res.exit_code


def _cmd_list(args) -> int:
    cat = _clean(list_oracles())
    if args.format == "json":
        sys.stdout.write(json.dumps(cat, indent=2) + "\n")
        return EXIT_OK
    for e in cat:
        t = e["truth"]
        jumps = ", ".join(map(str, e["declared_jumps"])) or "none"
        print(f"{e['name']}: domain {e['domain']}, space {e['space']['kind']}, "
              f"Var {t.get('variation')}, declared jumps: {jumps}")
        print(f"    parameters {json.dumps(e['parameters'])}")
        print(f"    truth {json.dumps(t)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    curves = []
    if args.spec:
        try:
            curves.append(parse_spec(Path(args.spec).read_text()).curve)
        except OSError as exc:
            print(f"error: {args.spec}: {exc.strerror}", file=sys.stderr)
            return EXIT_PARSE
        except SpecError as exc:
            print(f"error: {args.spec}: {exc}", file=sys.stderr)
            return EXIT_PARSE
    for name in args.oracle or ():
        if name in EXTRA_CURVES:
            curves.append(EXTRA_CURVES[name]())
        elif name in ORACLE_NAMES:
            curves.append(oracle_library(name))
        else:
            print(f"error: unknown oracle {name!r}", file=sys.stderr)
            return EXIT_PARSE
    if args.all or not curves:
        curves += [oracle_library(n) for n in ORACLE_NAMES]
        curves += [f() for f in EXTRA_CURVES.values()]
    reports = [verify_curve(c, tol=args.tol, seed=args.seed) for c in curves]
    doc = {"passed": all(r.passed for r in reports), "seed": args.seed, "tol": args.tol,
           "curves": [r.summary() for r in reports]}
    if args.format == "json":
        sys.stdout.write(json.dumps(_clean(doc), indent=2) + "\n")
    else:
        for r in reports:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.curve}")
            for c in r.checks:
                if not c.passed or args.verbose:
                    print(f"    {'ok  ' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip())
    return EXIT_OK if doc["passed"] else EXIT_VIOLATION


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {s}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speedmeasure",
                                description="Variation, speed measures and absolute continuity of curves.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the analyses named in a curve-spec file")
    r.add_argument("spec")
    r.add_argument("--out", help="output directory (default: print to stdout)")
    r.add_argument("--tol", type=_positive(float), default=None)
    r.add_argument("--max-depth", type=_positive(int), default=DEFAULT_MAX_DEPTH)
    r.add_argument("--blowup-bound", type=_positive(float), default=DEFAULT_BLOWUP)
    r.add_argument("--grid", type=_positive(int), default=None, help="speed-measure grid cells")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--format", choices=("json", "text", "csv"), default="json")
    r.set_defaults(func=_cmd_run)

    lo = sub.add_parser("list-oracles", help="print the oracle catalogue")
    lo.add_argument("--format", choices=("json", "text"), default="text")
    lo.set_defaults(func=_cmd_list)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("spec", nargs="?")
    v.add_argument("--oracle", action="append", help="oracle name (repeatable)")
    v.add_argument("--all", action="store_true", help="every oracle (the default without targets)")
    v.add_argument("--tol", type=_positive(float), default=DEFAULT_TOL)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
