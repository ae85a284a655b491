"""Command-line front end: ``kzt <subcommand> [flags]``.

Exit status is 0 on success, 1 when a numerical check fails and 2 on a usage
error.  JSON reports carry ``"schema": "1"`` and print floats with 17
significant digits, so two runs can be diffed byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Optional

import numpy as np

from . import analytic, checks, densitycalc, geomside, heckealg
from .dirichlet import enumerate_characters, format_character, parse_character
from .kloosterman import kloosterman, restricted_kloosterman, twisted_kloosterman, weil_bound

SCHEMA = "1"
CSV_COLUMNS = {
    "char": ["chi", "conductor", "order", "parity", "primitive", "d", "re", "im"],
    "kloosterman": ["c", "re", "im", "abs", "weil_bound", "ratio"],
}


class UsageError(Exception):
    pass


# ---- serialization --------------------------------------------------------------


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = "%.17g" % x
    # keep a float token so the value parses back as a float
    return s if any(ch in s for ch in ".en") else s + ".0"


def _plain(obj: Any) -> Any:
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "modulus") and hasattr(obj, "exponents"):
        return format_character(obj)
    return obj


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits and keys in insertion order."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(rows: List[dict], columns: List[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_float(r[c]).strip('"') if isinstance(r[c], float) else r[c] for c in columns])
    return buf.getvalue()


def _pretty(obj: Any, prefix: str = "") -> str:
    obj = _plain(obj)
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            v = _plain(v)
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{prefix}{k}:")
                lines.append(_pretty(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            lines.append(_pretty(v, prefix + "- ") if isinstance(_plain(v), (dict, list)) else f"{prefix}- {_scalar(v)}")
    else:
        lines.append(prefix + _scalar(obj))
    return "\n".join(lines)


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit(args, payload, rows: Optional[List[dict]] = None, columns: Optional[List[str]] = None) -> None:
    fmt = args.format
    if fmt == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no CSV form; use --format json or pretty")
        text = _csv(rows, columns)
    elif fmt == "pretty":
        text = _pretty(payload) + "\n"
    else:
        text = dumps(payload) + "\n"
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(kind: str, **body) -> dict:
    return {"schema": SCHEMA, "kind": kind, **body}


# ---- subcommands --------------------------------------------------------------------


def cmd_char(args) -> int:
    chars = enumerate_characters(args.q, args.parity)
    if args.primitive:
        chars = [c for c in chars if c.is_primitive()]
    rows, table = [], []
    for chi in chars:
        vals = chi.values()
        label = format_character(chi)
        info = {"chi": label, "conductor": chi.conductor(), "order": chi.order(), "parity": chi.parity,
                "primitive": chi.is_primitive()}
        for d in range(args.q):
            rows.append({**info, "d": d, "re": float(vals[d].real), "im": float(vals[d].imag)})
        table.append({**info, "values": [complex(v) for v in vals]})
    emit(args, _report("char", q=args.q, characters=table), rows, CSV_COLUMNS["char"])
    return 0


def _c_values(args) -> List[int]:
    if args.c is not None and args.c_range is not None:
        raise UsageError("give either --c or --c-range")
    if args.c is not None:
        return [args.c]
    if args.c_range is None:
        raise UsageError("--c or --c-range is required")
    lo, hi = (int(x) for x in args.c_range.split(":"))
    return list(range(lo, hi + 1))


def cmd_kloosterman(args) -> int:
    cs = _c_values(args)
    rows = []
    chi = parse_character(args.chi) if args.chi else None
    if args.variant == "twisted" and chi is None:
        raise UsageError("--chi is required for the twisted variant")
    if args.variant == "restricted" and (args.a is None or args.modq is None):
        raise UsageError("--a and --modq are required for the restricted variant")
    explicit = args.c is not None
    for c in cs:
        if c < 1:
            raise UsageError("c must be positive")
        if args.variant == "classical":
            v = kloosterman(args.m, args.n, c).value
        elif args.variant == "twisted":
            if c % chi.modulus:
                if explicit:
                    raise UsageError(f"character modulus {chi.modulus} does not divide c={c}")
                continue
            v = twisted_kloosterman(chi, args.m, args.n, c).value
        else:
            if c % args.modq:
                if explicit:
                    raise UsageError(f"q={args.modq} does not divide c={c}")
                continue
            v = restricted_kloosterman(args.a, args.modq, args.m, args.n, c).value
        wb = weil_bound(args.m, args.n, c)
        rows.append({"c": c, "re": float(v.real), "im": float(v.imag), "abs": abs(v), "weil_bound": wb,
                     "ratio": abs(v) / wb})
    emit(args, _report("kloosterman", variant=args.variant, m=args.m, n=args.n, rows=rows), rows,
         CSV_COLUMNS["kloosterman"])
    # the Weil bound is a theorem only for the classical sum
    if args.variant == "classical" and any(r["abs"] > r["weil_bound"] + checks.ABS_SLACK for r in rows):
        return 1
    return 0


def load_fixture(path: str) -> heckealg.HeckeSystem:
    with open(path) as fh:
        data = json.load(fh)
    try:
        lam = {int(p): complex(*v) if isinstance(v, (list, tuple)) else complex(v)
               for p, v in data.get("lambda", {}).items()}
        return heckealg.make_system(int(data["q1"]), data.get("chi_spec"), lam)
    except KeyError as e:
        raise UsageError(f"fixture is missing {e}") from None


def hecke_check(sys: heckealg.HeckeSystem, check: str, q2: Optional[int] = None, ell: int = 6,
                bound: int = 64) -> tuple:
    """(max_deviation, extra pass condition)."""
    primes = sorted(sys.lam)
    if check == "relation":
        support = sorted({n for n in range(1, bound + 1)
                          if all(p in sys.lam for p, _ in heckealg.factorize(n))})
        return max((heckealg.hecke_relation_defect(sys, m, n) for m in support for n in support), default=0.0), True
    if check == "abs-power":
        dev = 0.0
        for p in primes:
            if sys.q1 % p == 0:
                continue
            for k in range(ell + 1):
                lhs, rhs = heckealg.abs_power_expand(sys, p, k)
                dev = max(dev, abs(lhs - rhs))
        return dev, True
    if q2 is None:
        raise UsageError(f"--q2 is required for the {check} check")
    if check == "gram":
        return heckealg.gram_check(sys, q2), True
    if check == "gram-direct":
        return heckealg.gram_check_direct(sys, q2), True
    if check == "xi-norm":
        lhs, part, tail = heckealg.xi_norm(sys, q2)
        return max(0.0, abs(lhs - part) - tail), lhs >= 1 - tail
    raise UsageError(f"unknown check {check!r}")


def cmd_hecke(args) -> int:
    sys_ = load_fixture(args.fixture)
    dev, extra = hecke_check(sys_, args.check, args.q2, args.ell)
    ok = dev <= args.tol and extra
    emit(args, _report("hecke", check=args.check, max_deviation=dev, **{"pass": ok}))
    return 0 if ok else 1


def _spec(args) -> analytic.QuadratureSpec:
    kw = {}
    for name in ("method", "abs_tol", "rel_tol", "max_subdivisions", "truncation"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    return analytic.QuadratureSpec(**kw)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"kernel {args.name} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


def compute_kernel(args) -> dict:
    spec = _spec(args)
    name = args.name
    if name == "h-closed":
        _need(args, "kappa", "t", "T")
        return {"value": analytic.h_kT_closed(args.kappa, complex(args.t), args.T, spec), "est_error": 0.0}
    if name == "h-integral":
        _need(args, "kappa", "t", "T")
        kv = analytic.h_kT_integral(args.kappa, complex(args.t), args.T, spec)
    elif name == "h-x":
        _need(args, "t", "X")
        return {"value": analytic.h_X(complex(args.t), args.X), "est_error": 0.0}
    elif name == "bessel-k":
        _need(args, "r", "zeta")
        kv = analytic.bessel_k_imag(args.r, complex(args.zeta), spec)
    elif name == "i-kappa":
        _need(args, "kappa", "a", "r")
        kv = analytic.i_kappa(args.kappa, args.a, args.r, spec)
    elif name in ("int-r-i0", "int-r-i1"):
        _need(args, "a", "T")
        f = analytic.int_r_i0 if name == "int-r-i0" else analytic.int_r_i1
        direct, alt = f(args.a, args.T)
        return {"value": direct.value, "est_error": direct.est_error, "alternate": alt.value,
                "alternate_est_error": alt.est_error, "method_gap": abs(direct.value - alt.value)}
    else:
        raise UsageError(f"unknown kernel {name!r}")
    return {"value": kv.value, "est_error": kv.est_error}


def cmd_kernel(args) -> int:
    out = compute_kernel(args)
    v = out["value"]
    if isinstance(v, complex) and v.imag == 0:
        out["value"] = v.real
    emit(args, _report("kernel", name=args.name, **out))
    return 0


def cmd_verify_lemma(args) -> int:
    rep = geomside.run_lemma(args.lemma, args.q, args.m, args.n, a=args.a, chi=args.chi, sigma=args.sigma,
                             c_max=args.c_max, method=args.method)
    emit(args, {"schema": SCHEMA, **rep.to_dict()})
    return 0 if rep.passed else 1


def _bound_params(args) -> tuple:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    pick = lambda key, flag: getattr(args, flag) if getattr(args, flag) is not None else cfg.get(key)
    group = pick("group", "group")
    q = pick("q", "q")
    if group is None or q is None:
        raise UsageError("bound needs a group and q")
    alphas = densitycalc.parse_prime_map(args.alpha) if args.alpha else densitycalc.parse_prime_map(cfg.get("alphas", {}))
    mus = densitycalc.parse_prime_map(args.mu) if args.mu else densitycalc.parse_prime_map(cfg.get("mus", {}))
    theorem = pick("theorem", "theorem") or "sarnak"
    p = densitycalc.DensityParams(
        group=group, q=int(q), T=float(pick("T", "T") or 1.0), alphas=alphas, mus=mus,
        alpha0=pick("alpha0", "alpha0"), mu0=float(pick("mu0", "mu0") or 0.0),
        eps=float(pick("eps", "eps") or 1e-3), chi=pick("chi", "chi"),
        squarefree_mode=bool(args.squarefree or cfg.get("squarefree_mode", False)),
    )
    return theorem, p


def cmd_bound(args) -> int:
    theorem, p = _bound_params(args)
    res = densitycalc.sarnak_rhs(p) if theorem == "sarnak" else densitycalc.huxley_rhs(p)
    body = res.to_dict()
    body["ell_choice"] = {k: ({str(a): b for a, b in v.items()} if isinstance(v, dict) else v)
                          for k, v in densitycalc.ell_choice(theorem, p).items()}
    body["weyl"] = densitycalc.weyl_comparator(p.group, p.q, p.T)
    emit(args, _report("bound", **body))
    return 0


# ---- sweeps ------------------------------------------------------------------------


def _expand(values) -> list:
    if isinstance(values, dict):
        if "prime_powers_upto" in values:
            return checks.prime_powers(int(values["prime_powers_upto"]))
        start, stop = int(values.get("start", 1)), int(values["stop"])
        return list(range(start, stop + 1, int(values.get("step", 1))))
    if isinstance(values, list):
        return values
    return [values]


def grid_cells(grid: dict) -> List[dict]:
    if not grid:
        return []
    keys = sorted(grid)
    axes = [_expand(grid[k]) for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


def _cell_key(params: dict) -> str:
    return ",".join(f"{k}={params[k]}" for k in sorted(params))


def run_cell(check: str, params: dict, fixed: dict, seed: int) -> dict:
    key = _cell_key(params)
    try:
        fn = checks.CHECKS[check]
        res = fn(**params, **fixed, rng=checks.cell_rng(seed, f"{check}:{key}"))
        return {"key": params, **res}
    except Exception as e:  # a failing cell is recorded, never fatal
        return {"key": params, "pass": False, "metric": None, "metric_name": None,
                "error": f"{type(e).__name__}: {e}"}


def threads_from_env(default: Optional[int] = None) -> int:
    raw = os.environ.get("KZT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise UsageError(f"KZT_THREADS={raw!r} is not an integer") from None
    return default or (os.cpu_count() or 1)


def sweep(config: dict, seed: Optional[int] = None, threads: Optional[int] = None) -> dict:
    """Run every check in a config; results come back in cell order whatever the schedule."""
    seed = int(config.get("seed", 0) if seed is None else seed)
    specs = config.get("checks")
    if specs is None:
        specs = [config] if "check" in config else []
    workers = threads or threads_from_env()
    out_checks = []
    total = fails = 0
    for spec in specs:
        name = spec.get("check") or spec.get("name")
        if name not in checks.CHECKS:
            raise UsageError(f"unknown check {name!r}; choose from {sorted(checks.CHECKS)}")
        cells = grid_cells(spec.get("grid", {}))
        fixed = dict(spec.get("params", {}))
        if workers > 1 and len(cells) > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(lambda p: run_cell(name, p, fixed, seed), cells))
        else:
            results = [run_cell(name, p, fixed, seed) for p in cells]
        nfail = sum(not r["pass"] for r in results)
        metrics = [r["metric"] for r in results if r.get("metric") is not None]
        entry = {"check": name, "cells": len(cells), "failures": nfail,
                 "metric_name": next((r["metric_name"] for r in results if r.get("metric_name")), None),
                 "max_metric": max(metrics) if metrics else None, "results": results}
        out_checks.append(entry)
        total += len(cells)
        fails += nfail
    return _report("sweep", seed=seed, cells=total, failures=fails, checks=out_checks)


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    rep = sweep(config, seed=args.seed, threads=args.threads)
    emit(args, rep)
    return 0 if rep["failures"] == 0 else 1


# ---- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "pretty"), default=None)
    common.add_argument("--output", "-o", default=None, help="file to write (default stdout)")
    common.add_argument("--seed", type=int, default=None)

    ap = argparse.ArgumentParser(prog="kzt", description="Kloosterman sums, kernels and density-bound tooling")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("char", parents=[common], help="character table mod q")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--parity", type=int, choices=(0, 1))
    p.add_argument("--primitive", action="store_true")
    p.set_defaults(func=cmd_char, default_format="csv")

    p = sub.add_parser("kloosterman", parents=[common], help="Kloosterman sums with the Weil ratio")
    p.add_argument("--variant", choices=("classical", "twisted", "restricted"), default="classical")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=int)
    p.add_argument("--c-range", help="lo:hi, inclusive")
    p.add_argument("--chi", help="character label q:e1,e2,...")
    p.add_argument("--a", type=int)
    p.add_argument("--modq", type=int, help="modulus of the residue class for the restricted variant")
    p.set_defaults(func=cmd_kloosterman, default_format="csv")

    p = sub.add_parser("hecke", parents=[common], help="Hecke algebra checks on a JSON fixture")
    p.add_argument("--fixture", required=True)
    p.add_argument("--check", choices=("relation", "abs-power", "gram", "gram-direct", "xi-norm"), required=True)
    p.add_argument("--q2", type=int)
    p.add_argument("--ell", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_hecke, default_format="json")

    p = sub.add_parser("kernel", parents=[common], help="test functions and Bessel integrals")
    p.add_argument("--name", required=True,
                   choices=("h-closed", "h-integral", "h-x", "bessel-k", "i-kappa", "int-r-i0", "int-r-i1"))
    p.add_argument("--kappa", type=int, choices=(0, 1))
    p.add_argument("--t", type=complex)
    p.add_argument("--T", type=float)
    p.add_argument("--X", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--zeta", type=complex)
    p.add_argument("--a", type=float)
    p.add_argument("--method", choices=analytic.METHODS)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--max-subdivisions", type=int)
    p.add_argument("--truncation", type=float)
    p.set_defaults(func=cmd_kernel, default_format="json")

    p = sub.add_parser("verify-lemma", parents=[common], help="one sum-lemma report")
    p.add_argument("--lemma", required=True, choices=geomside.LEMMAS)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--chi")
    p.add_argument("--sigma", type=float)
    p.add_argument("--c-max", type=int)
    p.add_argument("--method", choices=("fast", "direct"), default="fast")
    p.set_defaults(func=cmd_verify_lemma, default_format="json")

    p = sub.add_parser("bound", parents=[common], help="density-bound right-hand side")
    p.add_argument("--config")
    p.add_argument("--group")
    p.add_argument("--q", type=int)
    p.add_argument("--chi")
    p.add_argument("--T", type=float)
    p.add_argument("--alpha", action="append", help="p:alpha_p, repeatable")
    p.add_argument("--mu", action="append", help="p:mu_p, repeatable")
    p.add_argument("--alpha0", type=float)
    p.add_argument("--mu0", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--theorem", choices=("sarnak", "huxley"))
    p.add_argument("--squarefree", action="store_true")
    p.set_defaults(func=cmd_bound, default_format="pretty")

    p = sub.add_parser("sweep", parents=[common], help="run a JSON grid of checks")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_sweep, default_format="json")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.format is None:
        args.format = args.default_format
    try:
        return args.func(args)
    except UsageError as e:
        print(ap.format_usage().rstrip(), file=sys.stderr)
        print(f"kzt {args.command}: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"kzt {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
