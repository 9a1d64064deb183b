"""Command-line front end: ``pdqkit <command> [options]``.

Every command writes CSV or JSON to ``--output`` (default: stdout). Errors
are reported as one JSON object on stderr with exit status 2 (usage),
3 (numerical failure) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import numerics
from .catalog import FamilyGrid, parse_family_spec
from .divergence import map_locus, write_locus_csv
from .errors import NumericalError, PdqError
from .iterate import iterate_grid, kappa_diagnostics, moment_sequence, write_trace_csv
from .pdq import read_pdq_csv, reconstruct_cdf, star_transform, write_pdq_csv
from .uniftest import (
    alt_moments,
    asymptotic_power,
    mc_estimate,
    np_test,
    sample_pdq,
)

__all__ = ["main", "build_parser", "TABLE1_FAMILIES", "MAP_DEFAULTS"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

TABLE1_FAMILIES = ("normal", "logistic", "laplace", "t:nu=2", "cauchy", "exponential",
                   "gumbel", "lognormal", "pareto:a=1")

# default loci for `map`: family spec, swept parameter, lo, hi, steps
MAP_DEFAULTS = {
    "chi2": ("chi2", "nu", 2.0, 20.0, 37),
    "weibull": ("weibull", "k", 0.6, 5.0, 45),
    "pareto": ("pareto", "a", 0.2, 5.0, 49),
    "power": ("power", "b", 0.55, 5.0, 90),
    "tukey": ("tukey", "lam", -0.45, 1.0, 30),
    "lognormal": ("lognormal", "sigma", 0.1, 2.0, 39),
}


class UsageError(PdqError, ValueError):
    """Invalid command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env(name: str, default, kind):
    raw = os.environ.get(f"PDQKIT_{name}")
    if raw is None:
        return default
    try:
        return kind(raw)
    except ValueError as exc:
        raise UsageError(f"PDQKIT_{name}={raw!r} is not a valid {kind.__name__}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="random seed (default 0; env PDQKIT_SEED)")
    p.add_argument("--grid-size", type=int, default=None,
                   help="chart nodes for grid pdQs (default 4097; env PDQKIT_GRID_SIZE)")
    p.add_argument("--tol", type=float, default=None,
                   help="absolute quadrature tolerance (default 1e-10; env PDQKIT_TOL)")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default depends on the command)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdqkit", description="Probability density quantile toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("table1", help="divergence and power columns for nine reference families")
    _common(p)
    p.add_argument("--family", action="append", default=None,
                   help="family spec (repeatable; default: nine reference families)")

    p = sub.add_parser("map", help="map loci (s1, s2, distance) over family parameters")
    _common(p)
    p.add_argument("--family", action="append", default=None,
                   help=f"family spec; default: {', '.join(MAP_DEFAULTS)}")
    p.add_argument("--sweep", default=None, help="key=lo:hi:steps (needed for families "
                   "without a default sweep)")

    p = sub.add_parser("iterate", help="trace repeated *-iterates")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="family spec")
    src.add_argument("--input", help="pdQ CSV (u,density) taken as the first iterate")
    p.add_argument("--engine", choices=("moments", "grid"), default="grid")
    p.add_argument("--n", type=int, default=8, help="number of iterates (default 8)")
    p.add_argument("--r", default="2", help="comma-separated L_r exponents (grid engine) "
                   "or the largest r for moment bounds (default 2)")
    p.add_argument("--dump", default=None, help="directory for iterate CSVs (grid engine)")

    p = sub.add_parser("power", help="power of the NP test, or a power curve with --sweep")
    _common(p)
    p.add_argument("--alt", required=True, help="alternative family spec")
    p.add_argument("--m", type=int, required=True, help="sample size")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mode", choices=("asymptotic", "monte_carlo"), default="asymptotic")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--sweep", default=None, help="key=lo:hi:steps over the alternative")

    p = sub.add_parser("test", help="run the NP test on a sample file")
    _common(p)
    p.add_argument("--alt", required=True, help="alternative family spec")
    p.add_argument("--input", required=True, help="one value per line, or single-column CSV")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--mode", choices=("asymptotic", "exact_normal", "monte_carlo"),
                   default="asymptotic")
    p.add_argument("--reps", type=int, default=10_000)

    p = sub.add_parser("sample", help="seeded draws from a pdQ")
    _common(p)
    p.add_argument("--alt", required=True, help="family spec whose pdQ is sampled")
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("reconstruct", help="cdf whose pdQ is the given pdQ CSV")
    _common(p)
    p.add_argument("--input", required=True, help="pdQ CSV (u,density)")
    p.add_argument("--points", type=int, default=1001, help="x grid size (default 1001)")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) if isinstance(v, (float, np.floating))
                    else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (float, np.floating)):
            v = float(v)
            return v if math.isfinite(v) else str(v)
        if isinstance(v, np.integer):
            return int(v)
        return v
    return json.dumps(clean(obj), indent=2, sort_keys=False) + "\n"


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)


def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    """``key=lo:hi:steps`` as a parameter name and evenly spaced values."""
    key, eq, rng = text.partition("=")
    parts = rng.split(":")
    if not eq or len(parts) != 3:
        raise UsageError(f"malformed sweep {text!r}: expected key=lo:hi:steps")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"malformed sweep {text!r}") from exc
    if steps < 1:
        raise UsageError("sweep needs at least one step")
    return key.strip(), np.linspace(lo, hi, steps)


def _with_param(spec: str, key: str, value: float) -> str:
    name, _, rest = spec.partition(":")
    items = [s for s in rest.split(",") if s.strip() and s.partition("=")[0].strip() != key]
    items.append(f"{key}={value!r}")
    return f"{name}:{','.join(items)}"


def _read_sample(path: str) -> np.ndarray:
    vals = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if vals:
                    raise UsageError(f"{path}: non-numeric value {row[0]!r}")
                continue  # header line
    if not vals:
        raise UsageError(f"{path}: no sample values")
    return np.asarray(vals)


# ---------------------------------------------------------------------------
# commands


def cmd_table1(args) -> None:
    specs = args.family or list(TABLE1_FAMILIES)
    rows = []
    for spec in specs:
        am = alt_moments(star_transform(parse_family_spec(spec), grid_size=args.grid_size),
                         tol=args.tol)
        rows.append({"family": spec, "i_u_f": -am.mu0, "i_f_u": am.mu1, "sigma0": am.sigma0,
                     "sigma1": am.sigma1, "j": am.j, "j_over_sigma1": am.standardized_j,
                     "sigma0_over_sigma1": am.sigma_ratio})
    if args.format == "json":
        _emit(args, _json_text(rows))
    else:
        header = list(rows[0]) if rows else ["family"]
        _emit(args, _csv_text(header, [list(r.values()) for r in rows]))


def cmd_map(args) -> None:
    specs = args.family or list(MAP_DEFAULTS)
    loci = []
    for spec in specs:
        if args.sweep is not None:
            key, values = parse_sweep(args.sweep)
            name, _, rest = spec.partition(":")
        elif spec in MAP_DEFAULTS:
            name, key, lo, hi, steps = MAP_DEFAULTS[spec]
            values, rest = np.linspace(lo, hi, steps), ""
        else:
            raise UsageError(f"no default sweep for {spec!r}; pass --sweep key=lo:hi:steps")
        fixed = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            k, _, v = item.partition("=")
            fixed[k.strip()] = float(v)
        fixed.pop(key, None)
        loci.append(map_locus(FamilyGrid(name, key, tuple(float(v) for v in values), fixed),
                              tol=args.tol))
    if args.format == "json":
        _emit(args, _json_text([{"family": l.family, "param": l.param,
                                 "points": [p.__dict__ for p in l.points]} for l in loci]))
    else:
        _emit(args, write_locus_csv(loci))


def cmd_iterate(args) -> None:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if args.engine == "moments":
        if args.family is None:
            raise UsageError("the moments engine needs --family")
        dist = parse_family_spec(args.family)
        max_r = max(4, int(max(float(r) for r in args.r.split(","))))
        mu = moment_sequence(dist, args.n + max_r + 1)
        trace = kappa_diagnostics(mu, max_r, n_steps=args.n, sup0=dist.sup_pdf)
    else:
        try:
            r_list = [float(r) for r in args.r.split(",")]
        except ValueError as exc:
            raise UsageError(f"malformed --r {args.r!r}") from exc
        if args.family is not None:
            src = parse_family_spec(args.family)
        else:
            src = read_pdq_csv(args.input, grid_size=args.grid_size)
        trace = iterate_grid(src, args.n, r_list, grid_size=args.grid_size,
                             keep_iterates=args.dump is not None)
        if args.dump is not None:
            out = Path(args.dump)
            out.mkdir(parents=True, exist_ok=True)
            for step, g in zip(trace.steps, trace.iterates):
                write_pdq_csv(g, out / f"iterate_{step.n:03d}.csv")
    if args.format == "json":
        _emit(args, _json_text({
            "source": trace.source, "engine": trace.engine, "verdict": trace.verdict,
            "star_order": trace.star_order, "message": trace.message, "kappa0": trace.kappa0,
            "steps": [{"n": s.n, "kappa": s.kappa, "l2": s.l2,
                       "lr": {str(k): v for k, v in (s.lr or s.lr_bound).items()},
                       "sup_norm": s.sup_norm} for s in trace.steps]}))
    else:
        _emit(args, write_trace_csv(trace))
        sys.stderr.write(json.dumps({"verdict": trace.verdict, "star_order": trace.star_order,
                                     "message": trace.message}) + "\n")


def _power_one(spec: str, args):
    dist = parse_family_spec(spec)
    if args.mode == "asymptotic":
        return asymptotic_power(alt_moments(dist, tol=args.tol), args.m, args.alpha)
    return mc_estimate(star_transform(dist, grid_size=args.grid_size), args.m, args.alpha,
                       args.reps, args.seed, "power")


def cmd_power(args) -> None:
    if args.sweep is None:
        res = _power_one(args.alt, args)
        _emit(args, _json_text(res.to_dict()) if args.format != "csv"
              else _csv_text(["power", "std_error"], [[res.power, res.std_error or math.nan]]))
        return
    key, values = parse_sweep(args.sweep)
    rows = []
    for v in values:
        try:
            res = _power_one(_with_param(args.alt, key, float(v)), args)
            rows.append([float(v), res.power, res.std_error or math.nan, ""])
        except (PdqError, ValueError) as exc:
            rows.append([float(v), math.nan, math.nan, str(exc)])
    family = args.alt.partition(":")[0]
    if args.format == "json":
        _emit(args, _json_text([{"family": family, "param": r[0], "power": r[1],
                                 "std_error": r[2], "error": r[3] or None} for r in rows]))
    else:
        _emit(args, _csv_text(["family", "param", "power", "std_error", "m", "alpha", "mode"],
                              [[family, r[0], r[1], r[2], args.m, args.alpha, args.mode]
                               for r in rows]))


def cmd_test(args) -> None:
    x = _read_sample(args.input)
    alt = star_transform(parse_family_spec(args.alt), grid_size=args.grid_size)
    rep = np_test(x, alt, args.alpha, args.mode, reps=args.reps, seed=args.seed)
    d = rep.to_dict()
    if args.format == "csv":
        _emit(args, _csv_text(list(d), [list(d.values())]))
    else:
        _emit(args, _json_text(d))


def cmd_sample(args) -> None:
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    x = sample_pdq(star_transform(parse_family_spec(args.alt), grid_size=args.grid_size),
                   args.m, args.seed)
    if args.format == "json":
        _emit(args, _json_text([float(v) for v in x]))
    else:
        _emit(args, "".join(_fmt(v) + "\n" for v in x))


def cmd_reconstruct(args) -> None:
    g = read_pdq_csv(args.input, grid_size=args.grid_size)
    law = reconstruct_cdf(g)
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    x = np.linspace(0.0, 1.0, args.points)
    F = law.cdf(x)
    if args.format == "json":
        _emit(args, _json_text({"x": x.tolist(), "cdf": np.asarray(F).tolist()}))
    else:
        _emit(args, _csv_text(["x", "cdf"], zip(x, F)))


COMMANDS = {"table1": cmd_table1, "map": cmd_map, "iterate": cmd_iterate, "power": cmd_power,
            "test": cmd_test, "sample": cmd_sample, "reconstruct": cmd_reconstruct}


def _error(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__,
                                 "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the exit status."""
    parser = build_parser()
    defaults = numerics.DEFAULTS
    saved = (defaults.grid_size, defaults.quad_tol)
    try:
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = _env("SEED", 0, int)
        if args.grid_size is None:
            args.grid_size = _env("GRID_SIZE", saved[0], int)
        if args.tol is None:
            args.tol = _env("TOL", saved[1], float)
        if args.grid_size < 65:
            raise UsageError("--grid-size must be at least 65")
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        defaults.grid_size, defaults.quad_tol = args.grid_size, args.tol
        COMMANDS[args.command](args)
        return EXIT_OK
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    except NumericalError as exc:
        return _error("numeric", exc, EXIT_NUMERIC)
    except (PdqError, ValueError) as exc:
        return _error("usage", exc, EXIT_USAGE)
    finally:
        defaults.grid_size, defaults.quad_tol = saved


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
