"""Command-line front end: qfi, scan, optimize and oracle-check.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 numeric failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import fock_oracle, interferometer
from .errors import GaussMetroError, InvalidArgumentError, NumericFailure
from .estimation import compatibility_report, delta_ind, delta_sim
from .metrology import qfi_matrix

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "nbar": 1.0,
    "p": 0.5,
    "x": 0.8,
    "y": 0.3,
    "phi": 0.0,
    "format": "json",
    "output": None,
    "workers": None,
    "tolerance": 1e-4,
    "method": "analytic",
    "x_range": [0.25, 2.0, 20],
    "y_range": [0.5, 2.0, 20],
    "objectives": list(interferometer.OBJECTIVES),
    "margin": interferometer.CHANNEL_MARGIN,
    "engine": "closed-form",
    "objective": "all",
    "amplitude": None,
    "phase": 0.4,
    "r": None,
    "nth": 0.0,
    "params": "amplitude,phase,r,x,y",
    "cutoff": None,
    "h": 1e-4,
}
ORACLE_DEFAULTS = {"nbar": 0.5, "x": 0.7, "y": 0.5}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _shared(p):
    # defaults are None so that config-file values can fill the gaps
    p.add_argument("--nbar", type=float, help="mean photon number per mode")
    p.add_argument("--p", type=float, help="fraction of the energy in displacement")
    p.add_argument("--x", type=float, help="channel transmissivity parameter")
    p.add_argument("--y", type=float, help="channel noise parameter")
    p.add_argument("--phi", type=float, help="phase (the results do not depend on it)")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--workers", type=int, help="worker processes (default: available CPUs)")
    p.add_argument("--config", help="flat JSON object of option values")
    p.add_argument("--tolerance", type=float, help="check tolerance")


def build_parser():
    parser = _Parser(prog="gaussmetro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("qfi", help="information and commutator matrices at one point")
    _shared(q)
    q.add_argument("--method", choices=["analytic", "finite-difference"])

    s = sub.add_parser("scan", help="optimal energy splits over an (x, y) grid")
    _shared(s)
    s.add_argument("--x-range", dest="x_range", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    s.add_argument("--y-range", dest="y_range", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    s.add_argument("--objectives", nargs="+", choices=interferometer.OBJECTIVES)
    s.add_argument("--margin", type=float, help="skip points with y < |1 - x| + margin")
    s.add_argument("--exact-boundary", dest="margin", action="store_const", const=0.0,
                   help="keep points on the channel boundary (margin 0)")
    s.add_argument("--engine", choices=["closed-form", "generic"])

    o = sub.add_parser("optimize", help="optimal energy split at one channel")
    _shared(o)
    o.add_argument("--objective", choices=["all", "ind-combined", "ind-independent", "sim"])
    o.add_argument("--engine", choices=["closed-form", "generic"])

    c = sub.add_parser("oracle-check", help="compare the Gaussian engine with the number-basis oracle")
    _shared(c)
    c.add_argument("--amplitude", type=float, help="|alpha| (default sqrt(p nbar))")
    c.add_argument("--phase", type=float, help="arg alpha")
    c.add_argument("--r", type=float, help="squeezing (default asinh sqrt((1-p) nbar))")
    c.add_argument("--nth", type=float, help="thermal occupation before the channel")
    c.add_argument("--params", help="comma-separated parameters among amplitude,phase,r,nth,x,y")
    c.add_argument("--cutoff", type=int, help="fixed photon-number cutoff (default: automatic)")
    c.add_argument("--h", type=float, help="finite-difference step of the oracle")
    return parser


def resolve(args):
    """Merge flags > config file > defaults into a plain dict."""
    opts = dict(DEFAULTS)
    if args.command == "oracle-check":
        opts.update(ORACLE_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a flat JSON object")
        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        opts.update(config)
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command"):
            opts[key] = value
    opts["command"] = args.command
    return opts


def _grid(rng, name):
    try:
        lo, hi, steps = float(rng[0]), float(rng[1]), rng[2]
    except (TypeError, ValueError, IndexError):
        raise UsageError(f"{name} needs MIN MAX STEPS") from None
    if steps != int(steps) or int(steps) < 1:
        raise UsageError(f"{name} needs a positive integer number of steps, got {steps}")
    if not lo <= hi:
        raise UsageError(f"{name} needs MIN <= MAX")
    return np.linspace(lo, hi, int(steps))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o).__name__)


def _dumps(obj):
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _emit(text, output):
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v):
    return "%.17g" % v


# ----------------------------------------------------------------- commands

def cmd_qfi(opts):
    nbar, p, x, y, phi = (float(opts[k]) for k in ("nbar", "p", "x", "y", "phi"))
    family = interferometer.scheme_family(nbar, p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = qfi_matrix(family, [phi, x, y], opts["method"])
    F, J = report.F, report.J
    out = {
        "parameters": list(interferometer.PARAMETERS),
        "inputs": {"nbar": nbar, "p": p, "x": x, "y": y, "phi": phi},
        "F": F,
        "J": J,
        "nu": report.nu,
        "compatibility": compatibility_report(F, J).to_record(),
        "diagnostics": report.diagnostics,
        "warnings": list(report.diagnostics.get("warnings", [])),
    }
    try:
        out["delta_ind"] = delta_ind(F)
        out["delta_sim"] = delta_sim(F)
        out["ratio"] = out["delta_ind"] / out["delta_sim"]
    except NumericFailure as exc:
        out["warnings"].append(f"total variances undefined: {exc}")
        out["delta_ind"] = out["delta_sim"] = out["ratio"] = None
    for w in out["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    if opts["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = interferometer.PARAMETERS
        w.writerow(["quantity", *names])
        for label, M in (("F", F), ("J", J)):
            for a, row in zip(names, M):
                w.writerow([f"{label}[{a}]", *map(_fmt, row)])
        _emit(buf.getvalue(), opts["output"])
    else:
        _emit(_dumps(out), opts["output"])
    return EXIT_OK


def _scan_task(args):
    nbar, x, y, objectives, phi, engine = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return interferometer.scan_point(nbar, x, y, objectives, phi, engine)


def scan_records(nbar, xs, ys, objectives, phi=0.0, engine="closed-form", margin=interferometer.CHANNEL_MARGIN,
                 workers=1):
    """Records in y-major, then x, order, plus the number of skipped points."""
    points, skipped = [], 0
    for y in ys:
        for x in xs:
            if interferometer.channel_is_valid(x, y, margin):
                points.append((float(x), float(y)))
            else:
                skipped += 1
    tasks = [(nbar, x, y, tuple(objectives), phi, engine) for x, y in points]
    if workers == 1 or len(tasks) < 2:
        records = [_scan_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (4 * workers))
            records = list(pool.map(_scan_task, tasks, chunksize=chunk))
    return records, skipped


def cmd_scan(opts):
    xs, ys = _grid(opts["x_range"], "--x-range"), _grid(opts["y_range"], "--y-range")
    nbar = float(opts["nbar"])
    if nbar <= 0:
        raise InvalidArgumentError("scan needs nbar > 0")
    workers = opts["workers"] or os.cpu_count() or 1
    if workers < 1:
        raise UsageError("--workers must be positive")
    objectives = [o for o in interferometer.OBJECTIVES if o in opts["objectives"]]
    records, skipped = scan_records(nbar, xs, ys, objectives, float(opts["phi"]), opts["engine"],
                                    float(opts["margin"]), workers)
    if opts["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(interferometer.SCAN_COLUMNS)
        for rec in records:
            w.writerow([_fmt(rec[c]) for c in interferometer.SCAN_COLUMNS])
        text = buf.getvalue()
        print(f"{len(records)} points, {skipped} skipped", file=sys.stderr)
    else:
        meta = {
            "nbar": nbar,
            "x_range": list(opts["x_range"]),
            "y_range": list(opts["y_range"]),
            "phi": float(opts["phi"]),
            "objectives": objectives,
            "engine": opts["engine"],
            "margin": float(opts["margin"]),
            "points": len(records),
            "skipped": skipped,
        }
        clean = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
                 for r in records]
        text = _dumps({"metadata": meta, "records": clean})
    _emit(text, opts["output"])
    return EXIT_OK


def cmd_optimize(opts):
    nbar, x, y, phi = (float(opts[k]) for k in ("nbar", "x", "y", "phi"))
    which = opts["objective"]
    out = {"inputs": {"nbar": nbar, "x": x, "y": y, "phi": phi}, "engine": opts["engine"]}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        for kind in ("ind-combined", "sim"):
            if which in ("all", kind):
                res = interferometer.optimize_p(nbar, x, y, kind, phi, opts["engine"])
                out[kind] = {"p_opt": res.p_opt, "delta_opt": res.delta_opt, "multimodal": res.multimodal}
        if which in ("all", "ind-independent"):
            delta, ps = interferometer.delta_ind_independent(nbar, x, y, phi, opts["engine"])
            out["ind-independent"] = {"delta_opt": delta, "p_opt": dict(zip(interferometer.PARAMETERS, ps))}
    if "ind-combined" in out and "sim" in out:
        out["ratio"] = out["ind-combined"]["delta_opt"] / out["sim"]["delta_opt"]
    out["warnings"] = [str(w.message) for w in caught]
    for w in out["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    _emit(_dumps(out), opts["output"])
    return EXIT_OK


def cmd_oracle_check(opts):
    nbar, p = float(opts["nbar"]), float(opts["p"])
    if nbar < 0 or not 0 <= p <= 1:
        raise InvalidArgumentError("need nbar >= 0 and p in [0, 1]")
    amplitude = opts["amplitude"] if opts["amplitude"] is not None else math.sqrt(p * nbar)
    r = opts["r"] if opts["r"] is not None else math.asinh(math.sqrt((1 - p) * nbar))
    model = fock_oracle.SingleModeModel(float(amplitude), float(opts["phase"]), float(r), float(opts["nth"]),
                                        float(opts["x"]), float(opts["y"]))
    names = [n.strip() for n in str(opts["params"]).split(",") if n.strip()]
    valid = ("amplitude", "phase", "r", "nth", "x", "y")
    if not names or any(n not in valid for n in names):
        raise UsageError(f"--params must list names among {','.join(valid)}")
    tol = float(opts["tolerance"])
    oracle = fock_oracle.oracle_qfi_j(model, names, opts["cutoff"], float(opts["h"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        engine = qfi_matrix(fock_oracle.gaussian_family(model, names), [getattr(model, n) for n in names])
    moments = fock_oracle.moment_check(model, opts["cutoff"])
    dev_F = float(np.max(np.abs(oracle.F - engine.F)))
    dev_J = float(np.max(np.abs(oracle.J - engine.J)))
    sld_mean = float(np.max(np.abs(oracle.sld_means)))
    max_moment = max(moments.values())
    checks = {
        "F": dev_F <= tol,
        "J": dev_J <= tol,
        "sld_zero_mean": sld_mean <= 1e-8,
        "moments": max_moment <= 1e-6,
    }
    ok = all(checks.values())
    out = {
        "parameters": names,
        "model": {f: getattr(model, f) for f in valid},
        "cutoff": oracle.cutoff,
        "leakage": oracle.leakage,
        "tolerance": tol,
        "max_deviation_F": dev_F,
        "max_deviation_J": dev_J,
        "max_sld_mean": sld_mean,
        "moment_residuals": {str(k): v for k, v in moments.items()},
        "F_oracle": oracle.F,
        "F_engine": engine.F,
        "J_oracle": oracle.J,
        "J_engine": engine.J,
        "checks": checks,
        "pass": ok,
    }
    print(f"oracle-check {'PASS' if ok else 'FAIL'}: max deviation F {dev_F:.3e}, J {dev_J:.3e} "
          f"(tolerance {tol:g})", file=sys.stderr)
    _emit(_dumps(out), opts["output"])
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"qfi": cmd_qfi, "scan": cmd_scan, "optimize": cmd_optimize, "oracle-check": cmd_oracle_check}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = resolve(args)
        return COMMANDS[opts["command"]](opts)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgumentError, GaussMetroError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
