"""Command-line front end.

    ddhilbert analyze --poly "t1*t2"
    ddhilbert sum     --poly "t1*t2" --xi 0,0,0.123 --N1 4096 --N2 4096
    ddhilbert scan    --poly "t1*t2" --grid-file xi.csv --schedule 16,64,256,1024
    ddhilbert gauss   --poly "t1^2*t2" --j2 10 --qmax 199
    ddhilbert arcs    --poly "t1^2*t2" --xi3 1/3 --grid 40x20
    ddhilbert verify  --poly "t1^2*t2" --check major --xi3 1/3 --j 30,8

Any flag may also come from a key=value file given with --config; flags on
the command line win. Output is JSON or CSV, to --out or stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import expsum
from .arcs import grid_reports, reports_to_csv
from .newton import build, decide_boundedness
from .numtheory import fit_decay, gauss_fiber_average, gauss_full
from .polynomial import ParseError, coefficient_ratio_constant, parse, render
from .rational import to_fraction
from . import verify as V

log = logging.getLogger("ddhilbert")

EXIT_OK, EXIT_ERROR, EXIT_UNBOUNDED, EXIT_CONTRADICTION = 0, 1, 2, 3

# per-command defaults; None means required
DEFAULTS = {
    "analyze": {"poly": None},
    "sum": {"poly": None, "xi": None, "N1": None, "N2": None, "quadrants": "all",
            "method": "auto"},
    "scan": {"poly": None, "grid_file": "", "grid": "", "schedule": "16,64,256,1024",
             "method": "auto"},
    "gauss": {"poly": None, "j2": None, "qmax": None, "a": "1", "all_q": "false"},
    "arcs": {"poly": None, "xi3": None, "grid": None, "vertex": ""},
    "verify": {"poly": None, "check": "theorem", "xi3": "", "j": "", "window": "16",
               "schedule": "8,16,32,64,128,256", "grid_file": "", "grid": "",
               "tol": "", "require_class": "false"},
}


def _ints(s: str) -> list[int]:
    return [int(x) for x in str(s).replace("x", ",").split(",") if x.strip()]


def _bool(s) -> bool:
    return str(s).strip().lower() in ("1", "true", "yes", "on")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def read_config(path: str) -> dict[str, str]:
    cfg = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def read_grid(path: str = "", inline: str = "") -> list[Fraction]:
    vals = []
    if path:
        with open(path) as fh:
            for row in csv.reader(fh):
                if not row or not row[0].strip() or row[0].strip().startswith("#"):
                    continue
                try:
                    vals.append(to_fraction(row[0]))
                except (ValueError, ZeroDivisionError):
                    if vals:
                        raise
                    continue   # header line
    if inline:
        vals.extend(to_fraction(x) for x in inline.split(","))
    return vals


# ---------------------------------------------------------------- commands

def cmd_analyze(o) -> tuple[str, int]:
    P = parse(o.poly)
    N = build(P)
    v = decide_boundedness(N)
    rep = N.to_json()
    rep.update({"polynomial": render(P), "bounded": v.bounded,
                "witness": list(v.witness) if v.witness else None,
                "C": coefficient_ratio_constant(P)})
    return _dump_json(rep), EXIT_OK if v.bounded else EXIT_UNBOUNDED


def sum_json(res: expsum.SumResult, ctx) -> dict:
    return {"value": [res.value.real, res.value.imag], "abs_error_bound": res.abs_error_bound,
            "terms": res.terms, "method": res.method, "xi_represented": expsum.describe(ctx)}


def cmd_sum(o) -> tuple[str, int]:
    P = parse(o.poly)
    xi = [x.strip() for x in o.xi.split(",")]
    ctx = expsum.as_context(xi)
    res = expsum.hilbert_sum(P, int(o.N1), int(o.N2), ctx, quadrants=o.quadrants,
                             method=o.method, workers=o.workers)
    return _dump_json(sum_json(res, ctx)), EXIT_OK


def scan_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "sup_abs"])
    for n, v in table:
        w.writerow([n, repr(float(v))])
    return buf.getvalue()


def cmd_scan(o) -> tuple[str, int]:
    P = parse(o.poly)
    grid = read_grid(o.grid_file, o.grid)
    if not grid:
        raise ValueError("scan needs --grid-file or --grid")
    table = expsum.partial_sup_scan(P, grid, _ints(o.schedule), method=o.method,
                                    workers=o.workers)
    return scan_csv(table), EXIT_OK


def gauss_table(P, j2: int, qmax: int, a: int = 1, all_q: bool = False):
    from sympy import primerange
    import math
    qs = range(2, qmax + 1) if all_q else primerange(2, qmax + 1)
    rows = []
    for q in qs:
        if math.gcd(a, q) != 1:
            continue
        rows.append((q, a, gauss_fiber_average(P, j2, a, q), gauss_full(P, a, q, (0, 0)).magnitude))
    return rows


def gauss_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "a", "avg", "magnitude"])
    for q, a, avg, mag in rows:
        w.writerow([q, a, repr(float(avg)), repr(float(mag))])
    pts = [(q, avg) for q, _, avg, _ in rows if avg > 0]
    if len(pts) >= 3:
        f = fit_decay(pts)
        buf.write(f"# fit delta={f.exponent!r} C={f.constant!r} r2={f.r_squared!r}\n")
    return buf.getvalue()


def cmd_gauss(o) -> tuple[str, int]:
    P = parse(o.poly)
    rows = gauss_table(P, int(o.j2), int(o.qmax), int(o.a), _bool(o.all_q))
    return gauss_csv(rows), EXIT_OK


def cmd_arcs(o) -> tuple[str, int]:
    P = parse(o.poly)
    J1, J2 = _ints(o.grid)
    N = build(P)
    if o.vertex:
        reps = grid_reports(o.xi3, tuple(_ints(o.vertex)), J1, J2)
    else:
        from .arcs import classify
        from .newton import dual_face_of
        x = to_fraction(o.xi3)
        reps = [classify((j1, j2), x, N.vertices[dual_face_of(N, (j1, j2))])
                for j1 in range(J1 + 1) for j2 in range(min(j1, J2) + 1)]
    return reports_to_csv(reps), EXIT_OK


def cmd_verify(o) -> tuple[str, int]:
    P = parse(o.poly)
    check = o.check
    tol = float(o.tol) if o.tol else None
    strict = _bool(o.require_class)
    out = {"polynomial": render(P), "check": check}
    if check == "theorem":
        grid = read_grid(o.grid_file, o.grid) or None
        v = V.theorem_crosscheck(P, grid, _ints(o.schedule), workers=o.workers)
        out["verdict"] = v.to_json()
        bad = v.contradiction
    elif check in ("major", "poisson"):
        j = tuple(_ints(o.j))
        if check == "major":
            r = V.major_arc_approx_check(P, j, o.xi3, tol=tol, workers=o.workers)
        else:
            r = V.poisson_identity_check(P, j, o.xi3, w_window=int(o.window),
                                         tol=1e-3 if tol is None else tol,
                                         require_flat=strict, workers=o.workers)
        out["report"] = r.to_json()
        bad = not r.passed
    elif check == "minor":
        j = tuple(_ints(o.j))
        r = V.minor_arc_bound_check(P, o.xi3, j, workers=o.workers)
        out["report"] = r.to_json()
        bad = not r.bound_holds
    else:
        raise ValueError(f"unknown check {check!r}")
    out["contradiction"] = bool(bad)
    return _dump_json(out), EXIT_CONTRADICTION if bad else EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "sum": cmd_sum, "scan": cmd_scan, "gauss": cmd_gauss,
            "arcs": cmd_arcs, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddhilbert", description=__doc__.split("\n")[0])
    ap.add_argument("--log-level", default="WARNING")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, opts in DEFAULTS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key=value file mirroring the flags")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default ${expsum.WORKERS_ENV} or CPU count)")
        for key in opts:
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, default=None)
    return ap


def resolve(o: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from --config, then from DEFAULTS."""
    cfg = read_config(o.config) if o.config else {}
    for key, default in DEFAULTS[o.command].items():
        if getattr(o, key) is None:
            setattr(o, key, cfg.get(key, default))
        if getattr(o, key) is None:
            raise ValueError(f"missing required option --{key.replace('_', '-')}")
    if o.workers is None and "workers" in cfg:
        o.workers = int(cfg["workers"])
    if o.out is None and "out" in cfg:
        o.out = cfg["out"]
    return o


def main(argv=None) -> int:
    ap = build_parser()
    o = ap.parse_args(argv)
    logging.basicConfig(level=getattr(logging, o.log_level.upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        o = resolve(o)
        text, code = COMMANDS[o.command](o)
    except ParseError as e:
        print(f"error: polynomial: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, RuntimeError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if o.out:
        with open(o.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
