"""Command line interface: ``pseudomode {estimate,losscurve,trace,certify,synth}``.

Settings come from built-in defaults, then an optional JSON config file
(``--config`` or ``$PSEUDOMODE_CONFIG``), then command line flags.

Exit status: 0 success (all results certified), 1 input or usage error,
2 at least one uncertified result or failed certificate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys

import numpy as np

from . import __version__
from .estimator import DEFAULT_K, METHODS, estimate, normalize
from .losses import SmoothedHammingLoss, region_boundaries
from .objective import Objective, certificate_bound, unimodality_check

log = logging.getLogger("pseudomode")

EXIT_OK, EXIT_INPUT, EXIT_UNCERTIFIED = 0, 1, 2
CONFIG_ENV = "PSEUDOMODE_CONFIG"
MALFORMED_LIMIT = 0.10

DEFAULTS = {
    "input": "-",
    "column": None,
    "method": "auto",
    "k": DEFAULT_K,
    "m": 2.0,
    "epsilon": 1e-6,
    "grid": None,
    "format": None,
    "delimiter": None,
    "seed": 0,
    "budget": None,
}

_NUMBER = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


class InputError(Exception):
    pass


# -- data ingestion ----------------------------------------------------------


def parse_number(cell):
    """Parse a dot-decimal or scientific literal; ``None`` if the cell is not one."""
    cell = cell.strip()
    if not _NUMBER.match(cell):
        return None
    v = float(cell)
    return v if math.isfinite(v) else None


def read_table(text, delimiter=None):
    """Split delimited text into ``(header, columns)``; cells stay strings.

    The delimiter is sniffed among comma, tab and semicolon unless given. The
    first row is a header when none of its cells is numeric.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("input is empty")
    if delimiter is None:
        try:
            delimiter = csv.Sniffer().sniff("\n".join(lines[:50]), delimiters=",\t;").delimiter
        except csv.Error:
            delimiter = ","
    rows = list(csv.reader(lines, delimiter=delimiter))
    width = max(len(r) for r in rows)
    rows = [r + [""] * (width - len(r)) for r in rows]
    if all(parse_number(c) is None for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    else:
        header = [str(i) for i in range(width)]
    if not rows:
        raise InputError("input has a header but no data rows")
    columns = [[r[j] for r in rows] for j in range(width)]
    return header, columns


def select_columns(header, selectors):
    if not selectors:
        return list(range(len(header)))
    out = []
    for sel in selectors:
        for part in str(sel).split(","):
            part = part.strip()
            if part in ("all", "both"):
                out.extend(range(len(header)))
            elif part in header:
                out.append(header.index(part))
            elif re.fullmatch(r"\d+", part) and int(part) < len(header):
                out.append(int(part))
            else:
                raise InputError(f"no column {part!r} (have {header})")
    return list(dict.fromkeys(out))


def numeric_column(name, cells):
    """Parse a column, skipping bad cells; too many malformed cells is an error."""
    values, malformed = [], 0
    filled = [c for c in cells if c.strip()]
    for c in filled:
        v = parse_number(c)
        if v is None:
            malformed += 1
        else:
            values.append(v)
    if not values:
        raise InputError(f"column {name!r} has no numeric values")
    if malformed:
        if malformed > MALFORMED_LIMIT * len(filled):
            raise InputError(f"column {name!r}: {malformed} of {len(filled)} cells are not numeric")
        log.warning("column %r: skipped %d non-numeric cell(s)", name, malformed)
    return np.array(values), malformed


def load_columns(cfg):
    path = cfg["input"]
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    header, columns = read_table(text, cfg["delimiter"])
    out = []
    for j in select_columns(header, cfg["column"]):
        values, skipped = numeric_column(header[j], columns[j])
        out.append((header[j], values, skipped))
    return out


# -- output ------------------------------------------------------------------


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def emit(records, fmt, out):
    if fmt == "json":
        json.dump(records, out, indent=2, default=_clean)
        out.write("\n")
        return
    if not records:
        return
    fields = list(records[0])
    writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: ("" if v is None else (";".join(map(repr, v)) if isinstance(v, (list, tuple)) else v))
                         for k, v in rec.items()})


# -- subcommands --------------------------------------------------------------


def cmd_estimate(cfg, out):
    status = EXIT_OK
    records = []
    for name, values, skipped in load_columns(cfg):
        rep = estimate(values, cfg["method"], cfg["k"], cfg["m"], cfg["epsilon"],
                       grid_size=cfg["grid"] or 1_000_001, max_evals=cfg["budget"])
        if not rep.certified:
            status = EXIT_UNCERTIFIED
        d = rep.to_dict()
        d.pop("diagnostics")
        records.append({"column": name, "n": int(values.size), "skipped": skipped, **d,
                        "diagnostics": rep.diagnostics})
    emit(records, cfg["format"] or "json", out)
    return status


def cmd_losscurve(cfg, out):
    loss = SmoothedHammingLoss(cfg["k"], cfg["m"])
    half = cfg["range"] if cfg["range"] is not None else 5.0 / loss.k
    points = cfg["grid"] or 1001
    if points % 2 == 0:
        points += 1  # keep x = 0 on the grid
    xs = np.linspace(-half, half, points)
    xs[points // 2] = 0.0
    d1, d2, _ = loss.derivatives(xs)
    vals = loss(xs)
    records = [
        {"x": float(x), "value": float(v), "d1": float(a), "d2": float(b), "region": loss.region(x).value}
        for x, v, a, b in zip(xs, vals, d1, d2)
    ]
    emit(records, cfg["format"] or "csv", out)
    return EXIT_OK


def cmd_trace(cfg, out):
    status = EXIT_OK
    records = []
    for name, values, _ in load_columns(cfg):
        rep = estimate(values, cfg["method"], cfg["k"], cfg["m"], cfg["epsilon"],
                       max_evals=cfg["budget"], trace=True)
        if rep.method not in ("pseudo-lipschitz", "pseudo-quasi"):
            raise InputError("trace needs a pseudo-mode method")
        if not rep.certified:
            status = EXIT_UNCERTIFIED
        if rep.method == "pseudo-lipschitz":
            for it, x, v, s, gap, evals in rep.trace:
                records.append({"column": name, "method": rep.method, "iteration": it, "x": x, "value": v,
                                "score": s, "gap": gap, "evaluations": evals})
        else:
            for row in rep.trace:
                records.append({"column": name, "method": rep.method, "iteration": row.iteration,
                                "queried": list(row.queried), "low": row.low, "high": row.high,
                                "width": row.width, "evaluations": row.evaluations})
    emit(records, cfg["format"] or "csv", out)
    return status


def certify_samples(samples, k, grid_size=10_001):
    """All quasi-convexity diagnostics for one normalized dataset."""
    obj = Objective(samples, k, 2.0)
    bound = certificate_bound(k)
    x_F, max_F = obj.certificate_max(grid_size)
    qc = obj.quasiconvexity_check(grid_size=grid_size)
    xs = np.linspace(0.0, 1.0, grid_size)
    uni = unimodality_check(obj.values(xs), xs)
    checks = {
        "bound_below_4": bound < 4,
        "max_F_below_4": max_F < 4,
        "max_F_within_bound": max_F <= bound * (1 + 1e-12),
        "quasiconvexity": qc.passed,
        "unimodality": uni.passed,
    }
    violations = {"quasiconvexity": qc.violation_x, "unimodality": uni.violation_x}
    first = next((violations.get(c) for c, ok in checks.items() if not ok and violations.get(c) is not None), None)
    return {
        "k": k,
        "max_F": max_F,
        "max_F_at": x_F,
        "bound": bound,
        "checks": checks,
        "passed": all(checks.values()),
        "first_violation": first,
        "violations": violations,
    }


def cmd_certify(cfg, out):
    if cfg["m"] != 2:
        raise InputError("certify requires m = 2")
    status = EXIT_OK
    records = []
    for name, values, _ in load_columns(cfg):
        samples = normalize(values)
        rec = certify_samples(samples, cfg["k"], cfg["grid"] or 10_001)
        if not rec["passed"]:
            status = EXIT_UNCERTIFIED
        records.append({"column": name, **rec})
    if (cfg["format"] or "json") == "csv":
        records = [{"column": r["column"], "k": r["k"], "max_F": r["max_F"], "bound": r["bound"],
                    **r["checks"], "passed": r["passed"], "first_violation": r["first_violation"]} for r in records]
    emit(records, cfg["format"] or "json", out)
    return status


def synth_mixture(n=200, seed=0, mass=None, fraction=0.8, low=0.0, high=1.0, outlier=None):
    """Point mass plus uniform noise, shuffled. Returns ``(values, mass)``."""
    rng = np.random.default_rng(seed)
    if mass is None:
        mass = float(rng.uniform(low + 0.1 * (high - low), high - 0.1 * (high - low)))
    n_mass = int(round(fraction * n))
    values = np.concatenate([np.full(n_mass, mass), rng.uniform(low, high, n - n_mass)])
    rng.shuffle(values)
    if outlier is not None:
        values = np.append(values, outlier)
    return values, mass


def cmd_synth(cfg, out):
    values, _ = synth_mixture(cfg["n"], cfg["seed"], cfg["mass"], cfg["fraction"], cfg["low"], cfg["high"],
                              cfg["outlier"])
    if (cfg["format"] or "csv") == "json":
        json.dump({"v": values.tolist()}, out)
        out.write("\n")
    else:
        out.write("v\n")
        out.writelines(f"{v!r}\n" for v in values.tolist())
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "losscurve": cmd_losscurve,
    "trace": cmd_trace,
    "certify": cmd_certify,
    "synth": cmd_synth,
}


# -- argument handling ---------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--k", type=float, default=S, help=f"loss scale (default {DEFAULT_K})")
    common.add_argument("--m", type=float, default=S, help="loss smoothing (default 2)")
    common.add_argument("--format", choices=("json", "csv"), default=S)
    common.add_argument("-v", "--verbose", action="store_true", default=S)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", "-i", default=S, help="CSV file, or - for stdin (default)")
    data.add_argument("--column", "-c", action="append", default=S,
                      help="column name or 0-based index; repeatable; 'all' for every column")
    data.add_argument("--delimiter", default=S, help="field delimiter (default: sniffed)")
    data.add_argument("--method", choices=METHODS + ("auto",), default=S)
    data.add_argument("--epsilon", type=float, default=S)
    data.add_argument("--grid", type=int, default=S, help="grid size for oracle / diagnostics")
    data.add_argument("--budget", type=int, default=S, help="maximum objective evaluations")

    p = argparse.ArgumentParser(prog="pseudomode", description="Robust pseudo-mode location estimates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common, data], help="location estimate per column")
    lc = sub.add_parser("losscurve", parents=[common], help="tabulate the loss, derivatives and regions")
    lc.add_argument("--range", type=float, default=S, help="half-width of the x grid (default 5/k)")
    lc.add_argument("--grid", type=int, default=S, help="number of grid points (default 1001)")
    sub.add_parser("trace", parents=[common, data], help="optimizer iterations")
    sub.add_parser("certify", parents=[common, data], help="quasi-convexity diagnostics")
    sy = sub.add_parser("synth", parents=[common], help="point mass plus uniform noise dataset")
    sy.add_argument("--n", type=int, default=S)
    sy.add_argument("--seed", type=int, default=S)
    sy.add_argument("--mass", type=float, default=S)
    sy.add_argument("--fraction", type=float, default=S)
    sy.add_argument("--low", type=float, default=S)
    sy.add_argument("--high", type=float, default=S)
    sy.add_argument("--outlier", type=float, default=S)
    return p


def load_config(path):
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise InputError("config file must hold a JSON object")
    if "column" in cfg and not isinstance(cfg["column"], list):
        cfg["column"] = [cfg["column"]]
    return cfg


def resolve(args, environ=None):
    environ = os.environ if environ is None else environ
    flags = vars(args)
    cfg = dict(DEFAULTS, range=None, n=200, mass=None, fraction=0.8, low=0.0, high=1.0, outlier=None, verbose=False)
    cfg.update(load_config(flags.get("config") or environ.get(CONFIG_ENV)))
    cfg.update(flags)
    return cfg


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve(args)
        log.setLevel(logging.INFO if cfg["verbose"] else logging.WARNING)
        return COMMANDS[cfg["command"]](cfg, out)
    except (InputError, ValueError) as exc:
        print(f"pseudomode: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
