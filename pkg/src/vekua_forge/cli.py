"""Command line front end.

Exit codes: 0 success, 1 usage or config error, 2 ellipticity failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .coeffexpr import EvalError, ParseError, parse_expr
from .ellsys import (
    COEFFICIENT_NAMES, REQUIRED, EllipticSystem, NotElliptic, PointEvalError, Region,
    SolutionPair, classify, delta, make_constant_structure_family, map_nodes,
)
from .rewrite import StageError, rewrite_at
from .verify import DEFAULT_TOL, grid_verify, residual_at

EXIT_OK, EXIT_CONFIG, EXIT_NOT_ELLIPTIC, EXIT_VERIFY_FAILED = 0, 1, 2, 3

CSV_FIELDS = (
    "x", "y", "alpha", "beta", "A_re", "A_im", "B_re", "B_im", "F_re", "F_im",
    "delta", "residual_re", "residual_im",
)
REGION_KEYS = ("x_min", "x_max", "y_min", "y_max", "nx", "ny")
THREADS_ENV = "VEKUA_FORGE_THREADS"


class ConfigError(Exception):
    pass


@dataclass
class ProblemConfig:
    system: dict[str, str]
    region: Region
    solution: dict[str, str] | None = None
    tolerance: float = DEFAULT_TOL

    def elliptic_system(self) -> EllipticSystem:
        return EllipticSystem(**{k: parse_expr(self.system.get(k, "0")) for k in COEFFICIENT_NAMES})

    def solution_pair(self) -> SolutionPair | None:
        if self.solution is None:
            return None
        return SolutionPair(parse_expr(self.solution["u"]), parse_expr(self.solution["v"]))


def _expr_text(section: str, key: str, value) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"[{section}] {key}: expected an expression string, got {value!r}")
    text = value if isinstance(value, str) else repr(value)
    try:
        parse_expr(text)
    except ParseError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r}: {exc}") from None
    return text


def parse_config(text: str) -> ProblemConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown = set(data) - {"system", "region", "solution", "tolerance"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")

    sys_table = data.get("system")
    if not isinstance(sys_table, dict):
        raise ConfigError("missing [system] section")
    bad = set(sys_table) - set(COEFFICIENT_NAMES)
    if bad:
        raise ConfigError(f"[system] unknown coefficients {sorted(bad)}")
    for key in REQUIRED:
        if key not in sys_table:
            raise ConfigError(f"[system] missing required coefficient {key}")
    system = {k: _expr_text("system", k, sys_table.get(k, "0")) for k in COEFFICIENT_NAMES}

    reg = data.get("region")
    if not isinstance(reg, dict):
        raise ConfigError("missing [region] section")
    missing = [k for k in REGION_KEYS if k not in reg]
    if missing or set(reg) - set(REGION_KEYS):
        raise ConfigError(f"[region] needs exactly the keys {', '.join(REGION_KEYS)}")
    try:
        for k in ("nx", "ny"):
            if not isinstance(reg[k], int) or isinstance(reg[k], bool):
                raise ValueError(f"{k} must be an integer")
        bounds = [float(reg[k]) for k in REGION_KEYS[:4]]
        region = Region(*bounds, reg["nx"], reg["ny"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[region] {exc}") from None

    solution = None
    if "solution" in data:
        sol = data["solution"]
        if not isinstance(sol, dict) or set(sol) != {"u", "v"}:
            raise ConfigError("[solution] needs exactly the keys u, v")
        solution = {k: _expr_text("solution", k, sol[k]) for k in ("u", "v")}

    tol = data.get("tolerance", DEFAULT_TOL)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise ConfigError(f"tolerance must be a positive number, got {tol!r}")
    return ProblemConfig(system, region, solution, float(tol))


def load_config(path: str) -> ProblemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dump_config(cfg: ProblemConfig) -> str:
    doc = {
        "tolerance": cfg.tolerance,
        "system": dict(cfg.system),
        "region": {k: getattr(cfg.region, k) for k in REGION_KEYS},
    }
    if cfg.solution is not None:
        doc["solution"] = dict(cfg.solution)
    return tomli_w.dumps(doc)


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def transform_record(sys_: EllipticSystem, pair: SolutionPair | None, x: float, y: float) -> dict:
    """One output record; failures give ``{"x", "y", "error"}``."""
    try:
        if pair is None:
            data = rewrite_at(sys_, x, y)
            res = None
        else:
            pr = residual_at(sys_, pair, x, y, manufacture=False)
            data, res = pr.data, pr.residual
        rec = {
            "x": x, "y": y, "alpha": data.s.alpha, "beta": data.s.beta,
            "A_re": data.A.re, "A_im": data.A.im, "B_re": data.B.re, "B_im": data.B.im,
            "F_re": data.F.re, "F_im": data.F.im, "delta": delta(sys_, x, y),
            "residual_re": None if res is None else res.re,
            "residual_im": None if res is None else res.im,
        }
    except (StageError, NotElliptic, EvalError, ArithmeticError) as exc:
        return {"x": x, "y": y, "error": str(exc)}
    if not all(math.isfinite(v) for v in rec.values() if v is not None):
        return {"x": x, "y": y, "error": "non-finite value"}
    return rec


def write_records(records: list[dict], fh, fmt: str) -> None:
    if fmt == "jsonl":
        for rec in records:
            fh.write(json.dumps(rec, allow_nan=False) + "\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        w.writerow([_fmt(rec.get(k)) for k in CSV_FIELDS])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NXxNY, got {text!r}") from None
    if nx < 2 or ny < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 nodes per direction")
    return nx, ny


def _bounds(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected XMIN,XMAX,YMIN,YMAX, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vekua-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out=False):
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--grid", type=_grid, metavar="NXxNY", help="override the config grid")
        if out:
            p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("classify", help="check ellipticity on the config grid")
    common(p)
    p = sub.add_parser("transform", help="write Vekua coefficients at every grid node")
    common(p)
    p.add_argument("--out", required=True, metavar="PATH", help="output file, '-' for stdout")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p = sub.add_parser("verify", help="residual check with a manufactured solution")
    common(p, out=True)
    p.add_argument("--tol", type=float, help="override the config tolerance")
    p = sub.add_parser("generate-family", help="write a config with constant alpha, beta")
    p.add_argument("alpha0", type=float)
    p.add_argument("beta0", type=float)
    p.add_argument("lam", nargs="?", default="1", metavar="LAMBDA")
    p.add_argument("mu", nargs="?", default="0", metavar="MU")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--region", type=_bounds, default=(0.0, 1.0, 0.0, 1.0),
                   metavar="XMIN,XMAX,YMIN,YMAX",
                   help="use --region=-1,1,-1,1 when XMIN is negative")
    p.add_argument("--grid", type=_grid, default=(20, 20), metavar="NXxNY")
    return parser


def _load(args) -> ProblemConfig:
    cfg = load_config(args.config)
    if args.grid:
        r = cfg.region
        cfg.region = Region(r.x_min, r.x_max, r.y_min, r.y_max, *args.grid)
    return cfg


def _classify(sys_: EllipticSystem, region: Region):
    """Print and return the classification, or None if it could not be evaluated."""
    try:
        result = classify(sys_, region)
    except (EvalError, PointEvalError) as exc:
        print(f"cannot classify: {exc}", file=sys.stderr)
        return None
    return result


def cmd_classify(args) -> int:
    cfg = _load(args)
    result = _classify(cfg.elliptic_system(), cfg.region)
    if result is None:
        return EXIT_NOT_ELLIPTIC
    print(result)
    return EXIT_OK if result else EXIT_NOT_ELLIPTIC


def _open_out(path: str):
    if path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def cmd_transform(args) -> int:
    cfg = _load(args)
    sys_ = cfg.elliptic_system()
    result = _classify(sys_, cfg.region)
    if not result:
        if result is not None:
            print(result, file=sys.stderr)
        return EXIT_NOT_ELLIPTIC
    pair = cfg.solution_pair()
    records = map_nodes(lambda x, y: transform_record(sys_, pair, x, y), cfg.region, _workers())
    with _open_out(args.out) as fh:
        write_records(records, fh, args.format)
    errors = sum("error" in r for r in records)
    print(f"wrote {len(records)} records ({errors} errors) to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args)
    pair = cfg.solution_pair()
    if pair is None:
        print("verify needs a [solution] section with u and v", file=sys.stderr)
        return EXIT_CONFIG
    sys_ = cfg.elliptic_system()
    result = _classify(sys_, cfg.region)
    if not result:
        if result is not None:
            print(result, file=sys.stderr)
        return EXIT_NOT_ELLIPTIC
    tol = args.tol if args.tol is not None else cfg.tolerance
    if not tol > 0:
        print("tolerance must be positive", file=sys.stderr)
        return EXIT_CONFIG
    report = grid_verify(sys_, pair, cfg.region, tol, workers=_workers())
    line = json.dumps(report.to_dict(), allow_nan=False)
    print(report.summary())
    print(line)
    if args.out:
        with _open_out(args.out) as fh:
            fh.write(line + "\n")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_generate_family(args) -> int:
    try:
        fam = make_constant_structure_family(args.alpha0, args.beta0, args.lam, args.mu)
    except NotElliptic as exc:
        print(f"not elliptic: {exc}", file=sys.stderr)
        return EXIT_NOT_ELLIPTIC
    except ParseError as exc:
        print(f"bad expression: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        region = Region(*args.region, *args.grid)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = ProblemConfig({k: str(v) for k, v in fam.as_dict().items()}, region)
    with _open_out(args.out) as fh:
        fh.write(dump_config(cfg))
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "transform": cmd_transform,
    "verify": cmd_verify,
    "generate-family": cmd_generate_family,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
