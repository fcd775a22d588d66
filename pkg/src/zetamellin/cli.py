"""Command-line harness: verify identities, evaluate functions, emit reports.

Exit status: 0 when every record passes, 1 when any record fails, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import lambda_series, specialfn
from .errors import FitResidualError, StripError, ZetaMellinError
from .lambda_series import LambdaConfig
from .mellin import IdentityId, StripPoint
from .quadrature import QuadratureConfig
from .residues import ORACLE, PAPER
from .verify import (
    CONVENTION_DEPENDENT,
    EvalContext,
    SIGN_AMBIGUOUS,
    VerificationRecord,
    default_grid,
    resolve_conventions,
    resolve_sign,
    verify_identity,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

RECORD_FIELDS = ("id", "point", "lhs", "rhs", "abs_err", "rel_err", "tol", "pass",
                 "convention", "sigma", "lhs_quad_err", "rhs_quad_err", "abs_tol", "error")

# Tolerances used when --tol is not given; they mirror the acceptance levels.
DEFAULT_TOLS = {
    IdentityId.EQ1_1: 1e-6, IdentityId.EQ1_4: 1e-6, IdentityId.EQ1_5: 1e-6,
    IdentityId.EQ1_2: 1e-5, IdentityId.EQ1_3: 1e-5, IdentityId.EQ1_6: 1e-5,
    IdentityId.PS1: 1e-7, IdentityId.PS2: 1e-7, IdentityId.INTREP: 1e-6,
    IdentityId.EQ2_1: 1e-4, IdentityId.EQ2_2: 1e-4, IdentityId.EQ2_3: 1e-4,
}
REPORT_S_GRIDS = {IdentityId.EQ1_2: (0.3, 0.5, 0.7), IdentityId.EQ1_3: (0.3, 0.5, 0.7)}


class ConfigError(Exception):
    pass


def parse_grid(text) -> tuple[float, ...]:
    """'lo:hi:n' (inclusive, linear), 'a,b,c', or a single number."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ConfigError("grid size must be >= 1")
            if n == 1:
                return (float(lo),)
            return tuple(float(v) for v in np.linspace(float(lo), float(hi), n))
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    ids: tuple[str, ...] = ()
    s_grid: tuple[float, ...] | None = None
    x_grid: tuple[float, ...] | None = None
    tol: float | None = None
    abs_tol: float = 0.0
    convention: str = "oracle"
    format: str = "json"
    out: str | None = None
    workers: int = 1
    lambda_config: LambdaConfig = field(default_factory=LambdaConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.convention not in ("paper", "oracle", "both"):
            raise ConfigError("convention must be paper, oracle or both")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.tol is not None and not 0 < self.tol < 1:
            raise ConfigError("tol must lie in (0, 1)")
        if self.abs_tol < 0:
            raise ConfigError("abs_tol must be >= 0")
        for name in ("s_grid", "x_grid"):
            grid = getattr(self, name)
            if grid is not None and (len(grid) == 0 or not all(math.isfinite(v) for v in grid)):
                raise ConfigError(f"{name} must be a non-empty list of finite numbers")

    @property
    def identities(self) -> tuple[IdentityId, ...]:
        return tuple(IdentityId.parse(i) for i in self.ids)

    def conventions(self) -> tuple[str, ...]:
        return {"paper": (PAPER,), "oracle": (ORACLE,), "both": (PAPER, ORACLE)}[self.convention]

    def echo(self) -> dict:
        """Config as it appears in the report; worker count is left out on purpose."""
        return {
            "ids": [i.value for i in self.identities],
            "s_grid": None if self.s_grid is None else [_fmt(v) for v in self.s_grid],
            "x_grid": None if self.x_grid is None else [_fmt(v) for v in self.x_grid],
            "tol": self.tol,
            "abs_tol": self.abs_tol,
            "convention": self.convention,
            "lambda_config": {f.name: getattr(self.lambda_config, f.name) for f in fields(LambdaConfig)},
            "quadrature": {f.name: getattr(self.quadrature, f.name) for f in fields(QuadratureConfig)},
        }


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def build_config(args, base: dict | None = None) -> RunConfig:
    data = dict(base or {})
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        if "lambda_config" in data:
            data["lambda_config"] = LambdaConfig(**data["lambda_config"])
        if "quadrature" in data:
            data["quadrature"] = QuadratureConfig(**data["quadrature"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    for key in ("s_grid", "x_grid"):
        if key in data and data[key] is not None:
            data[key] = parse_grid(data[key])
    if "ids" in data:
        data["ids"] = tuple(data["ids"]) if not isinstance(data["ids"], str) else (data["ids"],)
    overrides = {
        "ids": tuple(args.id) if getattr(args, "id", None) else None,
        "s_grid": parse_grid(args.s) if getattr(args, "s", None) is not None else None,
        "x_grid": parse_grid(args.x) if getattr(args, "x", None) is not None else None,
        "tol": getattr(args, "tol", None),
        "abs_tol": getattr(args, "abs_tol", None),
        "convention": getattr(args, "convention", None),
        "format": getattr(args, "format", None),
        "out": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**data)
        cfg.identities
    except ZetaMellinError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def check_grid(ident: IdentityId, grid) -> None:
    for p in grid:
        if ident.grid_variable == "s":
            try:
                StripPoint(p)
            except StripError:
                raise ConfigError(f"s outside critical strip: {p:g}") from None
        elif ident in (IdentityId.PS1, IdentityId.PS2):
            if not 0 < p < 1:
                raise ConfigError(f"x outside (0, 1) for the power series: {p:g}")
        elif ident in (IdentityId.EQ2_1, IdentityId.EQ2_2, IdentityId.EQ2_3):
            if not 0 <= p <= 5:
                raise ConfigError(f"x outside [0, 5] for the Xi integrals: {p:g}")
        elif not p > 0:
            raise ConfigError(f"x must be positive: {p:g}")


def grid_for(cfg: RunConfig, ident: IdentityId, report: bool = False):
    grid = cfg.s_grid if ident.grid_variable == "s" else cfg.x_grid
    if grid is None:
        grid = REPORT_S_GRIDS.get(ident, default_grid(ident)) if report else default_grid(ident)
    check_grid(ident, grid)
    return tuple(grid)


def run_suite(cfg: RunConfig, report: bool = False) -> tuple[dict, list[VerificationRecord]]:
    ctx = EvalContext(cfg.quadrature, cfg.lambda_config)
    plans = [(ident, grid_for(cfg, ident, report)) for ident in cfg.identities]
    records = []
    signs = {}
    for ident, grid in plans:
        tol = cfg.tol if cfg.tol is not None else DEFAULT_TOLS[ident]
        convs = cfg.conventions() if ident in CONVENTION_DEPENDENT else (PAPER,)
        for conv in convs:
            if ident in SIGN_AMBIGUOUS and ident is not IdentityId.EQ2_3:
                res = resolve_sign(ident, grid, tol, conv, cfg.abs_tol, ctx, cfg.workers)
                recs = res.records[res.sigma]
                signs[f"{ident.value}/{conv}"] = {
                    "sigma": res.sigma, "unique": res.unique,
                    "all_pass": {str(k): v for k, v in res.all_pass.items()}}
            else:
                recs = verify_identity(ident, grid, tol, conv, cfg.abs_tol, None, ctx, cfg.workers)
                if ident in SIGN_AMBIGUOUS:
                    signs[f"{ident.value}/{conv}"] = {"sigma": recs[0].sigma if recs else None,
                                                      "unique": None, "all_pass": None}
            records.extend(recs)
    records.sort(key=lambda r: (r.id, r.convention, -r.sigma, float(r.point)))
    meta = {
        "config": cfg.echo(),
        "resolved_signs": signs,
        "summary": {"records": len(records), "passed": sum(r.passed for r in records),
                    "failed": sum(not r.passed for r in records)},
    }
    return meta, records


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render(meta: dict, records: list[VerificationRecord], fmt: str) -> str:
    rows = [r.to_dict() for r in records]
    if fmt == "json":
        return json.dumps(_clean({"meta": meta, "records": rows}), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else repr(row[k]) if isinstance(row[k], float)
                             else row[k]) for k in RECORD_FIELDS})
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def exit_status(records) -> int:
    return EXIT_PASS if all(r.passed for r in records) else EXIT_FAIL


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_verify(args) -> int:
    base = load_config(args.config) if args.config else None
    cfg = build_config(args, base)
    if not cfg.ids:
        raise ConfigError("verify needs at least one --id")
    meta, records = run_suite(cfg)
    emit(render(meta, records, cfg.format), cfg.out)
    return exit_status(records)


def cmd_report(args) -> int:
    base = load_config(args.config) if args.config else None
    cfg = build_config(args, base)
    if not cfg.ids:
        cfg = replace(cfg, ids=tuple(i.value for i in IdentityId))
    if args.convention is None and (base or {}).get("convention") is None:
        cfg = replace(cfg, convention="both")
    meta, records = run_suite(cfg, report=True)
    meta["conventions"] = resolve_conventions(EvalContext(cfg.quadrature, cfg.lambda_config),
                                              cfg.workers)
    emit(render(meta, records, cfg.format), cfg.out)
    return exit_status(records)


def cmd_resolve(args) -> int:
    try:
        rep = resolve_conventions(workers=args.workers)
    except FitResidualError as exc:
        print(f"residue fit failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    emit(json.dumps(_clean(rep), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_PASS


def _number(text: str | None, name: str, cast=float):
    if text is None:
        raise ConfigError(f"--{name} is required for this target")
    try:
        return cast(text)
    except ValueError:
        raise ConfigError(f"--{name}: cannot parse {text!r}") from None


def _line(label: str, value, err: float) -> str:
    if isinstance(value, complex):
        if value.imag == 0:
            value = value.real
        else:
            return f"{label} = {value.real:.15g}{value.imag:+.15g}j  (error <= {err:.3g})"
    return f"{label} = {value:.15g}  (error <= {err:.3g})"


def cmd_eval(args) -> int:
    target = args.target
    if target == "zeta":
        s = _number(args.s, "s", complex)
        v = specialfn.zeta(s)
        print(_line(f"zeta({args.s})", complex(v), specialfn.zeta_error_bound(s) * abs(v)))
    elif target == "xi":
        t = _number(args.t, "t")
        v, res = specialfn.xi_critical(t, return_residue=True)
        print(_line(f"Xi({args.t})", v, max(res, 1e-13 * abs(v))))
    elif target == "digamma":
        x = _number(args.x, "x")
        v = specialfn.digamma(x)
        print(_line(f"psi({args.x})", v, 1e-13 * max(abs(v), 1e-300)))
    elif target == "stieltjes":
        n = _number(args.n, "n", int)
        table = specialfn.stieltjes_table()
        print(_line(f"gamma_{n}", specialfn.stieltjes(n), table.error(n)))
    elif target in ("lambda1", "lambda2"):
        x = _number(args.x, "x")
        conv = args.convention or "oracle"
        if conv == "both":
            raise ConfigError("eval takes a single convention")
        sigma = args.sigma if args.sigma is not None else (1 if target == "lambda1" else -1)
        fn = lambda_series.lambda1 if target == "lambda1" else lambda_series.lambda2
        raw = lambda_series.lambda1_raw_sum if target == "lambda1" else lambda_series.lambda2_raw_sum
        v = fn(x, conv, sigma)
        _, err = raw(x, return_error=True)
        print(_line(f"{target}({args.x}) [{conv}, sigma={sigma:+d}]", v, err))
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zetamellin",
                                     description="Verify Mellin-transform identities for zeta.")
    sub = parser.add_subparsers(dest="command", required=True)

    def suite_flags(p, id_required):
        p.add_argument("--id", action="append", required=id_required,
                       choices=[i.value for i in IdentityId], help="identity to check (repeatable)")
        p.add_argument("--s", help="s grid: lo:hi:n, comma list or single value")
        p.add_argument("--x", help="x grid: lo:hi:n, comma list or single value")
        p.add_argument("--tol", type=float, help="relative tolerance")
        p.add_argument("--abs-tol", type=float, dest="abs_tol", help="absolute tolerance")
        p.add_argument("--convention", choices=["paper", "oracle", "both"])
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--workers", type=int, help="processes for grid points")
        p.add_argument("--config", help="JSON file with RunConfig fields")

    suite_flags(sub.add_parser("verify", help="check selected identities"), False)
    suite_flags(sub.add_parser("report", help="run every identity under both conventions"), False)

    p = sub.add_parser("resolve", help="fit subtraction polynomials and resolve signs")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("eval", help="print one function value")
    p.add_argument("target", choices=["lambda1", "lambda2", "xi", "zeta", "digamma", "stieltjes"])
    p.add_argument("--s")
    p.add_argument("--x")
    p.add_argument("--t")
    p.add_argument("--n")
    p.add_argument("--convention", choices=["paper", "oracle"])
    p.add_argument("--sigma", type=int, choices=[1, -1])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"verify": cmd_verify, "report": cmd_report, "resolve": cmd_resolve, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZetaMellinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
