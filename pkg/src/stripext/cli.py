"""Command-line entry point: classify, sweep, fit, bn-check, perron, verify.

Exit codes: 0 success, 1 a check or expectation failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .besicovitch import STRATEGIES, perron_tree
from .core import ExponentPair
from .scaling import (FAMILY_PARAMS, SweepConfig, classify_region, fit_sweep,
                      resolve_workers, rows_to_csv, rows_to_json, sweep)

EXIT_OK, EXIT_VIOLATION, EXIT_INVALID = 0, 1, 2


class InputError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run; round-trips through JSON.

    Defaults: the Gaussian family on the non-transversal parabola strip at
    (p, q) = (4, 4) over eps in {1e-1, ..., 1e-4}, CSV output to stdout.
    """

    command: str = "sweep"
    setting: str = "parabola-nontransversal"
    functional: str = "strip"
    family: str = "gaussian"
    params: dict = field(default_factory=dict)  # omega, t, xi0, c_star
    pq: list = field(default_factory=lambda: [[4.0, 4.0]])
    grid: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    tail_rtol: float = 1e-3
    rtol: float = 1e-10
    seed: int = 0
    workers: int = 0  # 0: STRIPEXT_WORKERS or 1
    output: str = "-"
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InputError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)

    def sweep_config(self) -> SweepConfig:
        extra = set(self.params) - {"omega", "t", "xi0", "c_star"}
        if extra:
            raise InputError(f"unknown family parameters: {sorted(extra)}")
        return SweepConfig(family=self.family, functional=self.functional, setting=self.setting,
                           pq=self.pq, grid=self.grid, tail_rtol=self.tail_rtol, rtol=self.rtol,
                           workers=resolve_workers(self.workers), **self.params)


def _pair(text: str) -> list[float]:
    try:
        p, q = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'p,q', got {text!r}")
    return [p, q]


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(text: str, out: str):
    if out in ("", "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    for name in ("setting", "functional", "family", "pq", "grid", "tail_rtol", "rtol", "seed",
                 "workers", "output", "format"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    for name in ("omega", "t", "xi0", "c_star"):
        v = getattr(args, name, None)
        if v is not None:
            cfg.params[name] = v
    return cfg


def _meta(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("workers")  # the table does not depend on it
    d.pop("output")
    return {"config": d, "version": __version__}


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    pts = []
    if args.pq:
        pts += [ExponentPair.from_pq(p, q) for p, q in args.pq]
    if args.p is not None or args.q is not None:
        if args.p is None or args.q is None:
            raise InputError("--p and --q go together")
        pts.append(ExponentPair.from_pq(args.p, args.q))
    if args.point:
        pts += [ExponentPair(a, b) for a, b in args.point]
    if not pts:
        raise InputError("give --p/--q, --pq or --point")
    for pt in pts:
        v = classify_region(args.setting, args.functional, pt)
        if args.json:
            print(json.dumps({"a": pt.a, "b": pt.b, "verdict": v.verdict, "label": v.label,
                              "clause": v.clause, "setting": v.setting,
                              "functional": v.functional}, sort_keys=True))
        else:
            print(str(v))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if cfg.format not in ("csv", "json"):
        raise InputError(f"unknown format {cfg.format!r}")
    rows = sweep(cfg.sweep_config())
    text = rows_to_csv(rows) if cfg.format == "csv" else rows_to_json(rows, _meta(cfg))
    _emit(text, cfg.output)
    return EXIT_OK


def _read_rows(path: str) -> list[dict]:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return json.loads(text)["rows"]
    rows = list(csv.DictReader(text.splitlines()))
    for r in rows:
        for k, v in r.items():
            try:
                r[k] = float(v)
            except ValueError:
                pass
    return rows


def cmd_fit(args) -> int:
    if args.input:
        rows = _read_rows(args.input)
    else:
        rows = sweep(_load_config(args).sweep_config())
    if not rows:
        raise InputError("no rows to fit")
    if FAMILY_PARAMS.get(rows[0].get("family")) is None:
        raise InputError("rows carry no known family")
    invert = args.invert if args.invert is not None else rows[0]["family"] in ("gaussian", "homog")
    fits = fit_sweep(rows, args.column, args.model, invert)
    status = EXIT_OK
    out = []
    for (p, q), fr in fits.items():
        line = (f"p={p:g} q={q:g} model={fr.model} exponent={fr.exponent:.6g} "
                f"intercept={fr.intercept:.6g} r2={fr.r_squared:.6f} n={fr.n_samples}")
        if fr.n_trimmed:
            line += f" trimmed={fr.n_trimmed}"
        if args.min_exponent is not None and fr.exponent < args.min_exponent:
            line += f"  VIOLATION exponent < {args.min_exponent:g}"
            status = EXIT_VIOLATION
        if args.max_exponent is not None and fr.exponent > args.max_exponent:
            line += f"  VIOLATION exponent > {args.max_exponent:g}"
            status = EXIT_VIOLATION
        out.append(line)
    print("\n".join(out))
    return status


def cmd_bn_check(args) -> int:
    from .verification import check_bn

    c = check_bn(tuple(args.t), args.tol)
    print(c.line())
    return EXIT_OK if c.passed else EXIT_VIOLATION


def cmd_perron(args) -> int:
    tree = perron_tree(args.j0, args.strategy)
    area, err = tree.area(args.resolution)
    print(f"J0 {tree.J0}  J {tree.J}  strategy {tree.strategy}")
    print(f"area {round(area, 12)!r}")
    print(f"area/J {round(area / tree.J, 12)!r}  (quadrature error {err:.1e})")
    if tree.J > 1:
        print(f"counterexample ratio p={args.p:g}: {tree.counterexample_ratio(args.p, area):.12g}")
    if args.polygons:
        _emit(tree.to_csv(), args.polygons)
    if args.check_containment:
        ok = tree.check_containment(args.c1)
        print(f"containment c1={args.c1:g}: {'PASS' if ok else 'FAIL'}")
        if not ok:
            return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import SUITES, run_suite

    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    failed = []
    for c in run_suite(args.suite):
        print(c.line())
        if not c.passed:
            failed.append(c.name)
    if failed:
        print(f"failed checks: {', '.join(failed)}")
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_experiment_flags(sp):
    sp.add_argument("--config", help="JSON ExperimentConfig; flags override its fields")
    sp.add_argument("--setting")
    sp.add_argument("--functional", choices=["strip", "radon", "T"])
    sp.add_argument("--family", choices=sorted(FAMILY_PARAMS))
    sp.add_argument("--pq", type=_pair, action="append", help="p,q (repeatable)")
    sp.add_argument("--grid", type=_floats, help="comma-separated family parameters")
    sp.add_argument("--omega", type=_floats)
    sp.add_argument("--t", type=float)
    sp.add_argument("--xi0", type=float)
    sp.add_argument("--c-star", dest="c_star", type=float)
    sp.add_argument("--tail-rtol", dest="tail_rtol", type=float)
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, help="default: $STRIPEXT_WORKERS or 1")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stripext", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="verdict for (1/p, 1/q) in a setting")
    sp.add_argument("--setting", required=True)
    sp.add_argument("--functional", default=None)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--pq", type=_pair, action="append")
    sp.add_argument("--point", type=_pair, action="append", help="a,b = 1/p,1/q")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("sweep", help="evaluate a functional over a parameter grid")
    _add_experiment_flags(sp)
    sp.add_argument("--output", "-o")
    sp.add_argument("--format", choices=["csv", "json"])
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("fit", help="fit scaling exponents to a sweep")
    _add_experiment_flags(sp)
    sp.add_argument("--input", "-i", help="sweep CSV or JSON (otherwise the sweep is run)")
    sp.add_argument("--column", default="ratio")
    sp.add_argument("--model", choices=["power", "logpower"], default="power")
    sp.add_argument("--invert", action=argparse.BooleanOptionalAction, default=None,
                    help="fit against 1/param (default for eps-families)")
    sp.add_argument("--min-exponent", type=float)
    sp.add_argument("--max-exponent", type=float)
    sp.set_defaults(fn=cmd_fit)

    sp = sub.add_parser("bn-check", help="transversal L^2 identity on the quarter-circle arc")
    sp.add_argument("--t", type=_floats, default=[-2.0, -1.0, 0.0, 1.0, 2.0])
    sp.add_argument("--tol", type=float, default=0.01)
    sp.set_defaults(fn=cmd_bn_check)

    sp = sub.add_parser("perron", help="build and measure a Perron tree")
    sp.add_argument("--j0", type=int, required=True)
    sp.add_argument("--strategy", choices=sorted(STRATEGIES), default="classical")
    sp.add_argument("--resolution", type=int, default=2 ** 14)
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--polygons", help="write the triangles as CSV")
    sp.add_argument("--check-containment", action="store_true")
    sp.add_argument("--c1", type=float, default=0.04)
    sp.set_defaults(fn=cmd_perron)

    sp = sub.add_parser("verify", help="run invariant suites")
    sp.add_argument("--suite", default="all")
    sp.set_defaults(fn=cmd_verify)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (InputError, ValueError, TypeError, KeyError, FileNotFoundError,
            json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
