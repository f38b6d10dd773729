"""Exponent fits, the (1/p, 1/q) region classifier, and parameter sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .core import INF, CurveSpec, ExponentPair, LineSpec, StripSpec, lp_norm
from .extremals import make_dilated_bump, make_gaussian, make_homog_approx, make_knapp
from .operators import FieldEvaluator, T_norm_on_interval
from .radon_strip import radon_power, strip_norm

EQ_TOL = 1e-12
TRIM_R2 = 0.99

# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True)
class FitResult:
    exponent: float
    intercept: float
    r_squared: float
    model: str
    n_samples: int
    n_trimmed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.exponent):
            raise ValueError("non-finite exponent")


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    return float(slope), float(icpt), min(1.0, r2)


def fit_exponent(samples: Sequence[tuple[float, float]], model: str = "power",
                 trim: bool = True) -> FitResult:
    """Least-squares slope of log(value) against log(λ) ("power") or log(log λ)
    ("logpower", which needs λ > 1).

    If r² < 0.99 the smallest quarter of the λ values is dropped once and the
    fit repeated; ``n_trimmed`` reports how many samples went.
    """
    if model not in ("power", "logpower"):
        raise ValueError(f"unknown model {model!r}")
    if len(samples) < 4:
        raise ValueError("need at least 4 samples")
    lam = np.array([s[0] for s in samples], dtype=float)
    val = np.array([s[1] for s in samples], dtype=float)
    if np.any(val <= 0) or np.any(~np.isfinite(val)):
        raise ValueError("values must be positive and finite")
    if np.any(lam <= 0):
        raise ValueError("parameters must be positive")
    d = np.diff(lam)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("parameters must be strictly monotone")
    if model == "logpower" and np.any(lam <= 1):
        raise ValueError("logpower model needs λ > 1")
    x = np.log(lam) if model == "power" else np.log(np.log(lam))
    y = np.log(val)
    slope, icpt, r2 = _linfit(x, y)
    n_trim = 0
    if trim and r2 < TRIM_R2:
        n_trim = max(1, len(lam) // 4)
        keep = np.argsort(lam)[n_trim:]
        keep.sort()
        slope, icpt, r2 = _linfit(x[keep], y[keep])
    return FitResult(slope, icpt, r2, model, len(lam) - n_trim, n_trim)


# ---------------------------------------------------------------------------
# region classifier

NAMED_POINTS = {
    "O": (0.0, 0.0), "A": (1.0, 0.0), "B": (0.25, 0.25), "C": (0.5, 0.5),
    "D": (0.0, 0.5), "E": (1 / 3, 1 / 3), "F": (0.0, 0.25),
}
SETTINGS = ("compact-transversal", "compact-nontransversal", "parabola-transversal",
            "parabola-nontransversal", "half-line")
FUNCTIONALS = {"strip", "radon"}
HALF_LINE = ("T", "Tlow", "Thigh")
VERDICTS = ("Holds", "Fails", "Unknown")


@dataclass(frozen=True)
class RegionVerdict:
    verdict: str
    clause: str
    setting: str
    functional: str
    point: ExponentPair
    boundary: bool = False

    @property
    def label(self) -> str:
        if self.boundary and self.verdict != "Unknown":
            return f"Boundary-{self.verdict}"
        return self.verdict

    def __str__(self) -> str:
        return f"{self.verdict} ({self.clause})"


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= EQ_TOL


def _le(x: float, y: float) -> bool:
    return x <= y + EQ_TOL


def _lt(x: float, y: float) -> bool:
    return x < y - EQ_TOL


def _is(a: float, b: float, name: str) -> bool:
    pa, pb = NAMED_POINTS[name]
    return _eq(a, pa) and _eq(b, pb)


def _closed_square(a, b):  # □OACD: a + b <= 1, b <= 1/2
    return _le(a + b, 1) and _le(b, 0.5)


def _oad_minus_de(a, b):  # △OAD \ [D,E)
    return _lt(a + 2 * b, 1) or (_eq(a + 2 * b, 1) and _le(b, a))


def _segment_ae(a, b):  # [A,E]: a + 2b = 1 with p <= q
    return _eq(a + 2 * b, 1) and _le(b, a)


def _classify(setting: str, fn: str, a: float, b: float) -> tuple[str, str, bool]:
    if setting == "compact-transversal":
        bd = _eq(a + b, 1) or _eq(b, 0.5)
        if _closed_square(a, b):
            return "Holds", "compact transversal: 1/p+1/q <= 1 and q >= 2 (square OACD)", bd
        return "Fails", "compact transversal: outside square OACD", bd
    if setting == "compact-nontransversal":
        bd = _eq(a + 2 * b, 1)
        if _oad_minus_de(a, b):
            return "Holds", "compact non-transversal: triangle OAD without [D,E)", bd
        if _eq(a + 2 * b, 1):
            return "Fails", "compact non-transversal: [D,E) excluded (p > q)", bd
        return "Fails", "compact non-transversal: 1/p+2/q > 1", bd
    if setting == "parabola-transversal" and fn == "radon":
        bd = _eq(a + b, 1)
        if _eq(a + b, 1) and _le(b, a):
            return "Holds", "parabola transversal radon: segment [A,C]", bd
        return "Fails", "parabola transversal radon: off segment [A,C]", bd
    if setting == "parabola-transversal" and fn == "strip":
        bd = _eq(a + b, 1) or _eq(a + 3 * b, 1) or _eq(a, b)
        inside = _le(a + b, 1) and _le(1, a + 3 * b) and _le(b, a)
        if inside and (_lt(b, a) or _is(a, b, "C")):
            return "Holds", "parabola transversal strip: triangle BAC without [B,C)", bd
        if inside:
            return "Fails", "parabola transversal strip: [B,C) excluded (p = q != 2)", bd
        return "Fails", "parabola transversal strip: outside triangle BAC", bd
    if setting == "parabola-nontransversal" and fn == "radon":
        bd = _eq(a + 2 * b, 1)
        if _segment_ae(a, b):
            return "Holds", "parabola non-transversal radon: segment [A,E]", bd
        return "Fails", "parabola non-transversal radon: off segment [A,E]", bd
    if setting == "parabola-nontransversal" and fn == "strip":
        on_bd_line = _eq(a + b, 0.5) and _le(0, a) and _le(a, 0.25)
        bd = _eq(a + 3 * b, 1) or _eq(a + 2 * b, 1) or _eq(a + b, 0.5)
        if _is(a, b, "B"):
            return "Fails", "(p,q)≠(4,4)", True
        if on_bd_line and _lt(0, a):
            return "Unknown", "parabola non-transversal strip: open segment (B,D)", True
        inside = _le(1, a + 3 * b) and _le(a + 2 * b, 1) and _le(0.5, a + b)
        if inside and not on_bd_line and _oad_minus_de(a, b):
            return "Holds", "parabola non-transversal strip: triangle BAD without [B,D] and [D,E)", bd
        if inside:
            return "Fails", "parabola non-transversal strip: [B,D] or [D,E) excluded", bd
        return "Fails", "parabola non-transversal strip: outside triangle BAD", bd
    if setting == "half-line" and fn == "T":
        bd = _eq(a + 2 * b, 1)
        if _segment_ae(a, b):
            return "Holds", "T: segment [A,E]", bd
        return "Fails", "T: off segment [A,E]", bd
    if setting == "half-line" and fn == "Tlow":
        bd = _eq(a + 2 * b, 1)
        if _oad_minus_de(a, b):
            return "Holds", "T_low: triangle OAD without [D,E)", bd
        return "Fails", "T_low: outside triangle OAD without [D,E)", bd
    if setting == "half-line" and fn == "Thigh":
        bd = _eq(a + 2 * b, 1) or _eq(a + b, 1) or _eq(b, 0.5)
        if _segment_ae(a, b):
            return "Holds", "T_high: segment [A,E]", bd
        if _lt(1, a + 2 * b) and _lt(a + b, 1) and _lt(b, 0.5):
            return "Holds", "T_high: triangle ACD without [A,C], [C,D], [D,E)", bd
        if _le(a + 2 * b, 1) and not (_eq(a + 2 * b, 1) and _lt(a, b)):
            return "Fails", "T_high: inside triangle OAD, T would otherwise be bounded", bd
        return "Unknown", "T_high: necessity not established here", bd
    raise ValueError(f"unsupported combination setting={setting!r}, functional={fn!r}")


def classify_region(setting: str, functional: str | None, point: ExponentPair) -> RegionVerdict:
    """Verdict for the estimate in ``setting`` with ``functional`` at (1/p, 1/q).

    Settings: compact-transversal, compact-nontransversal, parabola-transversal,
    parabola-nontransversal (functional "strip" or "radon"), and half-line
    (functional "T", "Tlow" or "Thigh"; the setting may also be given as one of
    those names directly).
    """
    if setting in HALF_LINE:
        setting, functional = "half-line", setting
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    if setting == "half-line":
        if functional not in HALF_LINE:
            raise ValueError(f"half-line setting needs functional in {HALF_LINE}")
    elif functional not in FUNCTIONALS:
        raise ValueError(f"functional must be 'strip' or 'radon', got {functional!r}")
    verdict, clause, bd = _classify(setting, functional, point.a, point.b)
    return RegionVerdict(verdict, clause, setting, functional, point, bd)


ALL_TABLES = (("compact-transversal", "strip"), ("compact-transversal", "radon"),
              ("compact-nontransversal", "strip"), ("compact-nontransversal", "radon"),
              ("parabola-transversal", "strip"), ("parabola-transversal", "radon"),
              ("parabola-nontransversal", "strip"), ("parabola-nontransversal", "radon"),
              ("half-line", "T"), ("half-line", "Tlow"), ("half-line", "Thigh"))

# combinations where a Radon Holds next to a strip Fails is the stated content
CONSISTENCY_WHITELIST: frozenset[tuple[str, float, float]] = frozenset()


def consistency_violations(n: int = 101) -> list[tuple[str, float, float, str]]:
    """Scan an n x n grid of (1/p, 1/q) for contradictions between tables.

    Radon Holds with strip Fails in the same setting (outside the whitelist),
    and T_low and T_high both holding where T fails, are reported.
    """
    out = []
    grid = np.linspace(0.0, 1.0, n)
    for a in grid:
        for b in grid:
            pt = ExponentPair(float(a), float(b))
            for setting in SETTINGS[:4]:
                r = classify_region(setting, "radon", pt)
                s = classify_region(setting, "strip", pt)
                if (r.verdict == "Holds" and s.verdict == "Fails"
                        and (setting, float(a), float(b)) not in CONSISTENCY_WHITELIST):
                    out.append((setting, float(a), float(b), "radon Holds, strip Fails"))
            t = classify_region("half-line", "T", pt).verdict
            lo = classify_region("half-line", "Tlow", pt).verdict
            hi = classify_region("half-line", "Thigh", pt).verdict
            if lo == "Holds" and hi == "Holds" and t != "Holds":
                out.append(("half-line", float(a), float(b), "T_low, T_high Hold, T does not"))
            if t == "Holds" and lo == "Fails":
                out.append(("half-line", float(a), float(b), "T Holds, T_low Fails"))
    return out


# ---------------------------------------------------------------------------
# sweeps

SETTING_GEOMETRY = {
    "parabola-transversal": ("parabola", (0.0, 1.0)),
    "parabola-nontransversal": ("parabola", (1.0, 0.0)),
    "compact-transversal": ("compact", (0.0, 1.0)),
    "compact-nontransversal": ("compact", (1.0, 0.0)),
}
FAMILY_PARAMS = {"gaussian": "eps", "knapp": "delta", "dilated": "delta", "homog": "eps"}


def compact_parabola(measure: str = "arclength") -> CurveSpec:
    """The graph of u^2 over [-1, 1]."""
    return CurveSpec.graph(lambda u: u * u, lambda u: 2 * u, lambda u: 2 + 0 * u,
                           (-1.0, 1.0), 2.0, measure=measure, name="parabola-arc")


@dataclass
class SweepConfig:
    family: str = "gaussian"
    functional: str = "strip"
    setting: str = "parabola-nontransversal"
    pq: list = field(default_factory=lambda: [[4.0, 4.0]])
    grid: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    omega: list | None = None
    t: float = 0.0
    xi0: float = 0.0
    tail_rtol: float = 1e-3
    rtol: float = 1e-10
    c_star: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILY_PARAMS:
            raise ValueError(f"unknown family {self.family!r}")
        if self.functional not in ("strip", "radon", "T"):
            raise ValueError(f"unknown functional {self.functional!r}")
        if self.functional == "T" and self.family not in ("homog", "gaussian"):
            raise ValueError("the T functional is swept over the homog or gaussian family")
        if self.functional != "T" and self.setting not in SETTING_GEOMETRY:
            raise ValueError(f"unknown setting {self.setting!r}")
        self.pq = [[float(p), float(q)] for p, q in self.pq]
        self.grid = [float(g) for g in self.grid]


def _test_function(cfg: SweepConfig, lam: float, p: float):
    if cfg.family == "gaussian":
        return make_gaussian(lam)
    if cfg.family == "homog":
        return make_homog_approx(lam, p)
    if cfg.family == "knapp":
        f, _ = make_knapp(cfg.xi0, (0.0, 0.0), base=make_dilated_bump(lam))
        return f
    return make_dilated_bump(lam, "concentrate", center=cfg.xi0)


def _sweep_point(cfg: SweepConfig, lam: float) -> list[dict[str, Any]]:
    rows = []
    for p, q in cfg.pq:
        f = _test_function(cfg, lam, p)
        if cfg.family == "homog" and cfg.functional == "T":
            norm_f = lp_norm(f, p, (0.0, INF))
        else:
            norm_f = f.norm(p)
        prov: dict[str, Any] = {"tail_rtol": cfg.tail_rtol, "rtol": cfg.rtol}
        if cfg.functional == "T":
            hi = 1.0 / (4 * lam * lam)
            value = T_norm_on_interval(f, q, cfg.c_star, hi)
            prov.update(radius=hi, n_evals=0, c_star=cfg.c_star)
        else:
            kind, om = SETTING_GEOMETRY[cfg.setting]
            om = tuple(cfg.omega) if cfg.omega is not None else om
            curve = CurveSpec.parabola() if kind == "parabola" else compact_parabola()
            fe = FieldEvaluator(curve, f)
            if cfg.functional == "strip":
                r = strip_norm(fe, StripSpec(om, cfg.t), q, cfg.tail_rtol, cfg.rtol)
                value = r.value
                prov.update(radius=r.radius, n_evals=r.n_evals, n_offsets=r.n_offsets,
                            tail_bound=r.tail_bound)
            else:
                r = radon_power(fe, LineSpec(om, cfg.t), q, cfg.tail_rtol, cfg.rtol)
                value = r.value
                prov.update(radius=r.radius, n_evals=r.n_evals, tail_bound=r.tail_bound)
        rows.append({"family": cfg.family, FAMILY_PARAMS[cfg.family]: lam, "p": p, "q": q,
                     "functional": cfg.functional, "setting": cfg.setting,
                     "value": value, "norm_f": norm_f, "ratio": value / norm_f, **prov})
    return rows


def resolve_workers(requested: int | None = None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("STRIPEXT_WORKERS", "")
    return max(1, int(env)) if env.strip() else 1


def sweep(cfg: SweepConfig) -> list[dict[str, Any]]:
    """Evaluate the functional over the parameter grid; rows ordered by (grid index, p, q).

    With ``workers`` > 1 grid points run in separate processes; since every
    quadrature is deterministic the table does not depend on the worker count.
    """
    if not cfg.grid:
        return []
    workers = resolve_workers(cfg.workers)
    if workers == 1:
        chunks = [_sweep_point(cfg, lam) for lam in cfg.grid]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_sweep_point, [cfg] * len(cfg.grid), cfg.grid))
    return [row for chunk in chunks for row in chunk]


def fit_sweep(rows: Sequence[dict], column: str = "ratio", model: str = "power",
              invert: bool = False) -> dict[tuple[float, float], FitResult]:
    """Fit ``column`` against the family parameter, separately per (p, q).

    ``invert`` fits against 1/λ (for ε-families whose growth is as ε -> 0).
    """
    out: dict[tuple[float, float], FitResult] = {}
    if not rows:
        return out
    key = FAMILY_PARAMS[rows[0]["family"]]
    for pq in sorted({(r["p"], r["q"]) for r in rows}):
        sel = [r for r in rows if (r["p"], r["q"]) == pq]
        sel.sort(key=lambda r: r[key])
        samples = [((1 / r[key]) if invert else r[key], r[column]) for r in sel]
        out[pq] = fit_exponent(samples, model)
    return out


# ---------------------------------------------------------------------------
# output


def fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _jsonable(v: Any):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def rows_to_json(rows: Sequence[dict], meta: dict | None = None) -> str:
    doc = {"meta": _jsonable(meta or {}), "rows": _jsonable(list(rows))}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def fit_to_dict(fr: FitResult) -> dict:
    return asdict(fr)
