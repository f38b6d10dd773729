"""Domain types, exponent bookkeeping and L^p / weighted norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quadrature import adaptive_gk, oscillatory_panels, GL_ORDER

INF = math.inf


class EvaluationError(ValueError):
    """A test function produced non-finite samples."""


class TruncationError(RuntimeError):
    """An improper integral did not settle under radius doubling."""

    def __init__(self, message: str, estimate: float, bound: float, radius: float,
                 shells: Sequence[float] = ()):
        super().__init__(f"{message} (estimate={estimate:.6g}, shell bound={bound:.3e}, "
                         f"radius={radius:.3g})")
        self.estimate = estimate
        self.bound = bound
        self.radius = radius
        self.shells = tuple(shells)


# ---------------------------------------------------------------------------
# exponents


@dataclass(frozen=True)
class ExponentPair:
    """A point (1/p, 1/q) of the unit square; p = inf is stored as a = 0."""

    a: float
    b: float

    def __post_init__(self):
        for name, v in (("a", self.a), ("b", self.b)):
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"inverse exponent {name}={v} outside [0, 1]")

    @classmethod
    def from_pq(cls, p: float, q: float) -> "ExponentPair":
        return cls(inverse_exponent(p), inverse_exponent(q))

    @property
    def p(self) -> float:
        return exponent_from_inverse(self.a)

    @property
    def q(self) -> float:
        return exponent_from_inverse(self.b)

    def __str__(self) -> str:
        return f"(1/p,1/q)=({self.a:.6g},{self.b:.6g})"


def inverse_exponent(p: float) -> float:
    if p == INF:
        return 0.0
    if not p >= 1.0:
        raise ValueError(f"exponent {p} outside [1, inf]")
    return 1.0 if p == 1.0 else 1.0 / p


def exponent_from_inverse(a: float) -> float:
    if a == 0.0:
        return INF
    return 1.0 if a == 1.0 else 1.0 / a


# ---------------------------------------------------------------------------
# geometry


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.hypot(v[0], v[1])


def perp(v) -> np.ndarray:
    """Counter-clockwise rotation by 90 degrees."""
    v = np.asarray(v, dtype=float)
    return np.array([-v[1], v[0]])


def _check_unit(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float).reshape(2)
    if abs(np.hypot(*omega) - 1.0) > 1e-12:
        raise ValueError(f"direction {omega} is not a unit vector")
    return omega


@dataclass(frozen=True)
class CurveSpec:
    """A curve carrying the measure the extension operator integrates against.

    ``kind="parabola"`` is {(s, s^2)} with the pushforward measure ds.
    ``kind="graph"`` is the graph {(u, h(u)) : u in interval}; with
    ``swap_axes`` it is {(h(u), u)} instead. ``measure`` is "arclength"
    (include J_h = sqrt(1+h'^2)) or "parameter" (plain du, the E_h operator).
    """

    kind: str = "parabola"
    h: Callable | None = None
    dh: Callable | None = None
    d2h: Callable | None = None
    interval: tuple[float, float] = (-INF, INF)
    kappa_min: float = 0.0
    measure: str = "pushforward"
    swap_axes: bool = False
    name: str = ""

    def __post_init__(self):
        if self.kind == "parabola":
            return
        if self.kind != "graph":
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.h is None or self.dh is None or self.d2h is None:
            raise ValueError("graph curves need h, h' and h'' evaluators")
        lo, hi = self.interval
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("graph curves need a finite parameter interval")
        if self.measure not in ("arclength", "parameter"):
            raise ValueError(f"unknown measure {self.measure!r} for a graph curve")
        if self.kappa_min <= 0:
            raise ValueError("curvature floor must be positive")
        u = np.linspace(lo, hi, 2001)
        bad = np.abs(self.d2h(u)) < self.kappa_min
        if bad.any():
            raise ValueError(f"|h''| < {self.kappa_min} at u={u[bad][0]:.6g}")

    @classmethod
    def parabola(cls) -> "CurveSpec":
        return cls(kind="parabola", name="parabola")

    @classmethod
    def graph(cls, h, dh, d2h, interval, kappa_min, measure="arclength",
              swap_axes=False, name="graph") -> "CurveSpec":
        return cls("graph", h, dh, d2h, tuple(map(float, interval)), kappa_min,
                   measure, swap_axes, name)

    def with_measure(self, measure: str) -> "CurveSpec":
        return CurveSpec(self.kind, self.h, self.dh, self.d2h, self.interval,
                         self.kappa_min, measure, self.swap_axes, self.name)

    @property
    def is_compact(self) -> bool:
        return self.kind == "graph"

    def point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == "parabola":
            return np.stack([u, u * u], axis=-1)
        hu = self.h(u)
        return np.stack([hu, u] if self.swap_axes else [u, hu], axis=-1)

    def normal(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        d = 2 * u if self.kind == "parabola" else self.dh(u)
        n = np.stack([np.ones_like(d), -d] if self.swap_axes else [-d, np.ones_like(d)], axis=-1)
        return n / np.sqrt(1 + d * d)[..., None]

    def jacobian(self, u) -> np.ndarray:
        """Density of the curve's measure with respect to du."""
        u = np.asarray(u, dtype=float)
        if self.kind == "parabola" or self.measure == "parameter":
            return np.ones_like(u)
        d = self.dh(u)
        return np.sqrt(1 + d * d)

    def max_slope(self, lo: float, hi: float) -> float:
        if self.kind == "parabola":
            return 2 * max(abs(lo), abs(hi))
        return float(np.max(np.abs(self.dh(np.linspace(lo, hi, 257)))))


def unit_circle_arc(half_angle: float = math.pi / 4, measure: str = "arclength") -> CurveSpec:
    """Arc of the unit circle around (1, 0), |theta| <= half_angle, as u -> (sqrt(1-u^2), u)."""
    s = math.sin(half_angle)
    return CurveSpec.graph(
        h=lambda u: np.sqrt(1 - u * u),
        dh=lambda u: -u / np.sqrt(1 - u * u),
        d2h=lambda u: -(1 - u * u) ** -1.5,
        interval=(-s, s),
        kappa_min=1.0,
        measure=measure,
        swap_axes=True,
        name=f"circle-arc({half_angle:.6g})",
    )


@dataclass(frozen=True)
class LineSpec:
    """The line {x : x . omega = t}, traversed as t*omega + s*perp(omega)."""

    omega: tuple[float, float]
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(c) for c in _check_unit(self.omega)))

    def points(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        w = np.asarray(self.omega)
        return self.t * w + s[..., None] * perp(w)


@dataclass(frozen=True)
class StripSpec:
    """The strip {x : |x . omega - t| <= width/2}."""

    omega: tuple[float, float]
    t: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(c) for c in _check_unit(self.omega)))
        if not self.width > 0:
            raise ValueError("strip width must be positive")

    def line(self, offset: float) -> LineSpec:
        return LineSpec(self.omega, offset)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.abs(x @ np.asarray(self.omega) - self.t) <= self.width / 2


@dataclass(frozen=True)
class RectSpec:
    """Closed rectangle centred at ``center``: a tube of half-length ``alpha``
    along ``direction`` and half-width ``beta`` across it."""

    direction: tuple[float, float]
    center: tuple[float, float]
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(float(c) for c in _check_unit(self.direction)))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("rectangle half-extents must be positive")

    def contains(self, x, slack: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float) - np.asarray(self.center)
        d = np.asarray(self.direction)
        return ((np.abs(x @ d) <= self.alpha * (1 + slack))
                & (np.abs(x @ perp(d)) <= self.beta * (1 + slack)))

    @property
    def area(self) -> float:
        return 4 * self.alpha * self.beta

    def corners(self) -> np.ndarray:
        d = np.asarray(self.direction)
        e = perp(d)
        c = np.asarray(self.center)
        return np.array([c + sa * self.alpha * d + sb * self.beta * e
                         for sa, sb in ((-1, -1), (1, -1), (1, 1), (-1, 1))])

    def grid(self, n: int = 64) -> np.ndarray:
        """n x n midpoint grid covering the rectangle."""
        s = (np.arange(n) + 0.5) / n * 2 - 1
        a, b = np.meshgrid(s * self.alpha, s * self.beta, indexing="ij")
        d = np.asarray(self.direction)
        return (np.asarray(self.center) + a.ravel()[:, None] * d
                + b.ravel()[:, None] * perp(d))


# ---------------------------------------------------------------------------
# norms


def _pieces_in(f, domain) -> list[tuple[float, float]]:
    lo, hi = (-INF, INF) if domain is None else domain
    pieces = getattr(f, "pieces", None)
    if pieces is None:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("plain callables need a finite domain")
        return [(lo, hi)] if hi > lo else []
    out = []
    for a, b in pieces:
        a, b = max(a, lo), min(b, hi)
        if b > a:
            out.append((a, b))
    return out


def _sample(f, u):
    v = np.asarray(f(u))
    if not np.all(np.isfinite(v)):
        raise EvaluationError(f"non-finite samples from {getattr(f, 'family', f)!r}")
    return v


def lp_norm(f, p: float, domain: tuple[float, float] | None = None,
            rtol: float = 1e-12) -> float:
    """L^p norm of ``f`` over ``domain`` (default: the whole line).

    ``f`` is either a test function exposing ``pieces`` (intervals covering its
    support, smooth on each) or a plain vectorised callable, in which case
    ``domain`` must be finite. ``p = inf`` takes the maximum of |f| on a grid
    twice as fine as the quadrature grid.
    """
    pieces = _pieces_in(f, domain)
    if not pieces:
        return 0.0
    min_panels = getattr(f, "min_panels", 4)
    if p == INF:
        best = 0.0
        for a, b in pieces:
            u = np.linspace(a, b, 2 * GL_ORDER * min_panels + 1)
            best = max(best, float(np.max(np.abs(_sample(f, u)))))
        return best
    if p < 1:
        raise ValueError(f"p={p} < 1")
    # one call over all pieces so the tolerance is shared: a piece where |f| is
    # negligible must not be resolved to rtol of its own tiny integral
    total = 0.0
    for a, b in _contiguous(pieces):
        br = [x for lo, hi in pieces for x in (lo, hi) if a < x < b]
        r = adaptive_gk(lambda u: np.abs(_sample(f, u)) ** p, a, b, rtol=rtol,
                        initial=min_panels, breakpoints=br)
        total += float(r.value)
    return total ** (1.0 / p)


def _contiguous(pieces):
    """Merge touching pieces into maximal intervals."""
    out = []
    for a, b in pieces:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def fourier_transform(f, x) -> np.ndarray:
    """f^(x) = ∫ f(s) exp(-2πi x s) ds by panel quadrature over f's pieces."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return oscillatory_panels(
        lambda u: _sample(f, u),
        f.pieces,
        phase=lambda u, X: -X[:, :1] * u,
        freq_bound=lambda X, lo, hi: X[:, 0],
        points=x[:, None],
        min_panels=getattr(f, "min_panels", 4),
        bandwidth=getattr(f, "bandwidth", 0.0),
    )


@dataclass(frozen=True)
class TailIntegral:
    """An integral over an unbounded range with its truncation bookkeeping."""

    value: float
    radius: float
    tail_bound: float
    quad_error: float
    n_evals: int
    shells: tuple[float, ...] = field(default=(), repr=False)


def integrate_to_infinity(fn, r0: float, tail_rtol: float = 1e-3, rtol: float = 1e-10,
                          two_sided: bool = True, start: float = 0.0,
                          max_radius: float = 2.0 ** 24, core=None) -> TailIntegral:
    """∫ fn over [start, inf) (or the whole line) by dyadic radius doubling.

    The core [start, r0] (or [-r0, r0]) is integrated first, then shells
    [R, 2R] are added until the last shell contributes less than
    ``tail_rtol`` of the running total. Three consecutive non-shrinking shells,
    or reaching ``max_radius``, is reported as divergence via TruncationError.
    ``core`` may supply a precomputed (value, error, n_evals) for the core.
    """
    if core is None:
        lo = -r0 if two_sided else start
        r = adaptive_gk(fn, lo, r0, rtol=rtol, initial=8)
        total, err, nev = float(np.real(r.value)), r.error, r.n_evals
    else:
        total, err, nev = core
    shells: list[float] = []
    radius = r0
    while True:
        pieces = [(radius, 2 * radius)]
        if two_sided:
            pieces.append((-2 * radius, -radius))
        shell = 0.0
        for a, b in pieces:
            # shells are judged against the running total, not their own size
            r = adaptive_gk(fn, a, b, rtol=rtol, atol=rtol * abs(total), initial=8)
            shell += float(np.real(r.value))
            err += r.error
            nev += r.n_evals
        total += shell
        radius *= 2
        shells.append(abs(shell))
        if abs(shell) <= tail_rtol * abs(total):
            return TailIntegral(total, radius, abs(shell), err, nev, tuple(shells))
        if len(shells) >= 4 and all(shells[-k] >= 0.8 * shells[-k - 1] for k in (1, 2, 3)):
            raise TruncationError("tail does not decay (divergent integrand)", total,
                                  abs(shell), radius, shells)
        if radius >= max_radius:
            raise TruncationError("maximum truncation radius reached", total, abs(shell),
                                  radius, shells)


def pps_weighted_norm(f, p: float, tail_rtol: float = 1e-3, rtol: float = 1e-10,
                      r0: float | None = None) -> TailIntegral:
    """∫ |f^(x)|^p |x|^(p-2) dx for p in (1, 2], f^ with the e^{-2πixξ} convention.

    Near the origin the weight is removed by substituting x = s^(1/(p-1)).
    """
    if not (1 < p <= 2):
        raise ValueError(f"p={p} outside (1, 2]")
    if r0 is None:
        lo, hi = f.pieces[0][0], f.pieces[-1][1]
        r0 = 4.0 / max(1e-3, min(hi - lo, 1e3))
    total = 0.0
    err = 0.0
    nev = 0
    shells = []
    radius = bound = 0.0
    for sign in (1.0, -1.0):
        if p == 2:
            core = adaptive_gk(lambda x: np.abs(fourier_transform(f, sign * x)) ** 2,
                               0.0, r0, rtol=rtol, initial=8)
        else:
            e = 1.0 / (p - 1)
            core = adaptive_gk(
                lambda s: e * np.abs(fourier_transform(f, sign * s ** e)) ** p,
                0.0, r0 ** (p - 1), rtol=rtol, initial=8)
        res = integrate_to_infinity(
            lambda x: np.abs(fourier_transform(f, sign * x)) ** p * np.abs(x) ** (p - 2),
            r0, tail_rtol=tail_rtol, rtol=rtol, two_sided=False,
            core=(float(core.value), core.error, core.n_evals))
        total += res.value
        err += res.quad_error
        nev += res.n_evals
        radius = max(radius, res.radius)
        bound += res.tail_bound
        shells.extend(res.shells)
    return TailIntegral(total, radius, bound, err, nev, tuple(shells))
