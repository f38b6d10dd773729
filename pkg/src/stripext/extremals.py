"""Extremal test-function families.

Every constructor returns a :class:`TestFunction`: a vectorised evaluator plus a
support decomposition (``pieces``) on which it is smooth, so the quadrature in
`stripext.operators` can place panels sensibly. Families that come with a
predicted rectangle or norm carry it along.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn, gammainc, gammaincc

from .core import INF, RectSpec, lp_norm, unit
from .quadrature import adaptive_gk

BUMP_RADIUS = 0.1
FAMILIES = ("Bump", "KnappPacket", "DilatedBump", "GaussianEps", "HomogApprox",
            "IndicatorTrain", "SignPacket")


def phi(u):
    """C-infinity bump exp(1 - 1/(1-(10u)^2)) on |u| < 0.1, with phi(0) = 1."""
    u = np.asarray(u, dtype=float)
    s = (u / BUMP_RADIUS) ** 2
    out = np.zeros_like(s)
    inside = s < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return out


@lru_cache(maxsize=None)
def phi_norm(p: float) -> float:
    """||phi||_p, computed once per exponent."""
    if p == INF:
        return 1.0
    r = adaptive_gk(lambda u: phi(u) ** p, -BUMP_RADIUS, BUMP_RADIUS, rtol=1e-13, initial=8)
    return float(r.value) ** (1 / p)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A 1-D complex function from one of the extremal families.

    ``pieces`` are disjoint, sorted intervals outside of which the function is
    below 1e-15 of its maximum (or identically zero); the function is smooth
    on each piece. ``bandwidth`` bounds the local frequency of any built-in
    modulation, in cycles per unit.
    """

    __test__ = False  # not a pytest class

    family: str
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    pieces: tuple[tuple[float, float], ...]
    params: dict = field(default_factory=dict)
    min_panels: int = 8
    bandwidth: float = 0.0
    closed_norm: Callable[[float], float] | None = field(default=None, repr=False)

    def __call__(self, u):
        return self.evaluator(np.asarray(u, dtype=float))

    @property
    def support(self) -> tuple[float, float]:
        return self.pieces[0][0], self.pieces[-1][1]

    def norm(self, p: float, domain=None) -> float:
        """Closed-form L^p norm when the family has one, otherwise quadrature."""
        if self.closed_norm is not None and domain is None:
            return self.closed_norm(p)
        return lp_norm(self, p, domain)

    # -- transformations ----------------------------------------------------

    def scaled(self, c: complex) -> "TestFunction":
        ev = self.evaluator
        cn = self.closed_norm
        return replace(self, evaluator=lambda u: c * ev(u),
                       params={**self.params, "scale_factor": c},
                       closed_norm=None if cn is None else (lambda p: abs(c) * cn(p)))

    def translated(self, shift: float) -> "TestFunction":
        """u -> f(u - shift)."""
        ev = self.evaluator
        return replace(self, evaluator=lambda u: ev(u - shift),
                       pieces=tuple((a + shift, b + shift) for a, b in self.pieces),
                       bandwidth=self.bandwidth, params={**self.params, "shift": shift})

    def dilated(self, lam: float) -> "TestFunction":
        """u -> f(lam * u)."""
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        ev = self.evaluator
        cn = self.closed_norm
        return replace(self, evaluator=lambda u: ev(lam * u),
                       pieces=tuple((a / lam, b / lam) for a, b in self.pieces),
                       bandwidth=self.bandwidth * lam,
                       params={**self.params, "dilation": lam},
                       closed_norm=None if cn is None else
                       (lambda p: cn(p) * (lam ** (-1 / p) if p != INF else 1.0)))

    def restricted(self, lo: float, hi: float, closed: bool = True) -> "TestFunction":
        """f * 1_[lo, hi] (``closed=False`` gives the complement of [lo, hi])."""
        ev = self.evaluator
        if closed:
            pieces = tuple((max(a, lo), min(b, hi)) for a, b in self.pieces
                           if min(b, hi) > max(a, lo))
            mask = lambda u: (u >= lo) & (u <= hi)
        else:
            pieces = []
            for a, b in self.pieces:
                if a < lo:
                    pieces.append((a, min(b, lo)))
                if b > hi:
                    pieces.append((max(a, hi), b))
            pieces = tuple(pc for pc in pieces if pc[1] > pc[0])
            mask = lambda u: (u < lo) | (u > hi)
        return replace(self, evaluator=lambda u: np.where(mask(u), ev(u), 0.0),
                       pieces=pieces or ((lo, lo),), closed_norm=None,
                       params={**self.params, "window": (lo, hi, closed)})


def _merge_pieces(pieces: Sequence[tuple[float, float]], check_disjoint: bool = False):
    pieces = sorted(pieces)
    if check_disjoint:
        for (a0, b0), (a1, b1) in zip(pieces, pieces[1:]):
            if a1 < b0:
                raise ValueError(f"packet supports overlap: [{a0},{b0}] and [{a1},{b1}]")
    return tuple(pieces)


# ---------------------------------------------------------------------------
# constructors


def make_bump(center: float = 0.0, scale: float = 1.0, amplitude: complex = 1.0) -> TestFunction:
    """amplitude * phi((u - center)/scale), supported on center ± 0.1*scale."""
    r = BUMP_RADIUS * scale
    return TestFunction(
        "Bump", lambda u: amplitude * phi((u - center) / scale),
        ((center - r, center + r),),
        params={"center": center, "scale": scale, "amplitude": amplitude},
        closed_norm=lambda p: abs(amplitude) * phi_norm(p) * (scale ** (1 / p) if p != INF else 1))


def random_bump_combination(rng: np.random.Generator, n_max: int = 4) -> TestFunction:
    """A seeded sum of 1..n_max bumps with random centres, widths and complex weights."""
    n = int(rng.integers(1, n_max + 1))
    centers = rng.uniform(-2, 2, n)
    scales = rng.uniform(0.5, 3.0, n)
    amps = rng.normal(size=n) + 1j * rng.normal(size=n)
    half = BUMP_RADIUS * scales

    def ev(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=complex)
        for c, s, a in zip(centers, scales, amps):
            out += a * phi((u - c) / s)
        return out

    # overlapping bumps: break the union at every bump edge so each piece is smooth
    edges = np.unique(np.concatenate([centers - half, centers + half]))
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = 0.5 * (a + b)
        if np.any(np.abs(m - centers) < half):
            pieces.append((float(a), float(b)))
    return TestFunction("Bump", ev, tuple(pieces),
                        params={"centers": centers.tolist(), "scales": scales.tolist(),
                                "amplitudes": [complex(a) for a in amps]},
                        min_panels=8)


def knapp_direction(xi0: float) -> np.ndarray:
    """Unit normal (-2 xi0, 1)/|(-2 xi0, 1)| of the parabola at (xi0, xi0^2)."""
    return unit([-2.0 * xi0, 1.0])


def make_knapp(xi0: float, a=(0.0, 0.0), base: TestFunction | None = None,
               c: float = 0.05) -> tuple[TestFunction, RectSpec]:
    """Knapp packet e^{-2πi (u, u^2)·a} base(u - xi0) and the rectangle where |Ef| is large.

    The modulation uses the parabola point, so Ef is the translate by ``a`` of
    E[base(· - xi0)]. The rectangle is the tube R(ω_{xi0}, a; c(1+|xi0|), c/(1+|xi0|))
    along the parabola's normal at xi0.
    """
    base = base if base is not None else make_bump()
    a1, a2 = float(a[0]), float(a[1])
    shifted = base.translated(xi0)
    ev = shifted.evaluator
    lo, hi = shifted.support
    bw = max(abs(a1 + 2 * a2 * lo), abs(a1 + 2 * a2 * hi))
    f = TestFunction(
        "KnappPacket",
        lambda u: np.exp(-2j * np.pi * (a1 * u + a2 * u * u)) * ev(u),
        shifted.pieces, params={"xi0": xi0, "a": (a1, a2), "c": c},
        min_panels=base.min_panels, bandwidth=bw + shifted.bandwidth,
        closed_norm=base.closed_norm)
    rect = RectSpec(tuple(knapp_direction(xi0)), (a1, a2), c * (1 + abs(xi0)),
                    c / (1 + abs(xi0)))
    return f, rect


def make_dilated_bump(scale: float, direction: str = "concentrate", center: float = 0.0,
                      base: TestFunction | None = None) -> TestFunction:
    """phi((u - center)/scale): the f_delta (concentrate) and f_R (spread) families.

    ||f||_p = scale^(1/p) ||phi||_p exactly.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    if direction not in ("concentrate", "spread"):
        raise ValueError(f"unknown direction {direction!r}")
    base = base if base is not None else make_bump()
    g = base.dilated(1.0 / scale).translated(center)
    return replace(g, family="DilatedBump",
                   params={"scale": scale, "direction": direction, "center": center})


def make_gaussian(eps: float) -> TestFunction:
    """exp(-π eps u^2), truncated below 1e-16 of its peak, ||f||_p = (p eps)^(-1/(2p))."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    r = math.sqrt(math.log(1e16) / (math.pi * eps))
    return TestFunction(
        "GaussianEps", lambda u: np.exp(-math.pi * eps * np.asarray(u) ** 2),
        ((-r, r),), params={"eps": eps}, min_panels=16,
        closed_norm=lambda p: 1.0 if p == INF else (p * eps) ** (-1 / (2 * p)))


def _homog_eval(xi, eps: float, p: float):
    """f_eps via the incomplete-gamma form of the u-substituted integral."""
    xi = np.abs(np.asarray(xi, dtype=float))
    s = 1.0 / (2 * p)
    out = np.empty_like(xi)
    tiny = xi < 1e-9 * eps
    out[tiny] = p * (eps ** (-1 / p) - eps ** (1 / p))
    x = xi[~tiny]
    lo = math.pi * eps * eps * x * x
    with np.errstate(over="ignore"):
        hi = math.pi * x * x / (eps * eps)  # inf is fine: Q(s, inf) = 0
    # P-difference loses everything once both limits are past the bulk; use Q then
    diff = np.where(lo < 1.0, gammainc(s, hi) - gammainc(s, lo),
                    gammaincc(s, lo) - gammaincc(s, hi))
    out[~tiny] = 0.5 * (math.sqrt(math.pi) * x) ** (-1 / p) * gamma_fn(s) * diff
    return out


def homog_t_route(xi: float, eps: float, p: float, rtol: float = 1e-12) -> float:
    """f_eps(xi) straight from its defining t-integral (in log t), for cross-checks."""
    r = adaptive_gk(lambda v: np.exp(-math.pi * xi * xi * np.exp(-2 * v) - v / p),
                    math.log(eps), -math.log(eps), rtol=rtol, initial=16)
    return float(r.value)


def make_homog_approx(eps: float, p: float) -> TestFunction:
    """Scale-averaged Gaussian  f_eps(u) = ∫_eps^{1/eps} e^{-π u^2/t^2} t^{-1/p-1} dt.

    It mimics |u|^{-1/p} on eps <~ |u| <~ 1/eps, so ||f_eps||_p^p grows like
    log(1/eps). Even in u; pieces are geometric so the quadrature sees every
    scale.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps={eps} outside (0, 1)")
    if not 1 < p < INF:
        raise ValueError(f"p={p} outside (1, inf)")
    top = math.sqrt(36.0 / math.pi) / eps
    k = int(math.ceil(math.log2(top / (eps / 8))))
    edges = (eps / 8) * 2.0 ** np.arange(k + 1)
    pos = [(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]
    pieces = [(-b, -a) for a, b in reversed(pos)] + [(-eps / 8, eps / 8)] + pos
    return TestFunction("HomogApprox", lambda u: _homog_eval(u, eps, p), tuple(pieces),
                        params={"eps": eps, "p": p}, min_panels=2)


def make_indicator(intervals: Sequence[tuple[float, float]],
                   weights: Sequence[complex] | None = None) -> TestFunction:
    """Weighted sum of indicators of disjoint closed intervals."""
    intervals = _merge_pieces([tuple(map(float, iv)) for iv in intervals], check_disjoint=True)
    weights = [1.0] * len(intervals) if weights is None else list(weights)

    def ev(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=complex if any(isinstance(w, complex) for w in weights)
                       else float)
        for (a, b), w in zip(intervals, weights):
            out = out + w * ((u >= a) & (u <= b))
        return out

    def norm(p):
        if p == INF:
            return max(abs(w) for w in weights)
        return sum(abs(w) ** p * (b - a) for (a, b), w in zip(intervals, weights)) ** (1 / p)

    return TestFunction("IndicatorTrain", ev, intervals,
                        params={"intervals": intervals, "weights": weights},
                        min_panels=2, closed_norm=norm)


SIGN_PACKET_KINDS = ("compact_q2", "parabola_diag", "parabola_tail")


def sign_packet_indices(kind: str, J: int, count: float = 1.0) -> range:
    if kind == "compact_q2":
        return range(0, max(1, int(round(count * J))))
    if kind == "parabola_diag":
        return range(J, 2 * J)
    if kind == "parabola_tail":
        return range(0, J + 1)
    raise ValueError(f"unknown sign-packet kind {kind!r}")


def make_sign_packet(kind: str, J: int, signs: Sequence[int] | None = None,
                     modulations: Sequence[Sequence[float]] | None = None,
                     count: float = 1.0) -> TestFunction:
    """Signed sum of disjointly supported packets.

    compact_q2:    f_j(u) = phi(J u - j), j = 0 .. count*J - 1 (packets in a unit interval)
    parabola_diag: f_j(u) = e^{-2πi (u, u^2)·a_j} phi(u - j - 1/2), j = J .. 2J-1
    parabola_tail: f_j(u) = phi(u - j), j = 0 .. J

    The individual packets are kept in ``params["packets"]``.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    idx = sign_packet_indices(kind, J, count)
    signs = [1] * len(idx) if signs is None else list(signs)
    if len(signs) != len(idx):
        raise ValueError(f"{kind} with J={J} needs {len(idx)} signs, got {len(signs)}")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be ±1")
    if modulations is not None and len(modulations) != len(idx):
        raise ValueError("one modulation per packet required")

    base = make_bump()
    packets = []
    for n, j in enumerate(idx):
        if kind == "compact_q2":
            g = base.translated(j).dilated(J)
        elif kind == "parabola_diag":
            a = (0.0, 0.0) if modulations is None else modulations[n]
            g, _ = make_knapp(j + 0.5, a)
        else:
            g = base.translated(j)
        packets.append(g)
    pieces = _merge_pieces([pc for g in packets for pc in g.pieces], check_disjoint=True)
    evs = [g.evaluator for g in packets]

    def ev(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=complex)
        for s, e in zip(signs, evs):
            out += s * e(u)
        return out

    norms = [g.closed_norm for g in packets]

    def norm(p):
        if p == INF:
            return max(nm(p) for nm in norms)
        return sum(nm(p) ** p for nm in norms) ** (1 / p)

    return TestFunction("SignPacket", ev, pieces,
                        params={"kind": kind, "J": J, "signs": signs, "indices": list(idx),
                                "modulations": None if modulations is None
                                else [tuple(m) for m in modulations],
                                "packets": packets},
                        min_panels=8, bandwidth=max(g.bandwidth for g in packets),
                        closed_norm=norm)


def sign_packet_rects(f: TestFunction, c: float = 0.05) -> list[RectSpec]:
    """The tubes on which each packet of a sign-packet function is large."""
    kind, J = f.params["kind"], f.params["J"]
    out = []
    for n, j in enumerate(f.params["indices"]):
        if kind == "parabola_tail":
            out.append(RectSpec(tuple(knapp_direction(j)), (0.0, 0.0), c * (1 + j), c / (1 + j)))
        elif kind == "parabola_diag":
            mods = f.params["modulations"]
            a = (0.0, 0.0) if mods is None else mods[n]
            out.append(RectSpec(tuple(knapp_direction(j + 0.5)), a, c * j, c / j))
        else:
            out.append(RectSpec(tuple(knapp_direction(j / J)), (0.0, 0.0), c * J * J, c * J))
    return out


def parallelogram_A(J: int, c: float = 0.05) -> np.ndarray:
    """Vertices of A = R(v_J, 0; c(1+J), c/(1+J)) ∩ {|x1| <= c}."""
    v = knapp_direction(J)
    e = np.array([v[1], -v[0]]) * -1  # perp(v)
    w = c / (1 + J)
    verts = []
    # intersect the two long edges x·e = ±w with x1 = ±c
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            x1 = s1 * c
            # e0*x1 + e1*x2 = s2*w
            x2 = (s2 * w - e[0] * x1) / e[1]
            verts.append((x1, x2))
    v0, v1, v2, v3 = verts
    return np.array([v0, v1, v3, v2])
