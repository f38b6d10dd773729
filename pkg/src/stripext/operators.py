"""Extension operators for the parabola and compact graph curves, and the
half-line operator T with its low/high frequency pieces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import INF, CurveSpec
from .extremals import TestFunction
from .quadrature import GL_NODES, GL_WEIGHTS, adaptive_gk, oscillatory_panels

ROUTES = ("auto", "quadrature", "closed")
# params keys left by TestFunction transformations; any of them voids a closed form
MODIFIERS = ("shift", "dilation", "scale_factor", "window")


def gaussian_field(x, eps: float) -> np.ndarray:
    """E[e^{-π eps u^2}](x) on the parabola: (eps - 2i x2)^{-1/2} exp(-π x1^2/(eps - 2i x2))."""
    x = np.asarray(x, dtype=float)
    z = eps - 2j * x[..., 1]
    return z ** -0.5 * np.exp(-math.pi * x[..., 0] ** 2 / z)


def gaussian_field_modulus(x, eps: float, q: float) -> np.ndarray:
    """|E[e^{-π eps u^2}](x)|^q = (eps^2+4x2^2)^{-q/4} exp(-q π eps x1^2/(eps^2+4x2^2))."""
    x = np.asarray(x, dtype=float)
    d = eps * eps + 4 * x[..., 1] ** 2
    return d ** (-q / 4) * np.exp(-q * math.pi * eps * x[..., 0] ** 2 / d)


@dataclass(frozen=True, eq=False)
class FieldEvaluator:
    """x -> E f(x) for a curve and a test function.

    ``route="auto"`` uses a closed form when one exists for the pair (the
    Gaussian family on the parabola) and panel quadrature otherwise.
    """

    curve: CurveSpec
    f: TestFunction
    route: str = "auto"
    cycles_per_panel: float = 1.0
    refine: int = 1
    pieces: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        pieces = self.f.pieces
        if any(not (math.isfinite(a) and math.isfinite(b)) for a, b in pieces):
            raise ValueError("test function must have bounded pieces (decay required)")
        if self.curve.is_compact:
            lo, hi = self.curve.interval
            pieces = tuple((max(a, lo), min(b, hi)) for a, b in pieces
                           if min(b, hi) > max(a, lo))
        object.__setattr__(self, "pieces", pieces)
        if self.route == "closed" and not self.has_closed_form:
            raise ValueError(f"no closed form for {self.f.family} on {self.curve.name}")

    @property
    def has_closed_form(self) -> bool:
        return (self.curve.kind == "parabola" and self.f.family == "GaussianEps"
                and not any(k in self.f.params for k in MODIFIERS))

    @property
    def uses_closed_form(self) -> bool:
        return self.route == "closed" or (self.route == "auto" and self.has_closed_form)

    @property
    def feature_scale(self) -> float:
        """Smallest length scale of |Ef| near the origin (used to seed quadrature splits)."""
        if self.has_closed_form:
            return 0.25 * self.f.params["eps"]
        width = max(b for _, b in self.pieces) - min(a for a, _ in self.pieces)
        return 0.25 / (1.0 + width + self.f.bandwidth)

    @property
    def decay_radius(self) -> float:
        """Distance beyond which |Ef| is in its decaying regime along lines near the origin."""
        if self.has_closed_form:
            return 8.0
        width = max(b for _, b in self.pieces) - min(a for a, _ in self.pieces)
        return max(8.0, 16.0 / width)

    def l1_bound(self) -> float:
        """∫ |f| dμ, the pointwise bound for |Ef|."""
        c = self.curve
        tot = 0.0
        for a, b in self.pieces:
            r = adaptive_gk(lambda u: np.abs(self.f(u)) * c.jacobian(u), a, b, rtol=1e-10,
                            initial=self.f.min_panels)
            tot += float(r.value)
        return tot

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        pts = x.reshape(-1, 2)
        if self.uses_closed_form:
            return gaussian_field(pts, self.f.params["eps"]).reshape(shape)
        c = self.curve
        if c.kind == "parabola":
            phase = lambda u, X: u * X[:, :1] + u * u * X[:, 1:2]
            fb = lambda X, lo, hi: np.maximum(np.abs(X[:, 0] + 2 * lo * X[:, 1]),
                                              np.abs(X[:, 0] + 2 * hi * X[:, 1]))
            amp = self.f
        else:
            k = 1 if c.swap_axes else 0  # coordinate paired with the parameter u
            h = c.h
            phase = lambda u, X: u * X[:, k:k + 1] + h(u) * X[:, 1 - k:2 - k]
            fb = lambda X, lo, hi: np.abs(X[:, k]) + c.max_slope(lo, hi) * np.abs(X[:, 1 - k])
            amp = lambda u: self.f(u) * c.jacobian(u)
        out = oscillatory_panels(amp, self.pieces, phase, fb, pts,
                                 min_panels=self.f.min_panels, bandwidth=self.f.bandwidth,
                                 cycles_per_panel=self.cycles_per_panel, refine=self.refine)
        return out.reshape(shape)


def eval_extension(curve: CurveSpec, f: TestFunction, x, route: str = "auto"):
    """E f(x) for the curve's measure; x has shape (..., 2)."""
    return FieldEvaluator(curve, f, route)(x)


# ---------------------------------------------------------------------------
# curve reparametrisations


def shear_curve(curve: CurveSpec, u0: float) -> CurveSpec:
    """The graph of r2(u) = h(u+u0) - h(u0) - h'(u0) u over I - u0 (parameter measure)."""
    if not curve.is_compact:
        raise ValueError("shear is defined for graph curves")
    h, dh, d2h = curve.h, curve.dh, curve.d2h
    h0, s0 = float(h(np.array(u0))), float(dh(np.array(u0)))
    lo, hi = curve.interval
    return CurveSpec.graph(lambda u: h(u + u0) - h0 - s0 * u,
                           lambda u: dh(u + u0) - s0,
                           lambda u: d2h(u + u0),
                           (lo - u0, hi - u0), curve.kappa_min, measure="parameter",
                           name=f"{curve.name}-sheared({u0:.6g})")


def quadratic_substitution(h, h_inv, dh, amplitude, x2: float, u_max: float,
                           rtol: float = 1e-11) -> tuple[complex, complex]:
    """Both sides of ∫_0^u_max e^{2πi h(u) x2} F(u) du = ∫_0^y_max e^{2πi y^2 x2} G(y) dy.

    Here y = sqrt(h(u)) and G(y) = F(h^{-1}(y^2)) 2y / h'(h^{-1}(y^2)), for
    convex increasing h with h(0) = h'(0) = 0.
    """
    lhs = adaptive_gk(lambda u: np.exp(2j * math.pi * h(u) * x2) * amplitude(u), 0.0, u_max,
                      rtol=rtol, initial=16).value
    y_max = math.sqrt(float(h(np.array(u_max))))

    def g(y):
        # Gauss-Kronrod nodes are interior, so y > 0 and h'(u) > 0 here
        u = h_inv(y * y)
        return np.exp(2j * math.pi * y * y * x2) * amplitude(u) * 2 * y / dh(u)

    rhs = adaptive_gk(g, 0.0, y_max, rtol=rtol, initial=16).value
    return complex(lhs), complex(rhs)


# ---------------------------------------------------------------------------
# the half-line operator T f(x) = ∫_0^∞ e^{2πi x u^2} f(u) du

T_VARIANTS = ("full", "low", "high")


def split_window(f: TestFunction, variant: str) -> TestFunction:
    if variant == "full":
        return f.restricted(0.0, INF)
    if variant == "low":
        return f.restricted(0.0, 1.0)
    if variant == "high":
        return f.restricted(1.0, INF).restricted(1.0, 1.0, closed=False)
    raise ValueError(f"unknown variant {variant!r}")


def low_high_split(f: TestFunction) -> tuple[TestFunction, TestFunction]:
    """(1_[-1,1] f, f - 1_[-1,1] f)."""
    return f.restricted(-1.0, 1.0), f.restricted(-1.0, 1.0, closed=False)


def homog_T_closed(x, eps: float, p: float) -> np.ndarray:
    """T f_eps(x) = (1/2) ∫_eps^{1/eps} t^{-1/p-1} (t^{-2} - 2ix)^{-1/2} dt.

    The inner Gaussian integral is done exactly; the outer one runs in
    v = log t on composite Gauss-Legendre panels of width 1/2 (the integrand
    is analytic in v with unit-scale features).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    L = -math.log(eps)
    n_pan = max(4, int(math.ceil(4 * L)))
    edges = np.linspace(-L, L, n_pan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    v = (mid[:, None] + half[:, None] * GL_NODES).ravel()
    w = (half[:, None] * GL_WEIGHTS).ravel()
    t = np.exp(v)
    out = np.empty(x.shape, dtype=complex)
    step = max(1, 2_000_000 // v.size)
    for s in range(0, x.size, step):
        xs = x[s:s + step, None]
        vals = t ** (-1 / p) * (t ** -2.0 - 2j * xs) ** -0.5
        out[s:s + step] = 0.5 * (vals @ w)
    return out


def gaussian_T_closed(x, eps: float = 1.0) -> np.ndarray:
    """T[e^{-π eps u^2}](x) = (1/2)(eps - 2ix)^{-1/2}."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (eps - 2j * x) ** -0.5


def eval_T(f: TestFunction, x, variant: str = "full", route: str = "auto",
           refine: int = 1) -> np.ndarray:
    """T, T_low or T_high applied to f at the points x.

    With ``route="auto"`` the full operator on an unmodified HomogApprox or
    GaussianEps function uses the semi-analytic forms; otherwise panel
    quadrature over the windowed pieces is used, so full = low + high holds
    to rounding.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    plain = not any(k in f.params for k in MODIFIERS)
    closed_ok = variant == "full" and plain and f.family in ("HomogApprox", "GaussianEps")
    if route == "closed" and not closed_ok:
        raise ValueError(f"no closed form for T[{f.family}] variant {variant}")
    if closed_ok and route != "quadrature":
        if f.family == "HomogApprox":
            return homog_T_closed(x, f.params["eps"], f.params["p"])
        return gaussian_T_closed(x, f.params["eps"])
    g = split_window(f, variant)
    # cut every variant at 1 so full and low + high share one panel partition
    pieces = [(a, b) for lo, hi in g.pieces
              for a, b in (((lo, 1.0), (1.0, hi)) if lo < 1.0 < hi else ((lo, hi),))
              if b > a]
    return oscillatory_panels(
        g, pieces,
        phase=lambda u, X: X[:, :1] * u * u,
        freq_bound=lambda X, lo, hi: 2 * np.abs(X[:, 0]) * max(abs(lo), abs(hi)),
        points=x[:, None], min_panels=f.min_panels, bandwidth=f.bandwidth, refine=refine)


def T_norm_on_interval(f: TestFunction, q: float, lo: float, hi: float,
                       rtol: float = 1e-8) -> float:
    """‖T f‖_{L^q([lo, hi])}, integrated in log x."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    r = adaptive_gk(lambda v: np.abs(eval_T(f, np.exp(v))) ** q * np.exp(v),
                    math.log(lo), math.log(hi), rtol=rtol,
                    initial=max(4, int(math.ceil(math.log(hi / lo)))))
    return float(r.value) ** (1 / q)


# ---------------------------------------------------------------------------
# random-sign sums of packets


@dataclass(frozen=True)
class KhintchineResult:
    best: float  # max over draws of ||Σ ε_j E f_j||_{L^q(region)}
    square: float  # ||(Σ |E f_j|^2)^{1/2}||_{L^q(region)}
    n_draws: int

    @property
    def kappa(self) -> float:
        return self.best / self.square


def khintchine_realization(curve: CurveSpec, packets, points, weights, q: float,
                           n_draws: int, seed: int = 0) -> KhintchineResult:
    """Best of ``n_draws`` seeded ±1 sign vectors against the square function.

    ``points``/``weights`` discretise the region (a cubature rule); each E f_j
    is evaluated once and the draws only recombine the columns.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    w = np.asarray(weights, dtype=float).ravel()
    fields = np.array([FieldEvaluator(curve, g)(pts) for g in packets])  # (J, N)
    square = float(np.sum(w * np.sum(np.abs(fields) ** 2, axis=0) ** (q / 2)) ** (1 / q))
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(n_draws, len(packets)))
    sums = np.abs(signs @ fields) ** q  # (n_draws, N)
    best = float(np.max(sums @ w) ** (1 / q))
    return KhintchineResult(best, square, n_draws)
