"""Complex line integrals and the Gaussian-Fresnel quantities behind the
lower bounds for the half-line operator T.

For t > 0 put psi(t) = t^-2 - 2i and theta(t) = arg psi(t) = -arctan(2 t^2).
The basic object is

    I(t, X) = ∫_0^sqrt(X) exp(-π psi(t) s^2) ds,

which is evaluated both on the real segment and by deforming onto the ray
arg z = -theta/2 (where the integrand is a real Gaussian) minus the circular
arc joining sqrt(X) to that ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf

from .quadrature import adaptive_gk

DEFAULT_RTOL = 1e-9
DEFAULT_DELTA = 0.05
C_STAR_THRESHOLD = 0.1


class ContourMismatchError(ArithmeticError):
    """Direct and deformed-contour evaluations disagree."""


def integrate_complex(fn: Callable[[np.ndarray], np.ndarray], z0: complex, z1: complex,
                      rtol: float = DEFAULT_RTOL, atol: float = 1e-15,
                      max_depth: int = 40, focus: float | None = None) -> complex:
    """∫ fn(z) dz along the straight segment from z0 to z1.

    ``focus`` is a length scale of a feature sitting at the point of the
    segment nearest the origin; the segment is pre-split geometrically around
    that point so narrow peaks cannot slip between the first nodes.
    """
    if not 1e-13 < rtol < 1e-2:
        raise ValueError(f"rtol={rtol} outside (1e-13, 1e-2)")
    z0, z1 = complex(z0), complex(z1)
    d = z1 - z0
    if d == 0:
        return 0j
    breaks = ()
    if focus is not None and focus > 0:
        s0 = min(1.0, max(0.0, -(z0.conjugate() * d).real / abs(d) ** 2))
        steps = focus / abs(d) * 2.0 ** np.arange(0, 60)
        steps = steps[steps < 1]
        breaks = np.concatenate([s0 - steps, [s0], s0 + steps])
    r = adaptive_gk(lambda s: fn(z0 + d * s) * d, 0.0, 1.0, rtol=rtol, atol=atol,
                    max_depth=max_depth, breakpoints=breaks)
    return complex(r.value)


@dataclass(frozen=True)
class PhaseProfile:
    """psi(t) = t^-2 - 2i and its argument; t = inf gives the limit psi = -2i."""

    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")

    @property
    def psi(self) -> complex:
        return complex(self.t ** -2.0, -2.0)

    @property
    def abs_psi(self) -> float:
        return math.sqrt(self.t ** -4.0 + 4.0)

    @property
    def theta(self) -> float:
        if math.isinf(self.t):
            return -math.pi / 2
        return -math.atan(2.0 * self.t * self.t)


def psi(t):
    t = np.asarray(t, dtype=float)
    return t ** -2.0 - 2j


@dataclass(frozen=True)
class ShiftData:
    """The shift z0 = i x1 / (sqrt(x2) psi(t)) of the Gaussian segment."""

    x1: float
    x2: float
    t: float

    def __post_init__(self):
        if not self.x2 > 0:
            raise ValueError("x2 must be positive")

    @property
    def z0(self) -> complex:
        return 1j * self.x1 / (math.sqrt(self.x2) * PhaseProfile(self.t).psi)


def _width(t: float) -> float:
    """Decay length of exp(-π psi(t) s^2) on the real axis, capped at 1/2."""
    return min(0.5, 0.5 * t)


def _gauss(ps: complex):
    return lambda z: np.exp(-math.pi * ps * z * z)


def gaussian_segment_erf(ps, a, b):
    """∫_a^b exp(-π ps z^2) dz in closed form through the complex error function.

    Vectorised over broadcastable ``ps``, ``a``, ``b``; principal square root
    (positive real part, valid for Re ps > 0).
    """
    ps = np.asarray(ps, dtype=complex)
    w = np.sqrt(math.pi * ps)
    return 0.5 / np.sqrt(ps) * (erf(w * b) - erf(w * a))


@dataclass(frozen=True)
class ContourParts:
    """I = line - arc, with line the integral from 0 to Q = sqrt(X) e^{-i theta/2}
    and arc the integral along |z| = sqrt(X) from sqrt(X) to Q."""

    line: complex
    arc: complex

    @property
    def value(self) -> complex:
        return self.line - self.arc


def fresnel_contour_parts(t: float, X: float, rtol: float = DEFAULT_RTOL) -> ContourParts:
    prof = PhaseProfile(t)
    ps, th, ap = prof.psi, prof.theta, prof.abs_psi
    rx = math.sqrt(X)
    # on the ray the exponent is -π|psi| r^2, so the line part is an erf
    line = np.exp(-0.5j * th) * 0.5 / math.sqrt(ap) * math.erf(math.sqrt(math.pi * X * ap))
    end = -0.5 * th
    # near angle 0 the integrand has modulus ~1 only over a width ~ 1/(X|psi|)
    breaks = end * 2.0 ** -np.arange(1, 64)
    breaks = breaks[breaks > 1e-3 / (X * ap + 1.0)]
    arc = adaptive_gk(
        lambda a: np.exp(-math.pi * ps * X * np.exp(2j * a)) * 1j * rx * np.exp(1j * a),
        0.0, end, rtol=rtol, atol=1e-16 * rx, breakpoints=breaks).value
    return ContourParts(complex(line), complex(arc))


def fresnel_gaussian_segment(t: float, X: float, rtol: float = DEFAULT_RTOL,
                             route: str = "direct") -> complex:
    """I(t, X) = ∫_0^sqrt(X) exp(-π psi(t) s^2) ds.

    ``route`` is "direct" (real segment), "contour" (ray minus arc) or "both",
    which computes the two and raises ContourMismatchError if they differ by
    more than 10*rtol relative.
    """
    if not X > 0:
        if X == 0:
            return 0j
        raise ValueError("X must be non-negative")
    if route not in ("direct", "contour", "both"):
        raise ValueError(f"unknown route {route!r}")
    if route == "contour":
        return fresnel_contour_parts(t, X, rtol).value
    direct = integrate_complex(_gauss(PhaseProfile(t).psi), 0.0, math.sqrt(X), rtol,
                               focus=_width(t))
    if route == "both":
        other = fresnel_contour_parts(t, X, rtol).value
        if abs(direct - other) > 10 * rtol * abs(direct) + 1e-14:
            raise ContourMismatchError(
                f"I(t={t}, X={X}): direct {direct} vs contour {other}")
    return direct


def shifted_profile(x1: float, x2: float, t: float, rtol: float = DEFAULT_RTOL) -> complex:
    """F(t) = ∫ exp(-π psi(t) z^2) dz along the segment from -z0 to sqrt(x2) - z0."""
    z0 = ShiftData(x1, x2, t).z0
    return integrate_complex(_gauss(PhaseProfile(t).psi), -z0, math.sqrt(x2) - z0, rtol,
                             focus=_width(t))


def shifted_profile_erf(x1, x2, t):
    """Vectorised closed form of F(t) (same quantity as shifted_profile)."""
    x1, x2, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, t)))
    ps = psi(t)
    z0 = 1j * x1 / (np.sqrt(x2) * ps)
    return gaussian_segment_erf(ps, -z0, np.sqrt(x2) - z0)


def detour_terms(x1: float, x2: float, t: float,
                 rtol: float = DEFAULT_RTOL) -> tuple[complex, complex]:
    """(rho1, rho2): integrals over [0, -z0] and [sqrt(x2), sqrt(x2) - z0].

    F(t) = I(t, x2) - rho1 + rho2 by Cauchy's theorem.
    """
    g = _gauss(PhaseProfile(t).psi)
    z0 = ShiftData(x1, x2, t).z0
    r2 = math.sqrt(x2)
    w = _width(t)
    return (integrate_complex(g, 0.0, -z0, rtol, focus=w),
            integrate_complex(g, r2, r2 - z0, rtol, focus=w))


def f_upper_integral(x1: float, x2: float, eps: float, p: float,
                     rtol: float = 1e-8) -> complex:
    """∫_{eps sqrt(x2)}^{sqrt(x2)/eps} t^{-1/p-1} (exp(-π x1^2/(x2 psi)) - 1) F(t) dt.

    Integrated in log t; F from the closed form.
    """
    lo = math.log(eps * math.sqrt(x2))
    hi = math.log(math.sqrt(x2) / eps)

    def fn(v):
        t = np.exp(v)
        ps = psi(t)
        return (t ** (-1.0 / p) * (np.exp(-math.pi * x1 * x1 / (x2 * ps)) - 1.0)
                * shifted_profile_erf(x1, x2, t))

    return complex(adaptive_gk(fn, lo, hi, rtol=rtol, atol=1e-300, initial=16).value)


# ---------------------------------------------------------------------------
# grid checks of the contour bounds


@dataclass(frozen=True)
class ContourBoundReport:
    t_grid: np.ndarray
    x_grid: np.ndarray
    lower: np.ndarray  # Re I * |psi|^{1/2}, shape (nx, nt)
    arc: np.ndarray  # |I_arc| * sqrt(x) * |psi|^{1/2}
    mismatch: float  # max relative |direct - contour|
    c_star: float

    @property
    def lower_constant(self) -> float:
        keep = self.x_grid >= self.c_star
        return float(self.lower[keep].min())

    @property
    def arc_constant(self) -> float:
        keep = self.x_grid >= max(1.0, self.c_star)
        return float(self.arc[keep].max())


def log_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    n = int(round(math.log10(hi / lo) * per_decade)) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def find_c_star(x_grid, lower: np.ndarray, threshold: float = C_STAR_THRESHOLD,
                floor: float = 1.0) -> float:
    """Least grid x >= floor from which on the row minimum of ``lower`` stays above
    threshold."""
    x_grid = np.asarray(x_grid)
    ok = lower.min(axis=1) > threshold
    if not ok[-1]:
        raise ValueError("lower-bound ratio never exceeds the threshold on this grid")
    k = len(ok) - 1
    while k > 0 and ok[k - 1] and x_grid[k - 1] >= floor:
        k -= 1
    return float(x_grid[k])


def contour_bounds(t_grid, x_grid, rtol: float = DEFAULT_RTOL,
                   threshold: float = C_STAR_THRESHOLD, floor: float = 1.0) -> ContourBoundReport:
    """Tabulate the lower-bound and arc ratios of I(t, x) over a (t, x) grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    lower = np.empty((x_grid.size, t_grid.size))
    arc = np.empty_like(lower)
    worst = 0.0
    for i, x in enumerate(x_grid):
        for j, t in enumerate(t_grid):
            ap = PhaseProfile(t).abs_psi
            parts = fresnel_contour_parts(t, x, rtol)
            direct = fresnel_gaussian_segment(t, x, rtol)
            worst = max(worst, abs(direct - parts.value) / abs(direct))
            lower[i, j] = direct.real * math.sqrt(ap)
            arc[i, j] = abs(parts.arc) * math.sqrt(x * ap)
    c_star = find_c_star(x_grid, lower, threshold, floor)
    return ContourBoundReport(t_grid, x_grid, lower, arc, worst, c_star)
