"""Perron trees: the bisect-and-slide construction over the triangle
(0,0), (-2J,1), (-4J,1), scanline union areas, inscribed rectangles and the
rectangle/tree overlap functional."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import RectSpec, unit

DEFAULT_RESOLUTION = 2 ** 14
DEFAULT_C = 0.05
DEFAULT_C1 = 0.04
MAX_J0 = 12


@dataclass(frozen=True)
class Triangle:
    vertices: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        v = tuple(tuple(float(c) for c in p) for p in self.vertices)
        object.__setattr__(self, "vertices", v)
        if not self.area > 0:
            raise ValueError(f"degenerate triangle {v}")

    @property
    def area(self) -> float:
        (x0, y0), (x1, y1), (x2, y2) = self.vertices
        return 0.5 * abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))

    def translated(self, dx: float, dy: float = 0.0) -> "Triangle":
        return Triangle(tuple((x + dx, y + dy) for x, y in self.vertices))

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = np.asarray(self.vertices)
        s = np.sign((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1])
                    - (v[2, 0] - v[0, 0]) * (v[1, 1] - v[0, 1]))
        inside = np.ones(len(pts), dtype=bool)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            cross = ((v[b, 0] - v[a, 0]) * (pts[:, 1] - v[a, 1])
                     - (v[b, 1] - v[a, 1]) * (pts[:, 0] - v[a, 0]))
            inside &= s * cross >= -tol
        return inside

    def x_interval(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Horizontal section [left, right] at heights y (empty sections give left > right)."""
        v = np.asarray(self.vertices)
        y = np.asarray(y, dtype=float)
        xs = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            (xa, ya), (xb, yb) = v[a], v[b]
            if ya == yb:
                continue
            s = (y - ya) / (yb - ya)
            ok = (s >= 0) & (s <= 1)
            xs.append(np.where(ok, xa + s * (xb - xa), np.nan))
        xs = np.array(xs)
        with np.errstate(all="ignore"):
            lo = np.nanmin(np.where(np.isnan(xs), np.inf, xs), axis=0)
            hi = np.nanmax(np.where(np.isnan(xs), -np.inf, xs), axis=0)
        return lo, hi


# ---------------------------------------------------------------------------
# union area


def _section_lengths(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Length of the union of intervals [left[:, i], right[:, i]] for each row."""
    order = np.argsort(left, axis=1)
    lo = np.take_along_axis(left, order, axis=1)
    hi = np.take_along_axis(right, order, axis=1)
    hi = np.where(hi > lo, hi, lo)
    reach = np.maximum.accumulate(hi, axis=1)
    prev = np.concatenate([np.full((lo.shape[0], 1), -np.inf), reach[:, :-1]], axis=1)
    return np.sum(np.maximum(0.0, hi - np.maximum(lo, prev)), axis=1)


def _slab_lengths(tris: Sequence[Triangle], y: np.ndarray, chunk: int = 2 ** 21) -> np.ndarray:
    secs = [t.x_interval(y) for t in tris]
    left = np.stack([s[0] for s in secs], axis=1)
    right = np.stack([s[1] for s in secs], axis=1)
    out = np.empty(y.size)
    rows = max(1, chunk // max(1, len(tris)))
    for s in range(0, y.size, rows):
        out[s:s + rows] = _section_lengths(left[s:s + rows], right[s:s + rows])
    return out


def union_area(polygons: Sequence[Triangle], resolution: int = DEFAULT_RESOLUTION
               ) -> tuple[float, float]:
    """Area of a union of triangles lying in the slab 0 <= y <= 1.

    Trapezoid rule over ``resolution`` heights of the exact section length,
    Richardson-combined with the half-resolution rule. Returns (area, error
    bound), the bound being the size of that Richardson correction.
    """
    if not polygons:
        return 0.0, 0.0
    ys = np.array([[p[1] for p in t.vertices] for t in polygons])
    if ys.min() < -1e-12 or ys.max() > 1 + 1e-12:
        raise ValueError("union_area expects triangles inside the slab 0 <= y <= 1")
    for t in polygons:
        if not t.area > 0:
            raise ValueError("degenerate polygon")
    y = np.linspace(0.0, 1.0, resolution + 1)
    L = _slab_lengths(polygons, y)
    h = 1.0 / resolution
    fine = h * (L.sum() - 0.5 * (L[0] + L[-1]))
    Lc = L[::2]
    coarse = 2 * h * (Lc.sum() - 0.5 * (Lc[0] + Lc[-1]))
    area = fine + (fine - coarse) / 3
    return float(area), float(abs(fine - coarse) / 3)


# ---------------------------------------------------------------------------
# Perron trees

AlphaStrategy = Callable[[int, int], float]


def alpha_classical(k: int, J0: int) -> float:
    """alpha_k = (k+1)/(k+2) at merge level k = 1..J0."""
    return (k + 1) / (k + 2)


def alpha_uniform_log(k: int, J0: int) -> float:
    """A single alpha = 1 - log(J0+1)/(2(J0+1)) at every level."""
    n = J0 + 1
    return 1.0 - math.log(n) / (2 * n)


STRATEGIES: dict[str, AlphaStrategy] = {
    "classical": alpha_classical,
    "uniform-log": alpha_uniform_log,
}


def base_triangle(J: int) -> Triangle:
    return Triangle(((0.0, 0.0), (-2.0 * J, 1.0), (-4.0 * J, 1.0)))


def sub_triangle(j: int) -> Triangle:
    """Piece of the base triangle over the top segment [-2j-2, -2j]."""
    return Triangle(((0.0, 0.0), (-2.0 * j - 2, 1.0), (-2.0 * j, 1.0)))


def direction_v(j: int) -> np.ndarray:
    """Unit vector from the apex to the midpoint (-2j-1, 1) of the j-th top segment."""
    return unit([-2.0 * j - 1, 1.0])


@dataclass
class _Figure:
    """A group of consecutive pieces and the main triangle their union contains."""

    index: list[int]  # piece indices j
    shift: np.ndarray  # horizontal translation per piece
    apex: np.ndarray  # main triangle apex
    top: tuple[float, float]  # main triangle top segment at y = 1

    def move(self, dx: float):
        self.shift = self.shift + dx
        self.apex = self.apex + np.array([dx, 0.0])
        self.top = (self.top[0] + dx, self.top[1] + dx)


def _merge(left: _Figure, right: _Figure, alpha: float) -> _Figure:
    # bring the main triangles edge to edge (they then share their apex) ...
    right.move(left.top[1] - right.top[0])
    if not np.allclose(right.apex, left.apex, atol=1e-9 * (1 + abs(left.apex[0]))):
        raise AssertionError("main triangles failed to share an apex")
    w = left.top[1] - left.top[0]
    h = 1.0 - left.apex[1]
    # ... then slide the right one back by 2(1 - alpha) w
    s = 2.0 * (1.0 - alpha) * w
    right.move(-s)
    y_new = 1.0 - alpha * h
    # new apex: left edge of the left main meets right edge of the slid right main
    lx = left.apex[0] + (left.top[0] - left.apex[0]) * (y_new - left.apex[1]) / h
    return _Figure(left.index + right.index, np.concatenate([left.shift, right.shift]),
                   np.array([lx, y_new]), (left.top[0], right.top[1]))


@dataclass(frozen=True, eq=False)
class PerronTree:
    J0: int
    J: int
    strategy: str
    alphas: tuple[float, ...]
    indices: tuple[int, ...]  # j = J .. 2J-1
    shifts: np.ndarray  # b_j, horizontal
    pieces: tuple[Triangle, ...] = field(repr=False)

    @property
    def translations(self) -> np.ndarray:
        """b_j as 2-vectors."""
        return np.stack([self.shifts, np.zeros_like(self.shifts)], axis=1)

    def area(self, resolution: int = DEFAULT_RESOLUTION) -> tuple[float, float]:
        return union_area(self.pieces, resolution)

    def rectangles(self, c1: float = DEFAULT_C1) -> list[RectSpec]:
        """The inscribed c1 J x c1/J rectangles, moved along with their pieces."""
        out = []
        for j, b in zip(self.indices, self.shifts):
            r = inscribe_rect(j, self.J, c1)
            out.append(RectSpec(r.direction, (r.center[0] + b, r.center[1]), r.alpha, r.beta))
        return out

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        """Membership in the union of the pieces, all pieces tested at once."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = np.array([t.vertices for t in self.pieces])  # (N, 3, 2)
        # every piece has its apex on y = 0 and its top on y = 1, so over the
        # points' height band it is bracketed by its sections at the band ends
        y0 = min(max(pts[:, 1].min(), 0.0), 1.0)
        y1 = min(max(pts[:, 1].max(), 0.0), 1.0)
        apex, tl, tr = v[:, 0, 0], v[:, 1, 0], v[:, 2, 0]
        lo = np.minimum(apex + (tl - apex) * y0, apex + (tl - apex) * y1)
        hi = np.maximum(apex + (tr - apex) * y0, apex + (tr - apex) * y1)
        near = (hi >= pts[:, 0].min() - tol) & (lo <= pts[:, 0].max() + tol)
        v = v[near]
        if not len(v):
            return np.zeros(len(pts), dtype=bool)
        orient = np.sign((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                         - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
        hit = np.zeros(len(pts), dtype=bool)
        step = max(1, 2 ** 20 // len(v))
        for s in range(0, len(pts), step):
            P = pts[s:s + step, None, :]
            inside = np.ones((P.shape[0], len(v)), dtype=bool)
            for a, b in ((0, 1), (1, 2), (2, 0)):
                cross = ((v[:, b, 0] - v[:, a, 0]) * (P[..., 1] - v[:, a, 1])
                         - (v[:, b, 1] - v[:, a, 1]) * (P[..., 0] - v[:, a, 0]))
                inside &= orient * cross >= -tol
            hit[s:s + step] = inside.any(axis=1)
        return hit

    def check_containment(self, c1: float = DEFAULT_C1, n: int = 40) -> bool:
        return all(bool(self.contains(r.grid(n)).all()) for r in self.rectangles(c1))

    def counterexample_ratio(self, p: float, area: float | None = None) -> float:
        """J / (J^{2/p} |A|^{1-2/p})."""
        a = self.area()[0] if area is None else area
        return self.J / (self.J ** (2 / p) * a ** (1 - 2 / p))

    def to_csv(self) -> str:
        """One triangle per line: x1,y1,x2,y2,x3,y3 with 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for t in self.pieces:
            w.writerow([f"{c:.17g}" for p in t.vertices for c in p])
        return buf.getvalue()


def perron_tree(J0: int, strategy: str | AlphaStrategy = "classical") -> PerronTree:
    """Iterate the bisect-and-slide construction J0 times over the base triangle.

    The base triangle is cut into J = 2^J0 pieces over equal top segments; at
    merge level k the adjacent figures are first aligned so their main
    triangles touch, then the right one slides back by 2(1 - alpha_k) times the
    main triangle's top width. All translations are horizontal.
    """
    if not (isinstance(J0, (int, np.integer)) and 0 <= J0 <= MAX_J0):
        raise ValueError(f"J0={J0} outside [0, {MAX_J0}]")
    J = 2 ** int(J0)
    if callable(strategy):
        fn, name = strategy, getattr(strategy, "__name__", "custom")
    else:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        fn, name = STRATEGIES[strategy], strategy
    # ascending x: j = 2J-1 is leftmost
    figs = [_Figure([j], np.zeros(1), np.zeros(2), (-2.0 * j - 2, -2.0 * j))
            for j in range(2 * J - 1, J - 1, -1)]
    alphas = []
    for k in range(1, J0 + 1):
        a = float(fn(k, J0))
        if not 0 < a <= 1:
            raise ValueError(f"alpha_{k}={a} outside (0, 1]")
        alphas.append(a)
        figs = [_merge(figs[i], figs[i + 1], a) for i in range(0, len(figs), 2)]
    fig = figs[0]
    order = np.argsort(fig.index)
    idx = tuple(int(fig.index[i]) for i in order)
    shifts = fig.shift[order]
    # normalise so the tree's first piece is not moved
    shifts = shifts - shifts[0]
    pieces = tuple(sub_triangle(j).translated(b) for j, b in zip(idx, shifts))
    return PerronTree(int(J0), J, name, tuple(alphas), idx, shifts, pieces)


# ---------------------------------------------------------------------------
# rectangles


class InscriptionError(ValueError):
    def __init__(self, message: str, max_c1: float):
        super().__init__(f"{message}; largest feasible c1 ≈ {max_c1:.6g}")
        self.max_c1 = max_c1


def _rect_in_piece(j: int, J: int, c1: float) -> RectSpec:
    v = direction_v(j)
    e = np.array([-v[1], v[0]])
    alpha, beta = c1 * J / 2, c1 / (2 * J)
    # slide along the axis towards the top until a far corner touches y = 1
    lam = 1.0 - alpha * abs(v[1]) - beta * abs(e[1])
    center = lam * np.array([-2.0 * j - 1, 1.0])
    return RectSpec(tuple(v), tuple(center), alpha, beta)


def _fits(j: int, J: int, c1: float) -> bool:
    r = _rect_in_piece(j, J, c1)
    return bool(sub_triangle(j).contains(r.corners(), tol=1e-12).all())


def inscribe_rect(j: int, J: int, c1: float = DEFAULT_C1, grid: int = 0) -> RectSpec:
    """A c1 J x c1/J rectangle in direction v_j inside the j-th piece.

    Containment is exact (convexity: all four corners inside); ``grid`` > 0
    additionally checks a grid x grid sample of the rectangle.
    """
    if not J <= j <= 2 * J - 1:
        raise ValueError(f"j={j} outside [J, 2J-1] for J={J}")
    if not c1 > 0:
        raise ValueError("c1 must be positive")
    if not _fits(j, J, c1):
        lo, hi = 0.0, c1
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if _fits(j, J, mid) else (lo, mid)
        raise InscriptionError(f"rectangle does not fit in piece j={j}, J={J} for c1={c1}", lo)
    r = _rect_in_piece(j, J, c1)
    if grid and not sub_triangle(j).contains(r.grid(grid)).all():
        raise AssertionError("grid containment failed after exact check")
    return r


def overlap_sum(rects: Sequence[RectSpec], K: Callable[[np.ndarray], np.ndarray] | PerronTree,
                resolution: int = 64) -> tuple[float, float]:
    """Σ_j |R_j ∩ K| by midpoint grids on each rectangle; error from halving the grid.

    K is a PerronTree or any vectorised membership test.
    """
    member = K.contains if isinstance(K, PerronTree) else K
    fine = coarse = 0.0
    for r in rects:
        fine += r.area * float(np.mean(member(r.grid(resolution))))
        coarse += r.area * float(np.mean(member(r.grid(max(1, resolution // 2)))))
    return fine, abs(fine - coarse)
