"""Low-level quadrature: batched adaptive Gauss-Kronrod and panel rules for
oscillatory kernels.

Everything here works on numpy arrays and evaluates the integrand on whole
batches of nodes at a time, which is what makes the field evaluations in
`stripext.operators` affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# QUADPACK qk15 abscissae/weights (Kronrod 15 points, embedded Gauss 7).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point node set on [-1, 1] and matching weight vectors.
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_g = np.zeros(15)
_g[[1, 3, 5]] = _WG[:3]
_g[[9, 11, 13]] = _WG[2::-1]
_g[7] = _WG[3]
GK_GAUSS_W = _g
del _g

GL_ORDER = 20
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its depth limit.

    The best available estimate and its error bound are attached so callers
    can decide whether the result is still usable.
    """

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error<={error:.3e})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    error: float
    n_evals: int
    n_intervals: int


def adaptive_gk(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-9,
    atol: float = 0.0,
    max_depth: int = 40,
    initial: int = 1,
    breakpoints: Sequence[float] = (),
    max_intervals: int = 2 ** 18,
) -> QuadResult:
    """Integrate ``fn`` over [a, b] by batched adaptive GK15 bisection.

    ``fn`` receives a flat array of nodes and must return values of the same
    shape (real or complex). All pending intervals are evaluated in a single
    call per refinement sweep. An interval is accepted once its local
    ``|K15 - G7|`` estimate is below its length-proportional share of
    ``max(rtol*|I|, atol)``. A pending frontier above ``max_intervals`` is
    treated like depth exhaustion.
    """
    if b == a:
        return QuadResult(0.0, 0.0, 0, 0)
    if b < a:
        r = adaptive_gk(fn, b, a, rtol, atol, max_depth, initial, breakpoints, max_intervals)
        return QuadResult(-r.value, r.error, r.n_evals, r.n_intervals)

    edges = {a, b}
    edges.update(x for x in breakpoints if a < x < b)
    edges = np.array(sorted(edges))
    lo = np.concatenate([np.linspace(edges[i], edges[i + 1], initial + 1)[:-1]
                         for i in range(len(edges) - 1)])
    hi = np.concatenate([np.linspace(edges[i], edges[i + 1], initial + 1)[1:]
                         for i in range(len(edges) - 1)])
    depth = np.zeros(lo.size, dtype=int)
    total_len = b - a

    done_val: list = []
    done_err: list = []
    n_evals = 0
    n_intervals = 0
    while True:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[:, None] + half[:, None] * GK_NODES[None, :]
        vals = np.asarray(fn(nodes.ravel())).reshape(nodes.shape)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("integrand returned non-finite values")
        n_evals += vals.size
        kron = half * (vals @ GK_KRONROD_W)
        gauss = half * (vals @ GK_GAUSS_W)
        err = np.abs(kron - gauss)

        total = sum(done_val) + kron.sum()
        tol = max(rtol * abs(total), atol)
        ok = err <= tol * (hi - lo) / total_len
        # roundoff floor: nothing left to gain below a few ulps of the panel sum
        ok |= err <= 50 * np.finfo(float).eps * np.abs(half) * (np.abs(vals) @ GK_KRONROD_W)
        done_val.extend(kron[ok])
        done_err.extend(err[ok])
        n_intervals += int(ok.sum())
        if ok.all():
            break
        bad = ~ok
        if np.any(depth[bad] >= max_depth) or 2 * bad.sum() > max_intervals:
            est = sum(done_val) + kron[bad].sum()
            bound = sum(done_err) + err[bad].sum()
            raise QuadratureError("maximum subdivision depth exceeded", est, float(bound))
        lo_b, hi_b, mid_b, d_b = lo[bad], hi[bad], mid[bad], depth[bad] + 1
        lo = np.concatenate([lo_b, mid_b])
        hi = np.concatenate([mid_b, hi_b])
        depth = np.concatenate([d_b, d_b])

    value = np.sum(np.array(done_val))
    return QuadResult(value, float(np.sum(done_err)), n_evals, n_intervals)


def gl_panels(lo: float, hi: float, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * GL_NODES[None, :]).ravel()
    weights = (half[:, None] * GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def oscillatory_panels(
    amplitude: Callable[[np.ndarray], np.ndarray],
    pieces: Sequence[tuple[float, float]],
    phase: Callable[[np.ndarray, np.ndarray], np.ndarray],
    freq_bound: Callable[[np.ndarray, float, float], np.ndarray],
    points: np.ndarray,
    min_panels: int = 4,
    bandwidth: float = 0.0,
    cycles_per_panel: float = 1.0,
    refine: int = 1,
    chunk: int = 256,
    max_nodes: int = 4_000_000,
) -> np.ndarray:
    """Evaluate ``sum over pieces of  ∫ amplitude(u) exp(2πi phase(u, x)) du``.

    ``points`` has shape (n, d); ``phase(u, x)`` takes u of shape (1, m) and x
    rows of shape (k, d) and returns (k, m) phases in cycles. ``freq_bound``
    gives, for each row of x, an upper bound on |d phase/du| over a piece.
    Panels are sized so that each carries at most ``cycles_per_panel``
    oscillations of phase plus amplitude bandwidth, with 20 GL nodes each.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(points.shape[0], dtype=complex)
    for lo, hi in pieces:
        if hi <= lo:
            continue
        length = hi - lo
        freq = np.abs(freq_bound(points, lo, hi)) + bandwidth
        need = np.maximum(min_panels, np.ceil(length * freq / cycles_per_panel)).astype(int)
        need *= refine
        order = np.argsort(need, kind="stable")
        start = 0
        while start < order.size:
            # group by similar panel count so cheap points are not overpaid
            n_here = need[order[start]]
            stop = start + 1
            limit = max(1, min(chunk, max_nodes // (n_here * GL_ORDER)))
            while stop < order.size and stop - start < limit and need[order[stop]] <= 2 * n_here:
                stop += 1
            idx = order[start:stop]
            n_pan = int(need[idx].max())
            u, w = gl_panels(lo, hi, n_pan)
            amp = amplitude(u) * w
            x = points[idx]
            # sub-chunk so (k, m) matrices stay bounded in memory
            step = max(1, max_nodes // u.size)
            for s in range(0, idx.size, step):
                ph = phase(u[None, :], x[s:s + step])
                out[idx[s:s + step]] += np.exp(2j * np.pi * ph) @ amp
            start = stop
    return out
