import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from stripext.core import INF, CurveSpec, lp_norm
from stripext.extremals import (BUMP_RADIUS, homog_t_route, knapp_direction,
                                make_bump, make_dilated_bump, make_gaussian,
                                make_homog_approx, make_knapp, make_sign_packet,
                                parallelogram_A, phi, phi_norm, random_bump_combination,
                                sign_packet_indices, sign_packet_rects)
from stripext.operators import FieldEvaluator, khintchine_realization
from stripext.scaling import compact_parabola, fit_exponent


def test_phi_shape():
    assert phi(0.0) == 1.0
    assert phi(BUMP_RADIUS) == 0.0
    assert phi(-0.2) == 0.0
    u = np.linspace(-0.2, 0.2, 4001)
    assert np.all(np.isfinite(phi(u)))


def test_support_descriptor_covers_mass():
    rng = np.random.default_rng(3)
    for f in [make_bump(0.5, 2.0), make_gaussian(0.3), random_bump_combination(rng),
              make_knapp(1.0, (0.2, -0.1))[0], make_sign_packet("compact_q2", 4)]:
        lo, hi = f.support
        u = np.linspace(lo - 5, hi + 5, 20001)
        v = np.abs(f(u))
        outside = (u < lo) | (u > hi)
        assert np.all(v[outside] <= 1e-15 * v.max())


def test_knapp_directions():
    f, rect = make_knapp(0.0, (0.0, 0.0))
    assert_allclose(rect.direction, (0.0, 1.0), atol=1e-15)
    assert rect.center == (0.0, 0.0)
    _, rect = make_knapp(1.0)
    assert_allclose(rect.direction, np.array([-2.0, 1.0]) / math.sqrt(5), rtol=1e-15)


@pytest.mark.parametrize("xi0", [0.0, 1.0, 2.0, 4.0])
def test_knapp_lower_bound_on_rectangle(xi0):
    # dense-grid minimisation oracle over the predicted tube
    a = (0.7, -0.3)
    f, rect = make_knapp(xi0, a)
    vals = np.abs(FieldEvaluator(CurveSpec.parabola(), f)(rect.grid(24)))
    total = phi_norm(1.0)
    assert vals.min() >= 0.5 * total
    assert vals.min() >= 0.1 * total


def test_knapp_field_is_translate():
    a = np.array([0.4, 1.1])
    f, _ = make_knapp(1.0, tuple(a))
    g, _ = make_knapp(1.0)
    x = np.array([[0.3, -0.2], [1.5, 0.8], [-2.0, 0.1]])
    cur = CurveSpec.parabola()
    assert_allclose(FieldEvaluator(cur, f)(x + a), FieldEvaluator(cur, g)(x), rtol=1e-10)


def test_gaussian_family():
    g = make_gaussian(1.0)
    assert g(0.0) == 1.0
    assert_allclose(g.norm(2), 2 ** -0.25, rtol=1e-15)
    assert_allclose(lp_norm(g, 2), g.norm(2), rtol=1e-12)
    eps = [1e-1, 1e-2, 1e-3, 1e-4]
    for p in (2.0, 3.0, 4.0):
        fit = fit_exponent([(e, make_gaussian(e).norm(p)) for e in eps])
        assert abs(fit.exponent + 1 / (2 * p)) <= 0.02
        assert_allclose(lp_norm(make_gaussian(0.01), p), make_gaussian(0.01).norm(p),
                        rtol=1e-10)


def test_homog_two_routes():
    f = make_homog_approx(0.1, 3.0)
    v = f(1.0)
    assert v > 0
    assert_allclose(v, homog_t_route(1.0, 0.1, 3.0), rtol=1e-9)
    for xi in (1e-12, 1e-3, 0.05, 0.7, 4.0, 20.0):
        assert_allclose(f(xi), homog_t_route(xi, 0.1, 3.0), rtol=1e-9)
    assert f(1e3) < 1e-300
    with pytest.raises(ValueError):
        make_homog_approx(1.5, 3.0)


def test_homog_norm_growth():
    # ||f_eps||_p^p grows linearly in log(1/eps); over eps in 1e-2..1e-5 the
    # constant term still bends the log-log slope, on deeper eps it tends to 1
    shallow = [1e-2, 1e-3, 1e-4, 1e-5]
    v = [lp_norm(make_homog_approx(e, 3.0), 3.0, (0.0, INF)) ** 3 for e in shallow]
    L = -np.log(shallow)
    slope, icpt = np.polyfit(L, v, 1)
    assert np.max(np.abs(np.polyval([slope, icpt], L) - v)) < 1e-2 * max(v)
    deep = [1e-20, 1e-40, 1e-80, 1e-150]
    w = [lp_norm(make_homog_approx(e, 3.0), 3.0, (0.0, INF)) ** 3 for e in deep]
    fit = fit_exponent([(1 / e, x) for e, x in zip(deep, w)], "logpower")
    assert abs(fit.exponent - 1) <= 0.1


def test_dilated_bump():
    f = make_dilated_bump(1.0)
    u = np.linspace(-0.2, 0.2, 101)
    assert_allclose(f(u), phi(u))
    for p in (1.5, 2.0, 4.0):
        for R in (0.25, 1.0, 8.0):
            g = make_dilated_bump(R, "spread")
            assert_allclose(lp_norm(g, p) / R ** (1 / p), phi_norm(p), rtol=1e-10)


def test_spread_bump_field_lower_bound():
    cur = CurveSpec.parabola()
    for R in (2.0, 4.0, 8.0):
        f = make_dilated_bump(R, "spread")
        s = (np.arange(12) + 0.5) / 12
        X, Y = np.meshgrid(s / R, s / R ** 2)
        vals = np.abs(FieldEvaluator(cur, f)(np.stack([X, Y], -1)))
        assert vals.min() >= 0.1 * R


def test_sign_packets():
    base = make_bump()
    f = make_sign_packet("compact_q2", 1, [1])
    u = np.linspace(-0.2, 0.2, 101)
    assert_allclose(f(u), base(u))
    assert list(sign_packet_indices("parabola_diag", 4)) == [4, 5, 6, 7]
    with pytest.raises(ValueError):
        make_sign_packet("compact_q2", 4, [1, 1])
    with pytest.raises(ValueError):
        make_sign_packet("compact_q2", 2, [1, 2])


@pytest.mark.parametrize("kind", ["compact_q2", "parabola_diag", "parabola_tail"])
def test_disjoint_additivity(kind):
    J = 4
    n = len(sign_packet_indices(kind, J))
    signs = [(-1) ** k for k in range(n)]
    f = make_sign_packet(kind, J, signs)
    for p in (1.5, 2.0, 3.0):
        parts = sum(lp_norm(g, p) ** p for g in f.params["packets"])
        assert_allclose(lp_norm(f, p) ** p, parts, rtol=1e-12)
        assert_allclose(f.norm(p) ** p, parts, rtol=1e-12)


def test_compact_packets_norm_flat_in_J():
    # J/2 disjoint packets phi(J u - j), each with ||.||_p^p = ||phi||_p^p / J
    for p in (1.5, 2.0, 3.0):
        vals = [lp_norm(make_sign_packet("compact_q2", J, count=0.5), p) for J in (4, 8, 16, 32)]
        assert_allclose(vals, 0.5 ** (1 / p) * phi_norm(p), rtol=1e-10)


def test_parallelogram_in_tail_rectangles():
    J = 8
    f = make_sign_packet("parabola_tail", J)
    A = parallelogram_A(J)
    rects = sign_packet_rects(f)
    # fill A with convex combinations of its vertices
    rng = np.random.default_rng(0)
    w = rng.dirichlet(np.ones(4), 400)
    pts = np.vstack([A, w @ A])
    for r in rects[1:]:
        assert r.contains(pts, slack=1e-12).all()


def test_khintchine_realization_stable():
    f = make_sign_packet("compact_q2", 16, count=0.5)
    cur = compact_parabola()
    x = np.linspace(-20, 20, 60)
    y = np.linspace(-0.5, 0.5, 9)
    X, Y = np.meshgrid(x, y)
    pts = np.stack([X, Y], -1).reshape(-1, 2)
    w = np.full(len(pts), (40 / 60) * (1 / 9))
    k = [khintchine_realization(cur, f.params["packets"], pts, w, 4.0, n).kappa
         for n in (64, 128)]
    assert k[0] > 0.5
    assert abs(k[1] - k[0]) <= 0.1 * k[0]


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 5.0), st.sampled_from([1.5, 2.0, 3.0]))
def test_translate_dilate_norms(shift, lam, p):
    f = make_bump(0.0, 1.3)
    assert_allclose(lp_norm(f.translated(shift), p), lp_norm(f, p), rtol=1e-10)
    assert_allclose(lp_norm(f.dilated(lam), p), lam ** (-1 / p) * lp_norm(f, p), rtol=1e-10)
