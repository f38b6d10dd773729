import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from stripext.besicovitch import (InscriptionError, Triangle, base_triangle, direction_v,
                                  inscribe_rect, overlap_sum, perron_tree, sub_triangle,
                                  union_area)
from stripext.core import RectSpec


def test_union_area_trivial_cases():
    t = Triangle(((0, 0), (1, 1), (0, 1)))
    assert_allclose(union_area([t])[0], 0.5, rtol=1e-12)
    u = Triangle(((0, 0), (1, 0), (1, 1)))
    assert_allclose(union_area([t, u])[0], 1.0, rtol=1e-12)
    assert_allclose(union_area([t, t])[0], 0.5, rtol=1e-12)
    assert union_area([]) == (0.0, 0.0)
    with pytest.raises(ValueError):
        Triangle(((0, 0), (1, 1), (2, 2)))
    with pytest.raises(ValueError):
        union_area([Triangle(((0, 0), (1, 2), (0, 1)))])


def test_union_area_against_pixel_count():
    # independent oracle: membership counting on a fine lattice
    rng = np.random.default_rng(0)
    tris = [Triangle(((rng.uniform(0, 2), 0.0), (rng.uniform(0, 2), 1.0),
                      (rng.uniform(0, 2), rng.uniform(0.2, 1.0)))) for _ in range(6)]
    area, err = union_area(tris)
    n = 1200
    xs = (np.arange(n) + 0.5) / n * 2
    ys = (np.arange(n // 2) + 0.5) / (n // 2)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    hit = np.zeros(len(pts), dtype=bool)
    for t in tris:
        hit |= t.contains(pts)
    assert_allclose(area, hit.mean() * 2.0, rtol=5e-3)
    assert err < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
                          st.floats(0.05, 1.0)), min_size=1, max_size=5))
def test_union_area_bounds(specs):
    tris = [Triangle(((a, 0.0), (b, 1.0), (c, h))) for a, b, c, h in specs
            if abs((b - a) * h - (c - a)) > 1e-3]
    if not tris:
        return
    area, _ = union_area(tris, 2 ** 12)
    areas = [t.area for t in tris]
    assert max(areas) * (1 - 1e-6) <= area <= sum(areas) * (1 + 1e-6)


def test_base_decomposition():
    for J in (1, 4):
        assert_allclose(base_triangle(J).area, J, rtol=1e-15)
        assert_allclose(union_area([sub_triangle(j) for j in range(J, 2 * J)])[0], J,
                        rtol=1e-10)


def test_trivial_tree():
    tree = perron_tree(0)
    assert tree.J == 1
    assert_allclose(tree.area()[0], 1.0, rtol=1e-12)


def test_tree_area_shrinks():
    prev = None
    for J0 in (1, 2, 3, 4):
        tree = perron_tree(J0)
        a, err = tree.area()
        assert a <= tree.J * (1 + 1e-9)
        assert err < 1e-6 * a
        if prev is not None:
            assert a / tree.J < prev
        prev = a / tree.J
    assert perron_tree(3).area()[0] < 8


def test_tree_translations_horizontal_and_indexed():
    tree = perron_tree(3)
    assert tree.indices == tuple(range(8, 16))
    assert tree.shifts[0] == 0.0
    assert tree.translations.shape == (8, 2)
    assert np.all(tree.translations[:, 1] == 0)
    for tri, j, b in zip(tree.pieces, tree.indices, tree.shifts):
        assert_allclose(np.asarray(tri.vertices), np.asarray(sub_triangle(j).vertices) + [b, 0])


def test_invalid_tree_arguments():
    with pytest.raises(ValueError):
        perron_tree(-1)
    with pytest.raises(ValueError):
        perron_tree(3, "nonsense")
    with pytest.raises(ValueError):
        perron_tree(2, lambda k, J0: 1.5)


def test_rectangle_directions():
    J = 8
    for j in (8, 11, 15):
        r = inscribe_rect(j, J)
        assert_allclose(r.direction, np.array([-2 * j - 1, 1.0]) / math.hypot(2 * j + 1, 1),
                        rtol=1e-14)
        assert_allclose(r.alpha, 0.04 * J / 2)
        assert_allclose(r.beta, 0.04 / (2 * J))
        assert sub_triangle(j).contains(r.grid(30)).all()


def test_inscription_error_reports_limit():
    with pytest.raises(InscriptionError) as exc:
        inscribe_rect(8, 8, c1=5.0)
    assert 0 < exc.value.max_c1 < 5.0
    inscribe_rect(8, 8, c1=0.99 * exc.value.max_c1)
    with pytest.raises(ValueError):
        inscribe_rect(3, 8)


@pytest.mark.parametrize("J0", [2, 4])
def test_containment(J0):
    assert perron_tree(J0).check_containment()


def test_overlap_sum():
    tree = perron_tree(3)
    rects = tree.rectangles()
    total, err = overlap_sum(rects, tree)
    assert_allclose(total, sum(r.area for r in rects), rtol=1e-12)
    assert err == 0.0
    far = [RectSpec((0.0, 1.0), (100.0, 0.5), 0.1, 0.1)]
    assert overlap_sum(far, tree) == (0.0, 0.0)
    half = [RectSpec((1.0, 0.0), (0.0, 0.0), 0.5, 0.5)]
    v, _ = overlap_sum(half, lambda p: p[:, 0] > 0)
    assert_allclose(v, 0.5, rtol=1e-12)


def test_counterexample_ratio_formula():
    tree = perron_tree(3)
    assert_allclose(tree.counterexample_ratio(3.0, area=2.0),
                    8 / (8 ** (2 / 3) * 2.0 ** (1 / 3)), rtol=1e-15)
    assert_allclose(tree.counterexample_ratio(2.0, area=5.0), 1.0)


def test_polygon_csv():
    lines = perron_tree(2).to_csv().strip().splitlines()
    assert len(lines) == 4
    vals = [float(v) for v in lines[0].split(",")]
    assert vals[:2] == [0.0, 0.0] and len(vals) == 6
