"""The ten acceptance criteria at their pinned sizes and tolerances.

Each test prints one PASS/FAIL line (collected into the terminal summary) and
asserts the same condition. Criteria 4 and 8 are known to fail; see README.
"""

import math

import numpy as np

from stripext import verification as v

DEEP_EPS = (1e-6, 1e-9, 1e-12, 1e-15)
SHALLOW_EPS = (1e-2, 1e-3, 1e-4, 1e-5)

# named-point verdicts over OABCDEF, independent of the table in the package
NAMED = {
    ("compact-transversal", "strip"): "HHHHHHH",
    ("compact-nontransversal", "strip"): "HHHFFHH",
    ("parabola-transversal", "radon"): "FHFHFFF",
    ("parabola-transversal", "strip"): "FHFHFFF",
    ("parabola-nontransversal", "radon"): "FHFFFHF",
    ("parabola-nontransversal", "strip"): "FHFFFHF",
}


def test_1_plancherel(report):
    c = v.check_plancherel(n=10, seed=0, rtol=1e-6, tail_rtol=1e-9)
    report(1, c.line())
    assert len(c.metrics["errors"]) == 10
    assert c.metrics["max_error"] <= 1e-6


def test_2_bn_identity(report):
    c = v.check_bn(ts=(-2.0, -1.0, 0.0, 1.0, 2.0), rtol=0.01)
    report(2, c.line())
    assert abs(v.BN_VALUE - 1.76275) < 1e-5
    np.testing.assert_allclose(c.metrics["values"], v.BN_VALUE, rtol=0.01)


def test_3_gaussian_field(report):
    c = v.check_gaussian_field(n=100, seed=1, rtol=1e-8)
    report(3, c.line())
    assert c.metrics["max_error"] <= 1e-8
    assert c.metrics["modulus_error"] <= 1e-12


def test_4_pq4_failure(report):
    c = v.check_pq4(eps_grid=(1e-1, 1e-2, 1e-3, 1e-4), target=1.0, tol=0.2)
    report(4, c.line())
    assert c.metrics["increasing"]
    assert abs(c.metrics["exponent"] - 1.0) <= 0.2


def test_5_half_line_sharpness(report):
    c = v.check_homog(eps_grid=DEEP_EPS, p=3.0, q=3.0, c_star=1.0, tol_T=0.15, tol_f=0.1)
    info = v.check_homog(eps_grid=SHALLOW_EPS)
    report(5, c.line() + f" [eps 1e-6..1e-15; on 1e-2..1e-5: {info.detail}]")
    assert abs(c.metrics["T_exponent"] - 1 / 3) <= 0.15
    assert abs(c.metrics["f_exponent"] - 1 / 3) <= 0.1


def test_6_knapp_scaling(report):
    c = v.check_knapp(deltas=tuple(2.0 ** -k for k in range(2, 8)),
                      pqs=((2.0, 4.0), (4.0, 2.0)), slack=0.05)
    report(6, c.line())
    ex = c.metrics["exponents"]
    assert ex["2,4"] >= (1 - 1 / 4 - 1 / 2) - 0.05
    assert ex["4,2"] >= (1 - 1 / 2 - 1 / 4) - 0.05


def test_7_contour_bounds(report):
    c = v.check_contour(per_decade=4, rtol=1e-9, stability=0.1)
    report(7, c.line())
    lo, arc = c.metrics["lower"], c.metrics["arc"]
    assert c.metrics["c_star"] >= 1
    assert lo[1] > 0 and math.isfinite(arc[1])
    assert abs(lo[1] - lo[0]) <= 0.1 * lo[0]
    assert abs(arc[1] - arc[0]) <= 0.1 * arc[0]


def test_8_perron_tree(report):
    c = v.check_perron(j0s=tuple(range(3, 9)), p=3.0, growth=1.5, final=0.5)
    report(8, c.line())
    norm = c.metrics["area_over_J"]
    assert all(b < a for a, b in zip(norm, norm[1:]))
    assert norm[-1] < 0.5
    assert c.metrics["contained"]
    assert c.metrics["growth"] >= 1.5


def test_9_pps_inequality(report):
    c = v.check_pps(n=100, ps=(1.25, 1.5, 1.75, 2.0), stability=0.1, eq_rtol=1e-6)
    report(9, c.line())
    for c1, c2 in c.metrics["C_p"].values():
        assert abs(c2 - c1) <= 0.1 * c1
    assert c.metrics["p2_error"] <= 1e-6


def test_10_region_classifier(report):
    want = {"H": "Holds", "F": "Fails"}
    assert {k: {n: want[s] for n, s in zip("OABCDEF", code)} for k, code in NAMED.items()} \
        == v.EXPECTED_NAMED
    c = v.check_classifier(n=101)
    report(10, c.line())
    assert c.metrics["mismatches"] == [] and c.metrics["violations"] == []
