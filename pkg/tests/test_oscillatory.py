import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.special import fresnel

from stripext.oscillatory import (ContourMismatchError, PhaseProfile, ShiftData,
                                  contour_bounds, detour_terms, f_upper_integral,
                                  find_c_star, fresnel_contour_parts,
                                  fresnel_gaussian_segment, gaussian_segment_erf,
                                  integrate_complex, log_grid, shifted_profile,
                                  shifted_profile_erf)


def test_integrate_complex_examples():
    assert_allclose(integrate_complex(lambda z: np.ones_like(z), 0, 1), 1.0, rtol=1e-14)
    g = integrate_complex(lambda z: np.exp(-math.pi * z * z), 0, 6)
    assert_allclose(g, 0.5, rtol=1e-12)
    assert abs(integrate_complex(lambda z: np.exp(2j * math.pi * z), 0, 1)) < 1e-13
    with pytest.raises(ValueError):
        integrate_complex(np.exp, 0, 1, rtol=1e-14)


def test_integrate_complex_off_axis_segment():
    # ∫ z^2 dz from 0 to 1+i = (1+i)^3/3
    v = integrate_complex(lambda z: z * z, 0, 1 + 1j)
    assert_allclose(v, (1 + 1j) ** 3 / 3, rtol=1e-13)


@given(st.floats(1e-3, 1e3))
def test_phase_profile_invariants(t):
    prof = PhaseProfile(t)
    assert_allclose(abs(prof.psi), math.sqrt(t ** -4 + 4), rtol=1e-12)
    assert_allclose(prof.abs_psi, abs(prof.psi), rtol=1e-12)
    assert_allclose(prof.theta, math.atan2(prof.psi.imag, prof.psi.real), rtol=1e-12)
    assert -math.pi / 2 < prof.theta < 0


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(1e-2, 1e2), st.floats(1e-3, 1e3))
def test_shift_modulus_bound(x1, x2, t):
    z0 = ShiftData(x1, x2, t).z0
    assert abs(z0) <= abs(x1) / (math.sqrt(x2) * PhaseProfile(t).abs_psi) * (1 + 1e-12)


def test_fresnel_limit_matches_scipy():
    # t = inf gives ∫_0^1 e^{2πiξ²} dξ = (C(2) + i S(2))/2 in scipy's normalisation
    S, C = fresnel(2.0)
    v = fresnel_gaussian_segment(math.inf, 1.0)
    assert_allclose(v, (C + 1j * S) / 2, rtol=1e-9)
    assert fresnel_gaussian_segment(1.0, 0.0) == 0


def test_small_X_tends_to_zero():
    for X in (1e-4, 1e-8, 1e-12):
        assert_allclose(fresnel_gaussian_segment(0.7, X), math.sqrt(X), rtol=1e-3)


@pytest.mark.parametrize("t", [1e-3, 0.05, 1.0, 20.0, 1e3])
@pytest.mark.parametrize("X", [1e-2, 1.0, 37.0])
def test_direct_contour_erf_agree(t, X):
    d = fresnel_gaussian_segment(t, X, route="both")
    c = fresnel_contour_parts(t, X).value
    e = complex(gaussian_segment_erf(PhaseProfile(t).psi, 0.0, math.sqrt(X)))
    assert_allclose(c, d, rtol=1e-8)
    assert_allclose(e, d, rtol=1e-8)


def test_route_validation():
    with pytest.raises(ValueError):
        fresnel_gaussian_segment(1.0, 1.0, route="nope")
    with pytest.raises(ValueError):
        fresnel_gaussian_segment(1.0, -1.0)
    assert issubclass(ContourMismatchError, ArithmeticError)


def test_shifted_profile_reduces_at_zero_shift():
    for t in (0.1, 1.0, 10.0):
        assert_allclose(shifted_profile(0.0, 3.0, t), fresnel_gaussian_segment(t, 3.0),
                        rtol=1e-10)


@pytest.mark.parametrize("t", [1e-2, 1.0, 50.0])
def test_shifted_profile_cauchy_relation(t):
    x1, x2 = 0.07, 2.5
    r1, r2 = detour_terms(x1, x2, t)
    F = shifted_profile(x1, x2, t)
    assert_allclose(F, fresnel_gaussian_segment(t, x2) - r1 + r2, rtol=1e-9, atol=1e-14)
    assert_allclose(shifted_profile_erf(x1, x2, t), F, rtol=1e-9)


def test_detour_terms_scale_like_delta_over_psi():
    ratios = []
    for t in log_grid(1e-3, 1e3, 2):
        ap = PhaseProfile(t).abs_psi
        for x1 in (0.1, 0.05, -0.025):
            for x2 in (1.0, 9.0):
                r1, r2 = detour_terms(x1, x2, t)
                ratios.append(max(abs(r1), abs(r2)) * ap / abs(x1))
    # rho1 ~ |z0| = |x1|/(sqrt(x2)|psi|), so C = 1 up to e^{C delta^2}
    assert max(ratios) < 1.1


def test_f_upper_ratio_to_delta_squared_bounded():
    for x2 in (1.0, 4.0):
        r = [abs(f_upper_integral(d, x2, 1e-3, 3.0)) / d ** 2 for d in (0.1, 0.05, 0.025)]
        assert max(r) < 2.0
        # the ratio settles: O(delta^2) and not a lower order
        assert_allclose(r, r[-1], rtol=0.01)


def test_f_lower_for_small_shift():
    x2 = 4.0
    for t in log_grid(1e-3, 1e3, 2):
        F = complex(shifted_profile_erf(0.05, x2, t))
        assert F.real * math.sqrt(PhaseProfile(t).abs_psi) > 0.1


def test_contour_bounds_report():
    rep = contour_bounds(log_grid(1e-3, 1e3, 2), log_grid(1e-2, 1e3, 2))
    assert rep.mismatch < 1e-8
    assert rep.c_star >= 1.0
    assert rep.lower_constant > 0.1
    assert np.isfinite(rep.arc_constant) and rep.arc_constant < 1.0


def test_find_c_star():
    x = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
    low = np.array([[0.0], [0.05], [0.2], [0.3], [0.4]])
    assert find_c_star(x, low) == 2.0
    assert find_c_star(x, np.full((5, 1), 1.0)) == 1.0
    with pytest.raises(ValueError):
        find_c_star(x, np.zeros((5, 1)))
