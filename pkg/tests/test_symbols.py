import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from landaulab import symbols as S

STEP = 1e-4
FD_TOL = 1e-6


def central_diff(f, y, eta, axis):
    """Five-point central difference of ``f`` along y (axis 0) or eta (axis 1)."""
    dy, de = (STEP, 0.0) if axis == 0 else (0.0, STEP)
    g = lambda k: f(y + k * dy, eta + k * de)
    return (g(-2) - 8 * g(-1) + 8 * g(1) - g(2)) / (12 * STEP)


SYMBOLS = [
    S.Gaussian(1.0),
    S.Gaussian(2.5),
    S.CutoffGaussian(0.3, 1.0, 1.0),
    S.CutoffGaussian(2.0, 5.0, 1.0),
    S.Shifted(S.Gaussian(1.0), (1, -1)),
    S.Sum((S.Gaussian(1.0), S.Scaled(S.Gaussian(3.0), -0.5))),
]
POINTS = [(0.1, 0.2), (0.45, -0.3), (-0.7, 0.55), (1.2, 0.4)]


@pytest.mark.parametrize("sym", SYMBOLS, ids=lambda s: s.kind)
@pytest.mark.parametrize("alpha", [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 1), (2, 2)])
def test_partials_match_finite_differences(sym, alpha):
    # lower the highest index by one and differentiate numerically
    if alpha == (0, 0):
        for y, e in POINTS:
            assert sym.partial(alpha)(y, e) == pytest.approx(sym(y, e), abs=1e-14)
        return
    axis = 0 if alpha[0] > 0 else 1
    lower = (alpha[0] - 1, alpha[1]) if axis == 0 else (alpha[0], alpha[1] - 1)
    f_low = sym.partial(lower)
    f = sym.partial(alpha)
    for y, e in POINTS:
        fd = central_diff(f_low, y, e, axis)
        scale = max(1.0, abs(fd))
        assert abs(f(y, e) - fd) <= FD_TOL * scale


@given(st.floats(0.0, 1.2), st.floats(0.0, 2.0 * math.pi))
def test_radial_symbol_matches_profile(rad, theta):
    sym = S.CutoffGaussian(0.3, 1.0, 1.0)
    y, e = rad * math.cos(theta), rad * math.sin(theta)
    assert float(sym(y, e)) == pytest.approx(float(sym.profile()(rad * rad)), abs=1e-15)


def test_cutoff_plateau_and_support():
    prof = S.cutoff_gaussian_profile(0.3, 1.0, 1.0)
    u = np.array([0.0, 0.1, 0.3, 0.65, 1.0, 1.5])
    vals = prof(u)
    assert np.allclose(vals[:3], np.exp(-u[:3]), atol=1e-15)
    assert 0.0 < vals[3] < math.exp(-0.65)
    assert vals[4] == 0.0 and vals[5] == 0.0
    assert prof.q_max == 1.0
    assert S.CutoffGaussian(0.3, 1.0).support == (-1.0, 1.0, -1.0, 1.0)


def test_cutoff_rejects_bad_range():
    with pytest.raises(ValueError):
        S.cutoff_gaussian_profile(1.0, 0.5)


def test_gaussian_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        S.Gaussian(0.0)


def test_gaussian_profile_derivatives_closed_form():
    p = S.gaussian_profile(2.0)
    u = np.linspace(0, 3, 7)
    for k in range(1, 5):
        assert np.allclose(p.derivative(k)(u), (-2.0) ** k * np.exp(-2.0 * u))


def test_support_boxes_of_composites():
    c = S.CutoffGaussian(0.3, 1.0)
    assert S.Shifted(c, (2, -1)).support == (1.0, 3.0, -2.0, 0.0)
    assert S.Scaled(c, 3.0).support == c.support
    both = S.Sum((c, S.Shifted(c, (2, 0))))
    assert both.support == (-1.0, 3.0, -1.0, 1.0)
    assert S.Gaussian().support is None
    assert S.Sum((c, S.Constant(1.0))).support is None
    assert S.Sum((c, S.Constant(0.0))).support == c.support


def test_composite_evaluation_and_algebra():
    g = S.Gaussian(1.0)
    sym = 2.0 * g + g.shifted((1, 0))
    y, e = 0.3, -0.2
    expected = 2 * math.exp(-(y * y + e * e)) + math.exp(-((y - 1) ** 2 + e * e))
    assert float(sym(y, e)) == pytest.approx(expected, rel=1e-14)
    assert sym.radial() is None
    assert S.Sum((g, S.Scaled(g, 2.0))).radial()(0.5) == pytest.approx(3 * math.exp(-0.5))


def test_site_symbol():
    g = S.Gaussian(1.0)
    sym = S.site_symbol(g, [(0, 0), (1, 0)], [0.5, -0.25])
    assert float(sym(1.0, 0.0)) == pytest.approx(0.5 * math.exp(-1) - 0.25)


def test_identity_part():
    sym = S.Sum((S.Constant(0.7), S.Scaled(S.Constant(2.0), 0.5), S.Gaussian()))
    assert sym.identity_part() == pytest.approx(1.7)


@pytest.mark.parametrize("j", [(0, 0), (1, -2)])
def test_eta_transform_matches_quadrature(j):
    sym = S.Shifted(S.Gaussian(1.5), j)
    u, t = 0.4, 1.3
    re = quad(lambda e: math.cos(t * e) * float(sym(u, e)), -20, 20, points=[j[1]])[0]
    im = quad(lambda e: -math.sin(t * e) * float(sym(u, e)), -20, 20, points=[j[1]])[0]
    assert complex(sym.eta_transform(u, t)) == pytest.approx(complex(re, im), abs=1e-12)


def test_laplacian_is_radial_and_matches_partials():
    g = S.Gaussian(1.0)
    lap = S.laplacian(g)
    prof = lap.radial()
    assert prof is not None
    y, e = 0.3, 0.7
    direct = g.partial((2, 0))(y, e) + g.partial((0, 2))(y, e)
    assert float(prof(y * y + e * e)) == pytest.approx(float(direct), rel=1e-13)
    # Gaussian Laplacian: (4q - 4) e^{-q}
    q = y * y + e * e
    assert float(direct) == pytest.approx((4 * q - 4) * math.exp(-q), rel=1e-13)


def test_nonisotropic_derivative_sum_is_not_radial():
    g = S.Gaussian(1.0)
    assert S.DerivativeSum(g, (((2, 0), 1.0),)).radial() is None


def test_grad_squared():
    g = S.Gaussian(1.0)
    gs = S.GradSquared(g, -0.25)
    y, e = 0.4, -0.1
    q = y * y + e * e
    assert float(gs(y, e)) == pytest.approx(-0.25 * 4 * q * math.exp(-2 * q), rel=1e-13)
    assert float(gs.radial()(q)) == pytest.approx(float(gs(y, e)), rel=1e-13)


def test_derivatives_unavailable_for_generic_profile():
    prof = S.RadialProfile(lambda u: np.exp(-np.asarray(u)), (), math.inf, "bare")
    sym = S.RadialGeneric(prof)
    with pytest.raises(S.DerivativesUnavailable):
        S.laplacian(sym)
