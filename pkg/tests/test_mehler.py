import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from landaulab import mehler as M
from landaulab import symbols as S
from landaulab.weyl import quantize_hermite


@pytest.mark.parametrize("h", [0.05, 0.1, 0.3])
@pytest.mark.parametrize("k", [0, 1, 5, 6])
def test_both_routes_reproduce_mehler(h, k):
    prof = S.gaussian_profile(1.0)
    exact = M.mehler_gaussian_eig(h, k)
    assert M.radial_eig_laguerre(prof, h, k) == pytest.approx(exact, rel=1e-10, abs=1e-14)
    assert M.radial_eig_fourier(prof, h, k) == pytest.approx(exact, rel=1e-10, abs=1e-14)


def test_mehler_formula_edge():
    assert M.mehler_gaussian_eig(0.1, 0) == pytest.approx(1 / 1.1)
    with pytest.raises(ValueError):
        M.mehler_gaussian_eig(-1.0, 2)


@settings(max_examples=15)
@given(st.floats(0.5, 3.0), st.floats(0.05, 0.3), st.integers(0, 10))
def test_gaussian_rate_family(z, h, k):
    prof = S.gaussian_profile(z)
    assert M.radial_eig_laguerre(prof, h, k) == pytest.approx(M.mehler_gaussian_eig(h, k, z), rel=1e-9, abs=1e-13)


@pytest.mark.parametrize("k", [0, 3, 10, 20])
def test_fourier_matches_laguerre_for_compact_profile(k):
    prof = S.cutoff_gaussian_profile(0.3, 1.0, 1.0)
    h = 0.1
    lag = M.radial_eig_laguerre(prof, h, k)
    res = M.radial_eig_fourier(prof, h, k, detail=True)
    assert res.value == pytest.approx(lag, abs=1e-9)
    assert res.tail_estimate <= 1e-10


def test_radial_eigenvalues_match_hermite_diagonal():
    sym = S.CutoffGaussian(0.3, 1.0)
    h = 0.1
    op = quantize_hermite(sym, h, 20)
    diag = np.diag(op.matrix)
    assert np.allclose(op.matrix, np.diag(diag), atol=1e-10)
    for k in (0, 4, 9):
        assert diag[k] == pytest.approx(M.radial_eig_laguerre(sym.profile(), h, k), abs=1e-9)


@pytest.mark.parametrize("k", range(6))
def test_laguerre_q_symbolic(k):
    # Q_k(u) = sum_n C(k, n) (-1)^(k - n) (2u)^n / n!
    u = sp.Symbol("u")
    series = sum(sp.binomial(k, n) * (-1) ** (k - n) * (2 * u) ** n / sp.factorial(n) for n in range(k + 1))
    closed = (-1) ** k * sp.assoc_laguerre(k, 0, 2 * u)
    assert sp.simplify(sp.expand(series - closed)) == 0
    xs = np.linspace(0, 5, 7)
    assert np.allclose(M.laguerre_q(k, xs), [float(series.subs(u, x)) for x in xs])


def test_laguerre_form_against_direct_quadrature():
    prof = S.gaussian_profile(1.0)
    h, k = 0.2, 3
    direct = quad(lambda u: math.exp(-h * u) * float(M.laguerre_q(k, u)) * math.exp(-u), 0, math.inf)[0]
    assert M.radial_eig_laguerre(prof, h, k) == pytest.approx(direct, rel=1e-10)


def test_profile_fourier_numeric_vs_closed():
    z = 1.3
    closed = S.gaussian_profile(z)
    numeric = S.RadialProfile(lambda u: np.exp(-z * np.asarray(u)), (), math.inf, "plain")
    tau = np.array([0.0, 0.7, 4.0])
    assert np.allclose(M.profile_fourier(numeric, tau), M.profile_fourier(closed, tau), atol=1e-12)


@pytest.mark.parametrize("h", [0.05, 0.1])
def test_decay_bound(h):
    rep = M.decay_bound_check(S.cutoff_gaussian_profile(0.3, 1.0), h, range(1, 61))
    assert not rep.violation
    assert rep.sup < 1.0


def test_decay_violation_flag_for_growing_profile():
    # Psi(u) = u grows, so k h |lambda_k| keeps increasing
    rep = M.decay_bound_check(S.polynomial_profile([0.0, 1.0]), 0.1, range(1, 21))
    assert rep.violation


def test_level_validation():
    prof = S.gaussian_profile(1.0)
    with pytest.raises(ValueError):
        M.radial_eig_laguerre(prof, 0.1, -1)
    with pytest.raises(ValueError):
        M.radial_eig_laguerre(prof, 0.1, 61)
    with pytest.raises(ValueError):
        M.radial_eig_fourier(prof, 0.1, 30)


def test_profile_not_evaluable():
    bad = S.RadialProfile(lambda u: np.log(np.asarray(u) - 1.0), (), math.inf, "log")
    with np.errstate(all="ignore"), pytest.raises(M.ProfileNotEvaluable):
        M.radial_eig_laguerre(bad, 0.1, 2)


def test_window_insufficient():
    # a kink without derivative data: the transform decays like 1/tau^2, too slowly for a short window
    kink = S.RadialProfile(lambda u: np.maximum(1.0 - np.asarray(u), 0.0), (), 1.0, "tent")
    with pytest.raises(M.WindowInsufficient):
        M.radial_eig_fourier(kink, 0.1, 2, window=50.0)


def test_eigen_table_csv(tmp_path):
    rows = M.eigen_table(S.gaussian_profile(1.0), 0.1, 5)
    path = tmp_path / "t.csv"
    M.write_table_csv(path, rows, "gauss", 0.1)
    text = path.read_text().splitlines()
    assert text[0] == "# profile=gauss h=0.1"
    assert text[1] == "k,lambda_k"
    assert float(text[2].split(",")[1]) == pytest.approx(1 / 1.1, rel=1e-12)
