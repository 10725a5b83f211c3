import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_genlaguerre

from landaulab import kernels
from landaulab._accel import backend


def test_backend_name():
    assert backend() in ("numba", "numpy")


@pytest.mark.parametrize("m", [0, 1, 4, 11])
def test_laguerre_table_normalisation(m):
    x = np.linspace(0.0, 30.0, 61)
    tab = kernels.laguerre_table(15, m, x)
    for j in (0, 3, 15):
        ref = math.sqrt(math.factorial(j) / math.factorial(j + m)) * x ** (m / 2) * np.exp(-x / 2) \
            * eval_genlaguerre(j, m, x)
        np.testing.assert_allclose(tab[j], ref, atol=1e-12)


def test_loop_and_numpy_paths_agree():
    x = np.linspace(-8, 8, 201)
    np.testing.assert_allclose(kernels._hermite_table_loops(60, x), kernels._hermite_table_numpy(60, x),
                               atol=1e-13)
    r = np.linspace(0, 40, 201)
    np.testing.assert_allclose(kernels._laguerre_table_loops(30, 3, r), kernels._laguerre_table_numpy(30, 3, r),
                               atol=1e-13)


@given(st.integers(2, 30), st.integers(0, 10_000))
def test_jacobi_matches_lapack(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = a + a.T
    w, v, sweeps, ok = kernels.jacobi_eigh(a)
    assert ok
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-11 * max(1, np.abs(a).max()))
    np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-12)


def test_jacobi_numpy_fallback():
    a = np.diag([3.0, 1.0, 2.0]) + 0.1
    w, v, sweeps, ok = kernels._jacobi_numpy(a.copy(), 1e-14, 50)
    assert ok
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-13)


def test_jacobi_reports_nonconvergence():
    a = np.random.default_rng(1).standard_normal((40, 40))
    a = a + a.T
    *_, ok = kernels.jacobi_eigh(a, max_sweeps=1)
    assert not ok
