"""Hot inner loops: Hermite/Laguerre function tables and the cyclic Jacobi eigensolver.

Each kernel has a loop implementation (compiled by numba when the numba backend
is active) and a vectorised numpy implementation used when it is not.  The
public wrappers at the bottom dispatch on :data:`landaulab._accel.USE_NUMBA`.
"""

import math

import numpy as np

from landaulab._accel import USE_NUMBA, maybe_njit

PI_M14 = math.pi ** -0.25


# --------------------------------------------------------------------------
# Hermite functions


def _hermite_table_loops(lmax, x):
    n = x.shape[0]
    out = np.zeros((lmax + 1, n))
    for i in range(n):
        xi = x[i]
        p0 = PI_M14 * math.exp(-0.5 * xi * xi)
        out[0, i] = p0
        if lmax == 0:
            continue
        p1 = math.sqrt(2.0) * xi * p0
        out[1, i] = p1
        for l in range(1, lmax):
            p2 = math.sqrt(2.0 / (l + 1)) * xi * p1 - math.sqrt(l / (l + 1.0)) * p0
            out[l + 1, i] = p2
            p0 = p1
            p1 = p2
    return out


def _hermite_table_numpy(lmax, x):
    out = np.zeros((lmax + 1, x.shape[0]))
    out[0] = PI_M14 * np.exp(-0.5 * x * x)
    if lmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for l in range(1, lmax):
        out[l + 1] = np.sqrt(2.0 / (l + 1)) * x * out[l] - np.sqrt(l / (l + 1.0)) * out[l - 1]
    return out


# --------------------------------------------------------------------------
# Normalised Laguerre functions
#
#   ell_j^(m)(x) = sqrt(j!/(j+m)!) x^(m/2) exp(-x/2) L_j^(m)(x)
#
# These are the radial parts of displacement-operator matrix elements and of
# cross Wigner functions of Hermite functions.


def _laguerre_table_loops(jmax, m, x):
    n = x.shape[0]
    out = np.zeros((jmax + 1, n))
    half_lg = 0.5 * math.lgamma(m + 1.0)
    for i in range(n):
        xi = x[i]
        if xi <= 0.0:
            l0 = 1.0 if m == 0 else 0.0
        else:
            l0 = math.exp(0.5 * m * math.log(xi) - 0.5 * xi - half_lg)
        out[0, i] = l0
        if jmax == 0:
            continue
        l1 = (1.0 + m - xi) / math.sqrt(1.0 + m) * l0
        out[1, i] = l1
        for j in range(1, jmax):
            l2 = ((2 * j + 1 + m - xi) * l1 - math.sqrt(j * (j + m)) * l0) / math.sqrt((j + 1.0) * (j + 1 + m))
            out[j + 1, i] = l2
            l0 = l1
            l1 = l2
    return out


def _laguerre_table_numpy(jmax, m, x):
    out = np.zeros((jmax + 1, x.shape[0]))
    pos = x > 0
    l0 = np.zeros_like(x)
    l0[pos] = np.exp(0.5 * m * np.log(x[pos]) - 0.5 * x[pos] - 0.5 * math.lgamma(m + 1.0))
    if m == 0:
        l0[~pos] = 1.0
    out[0] = l0
    if jmax >= 1:
        out[1] = (1.0 + m - x) / math.sqrt(1.0 + m) * l0
    for j in range(1, jmax):
        out[j + 1] = ((2 * j + 1 + m - x) * out[j] - math.sqrt(j * (j + m)) * out[j - 1]) / math.sqrt(
            (j + 1.0) * (j + 1 + m)
        )
    return out


# --------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for real symmetric matrices


def _jacobi_loops(a, tol, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    norm = math.sqrt(total)
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        off = math.sqrt(2.0 * off)
        if off <= tol * norm or off == 0.0:
            converged = True
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                if abs(apq) < 1e-18 * norm:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps, converged


def _jacobi_numpy(a, tol, max_sweeps):
    n = a.shape[0]
    a = np.array(a, dtype=float, copy=True)
    v = np.eye(n)
    norm = np.linalg.norm(a)
    iu = np.triu_indices(n, 1)
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        off = math.sqrt(2.0 * float(np.sum(a[iu] ** 2)))
        if off <= tol * norm or off == 0.0:
            converged = True
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                if abs(apq) < 1e-18 * norm:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps, converged


if USE_NUMBA:
    _hermite_table = maybe_njit(_hermite_table_loops)
    _laguerre_table = maybe_njit(_laguerre_table_loops)
    _jacobi = maybe_njit(_jacobi_loops)
else:
    _hermite_table = _hermite_table_numpy
    _laguerre_table = _laguerre_table_numpy
    _jacobi = _jacobi_numpy


def hermite_table(lmax, x):
    """Hermite functions psi_0..psi_lmax at the points ``x``; shape ``(lmax+1, len(x))``."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _hermite_table(int(lmax), x)


def laguerre_table(jmax, m, x):
    """Normalised Laguerre functions ell_j^(m)(x) for j = 0..jmax; shape ``(jmax+1, len(x))``."""
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _laguerre_table(int(jmax), int(m), x)


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi diagonalisation of a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps, converged)`` with the
    eigenvectors in the columns, unsorted.
    """
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    return _jacobi(a, float(tol), int(max_sweeps))
