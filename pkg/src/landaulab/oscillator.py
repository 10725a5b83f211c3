"""Harmonic-oscillator substrate: Hermite functions, ladder matrices, Gauss rules.

Hermite functions follow the usual physicists' normalisation with a positive
leading coefficient.  The ladder matrices use the sign convention
``J+ psi_k = sqrt(2(k+1)) psi_{k+1}``, which corresponds to the basis
``(-1)^k psi_k``; position and momentum matrices are returned in the
positive-leading-coefficient basis so they agree with quadrature against
:func:`hermite_eval`.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from landaulab import kernels


class QuadratureError(RuntimeError):
    """The Golub-Welsch eigenproblem did not produce a usable rule."""


@dataclass(frozen=True)
class HermiteBasisSpec:
    """Basis ``x -> s^{-1/2} psi_k(x/s)`` for ``k < size``."""

    size: int
    scale: float = 1.0

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("basis size must be >= 1")
        if not self.scale > 0:
            raise ValueError("basis scale must be positive")

    @classmethod
    def semiclassical(cls, size, h):
        """The basis ``h^{-1/4} psi_k(y / sqrt(h))``."""
        return cls(size, math.sqrt(h))

    def functions(self, x):
        """Basis functions evaluated at ``x``; shape ``(size, len(x))``."""
        x = np.asarray(x, dtype=float)
        return kernels.hermite_table(self.size - 1, x / self.scale) / math.sqrt(self.scale)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Sum ``weights * values`` along the last axis."""
        return np.asarray(values) @ self.weights


def hermite_eval(l, x):
    """Evaluate the L2-normalised Hermite function psi_l at ``x``.

    Uses the normalised three-term recurrence, so no factorials appear and
    levels up to a few hundred are safe for |x| <= 30.  Values that underflow
    are returned as 0.
    """
    if l < 0:
        raise ValueError("level must be nonnegative")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    vals = kernels.hermite_table(l, x_arr)[l]
    return float(vals[0]) if np.ndim(x) == 0 else vals


def hermite_functions(nmax, x):
    """psi_0..psi_nmax at ``x`` as a ``(nmax+1, len(x))`` array."""
    return kernels.hermite_table(nmax, x)


def ladder_matrices(n):
    """Matrices of ``J+ = d/dx - x`` and ``J- = -d/dx - x`` truncated to ``n`` levels.

    ``J+`` carries ``sqrt(2(k+1))`` at ``(k+1, k)`` and ``J-`` carries
    ``sqrt(2k)`` at ``(k-1, k)``.
    """
    if n < 2:
        raise ValueError("need at least two levels")
    k = np.arange(n - 1)
    jp = np.zeros((n, n))
    jp[k + 1, k] = np.sqrt(2.0 * (k + 1))
    jm = jp.T.copy()
    return jp, jm


def position_matrix(n):
    """Matrix of ``x`` on psi_0..psi_{n-1}; equals ``-(J+ + J-)/2`` after the sign change ``(-1)^k``."""
    k = np.arange(n - 1)
    x = np.zeros((n, n))
    x[k, k + 1] = x[k + 1, k] = np.sqrt((k + 1) / 2.0)
    return x


def momentum_matrix(n):
    """Matrix of ``-i d/dx`` on psi_0..psi_{n-1} (Hermitian, purely imaginary)."""
    k = np.arange(n - 1)
    p = np.zeros((n, n), dtype=complex)
    p[k, k + 1] = -1j * np.sqrt((k + 1) / 2.0)
    p[k + 1, k] = 1j * np.sqrt((k + 1) / 2.0)
    return p


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _golub_welsch(diag, offdiag, mu0):
    try:
        nodes, vecs = eigh_tridiagonal(diag, offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise QuadratureError(str(exc)) from exc
    weights = mu0 * vecs[0] ** 2
    if not np.all(np.isfinite(nodes)) or not np.all(weights >= 0):
        raise QuadratureError("tridiagonal eigenproblem returned an invalid rule")
    return nodes, weights


@lru_cache(maxsize=None)
def gauss_hermite(n):
    """Gauss rule for ``int f(x) exp(-x^2) dx``, exact for degree ``<= 2n-1``."""
    if not 1 <= n <= 300:
        raise ValueError("node count must be in 1..300")
    if n == 1:
        return QuadratureRule(_freeze(np.zeros(1)), _freeze(np.array([math.sqrt(math.pi)])))
    off = np.sqrt(np.arange(1, n) / 2.0)
    nodes, _ = _golub_welsch(np.zeros(n), off, math.sqrt(math.pi))
    # symmetrise away the last few ulps
    nodes = 0.5 * (nodes - nodes[::-1])
    # Christoffel weights from the Hermite functions keep full relative
    # accuracy in the tails, where vecs[0]**2 underflows
    psi = kernels.hermite_table(n - 1, nodes)
    weights = np.exp(-nodes ** 2) / np.sum(psi * psi, axis=0)
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(_freeze(nodes), _freeze(weights))


@lru_cache(maxsize=None)
def gauss_laguerre(n):
    """Gauss rule for ``int_0^inf f(u) exp(-u) du``, exact for degree ``<= 2n-1``."""
    if not 1 <= n <= 400:
        raise ValueError("node count must be in 1..400")
    k = np.arange(n)
    diag = 2.0 * k + 1.0
    off = np.arange(1, n, dtype=float)
    nodes, weights = _golub_welsch(diag, off, 1.0)
    return QuadratureRule(_freeze(nodes), _freeze(weights))


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss rule on [-1, 1] with unit weight."""
    if n < 1:
        raise ValueError("node count must be >= 1")
    k = np.arange(1, n, dtype=float)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    nodes, weights = _golub_welsch(np.zeros(n), off, 2.0)
    return QuadratureRule(_freeze(nodes), _freeze(weights))


def composite_legendre(a, b, panels, order=16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    base = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base.nodes[None, :]).ravel()
    weights = (half[:, None] * base.weights[None, :]).ravel()
    return nodes, weights
