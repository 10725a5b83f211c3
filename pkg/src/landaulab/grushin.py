"""Effective Hamiltonian of a Landau level on a truncated tensor Hermite basis.

The conjugated Landau operator is ``h^{-1} L (x) I + W`` on ``L^2(R^2_{x,y})``
where ``W`` quantizes ``V(y + sqrt(h) x, h eta - sqrt(h) xi)``.  After
rescaling ``y = sqrt(h) Y`` the two linear forms ``Y + x`` and ``H - xi`` commute,
so ``W`` is a function of two commuting operators.  Expanding a radial ``V``
in plane waves turns each plane wave into a product of displacement
operators, and the angular integral leaves the selection rule
``a - b = m - m'`` with

    <a, m | W | b, m'> = (-1)^D / (2 pi h) int_0^inf G(sqrt(2r/h))
                         ell_{min(m,m')}^{(|D|)}(r) ell_{min(a,b)}^{(|D|)}(r) dr,

where ``D = a - b``, ``G`` is the planar Fourier transform of ``V`` and
``ell`` are normalised Laguerre functions.

Basis ordering is x-major: index ``a * Ny + m``.
"""

from dataclasses import dataclass
import csv
import json
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import j0

from landaulab import kernels
from landaulab.oscillator import QuadratureError, composite_legendre
from landaulab.singlesite import GRAD_COEFF, build_v1, build_v2
from landaulab.symbols import Constant, PhaseSymbol
from landaulab.weyl import hausdorff, l2_norm_sq, quantize_hermite


class KernelTransformUnavailable(ValueError):
    """The potential is not of a kind whose plane-wave transform is available."""


class SeriesDivergent(RuntimeError):
    """``h ||E0|| ||W|| >= 1/2``: the effective-Hamiltonian series is not trusted."""


class BandLeakage(RuntimeError):
    """Band eigenvectors carry too much weight on the highest retained x-level."""


class ResidualAtNoiseFloor(RuntimeError):
    """A residual fell below the floor at which truncation noise dominates."""


@dataclass(frozen=True)
class TensorBasisSpec:
    """``Nx`` oscillator levels in x, ``Ny`` scaled levels in y, distinguished level ``n``."""

    Nx: int = 8
    Ny: int = 32
    n: int = 0

    def __post_init__(self):
        if self.n < 0 or self.Nx < self.n + 3:
            raise ValueError("need Nx >= n + 3")
        if self.Ny < 4:
            raise ValueError("need Ny >= 4")
        if self.Nx * self.Ny > 4000:
            raise ValueError("tensor basis exceeds the desk cap Nx*Ny <= 4000")

    @property
    def dim(self):
        return self.Nx * self.Ny

    def index(self, a, m):
        return a * self.Ny + m


# --------------------------------------------------------------------------
# W


def _planar_transform(V: PhaseSymbol, h: float):
    """Return ``(G, rate)``: ``G(r)`` evaluates the planar Fourier transform at ``rho = sqrt(2r/h)``.

    ``rate`` is an exponential decay rate in ``r`` when known (Gaussian profiles).
    """
    prof = V.radial()
    if prof is None:
        raise KernelTransformUnavailable("kernel transform unavailable for non-radial potentials")
    if prof.gaussian_rate is not None:
        z, c = prof.gaussian_rate, prof.gaussian_amp
        return (lambda r: c * (math.pi / z) * np.exp(-np.asarray(r) / (2.0 * z * h))), 1.0 / (2.0 * z * h)
    if not math.isfinite(prof.q_max):
        raise KernelTransformUnavailable("kernel transform unavailable for unbounded non-Gaussian profiles")
    R_max = math.sqrt(prof.q_max)

    def G(r):
        rho = np.sqrt(2.0 * np.asarray(r, dtype=float) / h)
        panels = int(math.ceil(R_max * (1.0 + rho.max(initial=0.0) / (2 * math.pi)))) + 16
        R, w = composite_legendre(0.0, R_max, panels)
        vals = prof(R * R) * R * w
        out = np.empty(rho.shape)
        flat = rho.ravel()
        step = max(1, 2_000_000 // len(R))
        res = out.ravel()
        for s in range(0, len(flat), step):
            res[s:s + step] = 2.0 * math.pi * (j0(np.outer(flat[s:s + step], R)) @ vals)
        return out

    return G, None


def _w_blocks(G, rate, h, basis, panels_per_unit):
    """``M_D[j_x, j_y]`` for each ``|D| < Nx`` (the selection rule caps |D| by the x range)."""
    nmax = max(basis.Nx, basis.Ny)
    r_max = 4.0 * nmax + 40.0 + 8.0 * math.sqrt(nmax)
    if rate is not None:
        r_max = min(r_max, 45.0 / rate)
    panels = max(32, int(math.ceil(r_max * panels_per_unit)))
    r, w = composite_legendre(0.0, r_max, panels)
    gw = G(r) * w / (2.0 * math.pi * h)
    blocks = {}
    for d in range(basis.Nx):
        if d >= basis.Ny:
            break
        tx = kernels.laguerre_table(basis.Nx - 1 - d, d, r)
        ty = kernels.laguerre_table(basis.Ny - 1 - d, d, r)
        blocks[d] = (-1) ** d * (tx * gw) @ ty.T
    return blocks


def _assemble_w(blocks, basis):
    Nx, Ny = basis.Nx, basis.Ny
    W = np.zeros((Nx * Ny, Nx * Ny))
    for a in range(Nx):
        for b in range(Nx):
            d = a - b
            ad = abs(d)
            if ad not in blocks:
                continue
            M = blocks[ad]
            jx = min(a, b)
            # rows m, columns m' = m - d
            m = np.arange(max(0, d), min(Ny, Ny + d))
            mp = m - d
            W[a * Ny + m, b * Ny + mp] = M[jx, np.minimum(m, mp)]
    return W


def build_W(V: PhaseSymbol, h: float, basis: TensorBasisSpec, quad_order: int = 4,
            check: bool = True, tol: float = 1e-9) -> np.ndarray:
    """Matrix of ``W`` on the tensor basis.

    Parameters
    ----------
    V : PhaseSymbol
        Constant or radial potential (Gaussian closed form, compact radial
        profiles by a numerical Hankel transform).
    quad_order : int
        Gauss-Legendre panels per unit of ``r``.
    check : bool
        Recompute with doubled panels and raise :class:`QuadratureError` if
        any entry moves by more than ``tol``.
    """
    if not 0.0 < h < 1.0:
        raise ValueError("h must lie in (0, 1)")
    c = V.identity_part()
    if isinstance(V, Constant):
        return c * np.eye(basis.dim)
    G, rate = _planar_transform(V, h)
    if c != 0.0:
        raise KernelTransformUnavailable("kernel transform unavailable for symbols with a constant offset")
    blocks = _w_blocks(G, rate, h, basis, quad_order)
    if check:
        fine = _w_blocks(G, rate, h, basis, 2 * quad_order)
        err = max(np.abs(fine[d] - blocks[d]).max() for d in blocks)
        if err > tol:
            raise QuadratureError(f"quadrature underresolved (W block change {err:.2e})")
    W = _assemble_w(blocks, basis)
    return 0.5 * (W + W.T)


# --------------------------------------------------------------------------
# Grushin operators and the series


@dataclass(frozen=True, eq=False)
class GrushinOperators:
    W: np.ndarray
    h: float
    basis: TensorBasisSpec
    potential: Optional[PhaseSymbol] = None

    @property
    def Rn(self) -> np.ndarray:
        """Injection ``v -> psi_n (x) v`` as a ``(Nx*Ny, Ny)`` matrix."""
        b = self.basis
        R = np.zeros((b.dim, b.Ny))
        R[b.n * b.Ny + np.arange(b.Ny), np.arange(b.Ny)] = 1.0
        return R

    def e0_diag(self, mu: float) -> np.ndarray:
        """Diagonal of ``E0(mu) = sum_{l != n} (2(l-n) - h mu)^{-1} R_l R_l^*``."""
        b = self.basis
        levels = np.repeat(np.arange(b.Nx), b.Ny)
        with np.errstate(divide="ignore"):
            d = 1.0 / (2.0 * (levels - b.n) - self.h * mu)
        d[levels == b.n] = 0.0
        return d

    def E0(self, mu: float) -> np.ndarray:
        return np.diag(self.e0_diag(mu))

    def e0_norm(self, mu: float) -> float:
        return float(np.abs(self.e0_diag(mu)).max())

    def landau_diag(self) -> np.ndarray:
        """Diagonal of ``L (x) I``: ``2a + 1`` on x-level ``a``."""
        return np.repeat(2.0 * np.arange(self.basis.Nx) + 1.0, self.basis.Ny)

    @property
    def w_norm(self) -> float:
        return float(np.linalg.norm(self.W, 2))


def grushin_operators(V: PhaseSymbol, h: float, basis: TensorBasisSpec, **kw) -> GrushinOperators:
    return GrushinOperators(build_W(V, h, basis, **kw), h, basis, V)


@dataclass(frozen=True, eq=False)
class SeriesResult:
    Q: np.ndarray
    tail_bound: float
    hermiticity_defect: float
    contraction: float


def q_series(ops: GrushinOperators, mu: float, j_max: Optional[int] = 6, detail: bool = False):
    """``-mu I + sum_{j=0}^{j_max} (-1)^j h^j Rn^* W (E0(mu) W)^j Rn``.

    ``j_max=None`` sums the series in closed form, ``Rn^* W (I + h E0 W)^{-1} Rn``.
    """
    if abs(mu) > 1.0:
        raise ValueError("need |mu| <= 1")
    b = ops.basis
    h = ops.h
    e0 = ops.e0_diag(mu)
    wn = ops.w_norm
    q = h * float(np.abs(e0).max()) * wn
    if q >= 0.5:
        raise SeriesDivergent(f"series divergent: h ||E0|| ||W|| = {q:.3f} >= 1/2")
    sl = slice(b.n * b.Ny, (b.n + 1) * b.Ny)
    W = ops.W
    if j_max is None:
        X = np.linalg.solve(np.eye(b.dim) + h * e0[:, None] * W, np.eye(b.dim)[:, sl])
        acc = W[sl, :] @ X
        tail = 0.0
    else:
        cur = W[:, sl]  # (E0 W)^j Rn applied progressively
        acc = W[sl, :] @ np.eye(b.dim)[:, sl]
        for j in range(1, j_max + 1):
            cur = e0[:, None] * (W @ cur) if j > 1 else e0[:, None] * cur
            acc = acc + (-h) ** j * (W[sl, :] @ cur)
        tail = q ** (j_max + 1) / (1.0 - q) * wn
    Q = acc - mu * np.eye(b.Ny)
    defect = float(np.abs(Q - Q.T).max())
    Q = 0.5 * (Q + Q.T)
    res = SeriesResult(Q, tail, defect, q)
    return res if detail else Q


def q_expansion(V: PhaseSymbol, n: int, h: float, mu: float, Ny: int = 32,
                grad_coeff: float = GRAD_COEFF) -> np.ndarray:
    """``V^ - mu + h V1^ + h^2 V2^`` on the first ``Ny`` scaled Hermite functions."""
    if isinstance(V, Constant):
        return (V.c - mu) * np.eye(Ny)
    Vh = quantize_hermite(V, h, Ny).matrix
    V1 = quantize_hermite(build_v1(V, n), h, Ny).matrix
    V2 = quantize_hermite(build_v2(V, n, grad_coeff), h, Ny).matrix
    return Vh - mu * np.eye(Ny) + h * V1 + h * h * V2


def guard_size(basis: TensorBasisSpec) -> int:
    """y-levels whose series paths stay inside the truncation: ``m < Ny - (Nx - 1 - n)``."""
    return basis.Ny - (basis.Nx - 1 - basis.n)


@dataclass(frozen=True)
class ResidualReport:
    hs: tuple
    residuals: tuple
    slope: Optional[float]
    exact: bool
    guard: int
    grad_coeff: float

    def to_dict(self):
        return {"h": list(self.hs), "residual": list(self.residuals), "slope": self.slope,
                "exact": self.exact, "guard_levels": self.guard, "grad_coeff": self.grad_coeff}


def residual_scaling(V: PhaseSymbol, n: int, mu: float, hs: Sequence[float], j_max: int = 6,
                     basis: Optional[TensorBasisSpec] = None, grad_coeff: float = GRAD_COEFF,
                     floor: float = 1e-11) -> ResidualReport:
    """Least-squares slope of ``log ||q_series - q_expansion||`` against ``log h``.

    The norm is the spectral norm on the guard block of :func:`guard_size`.
    """
    hs = tuple(float(h) for h in hs)
    if max(hs) / min(hs) < 8.0 - 1e-12:
        raise ValueError("h list must span at least a factor 8")
    basis = basis or TensorBasisSpec(8, 32, n)
    g = guard_size(basis)
    if isinstance(V, Constant):
        return ResidualReport(hs, tuple(0.0 for _ in hs), None, True, g, grad_coeff)
    res = []
    for h in hs:
        ops = grushin_operators(V, h, basis)
        Qs = q_series(ops, mu, j_max)
        Qe = q_expansion(V, n, h, mu, basis.Ny, grad_coeff)
        r = float(np.linalg.norm((Qs - Qe)[:g, :g], 2))
        if r < floor:
            raise ResidualAtNoiseFloor(f"residual at noise floor ({r:.2e} at h={h})")
        res.append(r)
    slope = float(np.polyfit(np.log(hs), np.log(res), 1)[0])
    return ResidualReport(hs, tuple(res), slope, False, g, grad_coeff)


# --------------------------------------------------------------------------
# Spectral equivalence


def band_mu_values(ops: GrushinOperators, leak_tol: float = 0.01) -> np.ndarray:
    """Eigenvalues of ``h^{-1} L (x) I + W`` in the band around level ``n``, shifted to mu."""
    b = ops.basis
    h = ops.h
    H = np.diag(ops.landau_diag() / h) + ops.W
    w, v = np.linalg.eigh(H)
    centre = (2 * b.n + 1) / h
    sel = (w >= centre - 1.0) & (w <= centre + 1.0)
    top = slice((b.Nx - 1) * b.Ny, b.Nx * b.Ny)
    leak = (np.abs(v[top, :][:, sel]) ** 2).sum(axis=0)
    if np.any(leak > leak_tol):
        raise BandLeakage(f"band truncation leakage: {leak.max():.3f} mass on the top x-level")
    return np.sort(w[sel] - centre)


def q_roots(ops: GrushinOperators, j_max: Optional[int] = 6, grid: int = 81, tol: float = 1e-8) -> np.ndarray:
    """All mu in [-1, 1] where some eigenvalue of ``q_series(mu)`` vanishes.

    The k-th largest eigenvalue of Q(mu) is continuous and strictly decreasing
    in mu (dQ/dmu = -I + O(h^2)), so each index has at most one root; it is
    bracketed on a uniform grid and refined by bisection to ``tol``.
    """
    mus = np.linspace(-1.0, 1.0, grid)

    def eig(mu):
        return np.sort(np.linalg.eigvalsh(q_series(ops, mu, j_max)))[::-1]

    vals = np.array([eig(m) for m in mus])
    roots = []
    for k in range(vals.shape[1]):
        col = vals[:, k]
        exact = np.nonzero(col == 0.0)[0]
        if len(exact):
            roots.append(mus[exact[0]])
            continue
        idx = np.nonzero(np.sign(col[:-1]) != np.sign(col[1:]))[0]
        if not len(idx):
            continue
        lo, hi = mus[idx[0]], mus[idx[0] + 1]
        flo = col[idx[0]]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = eig(mid)[k]
            if fm == 0.0:
                lo = hi = mid
                break
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return np.sort(np.asarray(roots))


@dataclass(frozen=True)
class BellissardReport:
    roots: tuple
    band: tuple
    distance: float
    basis: TensorBasisSpec
    h: float

    def to_dict(self):
        return {"h": self.h, "Nx": self.basis.Nx, "Ny": self.basis.Ny, "n": self.basis.n,
                "roots": list(self.roots), "band": list(self.band), "hausdorff": self.distance}


def bellissard_check(V: PhaseSymbol, n: int, h: float, basis: Optional[TensorBasisSpec] = None,
                     j_max: Optional[int] = 12, grid: int = 81) -> BellissardReport:
    """Compare the mu-roots of ``Q_V`` with the band eigenvalues on the same truncation."""
    basis = basis or TensorBasisSpec(8, 32, n)
    ops = grushin_operators(V, h, basis)
    band = band_mu_values(ops)
    roots = q_roots(ops, j_max, grid)
    return BellissardReport(tuple(roots), tuple(band), hausdorff(roots, band), basis, h)


def write_roots_csv(path, report: BellissardReport):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["set", "mu"])
        for r in report.roots:
            wr.writerow(["q_root", repr(float(r))])
        for r in report.band:
            wr.writerow(["band", repr(float(r))])


# --------------------------------------------------------------------------
# Counting bound


@dataclass(frozen=True)
class CountingReport:
    count: int
    bound: float
    holds: bool

    def to_dict(self):
        return {"count": self.count, "bound": self.bound, "holds": self.holds}


def counting_bound_check(V: PhaseSymbol, h: float, b0: float, N: int = 80) -> CountingReport:
    """``#{eigenvalues of V^ >= b0}`` against ``||V||^2_{L2} / (2 pi h b0^2)``."""
    if b0 <= 0.0:
        raise ValueError("b0 must be positive")
    if isinstance(V, Constant) and V.c == 0.0:
        return CountingReport(0, 0.0, True)
    ev = np.linalg.eigvalsh(quantize_hermite(V, h, N).matrix)
    count = int(np.sum(ev >= b0))
    bound = l2_norm_sq(V) / (2.0 * math.pi * h * b0 * b0)
    return CountingReport(count, bound, count <= bound)


def series_h0(V: PhaseSymbol, basis: TensorBasisSpec, hs: Sequence[float], mu: float = 0.0) -> Optional[float]:
    """Smallest ``h`` in ``hs`` at which the convergence check fails (None if none fails)."""
    failing = []
    for h in sorted(hs):
        ops = grushin_operators(V, h, basis)
        if h * ops.e0_norm(mu) * ops.w_norm >= 0.5:
            failing.append(h)
    return min(failing) if failing else None


def report_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


@dataclass(frozen=True)
class ConvergenceRow:
    basis: TensorBasisSpec
    distance: float
    reference_distance: float


def bellissard_convergence(V: PhaseSymbol, n: int, h: float, bases: Sequence[TensorBasisSpec],
                           j_max: Optional[int] = 12) -> List[ConvergenceRow]:
    """Bellissard distances on a sequence of bases.

    ``distance`` compares roots and band eigenvalues on the same truncation;
    ``reference_distance`` compares the roots with the band eigenvalues of the
    last (largest) basis, which isolates the truncation error.
    """
    bases = list(bases)
    reports = [bellissard_check(V, n, h, b, j_max) for b in bases]
    ref = reports[-1].band
    return [ConvergenceRow(r.basis, r.distance, hausdorff(r.roots, ref)) for r in reports]
