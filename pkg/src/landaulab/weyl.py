"""Semiclassical Weyl quantization of phase-plane symbols.

Two representations are provided:

* ``quantize_hermite`` returns matrix elements in the scaled Hermite basis
  ``phi_k(y) = h^{-1/4} psi_k(y / sqrt(h))``.  Matrix elements are phase-plane
  integrals of the symbol against cross Wigner functions of Hermite
  functions, which in polar coordinates factor into a Fourier mode in the
  angle times a normalised Laguerre function of the radius.  The angular
  integral is an FFT, the radial one a composite Gauss-Legendre rule.
* ``quantize_grid`` returns the Nystrom matrix of the Weyl kernel
  ``K(y, y') = (2 pi h)^{-1} g((y + y')/2, (y' - y)/h)`` with
  ``g(u, t) = int exp(-i t eta) a(u, eta) d eta``.
"""

from dataclasses import dataclass, field
import math
from typing import Optional, Sequence, Union

import numpy as np

from landaulab import kernels
from landaulab.oscillator import HermiteBasisSpec, QuadratureError, composite_legendre
from landaulab.symbols import Constant, PhaseSymbol, Scaled, Shifted, Sum


class GridUnderresolved(RuntimeError):
    """Nystrom eigenvalues are not stable under grid refinement."""


class NoConvergence(RuntimeError):
    """The Jacobi eigensolver exhausted its sweep budget."""


# --------------------------------------------------------------------------
# Operator containers


@dataclass(frozen=True)
class HermiteRep:
    basis: HermiteBasisSpec

    @property
    def label(self):
        return f"hermite(N={self.basis.size},scale={self.basis.scale:.17g})"


@dataclass(frozen=True)
class GridRep:
    points: np.ndarray
    weights: np.ndarray

    @property
    def label(self):
        return f"grid(lo={self.points[0]:.17g},hi={self.points[-1]:.17g},n={len(self.points)})"


@dataclass(frozen=True, eq=False)
class QuantOperator:
    """A Hermitian matrix representing a quantized symbol at parameter ``h``."""

    h: float
    representation: Union[HermiteRep, GridRep]
    matrix: np.ndarray
    symbol: Optional[PhaseSymbol] = None

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self):
        return self.matrix.shape[0]

    def to_csv(self, path):
        """Write the matrix row-major with a metadata header line."""
        m = self.matrix
        with open(path, "w") as fh:
            fh.write(f"# h={self.h:.17g} representation={self.representation.label} "
                     f"dtype={'complex' if np.iscomplexobj(m) else 'real'}\n")
            for row in m:
                if np.iscomplexobj(m):
                    fh.write(",".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row) + "\n")
                else:
                    fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _finalize(matrix, tol=1e-13):
    """Symmetrize and drop a negligible imaginary part."""
    m = 0.5 * (matrix + matrix.conj().T)
    if np.iscomplexobj(m):
        scale = max(np.abs(m).max(initial=0.0), 1.0)
        if np.abs(m.imag).max(initial=0.0) <= tol * scale:
            m = np.ascontiguousarray(m.real)
    return m


# --------------------------------------------------------------------------
# Hermite-basis quantization


def _radial_cap(symbol, h, r_osc):
    """Largest useful radius in oscillator units, limited by a bounded support."""
    box = symbol.support
    if box is None or symbol.identity_part() != 0.0:
        return r_osc
    r_sym = math.sqrt(max(box[0] ** 2, box[1] ** 2) + max(box[2] ** 2, box[3] ** 2))
    return min(r_osc, r_sym / math.sqrt(h) + 1e-12)


def _wigner_elements(symbol, h, levels, panels_per_unit, n_theta, n_max):
    """Matrix elements between the requested levels via polar cross-Wigner integrals.

    With ``w_mn = ((-1)^n / pi) e^{i (m-n) theta} ell_n^{(m-n)}(2 R^2)`` for m >= n,
    ``<phi_m, a phi_n> = int a(sqrt(h) R cos t, sqrt(h) R sin t) w_mn R dR dt``.
    """
    levels = np.asarray(levels, dtype=int)
    v_max = 4.0 * n_max + 40.0 + 8.0 * math.sqrt(n_max)
    r_max = _radial_cap(symbol, h, math.sqrt(v_max / 2.0))
    panels = max(8 * panels_per_unit, int(math.ceil(r_max * panels_per_unit)))
    r, wr = composite_legendre(0.0, r_max, panels)
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    sh = math.sqrt(h)
    vals = symbol(sh * r[:, None] * np.cos(theta)[None, :], sh * r[:, None] * np.sin(theta)[None, :])
    vals = vals - symbol.identity_part()
    # angular modes A_d(R) = int a e^{i d t} dt
    modes = 2.0 * math.pi * np.fft.ifft(vals, axis=1)
    x = 2.0 * r * r
    k = len(levels)
    out = np.zeros((k, k), dtype=complex)
    diffs = sorted({int(levels[i] - levels[j]) for i in range(k) for j in range(k) if levels[i] >= levels[j]})
    for d in diffs:
        pairs = [(i, j) for i in range(k) for j in range(k) if levels[i] - levels[j] == d]
        jmax = max(int(levels[j]) for _, j in pairs)
        table = kernels.laguerre_table(jmax, d, x)  # ell_n^{(d)}(2R^2)
        weight = wr * r * modes[:, d % n_theta]
        for i, j in pairs:
            n = int(levels[j])
            out[i, j] = (-1) ** n / math.pi * np.dot(table[n], weight)
            out[j, i] = np.conj(out[i, j])
    return out + symbol.identity_part() * np.eye(k)


def _default_theta(n):
    return int(2 ** math.ceil(math.log2(2 * n + 64)))


def quantize_hermite(symbol: PhaseSymbol, h: float, N: int, quad_order: Optional[int] = None,
                     n_theta: Optional[int] = None, check: bool = True, tol: float = 1e-7) -> QuantOperator:
    """Matrix of the Weyl quantization in the scaled Hermite basis.

    Parameters
    ----------
    symbol : PhaseSymbol
    h : float
        Semiclassical parameter in (0, 1).
    N : int
        Number of basis functions (at least 4).
    quad_order : int, optional
        Gauss-Legendre panels per unit radius (oscillator units); default 8.
    n_theta : int, optional
        Number of equispaced angles; default the next power of two above ``2N + 64``.
    check : bool
        Recompute a 3x3 probe submatrix with both resolutions doubled and
        raise :class:`QuadratureError` if any entry moves by more than ``tol``.

    Returns
    -------
    QuantOperator
        Real symmetric when the symbol is even in ``eta``, complex Hermitian otherwise.
    """
    if not 0.0 < h < 1.0:
        raise ValueError("h must lie in (0, 1)")
    if N < 4:
        raise ValueError("basis size must be >= 4")
    ppu = 8 if quad_order is None else int(quad_order)
    nth = _default_theta(N) if n_theta is None else int(n_theta)
    if isinstance(symbol, Constant):
        mat = symbol.c * np.eye(N)
    else:
        mat = _wigner_elements(symbol, h, np.arange(N), ppu, nth, N)
        if check:
            probe = np.array(sorted({0, N // 2, N - 1}))
            fine = _wigner_elements(symbol, h, probe, 2 * ppu, 2 * nth, N)
            err = np.abs(fine - mat[np.ix_(probe, probe)]).max()
            if err > tol:
                raise QuadratureError(f"quadrature underresolved (probe change {err:.2e})")
    return QuantOperator(h, HermiteRep(HermiteBasisSpec.semiclassical(N, h)), _finalize(mat), symbol)


# --------------------------------------------------------------------------
# Kernel-grid (Nystrom) quantization


def effective_box(symbol):
    """Support box, or for unbounded symbols the box outside which |a| is below 1e-16 of its peak."""
    box = symbol.support
    if box is not None:
        return box
    if isinstance(symbol, Sum):
        boxes = [effective_box(p) for p in symbol.parts if not isinstance(p, Constant)]
        if not boxes:
            return (-1.0, 1.0, -1.0, 1.0)
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))
    if isinstance(symbol, Scaled):
        return effective_box(symbol.base)
    if isinstance(symbol, Shifted):
        b = effective_box(symbol.base)
        j1, j2 = symbol.j
        return (b[0] + j1, b[1] + j1, b[2] + j2, b[3] + j2)
    prof = symbol.radial()
    if prof is not None:
        u = np.linspace(0.0, 400.0, 4001)
        vals = np.abs(prof(u))
        peak = vals.max(initial=0.0)
        if peak == 0.0:
            return (-1.0, 1.0, -1.0, 1.0)
        big = np.nonzero(vals > 1e-16 * peak)[0]
        r = math.sqrt(u[min(big[-1] + 1, len(u) - 1)])
        return (-r, r, -r, r)
    return (-10.0, 10.0, -10.0, 10.0)


def _eta_window(symbol):
    box = effective_box(symbol)
    return box[2], box[3]


def _numeric_transform(symbol, u, t, min_nodes=64, tol=1e-10):
    """``int exp(-i t eta) a(u, eta) d eta`` by trapezoid over the eta window, node count doubled until stable."""
    lo, hi = _eta_window(symbol)
    c0 = symbol.identity_part()
    span = hi - lo
    t_max = float(np.abs(t).max(initial=0.0))
    n = max(min_nodes, int(math.ceil(span * t_max / math.pi)) + min_nodes)
    probe_t = t[:: max(1, len(t) // 16)]

    def transform(n_nodes, tt):
        eta = np.linspace(lo, hi, n_nodes)
        w = np.full(n_nodes, span / (n_nodes - 1))
        w[0] = w[-1] = 0.5 * w[0]
        vals = symbol(u[:, None], eta[None, :]) - c0
        return (vals * w) @ np.exp(-1j * np.outer(eta, tt))

    for _ in range(6):
        coarse = transform(n, probe_t)
        fine = transform(2 * n, probe_t)
        scale = max(np.abs(fine).max(initial=0.0), 1.0)
        if np.abs(fine - coarse).max(initial=0.0) <= tol * scale:
            return transform(2 * n, t)
        n *= 2
    raise QuadratureError("quadrature underresolved in eta transform")


def kernel_transform(symbol: PhaseSymbol, u, t):
    """``g(u_i, t_k)`` for the non-constant part of the symbol, shape ``(len(u), len(t))``."""
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    if isinstance(symbol, Constant):
        return np.zeros((len(u), len(t)), dtype=complex)
    if isinstance(symbol, Sum):
        out = np.zeros((len(u), len(t)), dtype=complex)
        for p in symbol.parts:
            out += kernel_transform(p, u, t)
        return out
    if isinstance(symbol, Scaled):
        return symbol.factor * kernel_transform(symbol.base, u, t)
    if isinstance(symbol, Shifted):
        j1, j2 = symbol.j
        return kernel_transform(symbol.base, u - j1, t) * np.exp(-1j * t * j2)[None, :]
    closed = symbol.eta_transform(u[:, None], t[None, :])
    if closed is not None:
        return np.asarray(closed, dtype=complex)
    return _numeric_transform(symbol, u, t)


def max_eta_offset(symbol: PhaseSymbol) -> float:
    """Largest |eta| offset of shifted components (the modulation frequency times h)."""
    if isinstance(symbol, Sum):
        return max((max_eta_offset(p) for p in symbol.parts), default=0.0)
    if isinstance(symbol, Scaled):
        return max_eta_offset(symbol.base)
    if isinstance(symbol, Shifted):
        return abs(symbol.j[1]) + max_eta_offset(symbol.base)
    return 0.0


def default_grid(symbol: PhaseSymbol, h: float, pad: float = 1.0, cap: int = 1200):
    """Grid ``(lo, hi, n)`` covering the y-extent plus ``pad`` with spacing ``1/m`` (m integer).

    For unbounded symbols the extent is the decay window of :func:`effective_box`,
    which already reaches the 1e-16 level, so ``pad`` only matters for compact supports.
    """
    box = effective_box(symbol)
    lo, hi = box[0] - pad, box[1] + pad
    spacing_max = h / (4.0 * (max_eta_offset(symbol) + 1.0))
    m = int(math.ceil(1.0 / spacing_max))
    lo = math.floor(lo * m) / m
    hi = math.ceil(hi * m) / m
    n = int(round((hi - lo) * m)) + 1
    if n > cap:
        raise ValueError(f"grid of {n} points exceeds the cap of {cap}")
    return lo, hi, n


def _grid_matrix(symbol, h, lo, hi, n):
    y = np.linspace(lo, hi, n)
    dy = (hi - lo) / (n - 1)
    w = np.full(n, dy)
    w[0] = w[-1] = 0.5 * dy
    # u = (y_p + y_q)/2 and t = (y_q - y_p)/h take 2n - 1 distinct values each
    idx = np.arange(2 * n - 1)
    u = lo + 0.5 * dy * idx
    t = (idx - (n - 1)) * dy / h
    g = kernel_transform(symbol, u, t)
    p = np.arange(n)
    kern = g[p[:, None] + p[None, :], p[None, :] - p[:, None] + n - 1] / (2.0 * math.pi * h)
    sw = np.sqrt(w)
    mat = sw[:, None] * kern * sw[None, :] + symbol.identity_part() * np.eye(n)
    return y, w, _finalize(mat)


def quantize_grid(symbol: PhaseSymbol, h: float, grid=None, check: bool = True, rtol: float = 1e-5,
                  cap: int = 1200) -> QuantOperator:
    """Nystrom matrix ``sqrt(w_p) K(y_p, y_q) sqrt(w_q)`` of the Weyl kernel on a uniform grid.

    Parameters
    ----------
    symbol : PhaseSymbol
    h : float
    grid : tuple (lo, hi, n), optional
        Defaults to :func:`default_grid`.
    check : bool
        Compare the ten largest-magnitude eigenvalues with a grid refined by 1.5
        and raise :class:`GridUnderresolved` on a relative change above ``rtol``.
    """
    if not 0.0 < h < 1.0:
        raise ValueError("h must lie in (0, 1)")
    lo, hi, n = default_grid(symbol, h, cap=cap) if grid is None else grid
    n = int(n)
    if n > cap:
        raise ValueError(f"grid of {n} points exceeds the cap of {cap}")
    dy = (hi - lo) / (n - 1)
    limit = h / (4.0 * (max_eta_offset(symbol) + 1.0))
    if dy > limit * (1 + 1e-12):
        raise ValueError(f"grid spacing {dy:.3g} exceeds h/(4(eta_max+1)) = {limit:.3g}")
    y, w, mat = _grid_matrix(symbol, h, lo, hi, n)
    if check and not isinstance(symbol, Constant):
        n2 = int(math.ceil(1.5 * (n - 1))) + 1
        _, _, fine = _grid_matrix(symbol, h, lo, hi, n2)
        a = _top_magnitudes(mat)
        b = _top_magnitudes(fine)
        scale = max(np.abs(b).max(initial=0.0), 1e-300)
        if np.abs(a - b).max(initial=0.0) > rtol * scale:
            raise GridUnderresolved("grid underresolved: top eigenvalues moved under refinement")
    return QuantOperator(h, GridRep(y, w), mat, symbol)


def _top_magnitudes(mat, k=10):
    ev = np.linalg.eigvalsh(mat)
    order = np.argsort(-np.abs(ev), kind="stable")[:k]
    return np.sort(ev[order])


# --------------------------------------------------------------------------
# Norms and spectra


def hs_norm_sq(op: Union[QuantOperator, np.ndarray]) -> float:
    """Squared Hilbert-Schmidt (Frobenius) norm."""
    m = op.matrix if isinstance(op, QuantOperator) else np.asarray(op)
    return float(np.sum(np.abs(m) ** 2))


def l2_norm_sq(symbol: PhaseSymbol, radius: float = 12.0, n: int = 801) -> float:
    """``int a^2 dy d eta`` by trapezoid over a square, or exactly from the radial profile."""
    prof = symbol.radial()
    if prof is not None:
        if prof.gaussian_rate is not None:
            return math.pi * prof.gaussian_amp ** 2 / (2.0 * prof.gaussian_rate)
        umax = min(prof.q_max, radius ** 2)
        nodes, weights = composite_legendre(0.0, umax, 200)
        return float(math.pi * np.dot(weights, prof(nodes) ** 2))
    box = symbol.support or (-radius, radius, -radius, radius)
    ys = np.linspace(box[0], box[1], n)
    es = np.linspace(box[2], box[3], n)
    vals = symbol(ys[:, None], es[None, :]) ** 2
    return float(np.trapezoid(np.trapezoid(vals, es, axis=1), ys))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigenvalues sorted descending (ties keep the solver's order)."""

    eigenvalues: np.ndarray
    h: float = float("nan")
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)
    sweeps: int = 0

    def count_above(self, b):
        return int(np.sum(self.eigenvalues >= b))

    def count_in(self, lo, hi):
        ev = self.eigenvalues
        return int(np.sum((ev >= lo) & (ev <= hi)))

    def gaps(self, threshold=-np.inf):
        sel = self.eigenvalues[self.eigenvalues >= threshold]
        return -np.diff(sel)

    def multiplicities(self, tol=1e-8):
        """Cluster sizes of eigenvalues within ``tol`` of their neighbour."""
        ev = self.eigenvalues
        if len(ev) == 0:
            return []
        out = [1]
        for a, b in zip(ev[:-1], ev[1:]):
            if a - b <= tol:
                out[-1] += 1
            else:
                out.append(1)
        return out

    def to_dict(self):
        return {"h": self.h, "eigenvalues": [float(x) for x in self.eigenvalues]}


def _sort_desc(w, v=None):
    order = np.lexsort((np.arange(len(w)), -w))
    return w[order], (None if v is None else v[:, order])


def spectrum(op, method: str = "auto", max_sweeps: int = 100, jacobi_limit: int = 400,
             vectors: bool = False) -> SpectrumReport:
    """Full eigendecomposition of a Hermitian operator, eigenvalues sorted descending.

    ``method="jacobi"`` uses the cyclic Jacobi solver, applied to the real
    symmetric 2N x 2N embedding ``[[Re, -Im], [Im, Re]]`` for complex input;
    the doubled eigenvalues are paired off after sorting.  ``"lapack"`` calls
    ``numpy.linalg.eigh``.  ``"auto"`` picks Jacobi while the (embedded)
    dimension is at most ``jacobi_limit``.
    """
    mat = op.matrix if isinstance(op, QuantOperator) else np.asarray(op)
    h = op.h if isinstance(op, QuantOperator) else float("nan")
    n = mat.shape[0]
    if n == 0:
        return SpectrumReport(np.zeros(0), h)
    cplx = np.iscomplexobj(mat) and np.abs(mat.imag).max() > 0.0
    dim = 2 * n if cplx else n
    if method == "auto":
        method = "jacobi" if dim <= jacobi_limit else "lapack"
    if method == "lapack":
        w, v = np.linalg.eigh(mat)
        w, v = _sort_desc(w, v)
        return SpectrumReport(w, h, v if vectors else None)
    if method != "jacobi":
        raise ValueError(f"unknown method {method!r}")
    if cplx:
        emb = np.block([[mat.real, -mat.imag], [mat.imag, mat.real]])
    else:
        emb = np.asarray(mat.real if np.iscomplexobj(mat) else mat, dtype=float)
    w, v, sweeps, ok = kernels.jacobi_eigh(emb, max_sweeps=max_sweeps)
    if not ok:
        raise NoConvergence(f"no convergence after {max_sweeps} sweeps")
    w, v = _sort_desc(w, v)
    if cplx:
        # each eigenvalue appears twice; keep one vector per pair
        w = w[::2]
        vc = v[:n, ::2] + 1j * v[n:, ::2]
        vc /= np.linalg.norm(vc, axis=0, keepdims=True)
        v = vc
    norm = max(np.linalg.norm(mat, 2) if n <= 64 else np.linalg.norm(mat), 1e-300)
    resid = np.linalg.norm(mat @ v - v * w[None, :], axis=0)
    if np.any(resid > 1e-9 * norm):
        raise NoConvergence(f"eigenpair residual {resid.max():.2e} exceeds tolerance")
    return SpectrumReport(w, h, v if vectors else None, sweeps)


def hausdorff(a: Sequence[float], b: Sequence[float]) -> float:
    """Hausdorff distance between two finite sets of reals (inf if exactly one is empty)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
