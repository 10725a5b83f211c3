"""Random lattice operators and Monte Carlo probability scaling studies.

``A_omega = sum_j omega_j p_j + omega_j^2 q_j`` where ``p_j``, ``q_j`` are the
``j``-shifts of a site family's corrected symbols.  Two representations are
provided:

* :func:`assemble_A`, the Nystrom grid quantization of the summed symbol;
* :class:`FrameModel`, exact for radial site symbols.  A radial site operator
  is diagonal in the scaled Hermite functions, so shifting by ``j`` gives
  ``sum_k d_k |T_j phi_k><T_j phi_k|`` with ``T_j`` a phase-space translation.
  The nonzero spectrum of ``F D F^*`` equals that of ``G^{1/2} D G^{1/2}`` with
  ``G = F^* F`` the Gram matrix, which is independent of the couplings.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import io
import json
import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from landaulab import kernels
from landaulab.singlesite import SiteSymbolFamily
from landaulab.symbols import Constant, CutoffGaussian, PhaseSymbol, Shifted, Sum
from landaulab.weyl import GridRep, QuantOperator, default_grid, hausdorff, quantize_grid, quantize_hermite

GRID_CAP = 1200


class LatticeTooLarge(ValueError):
    """The lattice quantization would exceed the desk-scale grid cap."""


class InsufficientCells(ValueError):
    """Fewer than three non-degenerate cells are available along a fitted axis."""


# --------------------------------------------------------------------------
# Lattice and couplings


def _default_sites(L: int) -> Tuple[Tuple[int, int], ...]:
    off = np.arange(L) - (L - 1) // 2
    return tuple((int(a), int(b)) for a in off for b in off)


@dataclass(frozen=True)
class LatticeSpec:
    """``L x L`` block of integer sites (or an explicit site list) carrying one site family.

    With ``strict=True`` the site symbol must be supported inside ``(-1/2, 1/2)^2``
    so that shifted supports are pairwise disjoint.
    """

    L: int
    family: SiteSymbolFamily
    sites: Optional[Tuple[Tuple[int, int], ...]] = None
    strict: bool = False

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("side L must be positive")
        if self.sites is None:
            object.__setattr__(self, "sites", _default_sites(self.L))
        else:
            object.__setattr__(self, "sites", tuple((int(a), int(b)) for a, b in self.sites))
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("sites must be pairwise distinct")
        if self.strict and not self.disjoint_supports:
            raise ValueError("site supports must lie inside (-1/2, 1/2)^2")

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def disjoint_supports(self) -> bool:
        box = self.family.v0.support
        return box is not None and max(abs(x) for x in box) < 0.5

    def with_h(self, h: float) -> "LatticeSpec":
        return replace(self, family=self.family.with_h(h))


@dataclass(frozen=True)
class CouplingDensity:
    """Single-site coupling density on ``[-1, 1]``: ``uniform`` (g = 1/2) or ``cosine`` ((1 + cos pi w)/2)."""

    kind: str = "uniform"

    def __post_init__(self):
        if self.kind not in ("uniform", "cosine"):
            raise ValueError("density kind must be 'uniform' or 'cosine'")

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        inside = np.abs(w) <= 1.0
        if self.kind == "uniform":
            return np.where(inside, 0.5, 0.0)
        return np.where(inside, 0.5 * (1.0 + np.cos(math.pi * w)), 0.0)

    def cdf(self, w):
        w = np.clip(np.asarray(w, dtype=float), -1.0, 1.0)
        if self.kind == "uniform":
            return 0.5 * (w + 1.0)
        return 0.5 * (w + 1.0) + np.sin(math.pi * w) / (2.0 * math.pi)

    def tail(self, eps: float) -> float:
        """``P(|omega| >= 1 - eps)``."""
        a = 1.0 - eps
        return float(1.0 - (self.cdf(a) - self.cdf(-a)))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-1.0, 1.0, size)
        out = np.empty(0)
        while out.size < size:  # rejection against the uniform envelope, max g = 1
            w = rng.uniform(-1.0, 1.0, 2 * size)
            keep = rng.uniform(0.0, 1.0, 2 * size) < self.pdf(w)
            out = np.concatenate([out, w[keep]])
        return out[:size]


# --------------------------------------------------------------------------
# Grid assembly


def lattice_symbol(lattice: LatticeSpec, omega: Sequence[float]) -> PhaseSymbol:
    """``sum_j Shifted(omega_j p0 + omega_j^2 q0, j)`` over sites with nonzero coupling."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (lattice.size,):
        raise ValueError("one coupling per site is required")
    if np.any(np.abs(omega) > 1.0):
        raise ValueError("couplings must lie in [-1, 1]")
    parts = [Shifted(lattice.family.symbol(float(w)), j) for w, j in zip(omega, lattice.sites) if w != 0.0]
    if not parts:
        return Constant(0.0)
    return parts[0] if len(parts) == 1 else Sum(tuple(parts))


def assemble_A(lattice: LatticeSpec, omega: Sequence[float], h: Optional[float] = None,
               grid=None, check: bool = True) -> QuantOperator:
    """Nystrom grid quantization of ``A_omega`` at ``h`` (defaults to the family's ``h``)."""
    lat = lattice if h is None else lattice.with_h(h)
    h = lat.family.h
    sym = lattice_symbol(lat, omega)
    if isinstance(sym, Constant):
        if grid is None:
            grid = default_grid(Shifted(lat.family.v0, lat.sites[0]), h, cap=GRID_CAP)
        lo, hi, n = grid
        x = np.linspace(lo, hi, n)
        return QuantOperator(h, GridRep(x, np.full(n, x[1] - x[0])), np.zeros((n, n)), sym)
    if grid is None:
        try:
            grid = default_grid(sym, h, cap=GRID_CAP)
        except ValueError as exc:
            raise LatticeTooLarge(f"lattice too large: {exc}") from None
    if grid[2] > GRID_CAP:
        raise LatticeTooLarge("lattice too large: grid exceeds the desk cap")
    return quantize_grid(sym, h, grid, check=check, cap=GRID_CAP)


# --------------------------------------------------------------------------
# Frame representation


def displacement_block(beta: complex, K: int) -> np.ndarray:
    """``<phi_k | D(beta) | phi_l>`` for ``k, l < K`` (unit-hbar displacement operator)."""
    x = abs(beta) ** 2
    ph = np.exp(1j * np.angle(beta)) if beta != 0 else 1.0
    out = np.zeros((K, K), dtype=complex)
    for m in range(K):
        vals = kernels.laguerre_table(K - 1 - m, m, np.array([x]))[:, 0]
        j = np.arange(K - m)
        out[j + m, j] = vals * ph ** m
        if m:
            out[j, j + m] = vals * (-np.conj(ph)) ** m
    return out


def _site_diagonals(family: SiteSymbolFamily, K: int):
    p = quantize_hermite(family.p0, family.h, K)
    q = quantize_hermite(family.q0, family.h, K)
    pd, qd = np.diag(p.matrix).real.copy(), np.diag(q.matrix).real.copy()
    off = max(np.abs(p.matrix - np.diag(pd)).max(), np.abs(q.matrix - np.diag(qd)).max())
    if off > 1e-10:
        raise ValueError("frame representation needs a radial site family")
    return pd, qd


@dataclass(eq=False)
class FrameModel:
    """Exact spectrum of ``A_omega`` for radial site families on ``K`` levels per site."""

    lattice: LatticeSpec
    K: int = 80

    def __post_init__(self):
        fam = self.lattice.family
        h = fam.h
        self.p, self.q = _site_diagonals(fam, self.K)
        alpha = np.array([(a + 1j * b) / math.sqrt(2.0 * h) for a, b in self.lattice.sites])
        n, K = len(alpha), self.K
        G = np.zeros((n * K, n * K), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                beta = alpha[j] - alpha[i]
                blk = np.exp(1j * np.imag(np.conj(alpha[i]) * alpha[j])) * displacement_block(beta, K)
                G[i * K:(i + 1) * K, j * K:(j + 1) * K] = blk
                if j != i:
                    G[j * K:(j + 1) * K, i * K:(i + 1) * K] = blk.conj().T
        w, v = np.linalg.eigh(0.5 * (G + G.conj().T))
        self.gram_eigenvalues = w
        self.S = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T

    @property
    def truncation(self) -> float:
        """Largest site eigenvalue magnitude dropped by keeping ``K`` levels (upper estimate)."""
        return float(abs(self.p[-1]) + abs(self.q[-1]))

    def diag(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return (omega[:, None] * self.p[None, :] + (omega ** 2)[:, None] * self.q[None, :]).ravel()

    def eigenvalues(self, omega) -> np.ndarray:
        d = self.diag(omega)
        M = (self.S * d[None, :]) @ self.S
        return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


@lru_cache(maxsize=16)
def _cached_frame(lattice: LatticeSpec, K: int) -> FrameModel:
    return FrameModel(lattice, K)


# --------------------------------------------------------------------------
# Counting and interlacing


def count_in_interval(eigenvalues, interval: Tuple[float, float]) -> int:
    """Number of eigenvalues (with multiplicity) in the closed interval."""
    ev = getattr(eigenvalues, "eigenvalues", eigenvalues)
    ev = np.asarray(ev, dtype=float)
    lo, hi = interval
    return int(np.count_nonzero((ev >= lo) & (ev <= hi)))


@dataclass(frozen=True)
class InterlacingReport:
    eigenvalues: tuple
    perturbed: tuple
    worst_violation: float
    holds: bool


def interlacing_check(A, phi, mu: float, tol: float = 1e-9) -> InterlacingReport:
    """Spectra of ``A`` and ``A - mu phi phi^*`` and the chain ``l'_k <= l_k <= l'_{k-1}``.

    Eigenvalues are sorted in decreasing order; the chain is checked at every
    index where ``l_k > 0``.
    """
    M = np.asarray(getattr(A, "matrix", A))
    phi = np.asarray(phi).reshape(-1)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-10:
        raise ValueError("phi must be a unit vector")
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    Mp = M - mu * np.outer(phi, phi.conj())
    lam = np.sort(np.linalg.eigvalsh(M))[::-1]
    lamp = np.sort(np.linalg.eigvalsh(Mp))[::-1]
    worst = 0.0
    for k in np.nonzero(lam > 0)[0]:
        worst = max(worst, lamp[k] - lam[k])
        if k > 0:
            worst = max(worst, lam[k] - lamp[k - 1])
    return InterlacingReport(tuple(lam), tuple(lamp), float(worst), worst <= tol)


# --------------------------------------------------------------------------
# Localization magnitudes


@dataclass(frozen=True)
class LocalizationReport:
    h: float
    pair_norms: Dict[Tuple[int, int], float]
    localization_defects: Tuple[float, ...]
    hausdorff: float
    max_pair: float
    max_defect: float

    def passes(self, pair_tol=1e-6, defect_tol=1e-6, hausdorff_tol=1e-5) -> bool:
        return (self.max_pair <= pair_tol and self.max_defect <= defect_tol
                and self.hausdorff <= hausdorff_tol)

    def to_dict(self):
        return {"h": self.h, "pair_norms": {f"{i}-{j}": v for (i, j), v in self.pair_norms.items()},
                "localization_defects": list(self.localization_defects), "hausdorff": self.hausdorff,
                "max_pair": self.max_pair, "max_defect": self.max_defect}


def site_cutoff(family: SiteSymbolFamily, radius: float = 0.49) -> Optional[PhaseSymbol]:
    """Radial cutoff equal to 1 on the site support and vanishing beyond ``radius``."""
    box = family.v0.support
    if box is None:
        return None
    r0 = max(abs(x) for x in box)
    if r0 >= radius:
        return None
    return CutoffGaussian(r0 * r0, radius * radius, 0.0)


def localization_suite(lattice: LatticeSpec, h: float, omega: Optional[Sequence[float]] = None,
                       b0: float = 0.3) -> LocalizationReport:
    """Site-separation magnitudes at fixed ``h`` on a small lattice.

    (i) ``||a_i a_j||`` for all site pairs, (ii) ``||P_j A - a_j||`` with ``P_j``
    the quantized site cutoff (NaN when the site symbol has no compact support
    inside the unit cell), (iii) the Hausdorff distance between
    ``sigma(A) cap [b0, 1]`` and the union of single-site spectra.
    """
    if lattice.size > 9:
        raise ValueError("localization suite is limited to |Lambda| <= 9")
    lat = lattice.with_h(h)
    fam = lat.family
    omega = np.ones(lat.size) if omega is None else np.asarray(omega, dtype=float)
    full = lattice_symbol(lat, omega)
    grid = default_grid(full, h, cap=GRID_CAP)
    ops = [quantize_grid(Shifted(fam.symbol(float(w)), j), h, grid, check=False).matrix
           for w, j in zip(omega, lat.sites)]
    A = sum(ops)
    pairs = {}
    for i in range(lat.size):
        for j in range(lat.size):
            if i != j:
                pairs[(i, j)] = float(np.linalg.norm(ops[i] @ ops[j], 2))
    chi = site_cutoff(fam)
    defects = []
    for op, j in zip(ops, lat.sites):
        if chi is None:
            defects.append(math.nan)
            continue
        P = quantize_grid(Shifted(chi, j), h, grid, check=False).matrix
        defects.append(float(np.linalg.norm(P @ A - op, 2)))
    ev = np.linalg.eigvalsh(A)
    ev = ev[(ev >= b0) & (ev <= 1.0)]
    singles = []
    for w in omega:
        s = np.linalg.eigvalsh(quantize_hermite(fam.symbol(float(w)), h, fam.basis_size).matrix)
        singles.extend(s[(s >= b0) & (s <= 1.0)])
    dist = hausdorff(ev, singles) if len(ev) or len(singles) else 0.0
    finite = [d for d in defects if not math.isnan(d)]
    return LocalizationReport(h, pairs, tuple(defects), float(dist),
                              max(pairs.values(), default=0.0), max(finite, default=math.nan))


# --------------------------------------------------------------------------
# Monte Carlo studies


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= k <= n:
        raise ValueError("need 0 <= successes <= trials")
    p = k / n
    den = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


STATISTICS = ("wegner", "minami", "bandedge")


@dataclass(frozen=True)
class MCStudy:
    """Monte Carlo study over ``h x L x width`` cells.

    ``widths`` holds the half-widths ``delta`` of ``I = [mu0 - delta, mu0 + delta]``
    for the spectral statistics, and the band-edge depths ``eps`` for ``bandedge``.
    """

    statistic: str
    family: SiteSymbolFamily
    hs: Tuple[float, ...] = (0.1,)
    Ls: Tuple[int, ...] = (1, 2, 3)
    widths: Tuple[float, ...] = (0.01, 0.02, 0.04)
    mu0: float = 0.5
    b0: float = 0.3
    trials: int = 500
    seed: int = 0
    density: CouplingDensity = field(default_factory=CouplingDensity)
    levels: int = 80
    padding: float = 0.0
    sensitivity: float = 1e-6

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}")
        if self.trials < 100:
            raise ValueError("need at least 100 trials per cell")
        if self.statistic != "bandedge" and self.mu0 < self.b0:
            raise ValueError("need mu0 >= b0")
        if any(L < 1 or L > 4 for L in self.Ls):
            raise ValueError("desk cap: 1 <= L <= 4")

    def cells(self) -> List[Tuple[float, int, float]]:
        return [(h, L, w) for h in self.hs for L in self.Ls for w in self.widths]


@dataclass(frozen=True)
class CellResult:
    index: int
    h: float
    L: int
    sites: int
    width: float
    trials: int
    successes: int
    p_hat: float
    lo: float
    hi: float
    histogram: Dict[int, int]
    successes_ge1: int
    instability: float
    degenerate: bool

    @property
    def interval_length(self) -> float:
        return 2.0 * self.width


@dataclass
class ScalingStudyResult:
    study: MCStudy
    cells: List[CellResult]

    def fits(self) -> Dict[str, Optional[dict]]:
        out = {}
        for axis in ("volume", "interval"):
            try:
                e, s = fit_scaling(self, axis)
                out[axis] = {"exponent": e, "stderr": s}
            except InsufficientCells:
                out[axis] = None
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["cell", "statistic", "h", "L", "sites", "width", "trials", "successes", "p_hat",
                     "wilson_lo", "wilson_hi", "p_hat_ge1", "count_instability", "degenerate", "histogram"])
        for c in self.cells:
            hist = ";".join(f"{k}:{v}" for k, v in sorted(c.histogram.items()))
            wr.writerow([c.index, self.study.statistic, repr(c.h), c.L, c.sites, repr(c.width), c.trials,
                         c.successes, repr(c.p_hat), repr(c.lo), repr(c.hi), repr(c.successes_ge1 / c.trials),
                         repr(c.instability), int(c.degenerate), hist])
        return buf.getvalue()

    def summary(self) -> dict:
        st = self.study
        return {"statistic": st.statistic, "seed": st.seed, "trials": st.trials, "mu0": st.mu0,
                "b0": st.b0, "density": st.density.kind, "levels": st.levels,
                "degenerate_cells": [c.index for c in self.cells if c.degenerate],
                "fits": self.fits()}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def trial_rng(seed: int, cell: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(cell), int(trial)]))


def _run_cell(study: MCStudy, index: int, cell) -> CellResult:
    h, L, width = cell
    lattice = LatticeSpec(L, study.family.with_h(h))
    n = lattice.size
    hits = hits1 = unstable = 0
    hist: Dict[int, int] = {}
    model = None
    if study.statistic != "bandedge":
        model = _cached_frame(lattice, study.levels)
        lo, hi = study.mu0 - width - study.padding, study.mu0 + width + study.padding
    for t in range(study.trials):
        omega = study.density.sample(trial_rng(study.seed, index, t), n)
        if study.statistic == "bandedge":
            count = int(np.count_nonzero(np.abs(omega) >= 1.0 - width))
            event = count >= 1
            c1 = count
        else:
            ev = model.eigenvalues(omega)
            count = count_in_interval(ev, (lo, hi))
            s = study.sensitivity
            if (count_in_interval(ev, (lo - s, hi + s)) != count
                    or count_in_interval(ev, (lo + s, hi - s)) != count):
                unstable += 1
            event = count >= (2 if study.statistic == "minami" else 1)
            c1 = count
        hits += event
        hits1 += c1 >= 1
        hist[count] = hist.get(count, 0) + 1
    p = hits / study.trials
    wlo, whi = wilson_interval(hits, study.trials)
    return CellResult(index, h, L, n, width, study.trials, hits, p, wlo, whi, hist, hits1,
                      unstable / study.trials, p in (0.0, 1.0))


def _run_cell_args(args):
    return _run_cell(*args)


def run_mc(study: MCStudy, workers: int = 1) -> ScalingStudyResult:
    """Run every cell; results are independent of ``workers`` and of execution order."""
    jobs = [(study, i, c) for i, c in enumerate(study.cells())]
    if workers <= 1:
        cells = [_run_cell(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(_run_cell_args, jobs))
    return ScalingStudyResult(study, cells)


def fit_scaling(result: ScalingStudyResult, axis: str = "volume"):
    """Weighted least-squares exponent of ``p_hat`` along ``axis``.

    ``volume`` regresses on ``log |Lambda|`` and ``interval`` on ``log |I|``,
    each with a separate intercept for every setting of the remaining axes;
    ``both`` fits the two exponents jointly with a single intercept per ``h``
    and returns ``((e_vol, se_vol), (e_int, se_int))``.  Weights are the inverse
    squared log-widths of the Wilson intervals.
    """
    if axis not in ("volume", "interval", "both"):
        raise ValueError("axis must be 'volume', 'interval' or 'both'")
    cells = [c for c in result.cells if not c.degenerate]
    if axis == "volume":
        groups = {(c.h, c.width) for c in cells}
        xs = {c.sites for c in cells}
    elif axis == "interval":
        groups = {(c.h, c.L) for c in cells}
        xs = {c.width for c in cells}
    else:
        groups = {(c.h,) for c in cells}
        xs = {(c.sites, c.width) for c in cells}
    if len(cells) < 3 or len(xs) < 2:
        raise InsufficientCells("insufficient cells")
    groups = sorted(groups)
    gidx = {g: i for i, g in enumerate(groups)}

    def key(c):
        return (c.h, c.width) if axis == "volume" else (c.h, c.L) if axis == "interval" else (c.h,)

    ncov = 2 if axis == "both" else 1
    X = np.zeros((len(cells), ncov + len(groups)))
    y = np.zeros(len(cells))
    w = np.zeros(len(cells))
    for r, c in enumerate(cells):
        if axis == "volume":
            X[r, 0] = math.log(c.sites)
        elif axis == "interval":
            X[r, 0] = math.log(c.interval_length)
        else:
            X[r, 0], X[r, 1] = math.log(c.sites), math.log(c.interval_length)
        X[r, ncov + gidx[key(c)]] = 1.0
        y[r] = math.log(c.p_hat)
        sig = (math.log(max(c.hi, 1e-300)) - math.log(max(c.lo, 1e-300))) / (2 * 1.959963984540054)
        w[r] = 1.0 / max(sig, 1e-12) ** 2
    # drop groups represented by one cell only: they carry no slope information
    counts = X[:, ncov:].sum(axis=0)
    keep_rows = np.ones(len(cells), dtype=bool)
    for g, cnt in enumerate(counts):
        if cnt < 2:
            keep_rows &= X[:, ncov + g] == 0
    X, y, w = X[keep_rows], y[keep_rows], w[keep_rows]
    X = X[:, np.r_[np.arange(ncov), ncov + np.nonzero(counts >= 2)[0]]]
    if len(y) < 3 or len(y) <= X.shape[1] - 1:
        raise InsufficientCells("insufficient cells")
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    cov = np.linalg.pinv((X * w[:, None]).T @ X)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    if axis == "both":
        return (float(coef[0]), float(se[0])), (float(coef[1]), float(se[1]))
    return float(coef[0]), float(se[0])


def separated_gaussian(delta_min: float = 0.01) -> PhaseSymbol:
    """Gaussian site symbol ``exp(-z q)`` with ``z = ceil(-log delta_min)``.

    Nearest-neighbour sites sit at ``q = 1``, so the overlap ``exp(-z)`` is below
    the smallest interval half-width ``delta_min`` of a study.
    """
    from landaulab.symbols import Gaussian

    if not 0.0 < delta_min < 1.0:
        raise ValueError("delta_min must lie in (0, 1)")
    return Gaussian(float(math.ceil(-math.log(delta_min))))


def midpoint_mu0(family: SiteSymbolFamily, b0: float = 0.3, levels: int = 30) -> float:
    """Centre ``(b0 + top)/2`` between ``b0`` and the largest single-site eigenvalue at ``omega = 1``."""
    p, q = _site_diagonals(family, levels)
    return 0.5 * (b0 + float(np.max(p + q)))


def band_edge_exact(density: CouplingDensity, eps: float, sites: int) -> float:
    """``P(max_j |omega_j| >= 1 - eps) = 1 - (1 - P(|omega| >= 1 - eps))^|Lambda|``."""
    return 1.0 - (1.0 - density.tail(eps)) ** sites


def single_site_probability(family: SiteSymbolFamily, interval, density: CouplingDensity,
                            n_grid: int = 2000, levels: int = 80) -> float:
    """Measure under ``g`` of ``{omega : sigma(a0(omega)) meets I}`` from an ``omega`` scan."""
    p, q = _site_diagonals(family, levels)
    w = np.linspace(-1.0, 1.0, n_grid + 1)
    mid = 0.5 * (w[1:] + w[:-1])
    ev = mid[:, None] * p[None, :] + mid[:, None] ** 2 * q[None, :]
    hit = np.any((ev >= interval[0]) & (ev <= interval[1]), axis=1)
    mass = density.cdf(w[1:]) - density.cdf(w[:-1])
    return float(np.sum(mass[hit]))


# --------------------------------------------------------------------------
# SVG


def scaling_svg(result: ScalingStudyResult, axis: str = "volume", width: int = 480, height: int = 360) -> str:
    """Log-log scatter of ``p_hat`` along ``axis`` with Wilson bars and the fitted slope in the title."""
    cells = [c for c in result.cells if not c.degenerate]
    xs = [math.log(c.sites if axis == "volume" else c.interval_length) for c in cells]
    ys = [math.log(c.p_hat) for c in cells]
    try:
        e, s = fit_scaling(result, axis)
        title = f"{result.study.statistic} {axis} exponent {e:.3f} +- {s:.3f}"
    except InsufficientCells:
        title = f"{result.study.statistic} {axis}: insufficient cells"
    m = 50
    if not cells:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"><text x="10" y="20">{title}</text></svg>\n'
    x0, x1 = min(xs), max(xs)
    lows = [math.log(max(c.lo, 1e-12)) for c in cells]
    y0, y1 = min(lows), max(math.log(c.hi) for c in cells)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(x):
        return m + (x - x0) / (x1 - x0) * (width - 2 * m)

    def py(y):
        return height - m - (y - y0) / (y1 - y0) * (height - 2 * m)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<text x="{m}" y="20" font-size="12">{title}</text>',
             f'<polyline fill="none" stroke="black" points="{m},{m} {m},{height - m} {width - m},{height - m}"/>']
    for x, y, c, lo in zip(xs, ys, cells, lows):
        parts.append(f'<line x1="{px(x):.2f}" y1="{py(lo):.2f}" x2="{px(x):.2f}" y2="{py(math.log(c.hi)):.2f}" stroke="gray"/>')
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
