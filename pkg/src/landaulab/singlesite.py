"""Corrected single-site symbols, the c_alpha coefficients and the spectral gap check.

For a Landau level ``n`` the single-site symbol with coupling ``omega`` is
``a_0(omega) = omega p_0 + omega^2 q_0`` where

    p_0 = v_0 + ((2n+1)/4) h Lap v_0 + h^2 sum_{|alpha|=4} c_alpha d^alpha v_0,
    q_0 = GRAD_COEFF h^2 |grad v_0|^2.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import csv
import itertools
import json
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from landaulab.oscillator import ladder_matrices
from landaulab.symbols import DerivativeSum, GradSquared, PhaseSymbol, Scaled, Sum
from landaulab.weyl import QuantOperator, quantize_hermite, spectrum

# Coefficient of |grad V|^2 in the second-order correction.  Second-order
# perturbation through the neighbouring Landau levels gives a negative sign;
# the residual-scaling study of the effective Hamiltonian confirms it.
GRAD_COEFF = -0.25


@lru_cache(maxsize=None)
def compute_c_alpha(n: int, alpha: Tuple[int, int]) -> float:
    """``(1/alpha!) <psi_n, Op(x^a1 (-xi)^a2) psi_n>`` with Weyl (fully symmetrized) ordering.

    ``Op(x) = -(J+ + J-)/2`` and ``Op(-xi) = -(i/2)(J+ - J-)``; the
    symmetrization averages the products over all distinct orderings.
    """
    a1, a2 = (int(a) for a in alpha)
    if a1 < 0 or a2 < 0 or a1 + a2 > 4:
        raise ValueError("need |alpha| <= 4 with nonnegative entries")
    if a1 % 2 or a2 % 2:
        return 0.0
    if a1 + a2 == 0:
        return 1.0
    size = n + a1 + a2 + 2
    jp, jm = ladder_matrices(size)
    X = -0.5 * (jp + jm)
    P = -0.5j * (jp - jm)  # quantization of -xi
    words = set(itertools.permutations("x" * a1 + "p" * a2))
    total = np.zeros((size, size), dtype=complex)
    for w in words:
        m = np.eye(size, dtype=complex)
        for letter in w:
            m = m @ (X if letter == "x" else P)
        total += m
    val = total[n, n] / len(words)
    return float(val.real) / (math.factorial(a1) * math.factorial(a2))


def c_alpha_table(n: int) -> Dict[Tuple[int, int], float]:
    """All ``c_alpha`` with ``|alpha| <= 4``."""
    return {(a1, a2): compute_c_alpha(n, (a1, a2))
            for a1 in range(5) for a2 in range(5 - a1)}


def write_c_alpha_csv(path, ns: Sequence[int]):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "alpha1", "alpha2", "c_alpha"])
        for n in ns:
            for (a1, a2), c in sorted(c_alpha_table(n).items()):
                wr.writerow([n, a1, a2, repr(c)])


def build_p0(v0: PhaseSymbol, n: int, h: float) -> PhaseSymbol:
    """``v0 + ((2n+1)/4) h Lap v0 + h^2 sum_{|alpha|=4} c_alpha d^alpha v0``."""
    c2 = (2 * n + 1) / 4.0
    terms = [((0, 0), 1.0)]
    if h != 0.0:
        terms += [((2, 0), c2 * h), ((0, 2), c2 * h)]
        for alpha in [(4, 0), (2, 2), (0, 4)]:
            terms.append((alpha, h * h * compute_c_alpha(n, alpha)))
    return DerivativeSum(v0, tuple(terms))


def build_v1(v: PhaseSymbol, n: int) -> PhaseSymbol:
    """``((2n+1)/4) Lap V``."""
    c2 = (2 * n + 1) / 4.0
    return DerivativeSum(v, (((2, 0), c2), ((0, 2), c2)))


def build_v2(v: PhaseSymbol, n: int, grad_coeff: float = GRAD_COEFF) -> PhaseSymbol:
    """``grad_coeff |grad V|^2 + sum_{|alpha|=4} c_alpha d^alpha V``."""
    quartic = DerivativeSum(v, tuple((a, compute_c_alpha(n, a)) for a in [(4, 0), (2, 2), (0, 4)]))
    return Sum((GradSquared(v, grad_coeff), quartic))


@dataclass(frozen=True)
class SiteSymbolFamily:
    """Single-site potential ``v0`` with its corrected symbols at Landau level ``n`` and parameter ``h``."""

    v0: PhaseSymbol
    n: int = 0
    h: float = 0.1
    grad_coeff: float = GRAD_COEFF
    basis_size: int = 60

    @property
    def p0(self) -> PhaseSymbol:
        return build_p0(self.v0, self.n, self.h)

    @property
    def q0(self) -> PhaseSymbol:
        return GradSquared(self.v0, self.grad_coeff * self.h * self.h)

    def symbol(self, omega: float) -> PhaseSymbol:
        """``omega p0 + omega^2 q0``."""
        return Sum((Scaled(self.p0, omega), Scaled(self.q0, omega * omega)))

    def with_h(self, h: float) -> "SiteSymbolFamily":
        return replace(self, h=h)


def site_operator(family: SiteSymbolFamily, omega: float, N: int = None) -> QuantOperator:
    """Hermite-basis quantization of ``omega p0 + omega^2 q0``."""
    if abs(omega) > 1.0:
        raise ValueError("coupling must lie in [-1, 1]")
    return quantize_hermite(family.symbol(omega), family.h, N or family.basis_size)


def p0_operator(family: SiteSymbolFamily, N: int = None) -> QuantOperator:
    return quantize_hermite(family.p0, family.h, N or family.basis_size)


@dataclass(frozen=True)
class GapReport:
    h: float
    b0: float
    kappa: float
    kappa_observed: float
    simple: bool
    passed: bool
    eigenvalues: Tuple[float, ...] = field(default=())

    def to_dict(self):
        return {"h": self.h, "b0": self.b0, "kappa": self.kappa,
                "kappa_observed": None if math.isinf(self.kappa_observed) else self.kappa_observed,
                "simple": self.simple, "pass": self.passed, "eigenvalues": list(self.eigenvalues)}


def gap_report(eigenvalues, h, b0, kappa, simple_tol=1e-8) -> GapReport:
    ev = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    top = ev[ev >= b0]
    gaps = -np.diff(top)
    simple = bool(np.all(gaps > simple_tol))
    k_obs = float(gaps.min() / h) if len(gaps) else math.inf
    return GapReport(h, b0, kappa, k_obs, simple, bool(simple and k_obs >= kappa),
                     tuple(float(x) for x in top))


def check_gap_assumption(family: SiteSymbolFamily, b0: float = 0.3, kappa: float = 0.5,
                         hs: Sequence[float] = (0.2, 0.1, 0.05)) -> List[GapReport]:
    """Spectral gap check on ``sigma(p0^)`` above ``b0`` for each ``h``."""
    if not 0.0 < b0 < 1.0:
        raise ValueError("b0 must lie in (0, 1)")
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    out = []
    for h in hs:
        fam = family.with_h(h)
        ev = spectrum(p0_operator(fam)).eigenvalues
        out.append(gap_report(ev, h, b0, kappa))
    return out


def gap_reports_json(reports: Sequence[GapReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def mukh_constants(family: SiteSymbolFamily, hs: Sequence[float], reach: float = 1.2,
                   envelope: str = "explicit") -> Dict[float, float]:
    """Normalised deviation of ``mu_k`` from its small-``h`` envelope, per ``h``.

    Returns ``max_k |mu_k e^{(2k+1)h} - E_k(h)| / h^2`` over ``(2k+1)h <= reach``,
    where ``mu_k`` are read off the diagonal of the Hermite matrix of ``p0``
    (the symbol must be radial) and

    * ``envelope="explicit"``: ``E_k = 1 - (2n+1)h + (2n+1)(2k+1)h^2``;
    * ``envelope="leading"``: ``E_k = 1 - (2n+1)h``.

    The ``(2k+1)h^2`` term is of order ``h`` once ``(2k+1)h`` is of order one, so
    only the explicit envelope has an ``h``-independent constant over a fixed reach.
    """
    if envelope not in ("explicit", "leading"):
        raise ValueError("envelope must be 'explicit' or 'leading'")
    m = 2 * family.n + 1
    out = {}
    for h in hs:
        fam = family.with_h(h)
        N = max(fam.basis_size, int(reach / (2 * h)) + 20)
        mu = np.diag(p0_operator(fam, N).matrix).real
        ks = np.arange(len(mu))
        ks = ks[(2 * ks + 1) * h <= reach]
        env = 1.0 - m * h + (m * (2 * ks + 1) * h * h if envelope == "explicit" else 0.0)
        dev = np.abs(mu[ks] * np.exp((2 * ks + 1) * h) - env)
        out[h] = float(dev.max()) / (h * h)
    return out


def mukh_stable(constants: Dict[float, float], ratio: float = 1.5) -> bool:
    """True when the constants over the h list stay within a factor ``ratio`` of each other."""
    vals = np.asarray(list(constants.values()))
    return bool(vals.min() > 0 and vals.max() / vals.min() <= ratio)


def gap_cutoff_gaussian(b0: float = 0.3, margin: float = 0.8, width: float = 3.0):
    """Cutoff Gaussian whose plateau covers every level with eigenvalue ``>= b0``.

    Eigenvalues ``>= b0`` of the quantized Gaussian sit at ``(2k+1)h <= -log b0``;
    the cutoff only leaves those levels undisturbed when its plateau extends past
    that point, so the transition is placed on ``[-log b0 + margin, ... + width]``.
    """
    from landaulab.symbols import CutoffGaussian

    start = -math.log(b0) + margin
    return CutoffGaussian(start, start + width, 1.0)
