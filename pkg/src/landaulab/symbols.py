"""Phase-plane symbols a(y, eta) and their analytic metadata.

Radial kinds (functions of ``q = y^2 + eta^2``) carry a :class:`RadialProfile`
with exact derivatives, which is what the closed-form spectral routines and
the symbol corrections rely on.  Composite kinds (shifts, scalings, sums,
derivative combinations) are evaluable everywhere and keep track of their
support box.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import sympy as sp


class DerivativesUnavailable(ValueError):
    """The symbol kind does not provide the derivatives that were requested."""


Box = Optional[Tuple[float, float, float, float]]  # (y_lo, y_hi, eta_lo, eta_hi); None = unbounded


# --------------------------------------------------------------------------
# Radial profiles


@dataclass(frozen=True)
class RadialProfile:
    """A profile Psi evaluated at ``u = y^2 + eta^2 >= 0``.

    ``derivs[k]`` evaluates the k-th derivative d^k Psi / du^k; only the
    entries that exist are filled.  ``q_max`` bounds the support in ``u``
    (``inf`` when unbounded).
    """

    func: Callable[[np.ndarray], np.ndarray]
    derivs: Tuple[Callable, ...] = ()
    q_max: float = math.inf
    name: str = "profile"
    gaussian_rate: Optional[float] = None  # set when Psi(u) = c exp(-z u)
    gaussian_amp: float = 1.0

    def __call__(self, u):
        return self.func(np.asarray(u, dtype=float))

    def derivative(self, k):
        if k == 0:
            return self.func
        if k > len(self.derivs):
            raise DerivativesUnavailable(f"{self.name}: derivative of order {k} unavailable")
        return self.derivs[k - 1]

    def scaled(self, c):
        derivs = tuple(_scale_fn(d, c) for d in self.derivs)
        return RadialProfile(_scale_fn(self.func, c), derivs, self.q_max, f"{c}*{self.name}",
                             self.gaussian_rate, self.gaussian_amp * c)


def _scale_fn(f, c):
    return lambda u: c * f(u)


def gaussian_profile(z=1.0, amp=1.0):
    derivs = tuple((lambda u, k=k: amp * (-z) ** k * np.exp(-z * np.asarray(u, dtype=float))) for k in range(1, 5))
    return RadialProfile(lambda u: amp * np.exp(-z * np.asarray(u, dtype=float)), derivs,
                         math.inf, f"gauss(z={z})", gaussian_rate=z, gaussian_amp=amp)


@lru_cache(maxsize=None)
def _cutoff_derivative_exprs(order):
    # smooth step on s in (0, 1): 1 at s=0, 0 at s=1
    s = sp.Symbol("s", positive=True)
    f1 = sp.exp(-1 / (1 - s))
    f0 = sp.exp(-1 / s)
    chi = f1 / (f1 + f0)
    exprs = [chi]
    for _ in range(order):
        exprs.append(sp.diff(exprs[-1], s))
    return [sp.lambdify(s, e, "numpy") for e in exprs]


def _cutoff_step(start, end, order):
    """Return callables for the first ``order`` u-derivatives of the cutoff chi(u)."""
    width = end - start
    fns = _cutoff_derivative_exprs(order)

    def make(k):
        def d(u):
            u = np.asarray(u, dtype=float)
            out = np.zeros_like(u)
            if k == 0:
                out[u <= start] = 1.0
            mid = (u > start) & (u < end)
            if np.any(mid):
                sv = (u[mid] - start) / width
                with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
                    val = fns[k](sv) / width ** k
                out[mid] = np.nan_to_num(val, nan=0.0, posinf=0.0, neginf=0.0)
            return out
        return d

    return [make(k) for k in range(order + 1)]


def cutoff_gaussian_profile(start=0.3, end=1.0, z=1.0, amp=1.0):
    """Profile ``amp * chi(u) * exp(-z u)`` with chi = 1 on [0, start], 0 beyond ``end``."""
    if not 0 <= start < end:
        raise ValueError("need 0 <= start < end")
    chi = _cutoff_step(start, end, 4)

    def deriv(k):
        def d(u):
            u = np.asarray(u, dtype=float)
            e = np.exp(-z * u)
            total = np.zeros_like(u)
            for j in range(k + 1):
                total = total + math.comb(k, j) * chi[j](u) * (-z) ** (k - j) * e
            return amp * total
        return d

    return RadialProfile(deriv(0), tuple(deriv(k) for k in range(1, 5)), end,
                         f"cutoff_gauss({start},{end},z={z})")


def polynomial_profile(coeffs):
    """Profile ``sum_k coeffs[k] u^k`` (unbounded support)."""
    poly = np.polynomial.Polynomial(coeffs)
    derivs = tuple((lambda u, p=poly.deriv(k): p(np.asarray(u, dtype=float))) for k in range(1, 5))
    return RadialProfile(lambda u: poly(np.asarray(u, dtype=float)), derivs, math.inf, f"poly{tuple(coeffs)}")


def laplacian_profile(p: RadialProfile):
    """Radial profile of the Laplacian: 4 Psi' + 4 u Psi''."""
    d1, d2 = p.derivative(1), p.derivative(2)
    return RadialProfile(lambda u: 4 * d1(u) + 4 * np.asarray(u) * d2(u), (), p.q_max, f"lap({p.name})")


def bilaplacian_profile(p: RadialProfile):
    """Radial profile of the squared Laplacian: 32 Psi'' + 64 u Psi''' + 16 u^2 Psi''''."""
    d2, d3, d4 = p.derivative(2), p.derivative(3), p.derivative(4)

    def f(u):
        u = np.asarray(u, dtype=float)
        return 32 * d2(u) + 64 * u * d3(u) + 16 * u * u * d4(u)

    return RadialProfile(f, (), p.q_max, f"bilap({p.name})")


def grad_squared_profile(p: RadialProfile):
    """Radial profile of |grad|^2: 4 u Psi'^2."""
    d1 = p.derivative(1)
    return RadialProfile(lambda u: 4 * np.asarray(u) * d1(u) ** 2, (), p.q_max, f"gradsq({p.name})")


def combine_profiles(terms):
    """Linear combination ``sum c * profile`` of radial profiles."""
    terms = [(float(c), p) for c, p in terms]
    q_max = max(p.q_max for _, p in terms)

    def f(u):
        u = np.asarray(u, dtype=float)
        return sum(c * p(u) for c, p in terms)

    return RadialProfile(f, (), q_max, "+".join(p.name for _, p in terms))


# --------------------------------------------------------------------------
# Radial derivative formulas for partial derivatives d_y^a d_eta^b, |alpha| <= 4.
# With F = Psi(y^2 + eta^2) these are polynomials in (y, eta) times Psi^(k).


@lru_cache(maxsize=None)
def _partial_coefficients(alpha):
    """Polynomial coefficients c_k(y, eta) with d^alpha Psi(q) = sum_k c_k Psi^(k)(q)."""
    a1, a2 = alpha
    Y, E = sp.symbols("y eta", real=True)
    order = a1 + a2
    # d/dvar [c * Psi^(k)] = (dc/dvar) Psi^(k) + 2 var c Psi^(k+1)
    terms = {0: sp.Integer(1)}
    for var, count in ((Y, a1), (E, a2)):
        for _ in range(count):
            new = {}
            for k, c in terms.items():
                new[k] = new.get(k, 0) + sp.diff(c, var)
                new[k + 1] = new.get(k + 1, 0) + 2 * var * c
            terms = {k: sp.expand(c) for k, c in new.items() if sp.expand(c) != 0}
    return {k: sp.lambdify((Y, E), c, "numpy") for k, c in terms.items()}, order


def radial_partial(p: RadialProfile, alpha):
    """Callable (y, eta) -> d_y^a1 d_eta^a2 Psi(y^2+eta^2)."""
    coeffs, order = _partial_coefficients(tuple(alpha))
    derivs = {k: p.derivative(k) for k in coeffs}

    def f(y, eta):
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        u = y * y + eta * eta
        out = np.zeros(np.broadcast(y, eta).shape)
        for k, c in coeffs.items():
            out = out + c(y, eta) * derivs[k](u)
        return out

    return f


# --------------------------------------------------------------------------
# Symbols


class PhaseSymbol:
    """Real function on the phase plane with analytic-kind metadata."""

    kind = "abstract"

    def __call__(self, y, eta):
        raise NotImplementedError

    @property
    def support(self) -> Box:
        return None

    def radial(self) -> Optional[RadialProfile]:
        """Radial profile about the origin, if the symbol is radial."""
        return None

    def identity_part(self) -> float:
        """Coefficient of a constant component (quantizes to a multiple of the identity)."""
        return 0.0

    def eta_transform(self, u, t):
        """Closed form of ``int exp(-i t eta) a(u, eta) d eta`` for the non-constant part, or None."""
        return None

    def partial(self, alpha):
        """Callable for the partial derivative d_y^a1 d_eta^a2 of the symbol."""
        raise DerivativesUnavailable(f"{self.kind}: derivatives unavailable")

    # convenience algebra
    def __add__(self, other):
        return Sum((self, other))

    def __mul__(self, c):
        return Scaled(self, float(c))

    __rmul__ = __mul__

    def shifted(self, j):
        return Shifted(self, (int(j[0]), int(j[1])))


@dataclass(frozen=True)
class Constant(PhaseSymbol):
    c: float = 0.0
    kind = "constant"

    def __call__(self, y, eta):
        return np.full(np.broadcast(np.asarray(y), np.asarray(eta)).shape, float(self.c))

    def radial(self):
        return RadialProfile(lambda u, c=self.c: np.full(np.shape(u), float(c)),
                             tuple(lambda u: np.zeros(np.shape(u)) for _ in range(4)), math.inf, f"const({self.c})")

    def identity_part(self):
        return float(self.c)

    def eta_transform(self, u, t):
        return np.zeros(np.broadcast(np.asarray(u), np.asarray(t)).shape)

    def partial(self, alpha):
        if tuple(alpha) == (0, 0):
            return self.__call__
        return lambda y, eta: np.zeros(np.broadcast(np.asarray(y), np.asarray(eta)).shape)


class _RadialSymbol(PhaseSymbol):
    """Shared behaviour of symbols Psi(y^2 + eta^2)."""

    def profile(self) -> RadialProfile:
        raise NotImplementedError

    def radial(self):
        return self.profile()

    def __call__(self, y, eta):
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return self.profile()(y * y + eta * eta)

    @property
    def support(self):
        qm = self.profile().q_max
        if math.isinf(qm):
            return None
        r = math.sqrt(qm)
        return (-r, r, -r, r)

    def partial(self, alpha):
        if tuple(alpha) == (0, 0):
            return self.__call__
        return radial_partial(self.profile(), alpha)


@dataclass(frozen=True)
class Gaussian(_RadialSymbol):
    """``exp(-z (y^2 + eta^2))``."""

    z: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError("decay rate must be positive")

    def profile(self):
        return gaussian_profile(self.z)

    def eta_transform(self, u, t):
        u = np.asarray(u, dtype=float)
        t = np.asarray(t, dtype=float)
        z = self.z
        return math.sqrt(math.pi / z) * np.exp(-z * u * u - t * t / (4 * z))


@dataclass(frozen=True)
class CutoffGaussian(_RadialSymbol):
    """``chi(q) exp(-z q)`` with chi = 1 for q <= start and 0 for q >= end."""

    start: float = 0.3
    end: float = 1.0
    z: float = 1.0
    kind = "cutoff_gaussian"

    def profile(self):
        return _cached_cutoff(self.start, self.end, self.z)


@lru_cache(maxsize=None)
def _cached_cutoff(start, end, z):
    return cutoff_gaussian_profile(start, end, z)


@dataclass(frozen=True)
class RadialGeneric(_RadialSymbol):
    """``Psi(y^2 + eta^2)`` for a user profile; derivatives only if the profile has them."""

    prof: RadialProfile = field(default_factory=gaussian_profile)
    kind = "radial"

    def profile(self):
        return self.prof


@dataclass(frozen=True)
class Shifted(PhaseSymbol):
    """``base(y - j1, eta - j2)``."""

    base: PhaseSymbol
    j: Tuple[int, int] = (0, 0)
    kind = "shifted"

    def __call__(self, y, eta):
        return self.base(np.asarray(y, dtype=float) - self.j[0], np.asarray(eta, dtype=float) - self.j[1])

    @property
    def support(self):
        b = self.base.support
        if b is None:
            return None
        return (b[0] + self.j[0], b[1] + self.j[0], b[2] + self.j[1], b[3] + self.j[1])

    def radial(self):
        return self.base.radial() if self.j == (0, 0) else None

    def identity_part(self):
        return self.base.identity_part()

    def eta_transform(self, u, t):
        g = self.base.eta_transform(np.asarray(u, dtype=float) - self.j[0], t)
        if g is None:
            return None
        return np.exp(-1j * np.asarray(t) * self.j[1]) * g

    def partial(self, alpha):
        f = self.base.partial(alpha)
        return lambda y, eta: f(np.asarray(y, dtype=float) - self.j[0], np.asarray(eta, dtype=float) - self.j[1])


@dataclass(frozen=True)
class Scaled(PhaseSymbol):
    """``factor * base``."""

    base: PhaseSymbol
    factor: float = 1.0
    kind = "scaled"

    def __call__(self, y, eta):
        return self.factor * self.base(y, eta)

    @property
    def support(self):
        return self.base.support

    def radial(self):
        p = self.base.radial()
        return None if p is None else p.scaled(self.factor)

    def identity_part(self):
        return self.factor * self.base.identity_part()

    def eta_transform(self, u, t):
        g = self.base.eta_transform(u, t)
        return None if g is None else self.factor * g

    def partial(self, alpha):
        f = self.base.partial(alpha)
        return lambda y, eta: self.factor * f(y, eta)


@dataclass(frozen=True)
class Sum(PhaseSymbol):
    parts: Tuple[PhaseSymbol, ...] = ()
    kind = "sum"

    def __call__(self, y, eta):
        shape = np.broadcast(np.asarray(y), np.asarray(eta)).shape
        out = np.zeros(shape)
        for p in self.parts:
            out = out + p(y, eta)
        return out

    @property
    def support(self):
        boxes = [p.support for p in self.parts if not isinstance(p, Constant)]
        if any(b is None for b in boxes) or any(isinstance(p, Constant) and p.c != 0 for p in self.parts):
            return None
        if not boxes:
            return None
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))

    def radial(self):
        profs = [p.radial() for p in self.parts]
        if any(pr is None for pr in profs):
            return None
        return combine_profiles([(1.0, pr) for pr in profs])

    def identity_part(self):
        return sum(p.identity_part() for p in self.parts)

    def eta_transform(self, u, t):
        gs = [p.eta_transform(u, t) for p in self.parts]
        if any(g is None for g in gs):
            return None
        return sum(gs)

    def partial(self, alpha):
        fs = [p.partial(alpha) for p in self.parts]
        return lambda y, eta: sum(f(y, eta) for f in fs)


@dataclass(frozen=True)
class DerivativeSum(PhaseSymbol):
    """``sum_alpha coeff_alpha * d^alpha base`` over the listed multi-indices."""

    base: PhaseSymbol
    terms: Tuple[Tuple[Tuple[int, int], float], ...] = (((0, 0), 1.0),)
    kind = "derivative_sum"

    def __post_init__(self):
        for alpha, _ in self.terms:
            self.base.partial(alpha)  # raises DerivativesUnavailable early

    def __call__(self, y, eta):
        shape = np.broadcast(np.asarray(y), np.asarray(eta)).shape
        out = np.zeros(shape)
        for alpha, c in self.terms:
            if c != 0.0:
                out = out + c * self.base.partial(alpha)(y, eta)
        return out

    @property
    def support(self):
        return self.base.support

    def radial(self):
        prof = self.base.radial()
        if prof is None:
            return None
        coef = {tuple(a): 0.0 for a in [(0, 0), (2, 0), (0, 2), (4, 0), (0, 4), (2, 2)]}
        for alpha, c in self.terms:
            alpha = tuple(alpha)
            if alpha not in coef:
                if c != 0.0:
                    return None
                continue
            coef[alpha] += c
        if not (math.isclose(coef[(2, 0)], coef[(0, 2)], rel_tol=1e-12, abs_tol=1e-15)
                and math.isclose(coef[(4, 0)], coef[(0, 4)], rel_tol=1e-12, abs_tol=1e-15)
                and math.isclose(coef[(2, 2)], 2 * coef[(4, 0)], rel_tol=1e-12, abs_tol=1e-15)):
            return None
        parts = [(coef[(0, 0)], prof)]
        if coef[(2, 0)]:
            parts.append((coef[(2, 0)], laplacian_profile(prof)))
        if coef[(4, 0)]:
            parts.append((coef[(4, 0)], bilaplacian_profile(prof)))
        return combine_profiles(parts)

    def identity_part(self):
        for alpha, c in self.terms:
            if tuple(alpha) == (0, 0):
                return c * self.base.identity_part()
        return 0.0


@dataclass(frozen=True)
class GradSquared(PhaseSymbol):
    """``coefficient * |grad base|^2``."""

    base: PhaseSymbol
    coefficient: float = 1.0
    kind = "grad_squared"

    def __post_init__(self):
        self.base.partial((1, 0))

    def __call__(self, y, eta):
        fy = self.base.partial((1, 0))(y, eta)
        fe = self.base.partial((0, 1))(y, eta)
        return self.coefficient * (fy * fy + fe * fe)

    @property
    def support(self):
        return self.base.support

    def radial(self):
        prof = self.base.radial()
        if prof is None:
            return None
        return grad_squared_profile(prof).scaled(self.coefficient)


def laplacian(symbol: PhaseSymbol) -> PhaseSymbol:
    return DerivativeSum(symbol, (((2, 0), 1.0), ((0, 2), 1.0)))


def site_symbol(base: PhaseSymbol, sites: Sequence[Tuple[int, int]], couplings: Sequence[float]) -> PhaseSymbol:
    """``sum_j omega_j * base(. - j)`` as a composite symbol."""
    return Sum(tuple(Scaled(Shifted(base, tuple(j)), float(w)) for j, w in zip(sites, couplings)))
