"""Closed-form spectra of quantized radial symbols.

A radial symbol ``Psi(y^2 + eta^2)`` quantizes to an operator that is diagonal
in the scaled Hermite basis.  Its eigenvalues are available three ways:

* the Gaussian closed form ``(1 - hz)^k / (1 + hz)^(k+1)``;
* a Fourier integral against the transform of the profile;
* a direct integral ``int_0^inf Psi(h u) Q_k(u) e^{-u} du`` with
  ``Q_k(u) = (-1)^k L_k(2u)``.
"""

from dataclasses import dataclass
import csv
import math
from typing import Iterable, Optional

import numpy as np
from scipy.special import eval_laguerre

from landaulab import kernels
from landaulab.oscillator import composite_legendre, gauss_laguerre
from landaulab.symbols import RadialProfile


class WindowInsufficient(ValueError):
    """The Fourier window truncates a non-negligible part of the transform."""


class ProfileNotEvaluable(ValueError):
    """The profile returned non-finite values on [0, inf)."""


def mehler_gaussian_eig(h, k, z=1.0):
    """Eigenvalue ``(1 - hz)^k / (1 + hz)^(k+1)`` of the quantized ``exp(-z q)``."""
    if h * z == -1.0:
        raise ValueError("hz must differ from -1")
    return (1.0 - h * z) ** k / (1.0 + h * z) ** (k + 1)


# --------------------------------------------------------------------------
# Profile transforms


def decay_length(profile: RadialProfile, level=1e-14, u_cap=2000.0):
    """Smallest ``U`` beyond which ``|Psi| < level * max|Psi|`` (or the support end)."""
    if math.isfinite(profile.q_max):
        return float(profile.q_max)
    u = np.linspace(0.0, u_cap, 20001)
    vals = np.abs(profile(u))
    peak = vals.max(initial=0.0)
    if peak == 0.0:
        return 1.0
    big = np.nonzero(vals >= level * peak)[0]
    return float(u[min(big[-1] + 1, len(u) - 1)])


def profile_fourier(profile: RadialProfile, tau, u_max: Optional[float] = None):
    """Fourier transform ``F(tau) = 2 int_0^inf cos(tau u) Psi(u) du`` of the even extension.

    Closed form for exponential profiles, composite Gauss-Legendre otherwise.
    """
    tau = np.asarray(tau, dtype=float)
    if profile.gaussian_rate is not None:
        z = profile.gaussian_rate
        return profile.gaussian_amp * 2.0 * z / (z * z + tau * tau)
    U = decay_length(profile) if u_max is None else u_max
    t_max = float(np.abs(tau).max(initial=0.0))
    panels = int(math.ceil(U * (1.0 + t_max / (2.0 * math.pi)) / 2.0)) + 8
    u, w = composite_legendre(0.0, U, panels)
    vals = profile(u)
    if not np.all(np.isfinite(vals)):
        raise ProfileNotEvaluable("profile not evaluable on [0, inf)")
    out = np.empty(tau.shape)
    flat = tau.ravel()
    chunk = max(1, 2_000_000 // len(u))
    res = out.ravel()
    for s in range(0, len(flat), chunk):
        res[s:s + chunk] = 2.0 * np.cos(np.outer(flat[s:s + chunk], u)) @ (w * vals)
    return res.reshape(tau.shape)


def _asymptotic_fourier(profile, tau):
    """Large-tau expansion ``-2 Psi'(0)/tau^2 + 2 Psi'''(0)/tau^4``, or None without derivatives."""
    try:
        d1 = float(profile.derivative(1)(np.zeros(1))[0])
        d3 = float(profile.derivative(3)(np.zeros(1))[0])
    except ValueError:
        return None
    return -2.0 * d1 / tau ** 2 + 2.0 * d3 / tau ** 4


@dataclass(frozen=True)
class FourierEigResult:
    value: float
    imag_residue: float
    tail_estimate: float


def radial_eig_fourier(profile: RadialProfile, h: float, k: int, window: Optional[float] = None,
                       order: Optional[int] = None, detail: bool = False):
    """``lambda_k = (2 pi)^{-1} int (1 + i h tau)^k / (1 - i h tau)^(k+1) F(tau) d tau``.

    The line is compactified by ``h tau = tan(phi)``, under which the
    multiplier becomes ``cos(phi) exp(i (2k+1) phi)``.  Closed-form transforms
    are integrated over the whole line.  Numerical transforms are used for
    ``|tau| <= window`` and replaced beyond it by their large-``tau``
    expansion when the profile carries derivatives.  Without an explicit
    window, ``200 * 4^i`` is tried for i = 0..4 until the tail estimate passes.

    Parameters
    ----------
    profile : RadialProfile
    h : float
    k : int
    window : float, optional
        Half-width of the tau window for numerical transforms.
    order : int, optional
        Number of Gauss-Legendre panels (16 nodes each) on each phi piece;
        default ``64 + 24 k`` to follow the oscillation of ``cos((2k+1) phi)``.
    detail : bool
        Return a :class:`FourierEigResult` with the imaginary residue and tail estimate.

    Raises
    ------
    WindowInsufficient
        If the estimated contribution of the neglected tail exceeds 1e-10.
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    if k * h > 2.0:
        raise ValueError("k*h must not exceed 2")
    m = 2 * k + 1
    if order is None:
        order = 64 + 24 * k

    def piece(lo, hi, fourier):
        phi, w = composite_legendre(lo, hi, order)
        tau = np.tan(phi) / h
        vals = fourier(tau) / np.cos(phi)
        re = np.dot(w, np.cos(m * phi) * vals)
        im = np.dot(w, np.sin(m * phi) * vals)
        return re, im

    if profile.gaussian_rate is not None:
        # symmetric about phi = 0, so the imaginary parts cancel exactly over (-pi/2, pi/2)
        re, _ = piece(0.0, 0.5 * math.pi, lambda t: profile_fourier(profile, t))
        _, im_half = piece(-0.5 * math.pi, 0.5 * math.pi, lambda t: profile_fourier(profile, t))
        value = re / (math.pi * h)
        res = FourierEigResult(value, abs(im_half) / (2 * math.pi * h), 0.0)
        return res if detail else value

    U = decay_length(profile)
    windows = [200.0 * 4 ** i for i in range(5)] if window is None else [float(window)]
    for T in windows:
        phi_t = math.atan(h * T)
        f_t = float(profile_fourier(profile, np.array([T]), U)[0])
        asym_t = _asymptotic_fourier(profile, np.array([T]))
        if asym_t is None:
            tail = abs(f_t) / (math.pi * h * 2.0)
        else:
            tail = abs(f_t - float(asym_t[0])) / (math.pi * h * 6.0)
        if tail <= 1e-10:
            break
    else:
        raise WindowInsufficient(f"window insufficient: tail estimate {tail:.2e}")
    re_in, _ = piece(0.0, phi_t, lambda t: profile_fourier(profile, t, U))
    re_out = 0.0
    if asym_t is not None:
        re_out, _ = piece(phi_t, 0.5 * math.pi, lambda t: _asymptotic_fourier(profile, t))
    value = (re_in + re_out) / (math.pi * h)
    # even transform: the integrand's imaginary part is odd in tau and integrates to zero
    res = FourierEigResult(value, 0.0, tail)
    return res if detail else value


def laguerre_q(k, u):
    """``Q_k(u) = sum_n C(k, n) (-1)^(k-n) (2u)^n / n! = (-1)^k L_k(2u)``."""
    return (-1) ** k * eval_laguerre(k, 2.0 * np.asarray(u, dtype=float))


def radial_eig_laguerre(profile: RadialProfile, h: float, k: int, order: Optional[int] = None):
    """``lambda_k = int_0^inf Psi(h u) Q_k(u) e^{-u} du``.

    Gauss-Laguerre of order ``max(2k + 40, 120)`` for profiles of unbounded
    support (k <= 60).  For compact supports ``hu <= q_max`` the integrand is
    steep on the Laguerre scale, so a composite Gauss-Legendre rule on
    ``[0, q_max / h]`` is used instead, with ``e^{-u} L_k(2u)`` from the
    normalised recurrence (k <= 200).
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    if math.isfinite(profile.q_max):
        if k > 200:
            raise ValueError("level must lie in 0..200")
        U = profile.q_max / h
        u, w = composite_legendre(0.0, U, max(32, 2 * int(math.ceil(U)) + k))
        # e^{-u} L_k(2u) from the stable normalised recurrence
        weight = w * (-1) ** k * kernels.laguerre_table(k, 0, 2.0 * u)[k]
        qk = 1.0
    else:
        if k > 60:
            raise ValueError("level must lie in 0..60")
        n = max(2 * k + 40, 120) if order is None else max(order, 2 * k + 40)
        rule = gauss_laguerre(min(n, 400))
        u, weight = rule.nodes, rule.weights
        qk = laguerre_q(k, u)
    vals = profile(h * u)
    if not np.all(np.isfinite(vals)):
        raise ProfileNotEvaluable("profile not evaluable on [0, inf)")
    return float(np.dot(weight, vals * qk))


@dataclass(frozen=True)
class DecayReport:
    ks: tuple
    values: tuple
    sup: float
    violation: bool


def decay_bound_check(profile: RadialProfile, h: float, ks: Iterable[int]) -> DecayReport:
    """Sup of ``k h |lambda_k|`` over ``ks``; flags a violation if the sequence is still growing at the end."""
    ks = tuple(int(k) for k in ks)
    vals = tuple(k * h * abs(radial_eig_laguerre(profile, h, k)) for k in ks)
    arr = np.asarray(vals)
    sup = float(arr.max(initial=0.0))
    cut = max(1, (3 * len(arr)) // 4)
    head = arr[:cut].max(initial=0.0)
    tail = arr[cut:].max(initial=0.0)
    violation = bool(tail > 1.1 * head and tail > 1e-12)
    return DecayReport(ks, vals, sup, violation)


def eigen_table(profile: RadialProfile, h: float, kmax: int, method: str = "laguerre"):
    """List of ``(k, lambda_k)`` for ``k = 0..kmax``."""
    f = {"laguerre": radial_eig_laguerre, "fourier": radial_eig_fourier}[method]
    return [(k, f(profile, h, k)) for k in range(kmax + 1)]


def write_table_csv(path, rows, profile_name="", h=float("nan")):
    with open(path, "w", newline="") as fh:
        fh.write(f"# profile={profile_name} h={h!r}\n")
        wr = csv.writer(fh)
        wr.writerow(["k", "lambda_k"])
        for k, lam in rows:
            wr.writerow([k, repr(float(lam))])
