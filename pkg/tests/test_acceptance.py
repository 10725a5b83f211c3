"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are printed by each test (visible with ``-s``) and repeated in the
terminal summary by ``conftest.pytest_terminal_summary``.
"""

import math

import numpy as np
import pytest

from landaulab import ensemble as E
from landaulab import grushin as G
from landaulab import singlesite as ss
from landaulab import symbols as S
from landaulab.mehler import mehler_gaussian_eig
from landaulab.weyl import hs_norm_sq, l2_norm_sq, quantize_hermite

RESULTS = {}


def report(num, name, ok, detail):
    line = f"criterion {num:2d} {name:<24s} {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


# --------------------------------------------------------------------------
# 1. Mehler diagonalization


def test_criterion_01_mehler():
    worst_off = worst_diag = 0.0
    for h in (0.05, 0.1, 0.2):
        m = quantize_hermite(S.Gaussian(1.0), h, 60).matrix
        d = np.diag(m)
        off = m - np.diag(d)
        worst_off = max(worst_off, np.linalg.norm(off) / np.linalg.norm(m))
        ks = np.arange(31)
        exact = np.array([mehler_gaussian_eig(h, int(k)) for k in ks])
        worst_diag = max(worst_diag, float(np.abs(d[ks].real - exact).max()))
    report(1, "Mehler diagonalization", worst_off < 1e-6 and worst_diag < 1e-6,
           f"off-diagonal mass {worst_off:.1e}, diagonal error {worst_diag:.1e}")


# --------------------------------------------------------------------------
# 2. Hilbert-Schmidt identity


def test_criterion_02_hs_identity():
    worst = 0.0
    for h in (0.05, 0.1, 0.2):
        hs = hs_norm_sq(quantize_hermite(S.Gaussian(1.0), h, 300))
        via_l2 = l2_norm_sq(S.Gaussian(1.0)) / (2 * math.pi * h)
        worst = max(worst, abs(hs - 1 / (4 * h)) * 4 * h, abs(hs - via_l2) / via_l2)
    report(2, "HS identity", worst < 1e-5, f"max relative error {worst:.1e}")


# --------------------------------------------------------------------------
# 3. Cubic remainder of the effective Hamiltonian


def test_criterion_03_residual_slope():
    rep = G.residual_scaling(S.Gaussian(1.0), 0, 0.5, (0.2, 0.1, 0.05, 0.025),
                             basis=G.TensorBasisSpec(8, 32, 0))
    res = ", ".join(f"{r:.2e}" for r in rep.residuals)
    report(3, "residual slope", rep.slope >= 2.7, f"slope {rep.slope:.3f} (need >= 2.7); residuals {res}")


# --------------------------------------------------------------------------
# 4. Bellissard equivalence


BELL_BASES = (G.TensorBasisSpec(6, 16, 0), G.TensorBasisSpec(8, 24, 0),
              G.TensorBasisSpec(8, 32, 0), G.TensorBasisSpec(10, 40, 0))


def test_criterion_04_bellissard():
    ok = True
    parts = []
    for w in (0.5, 0.8):
        rows = G.bellissard_convergence(S.Scaled(S.Gaussian(1.0), w), 0, 0.1, BELL_BASES)
        same = max(r.distance for r in rows)
        ref = [r.reference_distance for r in rows[:-1]]
        mono = all(b <= a for a, b in zip(ref, ref[1:]))
        ok &= same <= 5e-3 and mono
        parts.append(f"omega {w}: distance {same:.1e}, reference "
                     + " > ".join(f"{x:.1e}" for x in ref) + ("" if mono else " (not monotone)"))
    report(4, "Bellissard equivalence", ok, "; ".join(parts))


# --------------------------------------------------------------------------
# 5. Spectral gap assumption


def test_criterion_05_gap():
    reps = ss.check_gap_assumption(ss.SiteSymbolFamily(ss.gap_cutoff_gaussian(0.3)), 0.3, 0.5,
                                   (0.2, 0.1, 0.05))
    consts = ss.mukh_constants(ss.SiteSymbolFamily(S.Gaussian(1.0)), (0.2, 0.1, 0.05))
    ok = all(r.passed for r in reps) and ss.mukh_stable(consts)
    kap = ", ".join(f"{r.kappa_observed:.3f}" for r in reps)
    cs = ", ".join(f"{v:.2f}" for v in consts.values())
    report(5, "gap assumption", ok, f"kappa_obs {kap}; envelope constants {cs}")


# --------------------------------------------------------------------------
# 6. Interlacing


def test_criterion_06_interlacing():
    worst = 0.0
    ok = True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 16))
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = X @ X.conj().T / n
        phi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        phi /= np.linalg.norm(phi)
        rep = E.interlacing_check(A, phi, float(rng.uniform(0, 3)), tol=1e-9)
        ok &= rep.holds
        worst = max(worst, rep.worst_violation)
    report(6, "interlacing", ok, f"100 instances, worst violation {worst:.1e}")


# --------------------------------------------------------------------------
# Monte Carlo setup shared by criteria 7 to 9


@pytest.fixture(scope="module")
def mc_family():
    return ss.SiteSymbolFamily(E.separated_gaussian(0.01), 0, 0.1)


def test_criterion_07_band_edge(mc_family):
    study = E.MCStudy("bandedge", mc_family, Ls=(2, 3), widths=(0.05, 0.1), trials=1000, seed=0)
    res = E.run_mc(study)
    ok = True
    parts = []
    for c in res.cells:
        exact = E.band_edge_exact(study.density, c.width, c.sites)
        inside = c.lo <= exact <= c.hi
        ok &= inside
        parts.append(f"|L|={c.sites} eps={c.width}: {c.p_hat:.3f} vs {exact:.3f}{'' if inside else ' (outside)'}")
    report(7, "band-edge law", ok, "; ".join(parts))


def scaling_study(statistic, family, widths):
    mu0 = E.midpoint_mu0(family, 0.3, 30)
    study = E.MCStudy(statistic, family, Ls=(1, 2, 3), widths=widths, mu0=mu0, b0=0.3,
                      trials=500, seed=0, levels=30)
    return E.run_mc(study)


def test_criterion_08_wegner(mc_family):
    res = scaling_study("wegner", mc_family, (0.01, 0.02, 0.04))
    ev, sv = E.fit_scaling(res, "volume")
    ei, si = E.fit_scaling(res, "interval")
    ok = 0.8 <= ev <= 1.2 and 0.8 <= ei <= 1.2
    report(8, "Wegner scaling", ok, f"volume {ev:.3f} +/- {sv:.3f}, interval {ei:.3f} +/- {si:.3f}")


def test_criterion_09_minami(mc_family):
    # kappa h = 0.05 <= |I| = 2 delta
    res = scaling_study("minami", mc_family, (0.025, 0.05, 0.1))
    ordered = all(c.successes <= c.successes_ge1 for c in res.cells)
    try:
        ev, sv = E.fit_scaling(res, "volume")
        ei, si = E.fit_scaling(res, "interval")
    except E.InsufficientCells:
        report(9, "Minami scaling", False, "insufficient non-degenerate cells")
    ok = ordered and 1.6 <= ev <= 2.4 and 1.6 <= ei <= 2.4
    report(9, "Minami scaling", ok, f"volume {ev:.3f} +/- {sv:.3f}, interval {ei:.3f} +/- {si:.3f}, "
           f"p(>=2) <= p(>=1) in every cell: {ordered}")


# --------------------------------------------------------------------------
# 10. Localization magnitudes


def test_criterion_10_localization():
    fam = ss.SiteSymbolFamily(S.CutoffGaussian(0.0, 0.2, 1.0), 0, 0.1)
    lat = E.LatticeSpec(1, fam, sites=((-1, 0), (0, 0), (1, 0)), strict=True)
    a = E.localization_suite(lat, 0.1)
    b = E.localization_suite(lat, 0.05)
    shrink = b.max_pair < a.max_pair and b.hausdorff < a.hausdorff
    ok = a.max_pair <= 1e-6 and a.hausdorff <= 1e-5 and shrink
    report(10, "localization", ok,
           f"h=0.1: max pair {a.max_pair:.2e}, hausdorff {a.hausdorff:.2e}; "
           f"h=0.05: max pair {b.max_pair:.2e}, hausdorff {b.hausdorff:.2e}")
