import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.stats import kstest

from landaulab import ensemble as E
from landaulab import symbols as S
from landaulab.singlesite import SiteSymbolFamily
from landaulab.weyl import spectrum


@pytest.fixture(scope="module")
def sharp_family():
    return SiteSymbolFamily(E.separated_gaussian(0.01), 0, 0.1)


# --------------------------------------------------------------------------
# lattice and couplings


def test_default_sites():
    fam = SiteSymbolFamily(S.Gaussian(5.0))
    assert E.LatticeSpec(1, fam).sites == ((0, 0),)
    assert set(E.LatticeSpec(2, fam).sites) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    three = E.LatticeSpec(3, fam)
    assert three.size == 9 and (-1, -1) in three.sites and (1, 1) in three.sites


def test_lattice_validation():
    fam = SiteSymbolFamily(S.Gaussian(5.0))
    with pytest.raises(ValueError):
        E.LatticeSpec(0, fam)
    with pytest.raises(ValueError):
        E.LatticeSpec(1, fam, sites=((0, 0), (0, 0)))
    with pytest.raises(ValueError, match="supports"):
        E.LatticeSpec(2, fam, strict=True)
    small = SiteSymbolFamily(S.CutoffGaussian(0.0, 0.2, 1.0))
    assert E.LatticeSpec(2, small, strict=True).disjoint_supports


def test_separated_gaussian_rule():
    assert E.separated_gaussian(0.01).z == 5.0
    assert E.separated_gaussian(0.1).z == 3.0
    with pytest.raises(ValueError):
        E.separated_gaussian(1.5)


def test_midpoint_mu0(sharp_family):
    p, q = E._site_diagonals(sharp_family, 30)
    mu0 = E.midpoint_mu0(sharp_family, 0.3)
    assert mu0 == pytest.approx(0.5 * (0.3 + p[0] + q[0]))
    assert 0.3 < mu0 < p[0] + q[0]


@pytest.mark.parametrize("kind", ["uniform", "cosine"])
def test_density_normalization_and_tail(kind):
    d = E.CouplingDensity(kind)
    assert quad(lambda w: float(d.pdf(w)), -1, 1)[0] == pytest.approx(1.0)
    assert float(d.cdf(-1.0)) == pytest.approx(0.0, abs=1e-15)
    assert float(d.cdf(1.0)) == pytest.approx(1.0)
    for eps in (0.05, 0.1, 0.5):
        ref = 2 * quad(lambda w: float(d.pdf(w)), 1 - eps, 1)[0]
        assert d.tail(eps) == pytest.approx(ref, rel=1e-10)
    assert float(d.pdf(1.5)) == 0.0


@pytest.mark.parametrize("kind", ["uniform", "cosine"])
def test_density_sampling(kind):
    d = E.CouplingDensity(kind)
    x = d.sample(np.random.default_rng(3), 4000)
    assert x.shape == (4000,) and np.all(np.abs(x) <= 1)
    assert kstest(x, lambda w: d.cdf(w)).pvalue > 1e-3


def test_density_validation():
    with pytest.raises(ValueError):
        E.CouplingDensity("gaussian")


# --------------------------------------------------------------------------
# operators


def test_zero_couplings_give_zero_operator(sharp_family):
    lat = E.LatticeSpec(2, sharp_family)
    A = E.assemble_A(lat, np.zeros(4))
    assert not np.any(A.matrix)


def test_assemble_validation_and_cap(sharp_family):
    lat = E.LatticeSpec(2, sharp_family)
    with pytest.raises(ValueError):
        E.assemble_A(lat, np.zeros(3))
    with pytest.raises(ValueError):
        E.assemble_A(lat, [1.5, 0, 0, 0])
    with pytest.raises(E.LatticeTooLarge):
        E.assemble_A(E.LatticeSpec(4, sharp_family.with_h(0.05)), np.full(16, 0.5))


@pytest.mark.parametrize("beta", [0.3 + 0.4j, -1.1 + 0.2j, 2.0])
def test_displacement_block_matches_expm(beta):
    M, K = 60, 10
    low = np.diag(np.sqrt(np.arange(1, M)), 1)
    D = expm(beta * low.T - np.conj(beta) * low)
    assert np.abs(E.displacement_block(beta, K) - D[:K, :K]).max() < 1e-12


def test_frame_single_site_reproduces_site_spectrum(sharp_family):
    model = E.FrameModel(E.LatticeSpec(1, sharp_family), K=30)
    ev = np.sort(model.eigenvalues([0.7]))[::-1]
    ref = np.sort(0.7 * model.p + 0.49 * model.q)[::-1]
    assert np.allclose(ev, ref, atol=1e-12)
    assert model.truncation < 1e-9


def test_frame_matches_grid_two_sites(sharp_family):
    lat = E.LatticeSpec(1, sharp_family, sites=((0, 0), (1, 0)))
    omega = [0.8, -0.6]
    grid = spectrum(E.assemble_A(lat, omega)).eigenvalues
    frame = np.sort(E.FrameModel(lat, K=30).eigenvalues(omega))[::-1]
    big = np.abs(frame) > 1e-4
    top = frame[big]
    assert np.allclose(np.sort(grid[np.abs(grid) > 1e-4]), np.sort(top), atol=2e-6)


def test_gram_matrix_is_positive(sharp_family):
    model = E.FrameModel(E.LatticeSpec(2, sharp_family), K=20)
    assert model.gram_eigenvalues.min() > -1e-12


def test_frame_rejects_non_radial_family():
    fam = SiteSymbolFamily(S.Shifted(S.Gaussian(5.0), (1, 0)))
    with pytest.raises(ValueError, match="radial"):
        E.FrameModel(E.LatticeSpec(1, fam), K=10)


# --------------------------------------------------------------------------
# counting and interlacing


def test_count_examples():
    ev = [0.9, 0.5, 0.5, 0.1]
    assert E.count_in_interval(ev, (0.5, 0.9)) == 3
    assert E.count_in_interval(ev, (0.51, 0.89)) == 0
    assert E.count_in_interval([], (0.0, 1.0)) == 0


def test_count_mehler_example():
    from landaulab.weyl import quantize_hermite

    rep = spectrum(quantize_hermite(S.Gaussian(1.0), 0.1, 40))
    assert E.count_in_interval(rep, (0.3, 1.0)) == 6


@settings(max_examples=40)
@given(st.lists(st.floats(-2, 2), max_size=12), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1))
def test_count_monotone_under_inclusion(ev, a, w1, w2):
    inner = (a, a + w1)
    outer = (a - w2, a + w1 + w2)
    assert E.count_in_interval(ev, inner) <= E.count_in_interval(ev, outer)


def test_interlacing_example():
    A = np.diag([3.0, 2.0, 1.0])
    phi = np.array([1.0, 0.0, 0.0])
    rep = E.interlacing_check(A, phi, 2.5)
    assert rep.holds
    assert rep.perturbed == (2.0, 1.0, 0.5)


def test_interlacing_random_instances():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 12))
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = X @ X.conj().T / n
        phi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        phi /= np.linalg.norm(phi)
        assert E.interlacing_check(A, phi, float(rng.uniform(0, 3))).holds


def test_interlacing_validation():
    with pytest.raises(ValueError):
        E.interlacing_check(np.eye(2), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        E.interlacing_check(np.eye(2), np.array([1.0, 0.0]), -1.0)


# --------------------------------------------------------------------------
# statistics


def test_wilson_interval():
    lo, hi = E.wilson_interval(5, 10)
    assert (lo, hi) == pytest.approx((0.2366, 0.7634), abs=1e-4)
    assert E.wilson_interval(0, 50)[0] == 0.0
    assert E.wilson_interval(50, 50)[1] == 1.0
    with pytest.raises(ValueError):
        E.wilson_interval(0, 0)
    with pytest.raises(ValueError):
        E.wilson_interval(5, 4)


def _synthetic(exp_vol, exp_int, noise=0.0, seed=0):
    fam = SiteSymbolFamily(S.Gaussian(5.0))
    study = E.MCStudy("wegner", fam, trials=100000)
    rng = np.random.default_rng(seed)
    cells = []
    for i, (h, L, w) in enumerate(study.cells()):
        n = L * L
        p = 1e-4 * n ** exp_vol * (2 * w / 0.02) ** exp_int * math.exp(noise * rng.standard_normal())
        k = int(round(p * study.trials))
        lo, hi = E.wilson_interval(k, study.trials)
        cells.append(E.CellResult(i, h, L, n, w, study.trials, k, k / study.trials, lo, hi, {}, k, 0.0, False))
    return E.ScalingStudyResult(study, cells)


@pytest.mark.parametrize("ev,ei", [(1.0, 1.0), (2.0, 2.0), (1.0, 2.0)])
def test_fit_recovers_synthetic_exponents(ev, ei):
    res = _synthetic(ev, ei)
    e, s = E.fit_scaling(res, "volume")
    assert e == pytest.approx(ev, abs=0.02)
    e, s = E.fit_scaling(res, "interval")
    assert e == pytest.approx(ei, abs=0.02)
    (a, _), (b, _) = E.fit_scaling(res, "both")
    assert (a, b) == pytest.approx((ev, ei), abs=0.02)


def test_fit_insufficient_cells():
    res = _synthetic(1.0, 1.0)
    res.cells = res.cells[:2]
    with pytest.raises(E.InsufficientCells):
        E.fit_scaling(res, "volume")
    with pytest.raises(ValueError):
        E.fit_scaling(res, "area")


def test_study_validation(sharp_family):
    with pytest.raises(ValueError):
        E.MCStudy("other", sharp_family)
    with pytest.raises(ValueError):
        E.MCStudy("wegner", sharp_family, trials=50)
    with pytest.raises(ValueError):
        E.MCStudy("wegner", sharp_family, mu0=0.2)
    with pytest.raises(ValueError):
        E.MCStudy("wegner", sharp_family, Ls=(5,))


def test_band_edge_exact():
    assert E.band_edge_exact(E.CouplingDensity(), 0.1, 4) == pytest.approx(1 - 0.9 ** 4)


def test_band_edge_mc_within_wilson(sharp_family):
    study = E.MCStudy("bandedge", sharp_family, Ls=(2, 3), widths=(0.05, 0.1), trials=1000, seed=7)
    res = E.run_mc(study)
    for c in res.cells:
        exact = E.band_edge_exact(study.density, c.width, c.sites)
        assert c.lo <= exact <= c.hi
        assert sum(c.histogram.values()) == c.trials


def test_mc_reproducible_and_worker_independent(sharp_family):
    study = E.MCStudy("wegner", sharp_family, Ls=(1, 2), widths=(0.02, 0.04), trials=100, seed=11,
                      mu0=E.midpoint_mu0(sharp_family), levels=30)
    a = E.run_mc(study)
    b = E.run_mc(study)
    c = E.run_mc(study, workers=2)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_json() == c.to_json()
    other = E.run_mc(E.MCStudy("wegner", sharp_family, Ls=(1, 2), widths=(0.02, 0.04), trials=100,
                               seed=12, mu0=study.mu0, levels=30))
    assert other.to_csv() != a.to_csv()


def test_single_site_mc_matches_scan(sharp_family):
    mu0 = E.midpoint_mu0(sharp_family)
    study = E.MCStudy("wegner", sharp_family, Ls=(1,), widths=(0.04,), trials=2000, seed=5, mu0=mu0, levels=30)
    cell = E.run_mc(study).cells[0]
    exact = E.single_site_probability(sharp_family, (mu0 - 0.04, mu0 + 0.04), study.density, levels=30)
    assert cell.lo <= exact <= cell.hi


def test_minami_single_site_narrow_interval_is_zero(sharp_family):
    # |I| below the single-site gap: at most one eigenvalue fits
    mu0 = E.midpoint_mu0(sharp_family)
    study = E.MCStudy("minami", sharp_family, Ls=(1,), widths=(0.01, 0.02), trials=200, mu0=mu0, levels=30)
    res = E.run_mc(study)
    for c in res.cells:
        assert c.successes == 0 and c.degenerate
        assert c.successes <= c.successes_ge1


def test_outputs(sharp_family):
    res = _synthetic(1.0, 1.0)
    csv_text = res.to_csv()
    assert csv_text.splitlines()[0].startswith("cell,statistic,h,L")
    assert len(csv_text.splitlines()) == 1 + 9
    assert '"fits"' in res.to_json()
    svg = E.scaling_svg(res, "volume")
    assert svg.startswith("<svg") and "exponent" in svg


# --------------------------------------------------------------------------
# localization helpers


def test_site_cutoff():
    assert E.site_cutoff(SiteSymbolFamily(S.Gaussian(5.0))) is None
    chi = E.site_cutoff(SiteSymbolFamily(S.CutoffGaussian(0.0, 0.04, 1.0)))
    assert chi.start == pytest.approx(0.04) and chi.end == pytest.approx(0.49 ** 2) and chi.z == 0.0


def test_localization_suite_limits():
    fam = SiteSymbolFamily(S.CutoffGaussian(0.0, 0.2, 1.0))
    with pytest.raises(ValueError):
        E.localization_suite(E.LatticeSpec(4, fam), 0.1)
