import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from irsnoma.chanstats import (
    CascadeLawCLT,
    NearZeroLaw,
    clt_cdf_x,
    clt_cdf_x_series,
    clt_expectation_gl,
    clt_pdf_x,
    clt_pdf_x_series,
    nearzero_cdf_leading,
    nearzero_cdf_z,
    nearzero_pdf_z,
    optimal_phases,
    poisson_cutoff,
)
from irsnoma.errors import DegenerateLawError
from irsnoma.model import SystemParams, derive
from irsnoma.specfun import make_gauss_laguerre

lams = st.sampled_from([0.3, 1.0, 35.714, 130.0, 400.0])


@given(lams, st.floats(1e-6, 900.0))
def test_cdf_matches_scipy_ncx2(lam, x):
    assert clt_cdf_x(x, CascadeLawCLT(lam)) == pytest.approx(stats.ncx2.cdf(x, 1, lam), rel=1e-8, abs=1e-14)


def _pdf_mp(x, lam):
    mp.mp.dps = 30
    x, lam = mp.mpf(x), mp.mpf(lam)
    return float(mp.exp(-(x + lam) / 2) * mp.besseli(-0.5, mp.sqrt(lam * x)) * (x / lam) ** -0.25 / 2)


@settings(max_examples=30)
@given(lams, st.floats(1e-6, 900.0))
def test_pdf_matches_mpmath(lam, x):
    # scipy's ncx2.pdf underflows to 0 deep in the left tail; mpmath does not
    assert clt_pdf_x(x, CascadeLawCLT(lam)) == pytest.approx(_pdf_mp(x, lam), rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("lam", [1.0, 35.714, 130.0])
def test_series_forms_agree(lam):
    law = CascadeLawCLT(lam)
    x = np.linspace(1e-3, 4 * lam + 40, 50)
    np.testing.assert_allclose(clt_cdf_x_series(x, law), clt_cdf_x(x, law), atol=1e-9)
    np.testing.assert_allclose(clt_pdf_x_series(x, law), clt_pdf_x(x, law), rtol=1e-9, atol=1e-300)


def test_pdf_integrates_to_one_and_mean():
    law = CascadeLawCLT(250 / 7)
    mass = integrate.quad(lambda x: clt_pdf_x(x, law), 0, np.inf, limit=200)[0]
    mean = integrate.quad(lambda x: x * clt_pdf_x(x, law), 0, np.inf, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(1 + law.lam, rel=1e-8)


def test_cdf_tiny_values_are_positive():
    law = CascadeLawCLT(130.0)
    v = clt_cdf_x(1e-12, law)
    assert 0 < v < 1e-20
    assert clt_cdf_x(0.0, law) == 0.0


@given(lams, st.floats(0, 50), st.floats(0, 50))
def test_cdf_monotone(lam, x, dx):
    law = CascadeLawCLT(lam)
    assert clt_cdf_x(x + dx, law) >= clt_cdf_x(x, law)


@pytest.mark.parametrize("u", [100, 200])
def test_expectation_gl_moments(u):
    # the x^{-1/2} behaviour of the density at 0 limits the rule to ~1e-9
    law = CascadeLawCLT(250 / 7)
    rule = make_gauss_laguerre(u)
    assert clt_expectation_gl(lambda x: np.ones_like(x), law, rule) == pytest.approx(1.0, abs=2e-9)
    assert clt_expectation_gl(lambda x: x, law, rule) == pytest.approx(1 + law.lam, rel=2e-9)
    assert clt_expectation_gl(lambda x: x * x, law, rule) == pytest.approx((1 + law.lam) ** 2 + 2 + 4 * law.lam, rel=2e-9)


def test_expectation_gl_log():
    law = CascadeLawCLT(250 / 7)
    ref = integrate.quad(lambda x: math.log1p(x) * stats.ncx2.pdf(x, 1, law.lam), 0, np.inf, limit=200)[0]
    got = clt_expectation_gl(np.log1p, law, make_gauss_laguerre(100))
    assert got == pytest.approx(ref, rel=1e-9)


def test_poisson_cutoff():
    assert poisson_cutoff(0.0) == 40
    assert poisson_cutoff(100.0) == 220


def test_nearzero_law_construction():
    c = derive(SystemParams(K=2))
    law = NearZeroLaw.from_constants(c)
    assert law.shape == 6.0 and law.rate == pytest.approx(2 * math.sqrt(4.5))
    with pytest.raises(DegenerateLawError):
        NearZeroLaw.from_constants(derive(SystemParams(m_G=1.0, m_g=1.0)))


def test_nearzero_cdf_is_integral_of_pdf():
    law = NearZeroLaw.from_constants(derive(SystemParams(K=2)))
    for z in (0.01, 0.1, 0.5):
        ref = integrate.quad(lambda t: nearzero_pdf_z(t, law), 0, z)[0]
        assert nearzero_cdf_z(z, law) == pytest.approx(ref, rel=1e-10)


def test_nearzero_leading_term_dominates_at_small_z():
    law = NearZeroLaw.from_constants(derive(SystemParams(K=2)))
    for z in (1e-6, 1e-4):
        assert nearzero_cdf_z(z, law) / nearzero_cdf_leading(z, law) == pytest.approx(1.0, abs=10 * law.rate * z)


def test_optimal_phases_cophase_paths():
    rng = np.random.default_rng(5)
    aG, ag = rng.uniform(-np.pi, np.pi, (2, 16))
    mag = rng.rayleigh(size=16)
    th = optimal_phases(aG, ag, theta_tilde=0.3)
    assert np.all((th >= 0) & (th < 2 * np.pi))
    total = np.sum(mag * np.exp(1j * (aG + th + ag)))
    assert abs(total) == pytest.approx(mag.sum(), rel=1e-12)
    assert np.angle(total) == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(ValueError):
        optimal_phases([0.0], [0.0, 1.0])
