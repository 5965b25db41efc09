import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from irsnoma import downlink as dl
from irsnoma.errors import DegenerateLawError, DomainError
from irsnoma.model import Scheme, SystemParams, derive
from irsnoma.specfun import make_chebyshev_gauss, make_gauss_laguerre


def ncx2_expect(f, lam):
    return integrate.quad(lambda x: f(x) * stats.ncx2.pdf(x, 1, lam), 0, np.inf, limit=400, epsrel=1e-11)[0]


def test_near_outage_frozen(c8):
    # mpmath evaluation of 1 - exp(-rho~_m) at 30 dB
    assert dl.op_dl_noma_near(1e3, c8) == pytest.approx(0.8966543590932661, rel=1e-13)


def test_far_outage_against_ncx2(c8):
    assert dl.op_dl_noma_far(1e4, c8) == pytest.approx(0.13891800289672213, rel=1e-10)
    th = dl.dl_noma_thresholds(10 ** 3.5, c8)
    assert dl.op_dl_noma_far(10 ** 3.5, c8) == pytest.approx(stats.ncx2.cdf(th.rho_tilde, 1, c8.lam), rel=1e-9)


def test_thresholds_structure(c8):
    th = dl.dl_noma_thresholds(100.0, c8)
    assert th.feasible
    gF, margin = c8.gamma_F, c8.alpha2 - c8.alpha1 * c8.gamma_F
    assert th.rho_tilde == pytest.approx(gF / (margin * c8.b * 100))
    assert th.c1_tilde == pytest.approx(math.sqrt(gF / (c8.c * margin)))
    assert th.c2_tilde == pytest.approx(math.sqrt(c8.gamma_F_o / c8.c))


def test_infeasible_power_split_gives_certain_outage():
    # alpha2 - alpha1 gamma_F <= 0 needs a large rate
    c = derive(SystemParams(K=8, alpha1=0.45, R_F=2.5e6, R_N=2.5e6))
    assert not dl.dl_noma_feasible(c)
    assert dl.op_dl_noma_near(1e6, c) == 1.0
    assert np.all(dl.op_dl_noma_far(np.array([1e3, 1e9]), c) == 1.0)


def test_outage_vectorised_and_monotone(c8):
    rho = np.logspace(0, 8, 41)
    for op in (dl.op_dl_noma_near(rho, c8), dl.op_dl_noma_far(rho, c8), *dl.op_dl_oma(rho, c8)):
        assert op.shape == rho.shape
        assert np.all(np.diff(op) <= 0) and np.all((op >= 0) & (op <= 1))


@given(st.floats(0, 80))
def test_outage_at_any_snr_is_a_probability(db):
    c = derive(SystemParams(K=8))
    rho = 10 ** (db / 10)
    for v in (dl.op_dl_noma_near(rho, c), dl.op_dl_noma_far(rho, c), *dl.op_dl_oma(rho, c)):
        assert 0.0 <= v <= 1.0


def test_oma_thresholds_use_doubled_rate(c8):
    assert c8.gamma_N_o == pytest.approx(2 ** 0.2 - 1, rel=1e-14)
    assert dl.op_dl_oma(100.0, c8)[0] == pytest.approx(-math.expm1(-c8.gamma_N_o / (c8.a * 100)))


@pytest.mark.parametrize("K", [2, 8, 30])
def test_far_asymptote_power_law(K):
    c = derive(SystemParams(K=K))
    rho = np.logspace(6, 8, 9)
    for f in (lambda r: dl.op_dl_noma_asymptotic(r, c)[1], lambda r: dl.op_dl_oma_asymptotic(r, c)[1]):
        slope = np.polyfit(np.log10(rho), np.log10(f(rho)), 1)[0]
        assert slope == pytest.approx(-c.m_s * K, abs=1e-6)


def test_far_asymptote_tracks_nearzero_form():
    # relative correction is O(z) with z = c1~ / sqrt(rho)
    c = derive(SystemParams(K=2))
    err = [abs(dl.op_dl_noma_asymptotic(r, c)[1] / dl.op_dl_noma_far_nearzero(r, c) - 1) for r in (1e12, 1e14, 1e16)]
    assert err[0] < 5e-3
    assert err[1] == pytest.approx(err[0] / 10, rel=0.05)
    assert err[2] == pytest.approx(err[1] / 10, rel=0.05)


def test_near_asymptote(c8):
    assert dl.op_dl_noma_asymptotic(1e8, c8)[0] / dl.op_dl_noma_near(1e8, c8) == pytest.approx(1.0, rel=1e-3)


def test_nearzero_requires_distinct_shapes():
    c = derive(SystemParams(m_G=2.0, m_g=2.0))
    with pytest.raises(DegenerateLawError):
        dl.op_dl_noma_asymptotic(1e6, c)


def test_diversity_and_slopes(c8):
    assert dl.diversity_dl(c8, Scheme.NOMA) == (1.0, 12.0)
    assert dl.diversity_dl(c8, Scheme.OMA) == (1.0, 12.0)
    assert dl.slopes_dl(Scheme.NOMA) == (1.0, 0.0)
    assert dl.slopes_dl("OMA") == (0.5, 0.5)


def test_near_rate_frozen(c10):
    assert dl.er_dl_noma_near(1e4, c10) == pytest.approx(0.36214979887715911, rel=1e-12)
    assert dl.er_dl_oma(1e4, c10)[0] == pytest.approx(0.85798709253370261, rel=1e-12)


def _far_rate_oracle(rho, c):
    g = lambda x: math.log2(1 + c.alpha2 * c.b * rho * x / (c.alpha1 * c.b * rho * x + 1))  # noqa: E731
    return ncx2_expect(g, c.lam)


@pytest.mark.parametrize("db", [30, 40, 60, 80])
def test_far_rate_vs_quadrature_oracle(c10, db):
    rho = 10 ** (db / 10)
    # the Chebyshev-Gauss rule carries an O(u^-2) bias of ~1e-4 bits here
    assert dl.er_dl_noma_far(rho, c10) == pytest.approx(_far_rate_oracle(rho, c10), abs=5e-4)


def test_far_rate_ceiling(c10):
    near, far = dl.er_dl_noma_asymptotic(1e8, c10)
    assert far == pytest.approx(math.log2(10.0))
    assert far - dl.er_dl_noma_far(1e8, c10) < 0.01
    assert dl.er_dl_noma_far(1e6, c10) < dl.er_dl_noma_far(1e7, c10) < far


def test_far_rate_rule_checks(c10):
    with pytest.raises(DomainError):
        dl.er_dl_noma_far(1e4, c10, make_gauss_laguerre(20))
    v = dl.er_dl_noma_far(1e4, c10, 100)
    assert v == dl.er_dl_noma_far(1e4, c10, make_chebyshev_gauss(100))


def test_oma_far_rate_vs_oracle(c10):
    for rho in (1e2, 1e4, 1e7):
        ref = 0.5 * ncx2_expect(lambda x: math.log2(1 + c10.b * rho * x), c10.lam)
        assert dl.er_dl_oma(rho, c10)[1] == pytest.approx(ref, rel=1e-8)


def test_near_rate_asymptote(c10):
    # the correction decays like ln(s)/s with s the near-user SNR
    gaps = [dl.er_dl_noma_near(r, c10) - dl.er_dl_noma_asymptotic(r, c10)[0] for r in (1e8, 1e10)]
    assert 0 < gaps[1] < gaps[0] < 0.01
    assert gaps[1] < 1e-4
    assert dl.er_dl_oma(1e10, c10)[0] == pytest.approx(dl.er_dl_oma_asymptotic(1e10, c10)[0], abs=1e-4)


def test_oma_far_rate_asymptote_is_an_upper_bound(c10):
    # Jensen: the gap settles at (log2 E[X] - E[log2 X]) / 2, it does not vanish
    jensen = 0.5 * (math.log2(1 + c10.lam) - ncx2_expect(math.log2, c10.lam))
    gaps = [dl.er_dl_oma_asymptotic(r, c10)[1] - dl.er_dl_oma(r, c10)[1] for r in (1e7, 1e9, 1e11)]
    assert 0 < gaps[0] < gaps[1] < gaps[2] <= jensen
    assert gaps[2] == pytest.approx(jensen, rel=1e-3)


def test_rates_increase_with_snr(c10):
    rho = np.logspace(2, 8, 13)
    for f in (lambda r: dl.er_dl_noma_near(r, c10), lambda r: dl.er_dl_oma(r, c10)[0], lambda r: dl.er_dl_oma(r, c10)[1]):
        v = [f(r) for r in rho]
        assert np.all(np.diff(v) > 0)
