import math

import numpy as np
import pytest
from scipy import special as sp
from scipy import stats

from irsnoma import downlink as dl
from irsnoma import uplink as ul
from irsnoma.mcsim import (
    FdrParams,
    McConfig,
    McEstimate,
    empirical_cascade_law,
    sample_nakagami,
    simulate_dl,
    simulate_fdr,
    simulate_ul,
)
from irsnoma.model import Direction, SystemParams, derive


def mu(m):
    return math.exp(math.lgamma(m + 0.5) - math.lgamma(m)) / math.sqrt(m)


@pytest.mark.parametrize("m", [0.5, 1.0, 1.5, 3.0])
def test_nakagami_moments(m):
    amp = sample_nakagami(m, np.random.default_rng(1), 10**6)
    pw = amp ** 2
    assert abs(pw.mean() - 1) <= 3 * pw.std() / 1e3
    assert abs(amp.mean() - mu(m)) <= 3 * amp.std() / 1e3
    # variance of amp: 1 - mu^2
    assert amp.var() == pytest.approx(1 - mu(m) ** 2, rel=1e-2)
    assert stats.kstest(pw[:20000], stats.gamma(m, scale=1 / m).cdf).pvalue > 1e-3


def test_nakagami_domain():
    with pytest.raises(ValueError):
        sample_nakagami(0.3, np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(trials=0)
    with pytest.raises(ValueError):
        McConfig(workers=0)
    with pytest.raises(ValueError):
        FdrParams(power_split=1.0)
    with pytest.raises(ValueError):
        FdrParams(si_residual_gain=-1.0)


def test_deterministic_across_workers(p8):
    a = simulate_dl(p8, "NOMA", 1e3, McConfig(trials=300_001, seed=7, workers=1))
    b = simulate_dl(p8, "NOMA", 1e3, McConfig(trials=300_001, seed=7, workers=4))
    assert a == b
    c = simulate_dl(p8, "NOMA", 1e3, McConfig(trials=300_001, seed=8, workers=1))
    assert c["op_near"].mean != a["op_near"].mean


def test_stderr_scales_like_inverse_sqrt(p8):
    s1 = simulate_dl(p8, "OMA", 1e3, McConfig(trials=100_000, seed=3))["op_near"].std_error
    s4 = simulate_dl(p8, "OMA", 1e3, McConfig(trials=400_000, seed=3))["op_near"].std_error
    assert s1 / s4 == pytest.approx(2.0, rel=0.2)


def test_low_snr_outage_is_certain(p8):
    for sim in (simulate_dl, simulate_ul):
        est = sim(p8, "NOMA", 1e-3, McConfig(trials=20_000))
        assert est["op_near"].mean == 1.0 and est["op_far"].mean == 1.0


def test_downlink_agrees_with_closed_forms(p8, c8):
    rho = 1e3
    cfg = McConfig(trials=10**6, seed=11, workers=2)
    mn = simulate_dl(p8, "NOMA", rho, cfg)
    mo = simulate_dl(p8, "OMA", rho, cfg)
    assert mn["op_near"].z_score(dl.op_dl_noma_near(rho, c8)) < 3
    assert mo["op_near"].z_score(dl.op_dl_oma(rho, c8)[0]) < 3


def test_near_outage_uses_joint_sic_event(p8):
    # the joint event is at least as likely to fail as either marginal
    est = simulate_dl(p8, "NOMA", 10 ** 3.5, McConfig(trials=200_000))
    c = derive(p8)
    marginal = -math.expm1(-c.gamma_N / (c.a * c.alpha1 * 10 ** 3.5))
    assert est["op_near"].mean >= marginal - 3 * est["op_near"].std_error


def test_min_sinr_rate_is_lower(p10):
    est = simulate_dl(p10, "NOMA", 1e4, McConfig(trials=100_000), with_min_sinr=True)
    assert est["er_far_min"].mean <= est["er_far"].mean


def test_oma_far_rate_matches_closed_form(p10, c10):
    est = simulate_dl(p10, "OMA", 1e4, McConfig(trials=10**6))
    assert abs(est["er_far"].mean - dl.er_dl_oma(1e4, c10)[1]) < 0.02


def test_uplink_floor(p10, c10):
    floor = ul.op_ul_floor(c10)
    est = simulate_ul(p10, "NOMA", 1e7, McConfig(trials=10**6))
    assert est["op_near"].z_score(floor, floor_p=floor) < 3
    assert est["op_far"].z_score(floor, floor_p=floor) < 3
    assert abs(est["er_near"].mean - ul.er_ul_noma_near_ceiling(c10)) < 0.01 + 3 * est["er_near"].std_error


def test_uplink_huge_far_threshold(p10):
    p = SystemParams(K=10, R_F=40e6)
    est = simulate_ul(p, "NOMA", 1e6, McConfig(trials=20_000))
    assert est["op_far"].mean == 1.0


def test_antithetic_is_unbiased_and_reproducible(p10, c10):
    cfg = McConfig(trials=200_000, antithetic=True, workers=3)
    est = simulate_dl(p10, "OMA", 1e4, cfg)
    assert est == simulate_dl(p10, "OMA", 1e4, McConfig(trials=200_000, antithetic=True, workers=1))
    assert est["er_near"].trials == 200_000
    assert abs(est["er_near"].mean - dl.er_dl_oma(1e4, c10)[0]) < 4 * est["er_near"].std_error + 1e-3


def test_fdr_ideal_relay_reduces_to_first_hop(p8):
    # no SI and a very short second hop: outage is the first-hop SIC event
    p = SystemParams(K=8, d_F2=1e-3)
    fdr = FdrParams(si_residual_gain=0.0)
    rho = 10 ** 3.5
    est = simulate_fdr(p, fdr, Direction.DOWNLINK, rho, McConfig(trials=400_000))
    rho_r = 0.5 * rho
    g = 2 ** 0.1 - 1
    thr = g / ((p.alpha2 - p.alpha1 * g) * rho_r * p.d_F1 ** (-p.alpha_G))
    ref = sp.gammainc(p.m_G, p.m_G * thr)
    assert est["op_far"].z_score(ref, floor_p=ref) < 3


def test_fdr_outage_floor_from_self_interference(p8):
    cfg = McConfig(trials=200_000)
    hi = [simulate_fdr(p8, FdrParams(), "downlink", r, cfg)["op_far"] for r in (1e8, 1e10)]
    assert hi[0].mean > 0.05
    assert abs(hi[0].mean - hi[1].mean) < 3 * math.hypot(hi[0].std_error, hi[1].std_error) + 1e-3
    ideal = simulate_fdr(p8, FdrParams(si_residual_gain=0.0), "downlink", 1e10, cfg)["op_far"]
    assert ideal.mean < 1e-3


def test_fdr_uplink_rate_ceiling(p10):
    cfg = McConfig(trials=100_000)
    r = [simulate_fdr(p10, FdrParams(), "uplink", x, cfg)["er_far"].mean for x in (1e6, 1e8)]
    assert abs(r[1] - r[0]) < 0.2


def test_empirical_cascade_law(p10):
    c = derive(SystemParams(K=30, m_G=3.0, m_g=2.0))
    from irsnoma.chanstats import CascadeLawCLT, clt_cdf_x
    emp = empirical_cascade_law(3.0, 2.0, 30, McConfig(trials=200_000, seed=2))
    assert emp.mean_x.z_score(1 + c.lam) < 3
    assert emp.ks_distance(lambda x: clt_cdf_x(x, CascadeLawCLT(c.lam))) < 0.02
    assert np.all(np.diff(emp.x) >= 0)
    assert emp.density.sum() * np.diff(emp.edges)[0] == pytest.approx(1.0)
    assert emp.cdf_x(emp.x[-1]) == 1.0
    t = emp.tail_z(float(np.median(emp.z)))
    assert t.mean == pytest.approx(0.5, abs=1e-3)


def test_estimate_z_score():
    e = McEstimate(1.0, 0.0, 100)
    assert e.z_score(1.0) == 0.0
    assert e.z_score(0.5) == math.inf
    # binomial floor rescues the all-ones case
    assert e.z_score(0.99, floor_p=0.99) == pytest.approx(0.01 / math.sqrt(0.99 * 0.01 / 100))
