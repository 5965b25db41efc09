"""Uplink closed forms: NOMA outage floor, NOMA ergodic rates, and OMA by SNR substitution.

``rho_prime`` is the linear transmit SNR of each user.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import downlink
from .chanstats import CascadeLawCLT, clt_expectation_gl, poisson_cutoff
from .downlink import LN2, _check_rule
from .model import DerivedConstants, Scheme
from .specfun import (
    QuadratureKind,
    expint_ei_neg_scaled,
    make_gauss_laguerre,
    reg_upper_gamma,
)


@dataclass(frozen=True)
class UlSeriesTerms:
    """Terms lam^i / (i! 2^{2i+1/2} base^{i+1/2}) shared by the uplink outage series."""

    base: float
    poisson_scale: float
    n_terms: int
    log_terms: np.ndarray

    @classmethod
    def build(cls, consts: DerivedConstants, extra_terms: int = 0) -> "UlSeriesTerms":
        base = consts.b * consts.gamma_N / consts.a + 0.5
        scale = consts.lam / (4.0 * base)
        n = poisson_cutoff(scale) + 1 + extra_terms
        i = np.arange(n, dtype=float)
        log_terms = (
            i * math.log(consts.lam) - sp.gammaln(i + 1.0)
            - (2.0 * i + 0.5) * math.log(2.0) - (i + 0.5) * math.log(base)
        )
        return cls(base, scale, n, log_terms)


def op_ul_noma(rho_prime, consts: DerivedConstants, extra_terms: int = 0):
    """(near, far) uplink NOMA outage."""
    terms = UlSeriesTerms.build(consts, extra_terms)
    rho_prime = np.atleast_1d(np.asarray(rho_prime, dtype=float))
    lead = -consts.gamma_N / (consts.a * rho_prime) - 0.5 * consts.lam
    near = -np.expm1(lead + sp.logsumexp(terms.log_terms))

    y = consts.gamma_N * consts.gamma_F / (consts.a * rho_prime) + consts.gamma_F / (2.0 * consts.b * rho_prime)
    i = np.arange(terms.n_terms, dtype=float)
    q = reg_upper_gamma(i[:, None] + 0.5, y[None, :])
    with np.errstate(under="ignore"):
        s = (np.exp(terms.log_terms[:, None] + lead[None, :]) * q).sum(axis=0)
    far = 1.0 - s
    if np.ndim(near) and near.size == 1:
        return float(near[0]), float(far[0])
    return near, far


def op_ul_floor(consts: DerivedConstants, extra_terms: int = 0) -> float:
    """Common high-SNR outage floor of both uplink NOMA users."""
    terms = UlSeriesTerms.build(consts, extra_terms)
    return float(-np.expm1(-0.5 * consts.lam + sp.logsumexp(terms.log_terms)))


def diversity_ul_noma():
    return 0.0, 0.0


def diversity_ul(consts: DerivedConstants, scheme=Scheme.NOMA):
    if Scheme(scheme) is Scheme.NOMA:
        return diversity_ul_noma()
    return downlink.diversity_dl(consts, Scheme.OMA)


def slopes_ul(scheme=Scheme.NOMA):
    return (0.0, 1.0) if Scheme(scheme) is Scheme.NOMA else (0.5, 0.5)


def _er_near(shift: float, consts: DerivedConstants, rule) -> float:
    rule = _check_rule(rule, QuadratureKind.GAUSS_LAGUERRE, make_gauss_laguerre)
    ratio = consts.b / consts.a
    law = CascadeLawCLT.from_constants(consts)
    # e^{(b/a)x + shift} Ei(-(b/a)x - shift) as one scaled evaluation
    val = clt_expectation_gl(lambda x: expint_ei_neg_scaled(ratio * x + shift), law, rule)
    return -val / LN2


def er_ul_noma_near(rho_prime: float, consts: DerivedConstants, rule=None) -> float:
    return _er_near(1.0 / (consts.a * rho_prime), consts, rule)


def er_ul_noma_near_ceiling(consts: DerivedConstants, rule=None) -> float:
    """rho' -> inf limit of the near-user rate."""
    return _er_near(0.0, consts, rule)


def er_ul_noma_far(rho_prime: float, consts: DerivedConstants, rule=None) -> float:
    rule = _check_rule(rule, QuadratureKind.GAUSS_LAGUERRE, make_gauss_laguerre)
    b = consts.b
    law = CascadeLawCLT.from_constants(consts)
    return clt_expectation_gl(lambda x: np.log2(1.0 + b * rho_prime * x), law, rule)


def er_ul_noma_far_asymptotic(rho_prime: float, consts: DerivedConstants) -> float:
    return math.log2(consts.b * rho_prime * (1.0 + consts.lam))


def ul_oma(rho_prime: float, consts: DerivedConstants, rule=None) -> dict:
    """Uplink OMA metrics: the downlink OMA results evaluated at rho = rho'."""
    op = downlink.op_dl_oma(rho_prime, consts)
    er = downlink.er_dl_oma(rho_prime, consts, rule)
    out = {
        "op": op,
        "er": er,
        "er_asymptotic": downlink.er_dl_oma_asymptotic(rho_prime, consts),
        "diversity": downlink.diversity_dl(consts, Scheme.OMA),
        "slopes": downlink.slopes_dl(Scheme.OMA),
    }
    if consts.has_nearzero_law:
        out["op_asymptotic"] = downlink.op_dl_oma_asymptotic(rho_prime, consts)
    else:
        out["op_asymptotic"] = (consts.gamma_N_o / (consts.a * rho_prime), math.nan)
    return out
