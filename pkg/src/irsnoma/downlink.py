"""Downlink closed forms: NOMA and OMA outage, ergodic rate and high-SNR behaviour.

All ``rho`` arguments are linear transmit SNRs of the BS. Outage functions
broadcast over arrays of ``rho``; ergodic-rate functions take scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .chanstats import (
    CascadeLawCLT,
    NearZeroLaw,
    clt_cdf_x,
    clt_expectation_gl,
    nearzero_cdf_z,
    poisson_cutoff,
    poisson_log_weights,
)
from .errors import DomainError
from .model import DerivedConstants, Scheme
from .specfun import (
    EULER_GAMMA,
    QuadratureKind,
    QuadratureRule,
    expint_ei_neg_scaled,
    make_chebyshev_gauss,
    make_gauss_laguerre,
    reg_lower_gamma,
)

LN2 = math.log(2.0)
DEFAULT_ORDER = 100


def _ret(val):
    val = np.asarray(val, dtype=float)
    return float(val) if val.ndim == 0 else val


def _check_rule(rule, kind: QuadratureKind, default_maker) -> QuadratureRule:
    if rule is None:
        return default_maker(DEFAULT_ORDER)
    if isinstance(rule, int):
        return default_maker(rule)
    if rule.kind is not kind:
        raise DomainError(f"expected a {kind.value} rule, got {rule.kind.value}")
    if rule.order < 1:
        raise DomainError("quadrature order must be >= 1")
    return rule


@dataclass(frozen=True)
class DlNomaThresholds:
    rho_tilde_m: float
    rho_tilde: float
    feasible: bool
    c1_tilde: float
    c2_tilde: float


def dl_noma_feasible(consts: DerivedConstants) -> bool:
    """SIC at either user needs alpha2 - alpha1 * gamma_F > 0."""
    return consts.alpha2 - consts.alpha1 * consts.gamma_F > 0


def dl_noma_thresholds(rho, consts: DerivedConstants) -> DlNomaThresholds:
    rho = np.asarray(rho, dtype=float)
    feasible = dl_noma_feasible(consts)
    a, b, c = consts.a, consts.b, consts.c
    a1, a2 = consts.alpha1, consts.alpha2
    gN, gF = consts.gamma_N, consts.gamma_F
    margin = a2 - a1 * gF
    if feasible:
        with np.errstate(divide="ignore"):
            rho_m = np.maximum(gF / (margin * a * rho), gN / (a * a1 * rho))
        rho_t = gF / (margin * b * rho)
        c1 = math.sqrt(gF / (c * margin))
    else:
        rho_m = rho_t = np.full_like(rho, np.inf)
        c1 = math.inf
    return DlNomaThresholds(_ret(rho_m), _ret(rho_t), feasible, c1, math.sqrt(consts.gamma_F_o / c))


# -- NOMA outage -----------------------------------------------------------------

def op_dl_noma_near(rho, consts: DerivedConstants):
    """1 - exp(-rho~_m); returns 1 when the power split is infeasible."""
    th = dl_noma_thresholds(rho, consts)
    if not th.feasible:
        return _ret(np.ones_like(np.asarray(rho, dtype=float)))
    return _ret(-np.expm1(-np.asarray(th.rho_tilde_m)))


def op_dl_noma_far(rho, consts: DerivedConstants):
    """CLT outage of the far user, F_X(rho~)."""
    th = dl_noma_thresholds(rho, consts)
    if not th.feasible:
        return _ret(np.ones_like(np.asarray(rho, dtype=float)))
    return _ret(clt_cdf_x(th.rho_tilde, CascadeLawCLT.from_constants(consts)))


def _nearzero_power(c_tilde, rho, consts: DerivedConstants):
    law = NearZeroLaw.from_constants(consts)
    n = law.shape
    log_val = law.log_scale + n * math.log(c_tilde) - sp.gammaln(n + 1.0) - 0.5 * n * np.log(np.asarray(rho, dtype=float))
    return _ret(np.exp(log_val))


def op_dl_noma_asymptotic(rho, consts: DerivedConstants):
    """High-SNR (near, far) outage: (rho~_m, m~^K c1~^{2 m_s K} rho^{-m_s K} / Gamma(2 m_s K + 1))."""
    th = dl_noma_thresholds(rho, consts)
    far = _nearzero_power(th.c1_tilde, rho, consts)
    return th.rho_tilde_m, far


def op_dl_noma_far_nearzero(rho, consts: DerivedConstants):
    """Far-user outage from the full small-z CDF, F_Z(c1~ / sqrt(rho))."""
    th = dl_noma_thresholds(rho, consts)
    law = NearZeroLaw.from_constants(consts)
    return nearzero_cdf_z(th.c1_tilde / np.sqrt(np.asarray(rho, dtype=float)), law)


def diversity_dl(consts: DerivedConstants, scheme=Scheme.NOMA):
    Scheme(scheme)
    return 1.0, consts.m_s * consts.K


# -- NOMA ergodic rate -----------------------------------------------------------

def er_dl_noma_near(rho: float, consts: DerivedConstants) -> float:
    """-(e^{1/(a a1 rho)} / ln 2) Ei(-1/(a a1 rho))."""
    s = consts.a * consts.alpha1 * rho
    return -expint_ei_neg_scaled(1.0 / s) / LN2


def er_dl_noma_far(rho: float, consts: DerivedConstants, rule=None) -> float:
    """Far-user rate: log2(1 + a~) minus a Poisson-weighted Chebyshev-Gauss correction."""
    rule = _check_rule(rule, QuadratureKind.CHEBYSHEV_GAUSS, make_chebyshev_gauss)
    a1, a2, b = consts.alpha1, consts.alpha2, consts.b
    at = a2 / a1
    t = rule.nodes
    num = at * (1.0 + t)
    den = 4.0 * b * rho * a2 - 2.0 * b * rho * a1 * at * (1.0 + t)
    # den -> 0 as t -> 1: the regularized gamma saturates at 1
    with np.errstate(divide="ignore"):
        arg = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    half = 0.5 * consts.lam
    n = poisson_cutoff(half) + 1
    w = np.exp(poisson_log_weights(half, n))
    i = np.arange(n, dtype=float)
    p = reg_lower_gamma(i[:, None] + 0.5, arg[None, :])
    shape = np.sqrt(1.0 - t * t) / (1.0 + 2.0 / at + t)
    inner = (p * (rule.weights * shape)[None, :]).sum(axis=1)
    return math.log2(1.0 + at) - float(np.dot(w, inner)) / LN2


def er_dl_noma_asymptotic(rho: float, consts: DerivedConstants):
    """(log2(a a1 rho) - E_c/ln 2, log2(1 + a~))."""
    near = math.log2(consts.a * consts.alpha1 * rho) - EULER_GAMMA / LN2
    return near, math.log2(1.0 + consts.alpha2 / consts.alpha1)


# -- OMA -------------------------------------------------------------------------

def op_dl_oma(rho, consts: DerivedConstants):
    rho = np.asarray(rho, dtype=float)
    near = -np.expm1(-consts.gamma_N_o / (consts.a * rho))
    far = clt_cdf_x(consts.gamma_F_o / (consts.b * rho), CascadeLawCLT.from_constants(consts))
    return _ret(near), _ret(far)


def op_dl_oma_asymptotic(rho, consts: DerivedConstants):
    rho = np.asarray(rho, dtype=float)
    near = consts.gamma_N_o / (consts.a * rho)
    far = _nearzero_power(math.sqrt(consts.gamma_F_o / consts.c), rho, consts)
    return _ret(near), far


def op_dl_oma_far_nearzero(rho, consts: DerivedConstants):
    law = NearZeroLaw.from_constants(consts)
    c2 = math.sqrt(consts.gamma_F_o / consts.c)
    return nearzero_cdf_z(c2 / np.sqrt(np.asarray(rho, dtype=float)), law)


def er_dl_oma(rho: float, consts: DerivedConstants, rule=None):
    """(near, far) OMA ergodic rates; each user holds half the resource block."""
    rule = _check_rule(rule, QuadratureKind.GAUSS_LAGUERRE, make_gauss_laguerre)
    near = -expint_ei_neg_scaled(1.0 / (consts.a * rho)) / (2.0 * LN2)
    b = consts.b
    law = CascadeLawCLT.from_constants(consts)
    far = 0.5 * clt_expectation_gl(lambda x: np.log2(1.0 + b * rho * x), law, rule)
    return near, far


def er_dl_oma_asymptotic(rho: float, consts: DerivedConstants):
    near = 0.5 * (math.log2(consts.a * rho) - EULER_GAMMA / LN2)
    far = 0.5 * math.log2(consts.b * rho * (1.0 + consts.lam))
    return near, far


def slopes_dl(scheme=Scheme.NOMA):
    """High-SNR slopes (near, far)."""
    return (1.0, 0.0) if Scheme(scheme) is Scheme.NOMA else (0.5, 0.5)
