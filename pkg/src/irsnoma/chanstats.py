"""Statistics of the phase-aligned BS-IRS-F cascade.

Two regimes are modelled: the CLT law of the normalized squared gain
X = Z^2 / (K(1-xi)) (noncentral chi-square, one degree of freedom) and the
exact small-z law of Z = sum_k |G_k||g_k|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DegenerateLawError
from .model import DerivedConstants
from .specfun import (
    bessel_i_mhalf_scaled,
    marcum_q_half_complement,
    reg_lower_gamma,
)


@dataclass(frozen=True)
class CascadeLawCLT:
    lam: float
    dof: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("noncentrality must be positive")

    @classmethod
    def from_constants(cls, consts: DerivedConstants) -> "CascadeLawCLT":
        return cls(consts.lam)


@dataclass(frozen=True)
class NearZeroLaw:
    m_s: float
    m_l: float
    m_tilde: float
    K: int

    def __post_init__(self):
        if math.isnan(self.m_tilde) or not self.m_s < self.m_l:
            raise DegenerateLawError("near-zero law is defined only for m_G != m_g")

    @property
    def shape(self) -> float:
        return 2.0 * self.m_s * self.K

    @property
    def rate(self) -> float:
        return 2.0 * math.sqrt(self.m_s * self.m_l)

    @property
    def log_scale(self) -> float:
        # ln(m_tilde^K)
        return self.K * math.log(self.m_tilde)

    @classmethod
    def from_constants(cls, consts: DerivedConstants) -> "NearZeroLaw":
        consts.require_nearzero_law()
        return cls(consts.m_s, consts.m_l, consts.m_tilde, consts.K)


def optimal_phases(arg_G, arg_g, theta_tilde: float = 0.0) -> np.ndarray:
    """Phase shifts that co-phase every reflected path: theta_k = theta~ - arg(G_k g_k)."""
    arg_G = np.asarray(arg_G, dtype=float)
    arg_g = np.asarray(arg_g, dtype=float)
    if arg_G.shape != arg_g.shape:
        raise ValueError("arg_G and arg_g must have the same length")
    return np.mod(theta_tilde - (arg_G + arg_g), 2.0 * math.pi)


# -- CLT law -------------------------------------------------------------------

def clt_pdf_x(x, law: CascadeLawCLT):
    """Noncentral chi-square(1) density; +inf at x = 0."""
    arr = np.asarray(x, dtype=float)
    lam = law.lam
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        z = np.sqrt(lam * arr)
        # e^{-(x+lam)/2} I_{-1/2}(sqrt(lam x)) = e^{-(sqrt x - sqrt lam)^2 / 2} * scaled Bessel
        bes = bessel_i_mhalf_scaled(np.where(z > 0, z, 1.0))
        val = 0.5 * lam ** 0.25 * arr ** -0.25 * np.exp(-0.5 * (np.sqrt(arr) - math.sqrt(lam)) ** 2) * bes
    val = np.where(arr > 0, val, np.where(arr == 0, np.inf, 0.0))
    return float(val) if val.ndim == 0 else val


def clt_cdf_x(x, law: CascadeLawCLT):
    """F_X(x) = 1 - Q_{1/2}(sqrt(lam), sqrt(x))."""
    arr = np.asarray(x, dtype=float)
    val = marcum_q_half_complement(math.sqrt(law.lam), np.sqrt(np.maximum(arr, 0.0)))
    return val


def poisson_cutoff(mean: float, floor: int = 40) -> int:
    """Last index kept when truncating a Poisson(mean)-weighted series."""
    return int(max(mean + 12.0 * math.sqrt(mean), floor))


def poisson_log_weights(mean: float, n_terms: int) -> np.ndarray:
    """ln(e^{-mean} mean^i / i!) for i = 0..n_terms-1."""
    i = np.arange(n_terms, dtype=float)
    if mean <= 0:
        return np.where(i == 0, 0.0, -np.inf)
    return -mean + i * math.log(mean) - sp.gammaln(i + 1.0)


def clt_cdf_x_series(x, law: CascadeLawCLT):
    """Series form e^{-lam/2} sum (lam/2)^i/i! P(i+1/2, x/2); test oracle."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    half = 0.5 * law.lam
    n = poisson_cutoff(half) + 1
    w = np.exp(poisson_log_weights(half, n))
    i = np.arange(n, dtype=float)
    p = reg_lower_gamma(i[:, None] + 0.5, arr[None, :] / 2.0)
    terms = w[:, None] * p
    out = terms.sum(axis=0)
    return float(out[0]) if np.ndim(x) == 0 else out


def clt_pdf_x_series(x, law: CascadeLawCLT):
    """Series form of the CLT density; test oracle (x > 0)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    lam = law.lam
    n = poisson_cutoff(lam * np.max(arr) / 4.0 if arr.size else 0.0) + 1
    i = np.arange(n, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        log_terms = (
            i * math.log(lam) + (i - 0.5) * np.log(arr[None, :])
            - sp.gammaln(i + 1) - (2 * i + 0.5) * math.log(2.0) - sp.gammaln(i + 0.5)
        )
    out = np.exp(-(arr + lam) / 2.0 + sp.logsumexp(log_terms, axis=0))
    return float(out[0]) if np.ndim(x) == 0 else out


# -- near-zero law of Z ------------------------------------------------------------

def nearzero_pdf_z(z, law: NearZeroLaw):
    """Small-z density (m~^K / Gamma(2 m_s K)) z^{2 m_s K - 1} e^{-2 sqrt(m_s m_l) z}."""
    arr = np.asarray(z, dtype=float)
    n = law.shape
    with np.errstate(divide="ignore"):
        log_val = law.log_scale - sp.gammaln(n) + (n - 1.0) * np.log(arr) - law.rate * arr
    val = np.where(arr > 0, np.exp(log_val), 0.0 if n > 1 else (np.inf if n < 1 else math.exp(law.log_scale)))
    return float(val) if val.ndim == 0 else val


def nearzero_cdf_z(z, law: NearZeroLaw):
    """Small-z CDF m~^K (4 m_s m_l)^{-m_s K} P(2 m_s K, 2 sqrt(m_s m_l) z)."""
    arr = np.asarray(z, dtype=float)
    log_const = law.log_scale - law.m_s * law.K * math.log(4.0 * law.m_s * law.m_l)
    val = math.exp(log_const) * np.asarray(reg_lower_gamma(law.shape, law.rate * np.maximum(arr, 0.0)))
    return float(val) if val.ndim == 0 else val


def nearzero_cdf_leading(z, law: NearZeroLaw):
    """Leading term m~^K z^{2 m_s K} / Gamma(2 m_s K + 1) of the small-z CDF."""
    arr = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        val = np.exp(law.log_scale - sp.gammaln(law.shape + 1.0) + law.shape * np.log(arr))
    return float(val) if val.ndim == 0 else val


def clt_expectation_gl(g, law: CascadeLawCLT, rule) -> float:
    """E[g(X)] under the CLT law by Gauss-Laguerre quadrature.

    The density is rewritten as e^{-x} times x^{-1/4} e^{x/2} I_{-1/2}(sqrt(lam x))
    (lam^{1/4}/2) e^{-lam/2}; the growing exponentials are folded into the
    log-weights so nothing overflows at the largest nodes.
    """
    x = rule.nodes
    lam = law.lam
    z = np.sqrt(lam * x)
    log_mag = rule.log_weights + 0.5 * x - 0.5 * lam + z - 0.25 * np.log(x) + 0.25 * math.log(lam) - math.log(2.0)
    with np.errstate(under="ignore"):
        kernel = np.exp(log_mag) * bessel_i_mhalf_scaled(z)
    return float(np.sum(kernel * g(x)))
