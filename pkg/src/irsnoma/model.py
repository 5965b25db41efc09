"""System parameters and the constants derived from them."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateLawError, DomainError
from .specfun import ln_gamma


class Scheme(str, enum.Enum):
    NOMA = "NOMA"
    OMA = "OMA"
    FDR = "FDR"


class Direction(str, enum.Enum):
    DOWNLINK = "downlink"
    UPLINK = "uplink"


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs of the two-user network. Defaults follow the reference setup."""

    d_N: float = 10.0
    d_F1: float = 40.0
    d_F2: float = 10.0
    alpha_h: float = 3.5
    alpha_G: float = 2.5
    alpha_g: float = 2.5
    m_G: float = 3.0
    m_g: float = 1.5
    K: int = 8
    beta: float = 0.9
    alpha1: float = 0.1
    alpha2: float | None = None  # defaults to 1 - alpha1
    R_N: float = 0.1e6  # bits/s
    R_F: float = 0.1e6
    B: float = 1e6  # Hz

    def __post_init__(self):
        if self.alpha2 is None:
            object.__setattr__(self, "alpha2", 1.0 - self.alpha1)
        for name in ("d_N", "d_F1", "d_F2", "alpha_h", "alpha_G", "alpha_g", "R_N", "R_F", "B"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("m_G", "m_g"):
            if not getattr(self, name) >= 0.5:
                raise ValueError(f"{name} must be >= 0.5, got {getattr(self, name)!r}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not self.alpha1 > 0 or not self.alpha2 > 0:
            raise ValueError("power-allocation coefficients must be positive")
        if abs(self.alpha1 + self.alpha2 - 1.0) > 1e-12:
            raise ValueError("alpha1 + alpha2 must equal 1")
        if not self.alpha1 < self.alpha2:
            raise ValueError("alpha1 < alpha2 is required (far user gets more power)")


@dataclass(frozen=True)
class DerivedConstants:
    """Everything the closed forms need, computed once from SystemParams.

    ``m_tilde`` is NaN when m_G == m_g; see :attr:`has_nearzero_law`.
    """

    a: float
    b: float
    c: float
    xi: float
    lam: float
    m_s: float
    m_l: float
    m_tilde: float
    gamma_N: float
    gamma_F: float
    gamma_N_o: float
    gamma_F_o: float
    alpha1: float
    alpha2: float
    K: int
    m_G: float
    m_g: float

    @property
    def has_nearzero_law(self) -> bool:
        return not math.isnan(self.m_tilde)

    def require_nearzero_law(self):
        if not self.has_nearzero_law:
            raise DegenerateLawError(
                "near-zero cascade law needs m_G != m_g "
                f"(got m_G = m_g = {self.m_G})"
            )


def xi(m_G: float, m_g: float) -> float:
    """Squared mean of |G_k||g_k| for unit-power Nakagami amplitudes."""
    if m_G < 0.5 or m_g < 0.5:
        raise DomainError("Nakagami shapes must be >= 0.5")
    r_G = math.exp(ln_gamma(m_G + 0.5) - ln_gamma(m_G))
    r_g = math.exp(ln_gamma(m_g + 0.5) - ln_gamma(m_g))
    return r_G * r_G * r_g * r_g / (m_G * m_g)


def m_tilde(m_G: float, m_g: float) -> float:
    """Scale of the cascade law near zero; NaN when m_G == m_g."""
    if m_G == m_g:
        return math.nan
    ms, ml = min(m_G, m_g), max(m_G, m_g)
    log_val = (
        0.5 * math.log(math.pi)
        + (ms - ml + 1) * math.log(4.0)
        + ms * math.log(ms * ml)
        + ln_gamma(2 * ms)
        + ln_gamma(2 * ml - 2 * ms)
        - ln_gamma(ms)
        - ln_gamma(ml)
        - ln_gamma(ml - ms + 0.5)
    )
    return math.exp(log_val)


def rate_threshold(rate: float, bandwidth: float, oma: bool = False) -> float:
    """SINR threshold 2^{R/B} - 1 (2^{2R/B} - 1 for half-resource OMA)."""
    exponent = (2.0 if oma else 1.0) * rate / bandwidth
    return math.expm1(exponent * math.log(2.0))


def derive(params: SystemParams) -> DerivedConstants:
    x = xi(params.m_G, params.m_g)
    c = params.beta ** 2 * params.d_F1 ** (-params.alpha_G) * params.d_F2 ** (-params.alpha_g)
    return DerivedConstants(
        a=params.d_N ** (-params.alpha_h),
        b=params.K * (1.0 - x) * c,
        c=c,
        xi=x,
        lam=params.K * x / (1.0 - x),
        m_s=min(params.m_G, params.m_g),
        m_l=max(params.m_G, params.m_g),
        m_tilde=m_tilde(params.m_G, params.m_g),
        gamma_N=rate_threshold(params.R_N, params.B),
        gamma_F=rate_threshold(params.R_F, params.B),
        gamma_N_o=rate_threshold(params.R_N, params.B, oma=True),
        gamma_F_o=rate_threshold(params.R_F, params.B, oma=True),
        alpha1=params.alpha1,
        alpha2=params.alpha2,
        K=params.K,
        m_G=params.m_G,
        m_g=params.m_g,
    )


def with_xi(consts: DerivedConstants, new_xi: float) -> DerivedConstants:
    """Rebuild the xi-dependent constants (lambda, b) around a different xi."""
    return replace(
        consts,
        xi=new_xi,
        lam=consts.K * new_xi / (1.0 - new_xi),
        b=consts.K * (1.0 - new_xi) * consts.c,
    )


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    return 10.0 * np.log10(np.asarray(lin, dtype=float))


class SnrKind(str, enum.Enum):
    DOWNLINK_RHO = "DownlinkRho"
    UPLINK_RHO_PRIME = "UplinkRhoPrime"


@dataclass(frozen=True)
class SnrAxis:
    """Transmit-SNR grid in dB (BS SNR for downlink, per-user SNR for uplink)."""

    kind: SnrKind
    points: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise ValueError("SNR axis must be nonempty")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("SNR axis must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "kind", SnrKind(self.kind))

    @property
    def linear(self) -> np.ndarray:
        return db_to_linear(self.points)

    @classmethod
    def for_direction(cls, direction: Direction, points) -> "SnrAxis":
        kind = SnrKind.DOWNLINK_RHO if Direction(direction) is Direction.DOWNLINK else SnrKind.UPLINK_RHO_PRIME
        return cls(kind, tuple(points))
