"""Monte Carlo oracle for the closed forms.

Channels are drawn per trial and pushed through the SINR expressions of the
signal model; nothing here calls the analytic modules. Trials are split into
fixed-size blocks, each with its own counter-based Philox stream keyed by
(seed, block index), so results do not depend on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .model import Direction, Scheme, SystemParams


@dataclass(frozen=True)
class McConfig:
    trials: int = 10**6
    seed: int = 2021
    workers: int = 1
    antithetic: bool = False
    block_size: int = 1 << 16

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.block_size < 2 or (self.antithetic and self.block_size % 2):
            raise ValueError("block_size must be >= 2 (and even for antithetic sampling)")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int | None = None

    def z_score(self, reference: float, floor_p: float | None = None) -> float:
        """|mean - reference| in units of standard error.

        For outage estimates pass ``floor_p=reference``: the binomial standard
        error at the reference probability is used when it exceeds the sample
        one (a sample of all-ones has zero sample variance).
        """
        se = self.std_error
        if floor_p is not None:
            p = min(max(floor_p, 0.0), 1.0)
            se = max(se, math.sqrt(p * (1.0 - p) / self.trials))
        diff = abs(self.mean - reference)
        if se == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / se


@dataclass(frozen=True)
class FdrParams:
    """Full-duplex decode-and-forward relay placed where the IRS would be."""

    power_split: float = 0.5
    si_m: float = 1.0
    si_residual_gain: float = 1e-3

    def __post_init__(self):
        if not 0 < self.power_split < 1:
            raise ValueError("power_split must lie in (0, 1)")
        if self.si_residual_gain < 0:
            raise ValueError("si_residual_gain must be >= 0")
        if self.si_m < 0.5:
            raise ValueError("si_m must be >= 0.5")


def sample_nakagami(m: float, rng: np.random.Generator, size=None):
    """Unit-spread Nakagami-m amplitude: amp^2 ~ Gamma(m, 1/m)."""
    if not m >= 0.5:
        raise ValueError("Nakagami shape must be >= 0.5")
    return np.sqrt(rng.gamma(m, 1.0 / m, size))


class _Draws:
    """Channel draws for one block; antithetic mode pairs U with 1 - U."""

    def __init__(self, rng: np.random.Generator, n: int, antithetic: bool):
        self.rng = rng
        self.n = n
        self.antithetic = antithetic

    def _uniform(self, shape):
        if not self.antithetic:
            return self.rng.random(shape)
        half = self.rng.random((shape[0] // 2,) + shape[1:])
        return np.concatenate([half, 1.0 - half])

    def exponential(self, *cols):
        shape = (self.n,) + cols
        if not self.antithetic:
            return self.rng.standard_exponential(shape)
        return -np.log1p(-self._uniform(shape))

    def nakagami(self, m, *cols):
        shape = (self.n,) + cols
        if not self.antithetic:
            return sample_nakagami(m, self.rng, shape)
        return np.sqrt(sp.gammaincinv(m, self._uniform(shape)) / m)


def _block_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _block_sizes(cfg: McConfig):
    full, rest = divmod(cfg.trials, cfg.block_size)
    sizes = [cfg.block_size] * full
    if rest:
        if cfg.antithetic and rest % 2:
            rest += 1
        sizes.append(rest)
    return sizes


def _run(kernel, cfg: McConfig) -> dict[str, McEstimate]:
    """Evaluate ``kernel(draws) -> {metric: per-trial values}`` over all blocks."""
    sizes = _block_sizes(cfg)

    def one(index):
        n = sizes[index]
        values = kernel(_Draws(_block_rng(cfg.seed, index), n, cfg.antithetic))
        out = {}
        for name, v in values.items():
            v = np.asarray(v, dtype=float)
            if cfg.antithetic:
                h = n // 2
                v = 0.5 * (v[:h] + v[h:])
            out[name] = (v.size, math.fsum(v), math.fsum(v * v))
        return out

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]

    result = {}
    for name in parts[0]:
        n = sum(p[name][0] for p in parts)
        s1 = math.fsum(p[name][1] for p in parts)
        s2 = math.fsum(p[name][2] for p in parts)
        mean = s1 / n
        var = max(s2 - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
        trials = 2 * n if cfg.antithetic else n
        result[name] = McEstimate(mean, math.sqrt(var / n), trials, cfg.seed)
    return result


# -- link-level helpers ------------------------------------------------------------

def _threshold(rate, bandwidth, oma=False):
    return 2.0 ** ((2.0 if oma else 1.0) * rate / bandwidth) - 1.0


def _direct_gain(p: SystemParams, draws: _Draws):
    # |h|^2 d_N^{-alpha_h}, h ~ CN(0, 1)
    return draws.exponential() * p.d_N ** (-p.alpha_h)


def _cascade_gain(p: SystemParams, draws: _Draws):
    # phase-aligned |G Theta g|^2 d_F1^{-alpha_G} d_F2^{-alpha_g}
    G = draws.nakagami(p.m_G, p.K)
    g = draws.nakagami(p.m_g, p.K)
    z = (G * g).sum(axis=1)
    return p.beta ** 2 * z * z * p.d_F1 ** (-p.alpha_G) * p.d_F2 ** (-p.alpha_g)


def _oma_metrics(p: SystemParams, rho: float, s_near, s_far):
    gN = _threshold(p.R_N, p.B, oma=True)
    gF = _threshold(p.R_F, p.B, oma=True)
    snr_n = s_near * rho
    snr_f = s_far * rho
    return {
        "op_near": snr_n < gN,
        "op_far": snr_f < gF,
        "er_near": 0.5 * np.log2(1.0 + snr_n),
        "er_far": 0.5 * np.log2(1.0 + snr_f),
    }


def simulate_dl(params: SystemParams, scheme, rho: float, cfg: McConfig,
                with_min_sinr: bool = False) -> dict[str, McEstimate]:
    """Downlink OP/ER estimates at linear BS SNR ``rho``.

    With ``with_min_sinr`` the far-user rate is also evaluated on
    min(SINR_{N,F}, SINR_F) under key ``er_far_min``.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.FDR:
        return simulate_fdr(params, FdrParams(), Direction.DOWNLINK, rho, cfg)
    p = params
    gN = _threshold(p.R_N, p.B)
    gF = _threshold(p.R_F, p.B)
    a1, a2 = p.alpha1, p.alpha2

    def kernel(draws):
        s_n = _direct_gain(p, draws)
        s_f = _cascade_gain(p, draws)
        if scheme is Scheme.OMA:
            return _oma_metrics(p, rho, s_n, s_f)
        sinr_nf = s_n * a2 / (s_n * a1 + 1.0 / rho)
        snr_n = s_n * a1 * rho
        sinr_f = s_f * a2 / (s_f * a1 + 1.0 / rho)
        out = {
            # the near user must decode F's signal before its own
            "op_near": ~((sinr_nf >= gF) & (snr_n >= gN)),
            "op_far": sinr_f < gF,
            "er_near": np.log2(1.0 + snr_n),
            "er_far": np.log2(1.0 + sinr_f),
        }
        if with_min_sinr:
            out["er_far_min"] = np.log2(1.0 + np.minimum(sinr_nf, sinr_f))
        return out

    return _run(kernel, cfg)


def simulate_ul(params: SystemParams, scheme, rho_prime: float, cfg: McConfig) -> dict[str, McEstimate]:
    """Uplink OP/ER estimates at per-user linear SNR ``rho_prime``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.FDR:
        return simulate_fdr(params, FdrParams(), Direction.UPLINK, rho_prime, cfg)
    p = params
    gN = _threshold(p.R_N, p.B)
    gF = _threshold(p.R_F, p.B)

    def kernel(draws):
        s_n = _direct_gain(p, draws)
        s_f = _cascade_gain(p, draws)
        if scheme is Scheme.OMA:
            return _oma_metrics(p, rho_prime, s_n, s_f)
        sinr_n = s_n / (s_f + 1.0 / rho_prime)
        snr_f = s_f * rho_prime
        return {
            "op_near": sinr_n < gN,
            "op_far": ~((sinr_n >= gN) & (snr_f >= gF)),
            "er_near": np.log2(1.0 + sinr_n),
            "er_far": np.log2(1.0 + snr_f),
        }

    return _run(kernel, cfg)


def simulate_fdr(params: SystemParams, fdr: FdrParams, direction, rho: float,
                 cfg: McConfig) -> dict[str, McEstimate]:
    """NOMA with a full-duplex DF relay in place of the IRS.

    The relay and the BS (downlink) or F (uplink) transmit at
    ``power_split * rho``. Residual self-interference at the relay has power
    ``si_residual_gain * |h_SI|^2`` relative to the relay transmit power,
    with |h_SI| Nakagami-``si_m``.
    """
    direction = Direction(direction)
    p = params
    gN = _threshold(p.R_N, p.B)
    gF = _threshold(p.R_F, p.B)
    a1, a2 = p.alpha1, p.alpha2
    rho_r = fdr.power_split * rho
    path_1 = p.d_F1 ** (-p.alpha_G)  # BS <-> relay
    path_2 = p.d_F2 ** (-p.alpha_g)  # relay <-> F

    def kernel(draws):
        s_n = _direct_gain(p, draws)
        h1 = draws.nakagami(p.m_G)
        h2 = draws.nakagami(p.m_g)
        hsi = draws.nakagami(fdr.si_m)
        s1 = h1 * h1 * path_1
        s2 = h2 * h2 * path_2
        si = fdr.si_residual_gain * hsi * hsi * rho_r
        if direction is Direction.DOWNLINK:
            sinr_nf = s_n * a2 / (s_n * a1 + 1.0 / rho_r)
            snr_n = s_n * a1 * rho_r
            sinr_relay = s1 * a2 * rho_r / (s1 * a1 * rho_r + si + 1.0)
            e2e = np.minimum(sinr_relay, s2 * rho_r)
            return {
                "op_near": ~((sinr_nf >= gF) & (snr_n >= gN)),
                "op_far": e2e < gF,
                "er_near": np.log2(1.0 + snr_n),
                "er_far": np.log2(1.0 + e2e),
            }
        sinr_relay = s2 * rho_r / (si + 1.0)
        sinr_n = s_n * rho / (s1 * rho_r + 1.0)
        e2e = np.minimum(sinr_relay, s1 * rho_r)
        return {
            "op_near": sinr_n < gN,
            "op_far": ~((sinr_n >= gN) & (e2e >= gF)),
            "er_near": np.log2(1.0 + sinr_n),
            "er_far": np.log2(1.0 + e2e),
        }

    return _run(kernel, cfg)


# -- cascade law sampling ------------------------------------------------------------

def _xi(m_G, m_g):
    r = math.exp(math.lgamma(m_G + 0.5) - math.lgamma(m_G) + math.lgamma(m_g + 0.5) - math.lgamma(m_g))
    return r * r / (m_G * m_g)


@dataclass(frozen=True)
class EmpiricalCascadeLaw:
    """Sorted samples of Z = sum |G_k||g_k| and X = Z^2 / (K(1-xi))."""

    z: np.ndarray
    x: np.ndarray
    density: np.ndarray
    edges: np.ndarray
    mean_x: McEstimate
    seed: int = field(default=0)

    def cdf_x(self, t):
        return np.searchsorted(self.x, t, side="right") / self.x.size

    def tail_z(self, z0: float) -> McEstimate:
        """Estimate of P(Z <= z0)."""
        k = int(np.searchsorted(self.z, z0, side="right"))
        n = self.z.size
        p = k / n
        return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n, self.seed)

    def ks_distance(self, cdf) -> float:
        """Kolmogorov-Smirnov distance between the samples of X and ``cdf``."""
        n = self.x.size
        f = np.asarray(cdf(self.x), dtype=float)
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def empirical_cascade_law(m_G: float, m_g: float, K: int, cfg: McConfig, bins: int = 200) -> EmpiricalCascadeLaw:
    sizes = _block_sizes(McConfig(cfg.trials, cfg.seed, 1, False, cfg.block_size))

    def one(index):
        rng = _block_rng(cfg.seed, index)
        n = sizes[index]
        G = sample_nakagami(m_G, rng, (n, K))
        g = sample_nakagami(m_g, rng, (n, K))
        return (G * g).sum(axis=1)

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(one, range(len(sizes))))
    else:
        chunks = [one(i) for i in range(len(sizes))]
    z = np.sort(np.concatenate(chunks))
    x = z * z / (K * (1.0 - _xi(m_G, m_g)))
    density, edges = np.histogram(x, bins=bins, density=True)
    n = x.size
    mean = math.fsum(x) / n
    se = float(np.std(x, ddof=1)) / math.sqrt(n)
    return EmpiricalCascadeLaw(z, x, density, edges, McEstimate(mean, se, n, cfg.seed), cfg.seed)
