"""Special functions and quadrature rules used by the closed-form metrics.

All functions accept scalars or numpy arrays and return the same shape
(a python float for scalar input).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.57721566490153286061

_EPS = 1.5 * np.finfo(float).eps
_FPMIN = 1e-300
_MAX_ITER = 5000


def _wrap(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def ln_gamma(x):
    """ln Gamma(x) for x > 0."""
    arr, scalar = _wrap(x)
    if np.any(~(arr > 0)):
        raise DomainError("ln_gamma requires x > 0")
    return _out(sp.gammaln(arr), scalar)


# -- incomplete gamma ------------------------------------------------------

def _log_prefactor(s, x):
    # ln(x^s e^-x / Gamma(s))
    with np.errstate(divide="ignore"):
        return s * np.log(x) - x - sp.gammaln(s)


def _lower_series(s, x):
    """P(s, x) by the power series; intended for x < s + 1."""
    ap = s.copy()
    term = 1.0 / s
    total = term.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(np.abs(term) <= np.abs(total) * _EPS):
            break
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    with np.errstate(under="ignore"):
        out = np.exp(_log_prefactor(s, x)) * total
    return np.where(x == 0, 0.0, out)


def _upper_cf(s, x):
    """Q(s, x) by the Legendre continued fraction (modified Lentz); x >= s + 1."""
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    with np.errstate(under="ignore"):
        return np.exp(_log_prefactor(s, x)) * h


def _incomplete_gamma(s, x, upper):
    s_arr, s_scalar = _wrap(s)
    x_arr, x_scalar = _wrap(x)
    if np.any(~(s_arr > 0)):
        raise DomainError("incomplete gamma requires s > 0")
    if np.any(~(x_arr >= 0)):
        raise DomainError("incomplete gamma requires x >= 0")
    s_b, x_b = np.broadcast_arrays(s_arr, x_arr)
    s_b = s_b.astype(float).ravel()
    x_b = x_b.astype(float).ravel()
    out = np.empty_like(x_b)

    inf = np.isinf(x_b)
    out[inf] = 0.0 if upper else 1.0
    ser = (x_b < s_b + 1.0) & ~inf
    cf = ~ser & ~inf
    if ser.any():
        p = _lower_series(s_b[ser], x_b[ser])
        out[ser] = 1.0 - p if upper else p
    if cf.any():
        q = _upper_cf(s_b[cf], x_b[cf])
        out[cf] = q if upper else 1.0 - q
    shape = np.broadcast(s_arr, x_arr).shape
    return _out(out.reshape(shape), s_scalar and x_scalar)


def reg_lower_gamma(s, x):
    """Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s)."""
    return _incomplete_gamma(s, x, upper=False)


def reg_upper_gamma(s, x):
    """Regularized upper incomplete gamma Q(s, x), computed directly for large x."""
    return _incomplete_gamma(s, x, upper=True)


# -- Marcum Q of order 1/2 ---------------------------------------------------

def marcum_q_half(a, b):
    """Q_{1/2}(a, b) via the erfc identity.

    Q_{1/2}(a, b) = P(|N(a, 1)| > b) = Phi(a - b) + Phi(-a - b).
    """
    a_arr, a_scalar = _wrap(a)
    b_arr, b_scalar = _wrap(b)
    if np.any(~(a_arr >= 0)) or np.any(~(b_arr >= 0)):
        raise DomainError("marcum_q_half requires a >= 0 and b >= 0")
    q = 0.5 * (sp.erfc((b_arr - a_arr) / math.sqrt(2.0)) + sp.erfc((b_arr + a_arr) / math.sqrt(2.0)))
    return _out(np.minimum(q, 1.0), a_scalar and b_scalar)


def marcum_q_half_complement(a, b):
    """1 - Q_{1/2}(a, b) without cancellation when the result is tiny.

    Equals Phi(b - a) - Phi(-b - a), the probability that N(a, 1) lands in
    [-b, b].
    """
    a_arr, a_scalar = _wrap(a)
    b_arr, b_scalar = _wrap(b)
    if np.any(~(a_arr >= 0)) or np.any(~(b_arr >= 0)):
        raise DomainError("marcum_q_half_complement requires a >= 0 and b >= 0")
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    hi = b_arr - a_arr
    lo = -b_arr - a_arr
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        direct = sp.ndtr(hi) - sp.ndtr(lo)
        # both tails tiny: Phi(hi) * (1 - Phi(lo)/Phi(hi)) in log space
        log_hi = sp.log_ndtr(hi)
        tail = np.exp(log_hi) * -np.expm1(sp.log_ndtr(lo) - log_hi)
    out = np.where(hi < -1.0, tail, direct)
    out = np.where(b_arr == 0, 0.0, out)
    return _out(np.clip(out, 0.0, 1.0), a_scalar and b_scalar)


# -- Bessel and exponential integral ------------------------------------------

def bessel_i_mhalf_scaled(z):
    """e^{-z} I_{-1/2}(z) = sqrt(2/(pi z)) cosh(z) e^{-z}, finite for all z > 0."""
    arr, scalar = _wrap(z)
    if np.any(~(arr > 0)):
        raise DomainError("bessel_i_mhalf_scaled requires z > 0")
    with np.errstate(under="ignore"):
        out = np.sqrt(2.0 / (math.pi * arr)) * 0.5 * (1.0 + np.exp(-2.0 * arr))
    return _out(out, scalar)


def _e1_scaled(x):
    """e^x E1(x) for x > 0 (array)."""
    out = np.empty_like(x)
    small = x <= 1.0
    if small.any():
        xs = x[small]
        # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        term = np.ones_like(xs)
        total = np.zeros_like(xs)
        for k in range(1, 200):
            term = term * (-xs) / k
            contrib = term / k
            total += contrib
            if np.all(np.abs(contrib) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
                break
        out[small] = np.exp(xs) * (-EULER_GAMMA - np.log(xs) - total)
    big = ~small
    if big.any():
        xb = x[big]
        b = xb + 1.0
        c = np.full_like(xb, 1.0 / _FPMIN)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, _MAX_ITER):
            an = -float(i * i)
            b = b + 2.0
            d = 1.0 / (an * d + b)
            c = b + an / c
            delta = c * d
            h = h * delta
            if np.all(np.abs(delta - 1.0) <= _EPS):
                break
        else:
            raise ConvergenceError("E1 continued fraction did not converge")
        out[big] = h
    return out


def expint_ei_neg_scaled(x):
    """e^{x} Ei(-x) for x > 0; no overflow for large x."""
    arr, scalar = _wrap(x)
    if np.any(~(arr > 0)):
        raise DomainError("expint_ei_neg_scaled requires x > 0")
    flat = arr.astype(float).ravel()
    return _out(-_e1_scaled(flat).reshape(arr.shape), scalar)


def expint_ei_neg(x):
    """Ei(-x) = -E1(x) for x > 0."""
    arr, scalar = _wrap(x)
    if np.any(~(arr > 0)):
        raise DomainError("expint_ei_neg requires x > 0")
    flat = arr.astype(float).ravel()
    with np.errstate(under="ignore"):
        out = -_e1_scaled(flat) * np.exp(-flat)
    return _out(out.reshape(arr.shape), scalar)


# -- quadrature rules -----------------------------------------------------------

class QuadratureKind(enum.Enum):
    CHEBYSHEV_GAUSS = "ChebyshevGauss"
    GAUSS_LAGUERRE = "GaussLaguerre"


@dataclass(frozen=True)
class QuadratureRule:
    """Node/weight pair for a Gauss-type rule.

    ``log_weights`` is kept alongside ``weights`` because high-order Laguerre
    weights underflow float64 at the largest nodes.
    """

    kind: QuadratureKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def __len__(self):
        return self.order


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def make_chebyshev_gauss(u: int) -> QuadratureRule:
    """Chebyshev-Gauss rule for weight 1/sqrt(1-t^2) on (-1, 1)."""
    if int(u) != u or u < 1:
        raise DomainError("quadrature order must be a positive integer")
    u = int(u)
    l = np.arange(1, u + 1)
    nodes = np.cos((2 * l - 1) / (2 * u) * math.pi)
    weights = np.full(u, math.pi / u)
    return QuadratureRule(
        QuadratureKind.CHEBYSHEV_GAUSS, u, _frozen(nodes), _frozen(weights),
        _frozen(np.log(weights)),
    )


_LAGUERRE_RESCALE = 1e150


def _laguerre_eval(n, x):
    """Return (L_{n-1}, L_n, L_{n+1}) at x, sharing a common scale factor e^{-log_scale}."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    log_scale = np.zeros_like(x)
    out = {}
    for k in range(0, n + 1):
        # (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
        big = np.abs(p) > _LAGUERRE_RESCALE
        if big.any():
            p_prev = np.where(big, p_prev / _LAGUERRE_RESCALE, p_prev)
            p = np.where(big, p / _LAGUERRE_RESCALE, p)
            log_scale = log_scale + np.where(big, math.log(_LAGUERRE_RESCALE), 0.0)
        if k + 1 == n - 1:
            out["prev"] = (p.copy(), log_scale.copy())
        if k + 1 == n:
            out["n"] = (p.copy(), log_scale.copy())
    out["next"] = (p, log_scale)
    if n == 1:
        out["prev"] = (np.ones_like(x), np.zeros_like(x))
    return out


def _laguerre_guesses(n):
    # eigenvalues of the symmetric Jacobi matrix of the Laguerre recurrence
    k = np.arange(n)
    diag = 2.0 * k + 1.0
    off = np.arange(1, n, dtype=float)
    return np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))


def _logsumexp(v):
    top = np.max(v)
    return top + math.log(math.fsum(np.exp(v - top)))


@functools.lru_cache(maxsize=None)
def make_gauss_laguerre(u: int, max_newton: int = 100) -> QuadratureRule:
    """Gauss-Laguerre rule for weight e^{-x} on (0, inf), 1 <= u <= 200.

    Roots are polished by Newton iteration on L_u through the three-term
    recurrence; weights follow w = x / ((u+1)^2 L_{u+1}(x)^2).
    """
    if int(u) != u or not 1 <= u <= 200:
        raise DomainError("Gauss-Laguerre order must be an integer in [1, 200]")
    n = int(u)
    x = _laguerre_guesses(n)
    for _ in range(max_newton):
        vals = _laguerre_eval(n, x)
        (ln_, s_n), (lp, s_p) = vals["n"], vals["prev"]
        # bring L_{n-1} to the scale of L_n
        lp = lp * np.exp(s_p - s_n)
        # x L_n' = n (L_n - L_{n-1})
        step = x * ln_ / (n * (ln_ - lp))
        x = x - step
        # the recurrence noise floor near the smallest root is ~1e-13 relative
        if np.all(np.abs(step) <= 1e-12 * x):
            break
    else:
        raise ConvergenceError(f"Laguerre root iteration did not converge for u={n}")
    x = np.sort(x)
    if np.any(np.diff(x) <= 0) or np.any(x <= 0):
        raise ConvergenceError(f"Laguerre roots not distinct for u={n}")
    p_next, s_next = _laguerre_eval(n, x)["next"]
    log_w = np.log(x) - 2.0 * math.log(n + 1) - 2.0 * (np.log(np.abs(p_next)) + s_next)
    # the recurrence loses ~1e-11 at the smallest nodes; pin the zeroth moment to 1
    log_w = log_w - _logsumexp(log_w)
    with np.errstate(under="ignore"):
        w = np.exp(log_w)
    return QuadratureRule(
        QuadratureKind.GAUSS_LAGUERRE, n, _frozen(x), _frozen(w), _frozen(log_w),
    )
