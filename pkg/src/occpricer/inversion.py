"""Numerical inversion of Laplace and Laplace-Carson transforms.

Euler (Abate-Whitt) summation of the Bromwich trapezoid is the default; the
Gaver-Stehfest scheme is available for real arguments as a diagnostic.  The
two-dimensional inverter iterates: the time direction (alpha) is inverted for
each node of the strike-like direction (beta), then the beta direction is
inverted either on a half-line (Euler) or on the whole line (damped
trapezoid, as used for log-strikes).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, log

import numpy as np

from .errors import DomainError, NonConvergence

LN2 = log(2.0)


@dataclass(frozen=True)
class InversionConfig:
    method: str = "euler"          # or "gaver-stehfest"
    euler_terms: int = 32          # M_e, binomial averaging length
    series_terms: int = 15         # N_e, plain partial-sum length
    gs_terms: int = 14
    A: float = 18.4                # discretisation error ~ e^{-A}
    shift_margin: float = 0.5      # abscissa margin right of the growth rate
    tail_tol: float = 1e-4         # Euler tail estimate tolerance (relative, floor 1)
    k_step: float = 0.1            # real-line trapezoid step in Im(beta)
    k_max: float = 400.0           # real-line truncation of Im(beta)
    k_cutoff: float = 1e-12        # stop once |F| falls below this fraction

    def __post_init__(self):
        if self.method not in ("euler", "gaver-stehfest"):
            raise DomainError(f"unknown inversion method {self.method!r}")
        if self.euler_terms < 11:
            raise DomainError("euler_terms must be >= 11")
        if self.series_terms < 1:
            raise DomainError("series_terms must be >= 1")
        if self.gs_terms % 2 or not 2 <= self.gs_terms <= 18:
            raise DomainError("gs_terms must be even and <= 18")
        if self.A <= 0 or self.k_step <= 0 or self.k_max <= 0:
            raise DomainError("A, k_step and k_max must be positive")


def _windows(cfg: InversionConfig):
    """Binomial-averaging weights for the partial-sum windows starting at n and n-1."""
    n, m = cfg.series_terms, cfg.euler_terms
    binom = np.array([comb(m, j) for j in range(m + 1)], dtype=float) / 2.0**m
    tail = np.cumsum(binom[::-1])[::-1]          # tail[i] = sum_{j >= i} binom_j
    size = n + m + 1
    w_n = np.ones(size)
    w_n[n + 1:] = tail[1:]
    w_prev = np.ones(size)
    w_prev[n:] = np.concatenate([tail[1:], [0.0]])
    return w_n, w_prev


def _euler_parts(t: float, cfg: InversionConfig, shift: float):
    if t <= 0:
        raise DomainError("inversion point must be positive")
    k = np.arange(cfg.series_terms + cfg.euler_terms + 1)
    s = shift + (cfg.A + 2j * np.pi * k) / (2.0 * t)
    base = np.where(k % 2, -1.0, 1.0) * np.exp(cfg.A / 2.0) / t
    base[0] *= 0.5
    return s, base


def euler_nodes(t: float, cfg: InversionConfig, shift: float = 0.0):
    """Nodes s_k and weights w_k with f(t) ~ e^{shift t} sum_k w_k Re F(s_k)."""
    s, base = _euler_parts(t, cfg, shift)
    return s, base * _windows(cfg)[0]


def _euler_sum(raw_terms: np.ndarray, cfg: InversionConfig):
    """Averaged sum and tail estimate |E(m, n) - E(m, n-1)| of base-weighted terms."""
    w_n, w_prev = _windows(cfg)
    total = np.sum(raw_terms * w_n)
    return total, float(abs(np.sum(raw_terms * (w_n - w_prev))))


def gaver_stehfest_weights(N: int) -> np.ndarray:
    half = N // 2
    V = np.zeros(N)
    for k in range(1, N + 1):
        s = 0.0
        for j in range((k + 1) // 2, min(k, half) + 1):
            s += (j**half * factorial(2 * j)
                  / (factorial(half - j) * factorial(j) * factorial(j - 1)
                     * factorial(k - j) * factorial(2 * j - k)))
        V[k - 1] = (-1) ** (k + half) * s
    return V


def invert_laplace(F, t: float, cfg: InversionConfig | None = None, *, shift: float = 0.0,
                   complex_valued: bool = False):
    """f(t) from its ordinary Laplace transform F (callable, vectorised or scalar).

    With ``complex_valued`` the result is complex and F is sampled at both
    conjugate nodes; otherwise f is real and F(conj s) = conj F(s) is used.
    """
    cfg = cfg or InversionConfig()
    if cfg.method == "gaver-stehfest":
        N = cfg.gs_terms
        s = shift + LN2 / t * np.arange(1, N + 1)
        vals = _call(F, s.astype(complex))
        if not complex_valued:
            vals = np.real(vals)
        out = np.exp(shift * t) * LN2 / t * np.sum(gaver_stehfest_weights(N) * vals)
        return out if complex_valued else float(out)
    s, base = _euler_parts(t, cfg, shift)
    vals = _call(F, s)
    if complex_valued:
        raw = base * 0.5 * (vals + _call(F, np.conj(s)))
    else:
        raw = base * np.real(vals)
    total, tail = _euler_sum(raw, cfg)
    _check_tail(total, tail, cfg)
    out = np.exp(shift * t) * total
    return out if complex_valued else float(np.real(out))


def _check_tail(total, tail, cfg):
    if not np.isfinite(tail) or not np.isfinite(total) or tail > cfg.tail_tol * max(abs(total), 1.0):
        raise NonConvergence(f"Euler tail estimate {tail:.3e} exceeds tolerance")


def _call(F, z):
    try:
        out = np.asarray(F(z), dtype=complex)
        if out.shape == np.shape(z):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([complex(F(v)) for v in np.ravel(z)]).reshape(np.shape(z))


def invert_carson(transform, T: float, cfg: InversionConfig | None = None, *, growth: float = 0.0):
    """f(T) from transform(alpha) = alpha int_0^inf e^{-alpha t} f(t) dt.

    ``growth`` bounds the real part of the rightmost singularity; the contour
    is shifted right of max(0, growth) by ``cfg.shift_margin``.
    """
    cfg = cfg or InversionConfig()
    shift = max(0.0, float(growth)) + cfg.shift_margin
    return invert_laplace(lambda a: _call(transform, a) / a, T, cfg, shift=shift)


def invert_double(transform, T: float, k: float, cfg: InversionConfig | None = None, *,
                  growth: float = 0.0, k_domain: str = "half-line", beta0: float = 0.0,
                  beta_shift: float = 0.0):
    """f(T, k) from its double Laplace transform F(alpha, beta).

    ``transform(alpha, betas)`` is called with a scalar complex alpha and an
    array of betas.  The alpha direction is inverted for every beta node;
    ``k_domain`` selects the outer scheme:

    * ``"half-line"``: k > 0, Euler in beta with abscissa shifted by ``beta_shift``;
    * ``"real-line"``: two-sided transform, trapezoid on Re(beta) = ``beta0``.
    """
    cfg = cfg or InversionConfig()
    a_shift = max(0.0, float(growth)) + cfg.shift_margin
    if k_domain == "half-line":
        if k <= 0:
            raise DomainError("half-line inversion needs k > 0")
        b_nodes, b_base = _euler_parts(k, cfg, beta_shift)
        inner = _inner_time(transform, T, cfg, a_shift, b_nodes)
        total, tail = _euler_sum(b_base * np.real(inner), cfg)
        _check_tail(total, tail, cfg)
        return float(np.exp(beta_shift * k) * total)
    if k_domain == "real-line":
        h = cfg.k_step
        parts = []
        u0 = 0.0
        ref = None
        block = 64
        while u0 < cfg.k_max:
            u = u0 + h * np.arange(block)
            vals = _inner_time(transform, T, cfg, a_shift, beta0 + 1j * u)
            if ref is None:
                ref = abs(vals[0])
            parts.append((u, vals))
            u0 += h * block
            if np.max(np.abs(vals)) < cfg.k_cutoff * max(ref, 1e-300):
                break
        u = np.concatenate([p[0] for p in parts])
        vals = np.concatenate([p[1] for p in parts])
        wts = np.full(u.size, h / np.pi)
        wts[0] *= 0.5
        return float(np.exp(beta0 * k) * np.sum(wts * np.real(np.exp(1j * u * k) * vals)))
    raise DomainError(f"unknown k_domain {k_domain!r}")


def _inner_time(transform, T, cfg, a_shift, betas):
    """hat f(T, beta) for each beta, inverting in alpha."""
    betas = np.asarray(betas, dtype=complex)
    both = np.concatenate([betas, np.conj(betas)])
    if cfg.method == "gaver-stehfest":
        N = cfg.gs_terms
        alphas = a_shift + LN2 / T * np.arange(1, N + 1)
        V = gaver_stehfest_weights(N)
        acc = np.zeros(betas.size, dtype=complex)
        for a, v in zip(alphas, V):
            acc += v * np.asarray(transform(complex(a), betas), dtype=complex)
        return np.exp(a_shift * T) * LN2 / T * acc
    s, w = euler_nodes(T, cfg, a_shift)
    acc = np.zeros(betas.size, dtype=complex)
    for sk, wk in zip(s, w):
        vals = np.asarray(transform(complex(sk), both), dtype=complex)
        # F(conj s, beta) = conj F(s, conj beta)
        acc += wk * 0.5 * (vals[:betas.size] + np.conj(vals[betas.size:]))
    return np.exp(a_shift * T) * acc
