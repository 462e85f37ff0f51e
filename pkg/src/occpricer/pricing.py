"""Step, double-barrier step and quantile calls via double Laplace transforms.

Log-price X_t = ln(S_t / S0) starts at 0.  For the step-type calls the
transform is taken in maturity T and in log-strike k = -ln K,

    C^(alpha, beta) = int_0^inf int_R e^{-alpha T - beta k} C(k, T) dk dT
                    = S0^{beta+1} w(0; alpha + r, gamma = beta + 1) / ((alpha + r) beta (beta + 1)),

where w is the Carson transform of the damped moment E[e^{-occupation + gamma X_T}];
discounting enters through alpha -> alpha + r.  The quantile call is
transformed in T and in the occupation level upsilon in (0, T).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log

import numpy as np

from .errors import BarrierOrder, DomainError
from .inversion import InversionConfig, invert_double
from .model import MEJDParams, levy_exponent
from .occupation import (knockout_coefficients, single_barrier_values, two_barrier_values,
                         single_barrier_weights)
from .roots import find_roots

RN_TOL = 1e-8


def _positive(name, v):
    if not v > 0:
        raise DomainError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class StepCall:
    """Down-and-out step call: payoff e^{-rho * time(S <= L)} (S_T - K)^+."""

    model: MEJDParams
    S0: float
    K: float
    L: float
    rho: float
    r: float
    T: float
    kind: str = field(default="step", init=False)

    def __post_init__(self):
        for n in ("S0", "K", "L", "T"):
            _positive(n, getattr(self, n))
        if self.rho < 0 or self.r < 0:
            raise DomainError("rho and r must be >= 0")


@dataclass(frozen=True)
class DoubleStepCall:
    """Payoff e^{-rho_lo time(S <= L) - rho_hi time(S >= U)} (S_T - K)^+."""

    model: MEJDParams
    S0: float
    K: float
    L: float
    U: float
    rho_lo: float
    rho_hi: float
    r: float
    T: float
    kind: str = field(default="double-step", init=False)

    def __post_init__(self):
        for n in ("S0", "K", "L", "U", "T"):
            _positive(n, getattr(self, n))
        if self.rho_lo < 0 or self.rho_hi < 0 or self.r < 0:
            raise DomainError("rho_lo, rho_hi and r must be >= 0")
        if not self.L < self.U:
            raise BarrierOrder(f"need L < U, got L={self.L}, U={self.U}")


@dataclass(frozen=True)
class QuantileCall:
    """Payoff (S0 e^{lam_q q} - K)^+ with q the level below which X spends fraction ``frac`` of [0, T]."""

    model: MEJDParams
    S0: float
    K: float
    frac: float
    lam_q: float
    r: float
    T: float
    kind: str = field(default="quantile", init=False)

    def __post_init__(self):
        for n in ("S0", "K", "lam_q", "T"):
            _positive(n, getattr(self, n))
        if not 0 < self.frac < 1:
            raise DomainError("quantile fraction must lie in (0, 1)")
        if self.r < 0:
            raise DomainError("r must be >= 0")
        if self.model.m and self.lam_q >= self.model.eta[0]:
            raise DomainError("lam_q must stay below eta_1 for a finite price")


OptionSpec = StepCall | DoubleStepCall | QuantileCall


def default_beta0(model: MEJDParams) -> float:
    """Real part of the log-strike contour: 0.75 (min(eta_1, theta_1) - 1), at least 0.5."""
    rates = model.eta[:1].tolist() + model.theta[:1].tolist()
    if not rates:
        return 1.0          # pure diffusion: any positive abscissa works
    b0 = max(0.75 * (min(rates) - 1.0), 0.5)
    if model.m and b0 + 1.0 >= model.eta[0]:
        raise DomainError(f"no admissible contour: beta0 + 1 = {b0 + 1:g} >= eta_1")
    return b0


def _check_beta(model, beta):
    b = np.asarray(beta, dtype=complex)
    if model.m and np.any(b.real + 1.0 >= model.eta[0]):
        raise DomainError("Re(beta) + 1 must stay below eta_1")
    if np.any(b.real <= 0):
        raise DomainError("Re(beta) must be positive")
    return b


def vanilla_double_transform(model: MEJDParams, S0: float, r: float, alpha, beta):
    b = _check_beta(model, beta)
    g = b + 1.0
    a = complex(alpha) + r
    return S0**g / (b * g * (a - levy_exponent(model, g)))


def step_double_transform(spec: StepCall, alpha, beta):
    m = spec.model
    b = _check_beta(m, beta)
    g = b + 1.0
    a = complex(alpha) + spec.r
    w = single_barrier_values(m, a, spec.rho, 0.0, g, log(spec.L / spec.S0), 0.0)
    return spec.S0**g * w / (a * b * g)


def down_and_out_double_transform(spec: StepCall, alpha, beta):
    """Knock-out limit of the step call (rho = infinity)."""
    m = spec.model
    b = _check_beta(m, beta)
    g = b + 1.0
    h = log(spec.L / spec.S0)
    if h >= 0:
        return np.zeros(b.shape, dtype=complex)
    a = complex(alpha) + spec.r
    w = knockout_coefficients(m, a, g, h)
    return spec.S0**g * w / (a * b * g)


def double_step_double_transform(spec: DoubleStepCall, alpha, beta):
    m = spec.model
    b = _check_beta(m, beta)
    g = b + 1.0
    a = complex(alpha) + spec.r
    h, H = log(spec.L / spec.S0), log(spec.U / spec.S0)
    w = two_barrier_values(m, a, spec.rho_lo, spec.rho_hi, g, h, H, 0.0)
    return spec.S0**g * w / (a * b * g)


def _quantile_one(spec: QuantileCall, a: complex, rho: complex) -> complex:
    m = spec.model
    lq, S0, K = spec.lam_q, spec.S0, spec.K
    r1 = find_roots(m, a + rho)
    r2 = find_roots(m, a)
    # single barrier, gamma = 0: c1 = -a/(a+rho), c2 = -1, coefficients independent of the barrier
    c12 = -a / (a + rho) + 1.0
    y = single_barrier_weights(m, r1, r2, 0.0)[:, 0]
    m1 = r1.betas.size
    omega = c12 * y[:m1]
    nu = -c12 * y[m1:]
    betas, gams = r1.betas, r2.gammas
    if np.any(betas.real <= lq):
        raise DomainError("lam_q exceeds the smallest positive root; transform diverges")
    if K >= S0:
        ratio = S0 / K
        return complex(np.sum(lq * K * omega * ratio ** (betas / lq) / ((betas - lq) * rho * a)))
    ratio = S0 / K
    up = np.sum(lq * S0 * omega / ((betas - lq) * rho * a))
    down = np.sum(lq * nu * (S0 - K * ratio ** (gams / lq)) / ((lq - gams) * rho * a))
    return complex(up + down + (S0 - K) / (a * (a + rho)))


def quantile_double_transform(spec: QuantileCall, alpha, rho):
    """Transform in T and in the occupation level upsilon over 0 < upsilon < T."""
    a = complex(alpha) + spec.r
    rr = np.atleast_1d(np.asarray(rho, dtype=complex))
    out = np.array([_quantile_one(spec, a, complex(p)) for p in rr])
    return out if np.ndim(rho) else out[0]


def _check_risk_neutral(model: MEJDParams, r: float):
    g1 = float(np.real(levy_exponent(model, 1.0)))
    if abs(g1 - r) > RN_TOL:
        raise DomainError(f"model is not risk neutral: G(1) = {g1:.10g} != r = {r:g}")


def _step_growth(model, r, beta0):
    return float(np.real(levy_exponent(model, beta0 + 1.0))) - r


def price(spec, cfg: InversionConfig | None = None) -> float:
    """Price any OptionSpec by double-transform inversion."""
    cfg = cfg or InversionConfig()
    _check_risk_neutral(spec.model, spec.r)
    if isinstance(spec, QuantileCall):
        # The upsilon-transform lives on 0 < upsilon < T and jumps at T.  In (s, upsilon) with
        # s = T - upsilon the function fills the quadrant, and its transform is F(alpha, rho' - alpha).
        f = lambda a, rp: quantile_double_transform(spec, a, np.asarray(rp) - a)
        shift = max(0.0, float(np.real(levy_exponent(spec.model, spec.lam_q)))) + cfg.shift_margin
        out = invert_double(f, (1.0 - spec.frac) * spec.T, spec.frac * spec.T, cfg, growth=0.0,
                            k_domain="half-line", beta_shift=shift)
        return max(out, 0.0)
    b0 = default_beta0(spec.model)
    growth = _step_growth(spec.model, spec.r, b0)
    if isinstance(spec, StepCall):
        f = lambda a, b: step_double_transform(spec, a, b)
    elif isinstance(spec, DoubleStepCall):
        f = lambda a, b: double_step_double_transform(spec, a, b)
    else:
        raise DomainError(f"unknown option spec {type(spec).__name__}")
    out = invert_double(f, spec.T, -log(spec.K), cfg, growth=growth, k_domain="real-line", beta0=b0)
    return out


def vanilla_price(model: MEJDParams, S0: float, K: float, r: float, T: float,
                  cfg: InversionConfig | None = None) -> float:
    cfg = cfg or InversionConfig()
    _check_risk_neutral(model, r)
    b0 = default_beta0(model)
    f = lambda a, b: vanilla_double_transform(model, S0, r, a, b)
    return invert_double(f, T, -log(K), cfg, growth=_step_growth(model, r, b0),
                         k_domain="real-line", beta0=b0)


def down_and_out_price(spec: StepCall, cfg: InversionConfig | None = None) -> float:
    """Down-and-out barrier call with the same barrier as ``spec``."""
    cfg = cfg or InversionConfig()
    _check_risk_neutral(spec.model, spec.r)
    b0 = default_beta0(spec.model)
    f = lambda a, b: down_and_out_double_transform(spec, a, b)
    return invert_double(f, spec.T, -log(spec.K), cfg, growth=_step_growth(spec.model, spec.r, b0),
                         k_domain="real-line", beta0=b0)
