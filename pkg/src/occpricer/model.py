"""Mixed-exponential jump-diffusion (MEJD) model.

X_t = mu t + sigma W_t + sum_{i <= N_t} Y_i with N a Poisson process of rate
``lam`` and jump density

    f_Y(y) = p_up * sum_i p_i eta_i e^{-eta_i y}       (y >= 0)
           + q_down * sum_j q_j theta_j e^{theta_j y}  (y < 0).

Individual mixture weights may be negative as long as f_Y stays nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import MgfDivergence, PoleEvaluation, ValidationError

_POLE_RTOL = 1e-12
_SUM_TOL = 1e-10


@dataclass(frozen=True)
class MEJDParams:
    mu: float
    sigma: float
    lam: float
    p_up: float
    q_down: float
    up_weights: tuple[float, ...] = ()
    up_rates: tuple[float, ...] = ()
    down_weights: tuple[float, ...] = ()
    down_rates: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("up_weights", "up_rates", "down_weights", "down_rates"):
            object.__setattr__(self, name, tuple(float(v) for v in np.atleast_1d(getattr(self, name))))
        for name in ("mu", "sigma", "lam", "p_up", "q_down"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if len(self.up_weights) != len(self.up_rates):
            raise ValidationError("up_weights and up_rates differ in length")
        if len(self.down_weights) != len(self.down_rates):
            raise ValidationError("down_weights and down_rates differ in length")

    @property
    def m(self) -> int:
        return len(self.up_rates)

    @property
    def n(self) -> int:
        return len(self.down_rates)

    @property
    def eta(self) -> np.ndarray:
        return np.asarray(self.up_rates, dtype=float)

    @property
    def theta(self) -> np.ndarray:
        return np.asarray(self.down_rates, dtype=float)

    @property
    def pw(self) -> np.ndarray:
        return np.asarray(self.up_weights, dtype=float)

    @property
    def qw(self) -> np.ndarray:
        return np.asarray(self.down_weights, dtype=float)

    def with_mu(self, mu: float) -> "MEJDParams":
        return replace(self, mu=float(mu))

    def reflected(self) -> "MEJDParams":
        """Parameters of -X (up and down sides swapped)."""
        return MEJDParams(
            mu=-self.mu, sigma=self.sigma, lam=self.lam,
            p_up=self.q_down, q_down=self.p_up,
            up_weights=self.down_weights, up_rates=self.down_rates,
            down_weights=self.up_weights, down_rates=self.up_rates,
        )


def kou(mu, sigma, lam, p, eta, theta) -> MEJDParams:
    """Double-exponential (Kou) special case, m = n = 1."""
    return MEJDParams(mu, sigma, lam, p, 1.0 - p, (1.0,), (eta,), (1.0,), (theta,))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _side_density(weights, rates, y):
    # sum_i w_i r_i exp(-r_i y) for y >= 0
    y = np.asarray(y, dtype=float)[..., None]
    return np.sum(weights * rates * np.exp(-rates * y), axis=-1)


def _side_sign_problems(weights, rates, label: str) -> list[str]:
    out = []
    if len(rates) == 0:
        return out
    if np.any(np.diff(rates) <= 0):
        out.append(f"{label} rates not strictly increasing")
    if np.any(rates <= 0):
        out.append(f"{label} rates must be positive")
        return out
    if abs(weights.sum() - 1.0) > _SUM_TOL:
        out.append(f"{label} weights sum to {weights.sum():.12g}, not 1")
    # y -> infinity: slowest rate with a nonzero weight dominates
    nz = np.flatnonzero(weights != 0.0)
    if nz.size and weights[nz[0]] < 0:
        out.append(f"{label} density negative in the tail (leading weight {weights[nz[0]]:g} < 0)")
    # y -> 0+: f(0), then f'(0) if f(0) vanishes
    f0 = float(np.sum(weights * rates))
    if f0 < -1e-12:
        out.append(f"{label} density negative at 0 (f(0+)={f0:g})")
    elif abs(f0) <= 1e-12 and -float(np.sum(weights * rates**2)) < -1e-12:
        out.append(f"{label} density negative just above 0")
    if np.any(weights < 0):
        lo = 1e-6 / rates.max()
        hi = 50.0 / rates.min()
        grid = np.geomspace(lo, hi, 10_000)
        vals = _side_density(weights, rates, grid)
        scale = np.abs(weights * rates).sum()
        bad = vals < -1e-13 * scale
        if bad.any():
            out.append(f"{label} density negative near y={grid[np.argmax(bad)]:.6g}")
    return out


def validate(params: MEJDParams, *, risk_neutral: bool = False) -> ValidationReport:
    """Check every stated constraint; never raises."""
    rep = ValidationReport()
    v = rep.violations
    if params.sigma < 0:
        v.append("sigma must be >= 0")
    if params.lam < 0:
        v.append("lambda must be >= 0")
    if not (0.0 <= params.p_up <= 1.0) or not (0.0 <= params.q_down <= 1.0):
        v.append("p_up and q_down must lie in [0, 1]")
    if abs(params.p_up + params.q_down - 1.0) > _SUM_TOL:
        v.append("p_up+q_down != 1")
    if params.p_up > 0 and params.m == 0:
        v.append("p_up > 0 but no up-jump components")
    if params.q_down > 0 and params.n == 0:
        v.append("q_down > 0 but no down-jump components")
    v.extend(_side_sign_problems(params.pw, params.eta, "up"))
    v.extend(_side_sign_problems(params.qw, params.theta, "down"))
    if risk_neutral and params.m and params.eta[0] <= 1.0:
        v.append("eta_1 <= 1: E[exp(Y)] infinite")
    return rep


def density_at(params: MEJDParams, y):
    """Jump density f_Y; y = 0 belongs to the up-jump branch."""
    y = np.asarray(y, dtype=float)
    up = np.where(y >= 0, params.p_up * _side_density(params.pw, params.eta, np.maximum(y, 0.0)), 0.0)
    down = np.where(y < 0, params.q_down * _side_density(params.qw, params.theta, np.maximum(-y, 0.0)), 0.0)
    out = up + down
    return float(out) if out.ndim == 0 else out


def _check_poles(params: MEJDParams, z: np.ndarray) -> None:
    if params.lam == 0:
        return
    for pole in np.concatenate([params.eta, -params.theta]):
        if np.any(np.abs(z - pole) <= _POLE_RTOL * max(1.0, abs(pole))):
            raise PoleEvaluation(f"Levy exponent evaluated at pole {pole:g}")


def levy_exponent(params: MEJDParams, zeta):
    """G(zeta) continued as a rational function off (-theta_1, eta_1)."""
    z = np.asarray(zeta, dtype=complex)
    _check_poles(params, z)
    if params.lam == 0:
        jumps = 0.0
    else:
        zz = z[..., None]
        jumps = (params.p_up * np.sum(params.pw * params.eta / (params.eta - zz), axis=-1)
                 + params.q_down * np.sum(params.qw * params.theta / (params.theta + zz), axis=-1) - 1.0)
    out = params.mu * z + 0.5 * params.sigma**2 * z * z + params.lam * jumps
    if np.isrealobj(zeta):
        out = out.real
    return out[()] if out.ndim == 0 else out


def levy_exponent_prime(params: MEJDParams, zeta):
    z = np.asarray(zeta, dtype=complex)
    zz = z[..., None]
    jumps = (params.p_up * np.sum(params.pw * params.eta / (params.eta - zz) ** 2, axis=-1)
             - params.q_down * np.sum(params.qw * params.theta / (params.theta + zz) ** 2, axis=-1))
    out = params.mu + params.sigma**2 * z + params.lam * jumps
    return out[()] if out.ndim == 0 else out


def trend(params: MEJDParams) -> float:
    """E[X_1] = G'(0)."""
    up = params.p_up * float(np.sum(params.pw / params.eta)) if params.m else 0.0
    down = params.q_down * float(np.sum(params.qw / params.theta)) if params.n else 0.0
    return params.mu + params.lam * (up - down)


def jump_mgf_at_one(params: MEJDParams) -> float:
    if params.m and params.eta[0] <= 1.0:
        raise MgfDivergence(f"eta_1={params.eta[0]:g} <= 1, E[exp(Y)] is infinite")
    up = params.p_up * float(np.sum(params.pw * params.eta / (params.eta - 1.0))) if params.m else 0.0
    down = params.q_down * float(np.sum(params.qw * params.theta / (params.theta + 1.0))) if params.n else 0.0
    return up + down


def risk_neutral_drift(r: float, params: MEJDParams) -> float:
    """Drift making exp(X_t - r t) a martingale; ``params.mu`` is ignored."""
    mgf = jump_mgf_at_one(params) if params.lam else 1.0
    return r - 0.5 * params.sigma**2 - params.lam * (mgf - 1.0)


def risk_neutral(params: MEJDParams, r: float) -> MEJDParams:
    return params.with_mu(risk_neutral_drift(r, params))
