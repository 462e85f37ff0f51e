"""Laplace-Carson transforms of occupation-time functionals.

Every transform here has the form

    w(x) = alpha * int_0^inf e^{-alpha T} E_x[exp(-int_0^T k(X_s) ds + gamma X_T)] dT

with a killing profile k that is constant on (-inf, h], (h, H) and [H, inf).
On each region w is an exponential sum in the roots of G(z) = alpha + k,
minus the particular term c e^{gamma x}, c = alpha / (G(gamma) - alpha - k).
The coefficients are fixed by C^1 matching at the barriers and by the m + n
jump-integral identities per barrier.

Coefficients are stored with the sign they enter w(x), so evaluation is always
``sum(coef * exp(a (x - anchor))) - c * exp(gamma x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import BarrierOrder, DomainError, SingularSystem
from .exit_problems import BoundaryFunctional, down_passage
from .model import MEJDParams, levy_exponent
from .roots import RootSet, find_roots

COND_LIMIT = 1e12


@dataclass(frozen=True)
class Region:
    coefs: np.ndarray
    exponents: np.ndarray
    anchors: np.ndarray
    const: complex          # c in  "- c e^{gamma x}"
    kill: complex           # total killing rate alpha + k on this region

    def evaluate(self, x, gamma, deriv=0):
        x = np.asarray(x, dtype=float)
        a = self.exponents
        terms = np.exp(a * (x[..., None] - self.anchors)) * (a ** deriv) * self.coefs
        return terms.sum(axis=-1) - self.const * gamma ** deriv * np.exp(gamma * x)


@dataclass(frozen=True)
class PiecewiseExpSum:
    """w(x) on (-inf, h], (h, H), [H, inf); ``mid`` is None when h == H."""

    h: float
    H: float
    gamma: complex
    alpha: complex
    low: Region
    mid: Region | None
    high: Region

    @property
    def c_L(self):
        return self.low.const

    @property
    def c_0(self):
        return None if self.mid is None else self.mid.const

    @property
    def c_U(self):
        return self.high.const

    @property
    def regions(self):
        return [r for r in (self.low, self.mid, self.high) if r is not None]

    def bounds(self):
        """(lo, hi, region) triples covering the real line."""
        if self.mid is None:
            return [(-np.inf, self.h, self.low), (self.h, np.inf, self.high)]
        return [(-np.inf, self.h, self.low), (self.h, self.H, self.mid), (self.H, np.inf, self.high)]

    def region_of(self, x: float) -> Region:
        if x <= self.h:
            return self.low
        if self.mid is not None and x < self.H:
            return self.mid
        return self.high

    def __call__(self, x, deriv: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=complex)
        lowm = x <= self.h
        highm = x >= self.H if self.mid is not None else x > self.h
        midm = ~(lowm | highm)
        for mask, reg in ((lowm, self.low), (midm, self.mid), (highm, self.high)):
            if mask.any():
                out[mask] = reg.evaluate(x[mask], self.gamma, deriv)
        return out[()] if out.ndim == 0 else out

    def side_values(self, b: float, deriv: int = 0):
        """(w^{(deriv)}(b-), w^{(deriv)}(b+)) from the adjacent region formulas."""
        if self.mid is None:
            left, right = self.low, self.high
        elif b == self.h:
            left, right = self.low, self.mid
        else:
            left, right = self.mid, self.high
        return complex(left.evaluate(b, self.gamma, deriv)), complex(right.evaluate(b, self.gamma, deriv))


def _phi_rows(eta, theta, a) -> np.ndarray:
    """Rows (1, a, 1/(eta_j - a), 1/(theta_l + a)); one column per exponent in ``a``."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    return np.vstack([np.ones_like(a), a,
                      1.0 / (np.asarray(eta)[:, None] - a[None, :]),
                      1.0 / (np.asarray(theta)[:, None] + a[None, :])])


def _phi(params: MEJDParams, a) -> np.ndarray:
    return _phi_rows(params.eta, params.theta, a)


def _check_gamma(params: MEJDParams, gamma, kills):
    g = complex(gamma)
    lo = -params.theta[0] if params.n else -np.inf
    hi = params.eta[0] if params.m else np.inf
    if not lo < g.real < hi:
        raise DomainError(f"gamma={gamma} outside ({lo:g}, {hi:g})")
    Gg = complex(levy_exponent(params, g))
    for k in kills:
        if not Gg.real < complex(k).real:
            raise DomainError(f"G(gamma)={Gg:.6g} not below killing rate {k}")
    return g, Gg


@dataclass(frozen=True)
class OccupationSystem:
    """B Q = V with Q = (omega^L, omega^0, nu^0, nu^U).

    Mid-region coefficients enter w with a minus sign.  M, N, Z_beta, Z_gamma
    are the printed blocks; B equals [[M, N Z_beta], [M Z_gamma, N]] after the
    column permutation (omega^L, nu^0 | nu^U, omega^0).
    """

    B: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Z_beta: np.ndarray
    Z_gamma: np.ndarray
    h: float
    H: float
    kills: tuple
    roots: tuple  # (low, mid, high) RootSets
    lu: tuple
    row_scale: np.ndarray
    condition: float

    @property
    def S(self) -> int:
        return self.B.shape[0] // 2

    def block_matrix(self) -> np.ndarray:
        top = np.hstack([self.M, self.N @ self.Z_beta])
        bot = np.hstack([self.M @ self.Z_gamma, self.N])
        return np.vstack([top, bot])

    def block_permutation(self) -> np.ndarray:
        """Column indices p such that B[:, p] == block_matrix()."""
        m1 = self.roots[0].betas.size
        n1 = self.roots[2].gammas.size
        wL = np.arange(m1)
        w0 = m1 + np.arange(m1)
        v0 = 2 * m1 + np.arange(n1)
        vU = 2 * m1 + n1 + np.arange(n1)
        return np.concatenate([wL, v0, vU, w0])

    def rhs(self, params: MEJDParams, gammas, consts) -> np.ndarray:
        """V for each gamma; consts = (c_L, c_0, c_U) arrays broadcast with gammas."""
        gam = np.atleast_1d(np.asarray(gammas, dtype=complex))
        cL, c0, cU = (np.broadcast_to(np.asarray(c, dtype=complex), gam.shape) for c in consts)
        ph = _phi(params, gam)
        top = (cL - c0) * np.exp(gam * self.h) * ph
        bot = (cU - c0) * np.exp(gam * self.H) * ph
        return np.vstack([top, bot])

    def solve(self, V: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.lu, V / self.row_scale[:, None])


def build_system(params: MEJDParams, kills, h: float, H: float) -> OccupationSystem:
    """Assemble and factor the 2S x 2S system for killing rates (low, mid, high)."""
    if not h < H:
        raise BarrierOrder(f"need h < H, got h={h}, H={H}")
    rL, r0, rU = (find_roots(params, k) for k in kills)
    bL, b0, g0, gU = rL.betas, r0.betas, r0.gammas, rU.gammas
    S = bL.size + gU.size
    M = np.hstack([_phi(params, bL), _phi(params, g0)])
    N = np.hstack([_phi(params, gU), _phi(params, b0)])
    Z_beta = np.diag(np.concatenate([np.zeros(gU.size), np.exp(b0 * (h - H))]))
    Z_gamma = np.diag(np.concatenate([np.zeros(bL.size), np.exp(g0 * (H - h))]))
    B = np.zeros((2 * S, 2 * S), dtype=complex)
    m1, n1 = bL.size, gU.size
    c_wL = slice(0, m1)
    c_w0 = slice(m1, 2 * m1)
    c_v0 = slice(2 * m1, 2 * m1 + n1)
    c_vU = slice(2 * m1 + n1, 2 * S)
    # barrier h: low region on the left, mid region on the right
    B[:S, c_wL] = _phi(params, bL)
    B[:S, c_w0] = _phi(params, b0) * np.exp(b0 * (h - H))
    B[:S, c_v0] = _phi(params, g0)
    # barrier H: mid region on the left, high region on the right
    B[S:, c_w0] = _phi(params, b0)
    B[S:, c_v0] = _phi(params, g0) * np.exp(g0 * (H - h))
    B[S:, c_vU] = _phi(params, gU)
    scale = np.max(np.abs(B), axis=1)
    Bs = B / scale[:, None]
    cond = float(np.linalg.cond(Bs))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystem(f"condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return OccupationSystem(B=B, M=M, N=N, Z_beta=Z_beta, Z_gamma=Z_gamma, h=float(h), H=float(H),
                            kills=tuple(complex(k) for k in kills), roots=(rL, r0, rU),
                            lu=sla.lu_factor(Bs), row_scale=scale, condition=cond)


def _three_region(params, alpha, kills, gamma, h, H) -> PiecewiseExpSum:
    g, Gg = _check_gamma(params, gamma, kills)
    alpha = complex(alpha)
    system = build_system(params, kills, h, H)
    consts = [alpha / (Gg - k) for k in system.kills]
    V = system.rhs(params, g, consts)
    Q = system.solve(V)[:, 0]
    Bs, Vs = system.B / system.row_scale[:, None], V[:, 0] / system.row_scale
    resid = np.max(np.abs(Bs @ Q - Vs)) / max(np.max(np.abs(Vs)), 1e-300)
    if not np.all(np.isfinite(Q)) or resid > 1e-9:
        raise SingularSystem(f"occupation solve residual {resid:.3e}")
    return _assemble(system, Q, consts, g, alpha)


def _assemble(system: OccupationSystem, Q, consts, gamma, alpha) -> PiecewiseExpSum:
    rL, r0, rU = system.roots
    m1, n1 = rL.betas.size, rU.gammas.size
    h, H = system.h, system.H
    kL, k0, kU = system.kills
    wL, w0 = Q[:m1], Q[m1:2 * m1]
    v0, vU = Q[2 * m1:2 * m1 + n1], Q[2 * m1 + n1:]
    low = Region(np.asarray(wL), rL.betas, np.full(m1, h), consts[0], kL)
    mid = Region(-np.concatenate([w0, v0]), np.concatenate([r0.betas, r0.gammas]),
                 np.concatenate([np.full(m1, H), np.full(n1, h)]), consts[1], k0)
    high = Region(np.asarray(vU), rU.gammas, np.full(n1, H), consts[2], kU)
    return PiecewiseExpSum(h=h, H=H, gamma=gamma, alpha=alpha, low=low, mid=mid, high=high)


def interval_occupation_transform(params: MEJDParams, alpha, rho: float, gamma, h: float,
                                  H: float) -> PiecewiseExpSum:
    """Carson transform in T of E_x[exp(-rho * int_0^T 1{h < X < H} dt + gamma X_T)]."""
    if rho < 0:
        raise DomainError("rho must be >= 0")
    alpha = complex(alpha)
    return _three_region(params, alpha, (alpha, alpha + rho, alpha), gamma, h, H)


def two_barrier_occupation_transform(params: MEJDParams, alpha, rho1: float, rho2: float, gamma,
                                     h: float, H: float) -> PiecewiseExpSum:
    """Carson transform of E_x[exp(-rho1 A_T^{<h} - rho2 A_T^{>H} + gamma X_T)]."""
    if rho1 < 0 or rho2 < 0:
        raise DomainError("rho1, rho2 must be >= 0")
    alpha = complex(alpha)
    return _three_region(params, alpha, (alpha + rho1, alpha, alpha + rho2), gamma, h, H)


def single_barrier_weights(params: MEJDParams, lower: RootSet, upper: RootSet, gammas) -> np.ndarray:
    """y_i(gamma) solving A y = phi(gamma), A = [phi(beta_lower) | phi(gamma_upper)].

    Closed form from Cramer's rule on the Cauchy-like matrix; shape (S, len(gammas)).
    """
    a = np.concatenate([lower.betas, upper.gammas])
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    eta, theta = params.eta, params.theta
    diff = a[None, :] - a[:, None]                       # diff[i, j] = a_j - a_i
    np.fill_diagonal(diff, 1.0)
    denom_a = np.prod(diff, axis=1)
    poles_a = np.prod(eta[None, :] - a[:, None], axis=1) * np.prod(theta[None, :] + a[:, None], axis=1)
    ag = a[:, None] - g[None, :]                         # (S, K)
    # prod_{j != i}(a_j - gamma) = prod_j(a_j - gamma) / (a_i - gamma)
    num = np.prod(ag, axis=0)[None, :] / ag
    poles_g = np.prod(eta[:, None] - g[None, :], axis=0) * np.prod(theta[:, None] + g[None, :], axis=0)
    return num * (poles_a / denom_a)[:, None] / poles_g[None, :]


def single_barrier_occupation_transform(params: MEJDParams, alpha, rho1: float, rho2: float, gamma,
                                        h: float) -> PiecewiseExpSum:
    """Carson transform of E_x[exp(-rho1 A_T^{<h} - rho2 A_T^{>h} + gamma X_T)], closed form.

    rho2 = 0 (or rho1 = 0) is allowed.
    """
    if rho1 < 0 or rho2 < 0:
        raise DomainError("rho1, rho2 must be >= 0")
    alpha = complex(alpha)
    k1, k2 = alpha + rho1, alpha + rho2
    g, Gg = _check_gamma(params, gamma, (k1, k2))
    r1, r2 = find_roots(params, k1), find_roots(params, k2)
    c1, c2 = alpha / (Gg - k1), alpha / (Gg - k2)
    y = single_barrier_weights(params, r1, r2, g)[:, 0]
    scale = (c1 - c2) * np.exp(g * h)
    m1 = r1.betas.size
    low = Region(scale * y[:m1], r1.betas, np.full(m1, float(h)), c1, k1)
    high = Region(-scale * y[m1:], r2.gammas, np.full(y.size - m1, float(h)), c2, k2)
    return PiecewiseExpSum(h=float(h), H=float(h), gamma=g, alpha=alpha, low=low, mid=None, high=high)


def single_barrier_values(params: MEJDParams, alpha, rho1: float, rho2: float, gammas, h: float,
                          x: float = 0.0) -> np.ndarray:
    """Single-barrier transform at one point x for many gammas (closed form)."""
    alpha = complex(alpha)
    k1, k2 = alpha + rho1, alpha + rho2
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    r1, r2 = find_roots(params, k1), find_roots(params, k2)
    Gg = np.asarray(levy_exponent(params, g), dtype=complex)
    c1, c2 = alpha / (Gg - k1), alpha / (Gg - k2)
    scale = (c1 - c2) * np.exp(g * h)
    y = single_barrier_weights(params, r1, r2, g)
    m1 = r1.betas.size
    if x <= h:
        hom = np.exp(r1.betas * (x - h)) @ (scale * y[:m1])
        return hom - c1 * np.exp(g * x)
    hom = np.exp(r2.gammas * (x - h)) @ (-scale * y[m1:])
    return hom - c2 * np.exp(g * x)


def two_barrier_values(params: MEJDParams, alpha, rho1: float, rho2: float, gammas, h: float,
                       H: float, x: float = 0.0) -> np.ndarray:
    """Two-barrier transform at one point x for many gammas (one factorisation)."""
    alpha = complex(alpha)
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    system = build_system(params, (alpha + rho1, alpha, alpha + rho2), h, H)
    Gg = np.asarray(levy_exponent(params, g), dtype=complex)
    consts = [alpha / (Gg - k) for k in system.kills]
    Q = system.solve(system.rhs(params, g, consts))
    rL, r0, rU = system.roots
    m1, n1 = rL.betas.size, rU.gammas.size
    if x <= h:
        hom = np.exp(rL.betas * (x - h)) @ Q[:m1]
        c = consts[0]
    elif x < H:
        hom = -(np.exp(r0.betas * (x - H)) @ Q[m1:2 * m1] + np.exp(r0.gammas * (x - h)) @ Q[2 * m1:2 * m1 + n1])
        c = consts[1]
    else:
        hom = np.exp(rU.gammas * (x - H)) @ Q[2 * m1 + n1:]
        c = consts[2]
    return hom - c * np.exp(g * x)


def cauchy_determinant(etas, thetas, a) -> float:
    """det of the S x S matrix with columns (1, a, 1/(eta_k - a), 1/(theta_l + a)).

    Closed form: a Vandermonde-like product in the a's times the pairwise
    products of the poles, divided by all pole distances of the a's.
    """
    eta = np.asarray(etas, dtype=float)
    theta = np.asarray(thetas, dtype=float)
    a = np.asarray(a)
    m, n = eta.size, theta.size
    if a.size != m + n + 2:
        raise DomainError(f"need {m + n + 2} exponents, got {a.size}")
    iu = np.triu_indices(a.size, 1)
    vand = np.prod(a[iu[1]] - a[iu[0]])
    ie, it = np.triu_indices(m, 1), np.triu_indices(n, 1)
    pe = np.prod(eta[ie[1]] - eta[ie[0]])
    pt = np.prod(theta[it[1]] - theta[it[0]])
    cross = np.prod(eta[:, None] + theta[None, :])
    poles = np.prod(eta[None, :] - a[:, None]) * np.prod(theta[None, :] + a[:, None])
    sign = (-1) ** ((m * (m - 1) // 2 + m * n) % 2)
    return sign * pe * pt * cross * vand / poles


def cauchy_matrix(etas, thetas, a) -> np.ndarray:
    """The matrix whose determinant ``cauchy_determinant`` evaluates."""
    return _phi_rows(np.asarray(etas, dtype=float), np.asarray(thetas, dtype=float), a)


def _jump_integrals(w: PiecewiseExpSum, params: MEJDParams, x: float) -> complex:
    """lambda * E[w(x + Y)] in closed form, piece by piece."""
    up = 0j
    down = 0j
    for lo, hi, reg in w.bounds():
        a = np.concatenate([reg.exponents, [w.gamma]])
        c = np.concatenate([reg.coefs, [-reg.const]])
        anc = np.concatenate([reg.anchors, [0.0]])
        # up-jumps: integrate over [max(x, lo), hi]
        zl = max(x, lo)
        if hi > zl:
            for p, e in zip(params.pw, params.eta):
                f = lambda z: np.exp(a * (z - anc) - e * (z - x))
                val = (0.0 if np.isinf(hi) else f(hi)) - f(zl)
                up += p * e * np.sum(c * val / (a - e))
        zu = min(x, hi)
        if zu > lo:
            for q, t in zip(params.qw, params.theta):
                f = lambda z: np.exp(a * (z - anc) + t * (z - x))
                val = f(zu) - (0.0 if np.isinf(lo) else f(lo))
                down += q * t * np.sum(c * val / (a + t))
    return params.lam * (params.p_up * up + params.q_down * down)


def residual_check(w: PiecewiseExpSum, params: MEJDParams, xs, *, alpha=None, gamma=None) -> float:
    """max_x |(L - kill(x)) w(x) + alpha e^{gamma x}| / |alpha e^{gamma x}|.

    Derivatives are analytic and the jump integral is closed form, so this is
    an independent check of the solved coefficients against the
    integro-differential equation.
    """
    alpha = w.alpha if alpha is None else complex(alpha)
    gamma = w.gamma if gamma is None else complex(gamma)
    worst = 0.0
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        reg = w.region_of(x)
        v0 = complex(reg.evaluate(x, w.gamma, 0))
        v1 = complex(reg.evaluate(x, w.gamma, 1))
        v2 = complex(reg.evaluate(x, w.gamma, 2))
        gen = params.mu * v1 + 0.5 * params.sigma**2 * v2 - (params.lam + reg.kill) * v0
        gen += _jump_integrals(w, params, x)
        src = alpha * np.exp(gamma * x)
        worst = max(worst, abs(gen + src) / abs(src))
    return worst


def knockout_transform(params: MEJDParams, alpha, gamma, h: float):
    """Carson transform of E_x[e^{gamma X_T}; T < tau_h^-] as a callable in x (x > h)."""
    alpha = complex(alpha)
    g, Gg = _check_gamma(params, gamma, (alpha,))
    ex = down_passage(params, alpha, h, BoundaryFunctional.exponential(g))
    factor = alpha / (alpha - Gg)

    def w(x):
        x = np.asarray(x, dtype=float)
        out = factor * (np.exp(g * x) - ex.continuation(x))
        return np.where(x > h, out, 0.0)

    return w


def knockout_coefficients(params: MEJDParams, alpha, gammas, h: float):
    """Vectorised knock-out transform at x = 0 for many gammas (requires h < 0)."""
    alpha = complex(alpha)
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    rs = find_roots(params, alpha)
    c = rs.gammas
    A = np.vstack([np.ones_like(c)[None, :], 1.0 / (params.theta[:, None] + c[None, :])])
    J = np.exp(g * h)[None, :] * np.vstack([np.ones_like(g)[None, :],
                                            1.0 / (params.theta[:, None] + g[None, :])])
    nu = np.linalg.solve(A, J)                       # (n+1, K), anchored at h
    passage = np.exp(c * (0.0 - h)) @ nu
    Gg = np.asarray(levy_exponent(params, g), dtype=complex)
    return alpha / (alpha - Gg) * (1.0 - passage)
