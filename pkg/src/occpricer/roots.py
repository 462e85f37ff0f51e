"""Roots of the Cramer-Lundberg equation G(zeta) = alpha.

For admissible alpha there are m+1 roots with positive real part (``betas``)
and n+1 with negative real part (``gammas``).  All of them are obtained from
the companion matrix of the cleared polynomial and then Newton-polished on
G - alpha itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConvergenceFailure, DegenerateLeadingCoefficient, RootCountMismatch
from .model import MEJDParams, levy_exponent, levy_exponent_prime

_NEWTON_MAX = 50
_RESIDUAL_TARGET = 1e-13
_RESIDUAL_ACCEPT = 1e-10
_DISTINCT = 1e-9


@dataclass(frozen=True)
class RootSet:
    alpha: complex
    betas: np.ndarray
    gammas: np.ndarray
    interlaced: bool

    @property
    def all(self) -> np.ndarray:
        """(beta_1..beta_{m+1}, gamma_1..gamma_{n+1})."""
        return np.concatenate([self.betas, self.gammas])

    @property
    def size(self) -> int:
        return self.betas.size + self.gammas.size


def characteristic_polynomial(params: MEJDParams, alpha) -> np.ndarray:
    """Coefficients (highest degree first) of (G - alpha) * prod(eta_i - z) * prod(theta_j + z)."""
    alpha = complex(alpha)
    if params.sigma == 0:
        raise DegenerateLeadingCoefficient("sigma = 0: polynomial degree drops below m+n+2")
    eta, theta = params.eta, params.theta
    factors = [np.array([e, -1.0]) for e in eta] + [np.array([t, 1.0]) for t in theta]

    def prod_except(skip=None):
        out = np.array([1.0 + 0j])
        for k, f in enumerate(factors):
            if k != skip:
                out = P.polymul(out, f)
        return out

    full = prod_except()
    quad = np.array([-params.lam - alpha, params.mu, 0.5 * params.sigma**2], dtype=complex)
    poly = P.polymul(quad, full)
    for i, e in enumerate(eta):
        term = params.lam * params.p_up * params.pw[i] * e * prod_except(i)
        poly = P.polyadd(poly, term)
    for j, t in enumerate(theta):
        term = params.lam * params.q_down * params.qw[j] * t * prod_except(params.m + j)
        poly = P.polyadd(poly, term)
    poly = np.asarray(poly, dtype=complex)
    if alpha.imag == 0:
        poly = poly.real
    return poly[::-1]


def _companion_roots(coeffs_high_first: np.ndarray) -> np.ndarray:
    c = np.asarray(coeffs_high_first)
    lead = c[0]
    if lead == 0:
        raise DegenerateLeadingCoefficient("leading coefficient vanishes")
    monic = c[1:] / lead
    deg = monic.size
    comp = np.zeros((deg, deg), dtype=np.result_type(monic, float))
    comp[0, :] = -monic
    comp[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    return np.linalg.eigvals(comp)


def _polish(params: MEJDParams, alpha: complex, z0: complex) -> complex:
    z = complex(z0)
    tol = _RESIDUAL_TARGET * (1.0 + abs(alpha))
    for _ in range(_NEWTON_MAX):
        f = complex(levy_exponent(params, z)) - alpha
        if abs(f) <= tol:
            break
        d = complex(levy_exponent_prime(params, z))
        if d == 0:
            break
        step = f / d
        z -= step
        if abs(step) <= 1e-15 * max(abs(z), 1e-300):
            break
    return z


def _interlaced(params: MEJDParams, betas: np.ndarray, gammas: np.ndarray) -> bool:
    b, g = betas.real, gammas.real
    chain_up = np.concatenate([[0.0], np.ravel(np.column_stack([b[:-1], params.eta])), [b[-1]]]) \
        if params.m else np.array([0.0, b[0]])
    chain_down = np.concatenate([[0.0], np.ravel(np.column_stack([g[:-1], -params.theta])), [g[-1]]]) \
        if params.n else np.array([0.0, g[0]])
    return bool(np.all(np.diff(chain_up) > 0) and np.all(np.diff(chain_down) < 0))


def _term_scale(params: MEJDParams, z: np.ndarray) -> np.ndarray:
    zz = z[:, None]
    up = np.sum(np.abs(params.pw * params.eta / (params.eta - zz)), axis=1)
    down = np.sum(np.abs(params.qw * params.theta / (params.theta + zz)), axis=1)
    return (np.abs(params.mu * z) + 0.5 * params.sigma**2 * np.abs(z) ** 2
            + params.lam * (params.p_up * up + params.q_down * down + 1.0))


@lru_cache(maxsize=8192)
def _find_roots_cached(params: MEJDParams, alpha: complex) -> RootSet:
    raw = _companion_roots(characteristic_polynomial(params, alpha))
    roots = np.array([_polish(params, alpha, z) for z in raw])
    scale = max(1.0, float(np.max(np.abs(roots))))
    resid = np.abs(levy_exponent(params, roots) - alpha)
    # a root sitting next to a pole cannot beat the rounding of the pole term:
    # allow the floating-point condition bound eps * (|z G'(z)| + sum |terms|)
    cond = np.abs(roots * levy_exponent_prime(params, roots)) + _term_scale(params, roots)
    limit = np.maximum(_RESIDUAL_ACCEPT * (1.0 + abs(alpha)), 16 * np.finfo(float).eps * cond)
    if np.any(~np.isfinite(resid)) or np.any(resid > limit):
        raise ConvergenceFailure(f"root residual {np.nanmax(resid):.3e} at alpha={alpha}")
    gaps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= _DISTINCT * scale:
        raise RootCountMismatch(f"repeated roots at alpha={alpha}")
    real_alpha = alpha.imag == 0
    if real_alpha:
        if np.any(np.abs(roots.imag) > 1e-8 * scale):
            raise RootCountMismatch(f"non-real roots of G(z)={alpha.real:g}; root assumption fails")
        roots = roots.real.astype(complex)
    pos = roots[roots.real > 0]
    neg = roots[roots.real < 0]
    if pos.size != params.m + 1 or neg.size != params.n + 1:
        raise RootCountMismatch(
            f"root split ({pos.size}, {neg.size}) != ({params.m + 1}, {params.n + 1}) at alpha={alpha}")
    betas = pos[np.argsort(pos.real, kind="stable")]
    gammas = neg[np.argsort(-neg.real, kind="stable")]
    inter = _interlaced(params, betas, gammas) if real_alpha else False
    betas.setflags(write=False)
    gammas.setflags(write=False)
    return RootSet(alpha=alpha, betas=betas, gammas=gammas, interlaced=inter)


def find_roots(params: MEJDParams, alpha) -> RootSet:
    """All m+n+2 roots of G(zeta) = alpha, split by the sign of the real part.

    Raises RootCountMismatch when the split is not (m+1, n+1) (for real alpha
    also when some roots are not real) and ConvergenceFailure when Newton
    polishing cannot reach the residual target.
    """
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise RootCountMismatch(f"Re(alpha) must be positive, got {alpha}")
    return _find_roots_cached(params, alpha)
