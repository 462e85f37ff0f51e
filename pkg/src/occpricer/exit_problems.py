"""One-sided and two-sided exit problems for the MEJD.

For a killing rate ``alpha`` and a boundary payoff g,

    E_x[exp(-alpha tau) g(X_tau)]

is an exponential sum in x on the continuation region.  The coefficients solve
small linear systems built from the roots of G(z) = alpha.  Columns are stored
anchored at the barrier they decay away from (beta-terms at H, gamma-terms at
h), i.e. the printed matrices with the factors e^{beta H} / e^{gamma h} pulled
out.  That keeps every entry O(1) however far the barriers sit from 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import BarrierOrder, DomainError, SingularSystem
from .model import MEJDParams
from .roots import RootSet, find_roots

COND_LIMIT = 1e12
RESID_LIMIT = 1e-9


@dataclass(frozen=True)
class BoundaryFunctional:
    """g(y) from a closed-form family; moments are computed analytically.

    kind is one of ``exponential`` (g = e^{value y}), ``constant``
    (g = value), ``indicator-above`` (g = 1{y > value}) and
    ``indicator-below`` (g = 1{y < value}).
    """

    kind: str
    value: complex = 1.0

    _KINDS = ("exponential", "constant", "indicator-above", "indicator-below")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown boundary functional kind {self.kind!r}")
        if self.kind.startswith("indicator") and np.iscomplexobj(self.value):
            object.__setattr__(self, "value", float(np.real(self.value)))

    @classmethod
    def exponential(cls, gamma) -> "BoundaryFunctional":
        return cls("exponential", complex(gamma))

    @classmethod
    def constant(cls, c=1.0) -> "BoundaryFunctional":
        return cls("constant", complex(c))

    @classmethod
    def indicator_above(cls, a) -> "BoundaryFunctional":
        return cls("indicator-above", float(a))

    @classmethod
    def indicator_below(cls, a) -> "BoundaryFunctional":
        return cls("indicator-below", float(a))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        v = self.value
        if self.kind == "exponential":
            return np.exp(v * y)
        if self.kind == "constant":
            return np.full(y.shape, v, dtype=complex)
        if self.kind == "indicator-above":
            return (y > v).astype(float)
        return (y < v).astype(float)

    # g at H+ and h-
    def upper_value(self, H: float) -> complex:
        v = self.value
        if self.kind == "exponential":
            return np.exp(v * H)
        if self.kind == "constant":
            return v
        if self.kind == "indicator-above":
            return 1.0 if H >= v else 0.0
        return 1.0 if H < v else 0.0

    def lower_value(self, h: float) -> complex:
        v = self.value
        if self.kind == "exponential":
            return np.exp(v * h)
        if self.kind == "constant":
            return v
        if self.kind == "indicator-above":
            return 1.0 if h > v else 0.0
        return 1.0 if h <= v else 0.0

    def up_moment(self, eta: float, H: float) -> complex:
        """e^{eta H} * int_H^inf g(y) e^{-eta y} dy."""
        v = self.value
        if self.kind == "exponential":
            if np.real(v) >= eta:
                raise DomainError(f"exponential({v}) has no up-moment at eta={eta:g}")
            return np.exp(v * H) / (eta - v)
        if self.kind == "constant":
            return v / eta
        if self.kind == "indicator-above":
            return np.exp(-eta * max(v - H, 0.0)) / eta
        return -np.expm1(-eta * (v - H)) / eta if v > H else 0.0

    def down_moment(self, theta: float, h: float) -> complex:
        """e^{-theta h} * int_{-inf}^h g(y) e^{theta y} dy."""
        v = self.value
        if self.kind == "exponential":
            if np.real(v) <= -theta:
                raise DomainError(f"exponential({v}) has no down-moment at theta={theta:g}")
            return np.exp(v * h) / (theta + v)
        if self.kind == "constant":
            return v / theta
        if self.kind == "indicator-above":
            return -np.expm1(theta * (v - h)) / theta if v < h else 0.0
        return np.exp(theta * (min(h, v) - h)) / theta


@dataclass(frozen=True)
class ExitCoefficients:
    """Solved exit problem.

    ``omega_scaled`` multiplies e^{beta_i (x - H)}, ``nu_scaled`` multiplies
    e^{gamma_j (x - h)}.  The unscaled coefficients of e^{beta_i x} and
    e^{gamma_j x} are available as ``omega`` and ``nu`` (these may overflow
    for barriers far from 0, the scaled ones never do).
    """

    kind: str
    roots: RootSet
    g: BoundaryFunctional
    h: float | None
    H: float | None
    omega_scaled: np.ndarray
    nu_scaled: np.ndarray
    residual: float
    condition: float

    @property
    def omega(self) -> np.ndarray:
        if self.H is None:
            return self.omega_scaled
        return self.omega_scaled * np.exp(-self.roots.betas * self.H)

    @property
    def nu(self) -> np.ndarray:
        if self.h is None:
            return self.nu_scaled
        return self.nu_scaled * np.exp(-self.roots.gammas * self.h)

    def continuation(self, x):
        """Exponential-sum part, meaningful inside the continuation region."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        if self.omega_scaled.size:
            out += np.exp(np.multiply.outer(x - self.H, self.roots.betas)) @ self.omega_scaled
        if self.nu_scaled.size:
            out += np.exp(np.multiply.outer(x - self.h, self.roots.gammas)) @ self.nu_scaled
        return out

    def __call__(self, x):
        """E_x[e^{-alpha tau} g(X_tau)]; equals g(x) outside the continuation region."""
        x = np.asarray(x, dtype=float)
        inside = np.ones(x.shape, dtype=bool)
        if self.H is not None:
            inside &= x < self.H
        if self.h is not None:
            inside &= x > self.h
        xi = np.where(inside, x, self.H if self.H is not None else self.h)
        out = np.where(inside, self.continuation(xi), self.g(x))
        return out[()] if out.ndim == 0 else out


def _solve(A: np.ndarray, J: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Row-equilibrated LU solve with a condition guard."""
    scale = np.max(np.abs(A), axis=1)
    scale[scale == 0] = 1.0
    As = A / scale[:, None]
    Js = J / scale
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystem(f"condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    x = sla.lu_solve(sla.lu_factor(As), Js)
    jn = max(np.max(np.abs(Js)), 1e-300)
    resid = float(np.max(np.abs(As @ x - Js)) / jn)
    if not np.all(np.isfinite(x)) or resid > RESID_LIMIT:
        raise SingularSystem(f"solve residual {resid:.3e}")
    return x, resid, cond


def _roots(params, alpha, rootset):
    return rootset if rootset is not None else find_roots(params, alpha)


def up_passage(params: MEJDParams, alpha, H: float, g: BoundaryFunctional,
               rootset: RootSet | None = None) -> ExitCoefficients:
    """E_x[e^{-alpha tau_H^+} g(X_{tau_H^+})] for x < H."""
    rs = _roots(params, alpha, rootset)
    b = rs.betas
    eta = params.eta
    A = np.vstack([np.ones_like(b)[None, :], 1.0 / (eta[:, None] - b[None, :])])
    J = np.array([g.upper_value(H)] + [g.up_moment(e, H) for e in eta], dtype=complex)
    w, resid, cond = _solve(A, J)
    return ExitCoefficients("up", rs, g, None, float(H), w, np.zeros(0, complex), resid, cond)


def down_passage(params: MEJDParams, alpha, h: float, g: BoundaryFunctional,
                 rootset: RootSet | None = None) -> ExitCoefficients:
    """E_x[e^{-alpha tau_h^-} g(X_{tau_h^-})] for x > h."""
    rs = _roots(params, alpha, rootset)
    c = rs.gammas
    theta = params.theta
    A = np.vstack([np.ones_like(c)[None, :], 1.0 / (theta[:, None] + c[None, :])])
    J = np.array([g.lower_value(h)] + [g.down_moment(t, h) for t in theta], dtype=complex)
    v, resid, cond = _solve(A, J)
    return ExitCoefficients("down", rs, g, float(h), None, np.zeros(0, complex), v, resid, cond)


def two_sided_matrix(params: MEJDParams, rs: RootSet, h: float, H: float) -> np.ndarray:
    """Scaled two-sided exit matrix.

    Row order: g(h-), g(H+), theta_1..theta_n moments at h, eta_1..eta_m
    moments at H.  Columns: (omega | nu).
    """
    b, c = rs.betas, rs.gammas
    eta, theta = params.eta, params.theta
    eb = np.exp(b * (h - H))   # beta column evaluated at h, anchored at H
    ec = np.exp(c * (H - h))   # gamma column evaluated at H, anchored at h
    top = np.vstack([
        np.concatenate([eb, np.ones_like(c)]),
        np.concatenate([np.ones_like(b), ec]),
    ])
    th = np.hstack([eb[None, :] / (theta[:, None] + b[None, :]), 1.0 / (theta[:, None] + c[None, :])])
    et = np.hstack([1.0 / (eta[:, None] - b[None, :]), ec[None, :] / (eta[:, None] - c[None, :])])
    return np.vstack([top, th, et])


def two_sided_exit(params: MEJDParams, alpha, h: float, H: float, g: BoundaryFunctional,
                   rootset: RootSet | None = None) -> ExitCoefficients:
    """E_x[e^{-alpha (tau_H^+ ^ tau_h^-)} g(X_exit)] for h < x < H."""
    if not h < H:
        raise BarrierOrder(f"need h < H, got h={h}, H={H}")
    rs = _roots(params, alpha, rootset)
    A = two_sided_matrix(params, rs, h, H)
    J = np.array([g.lower_value(h), g.upper_value(H)]
                 + [g.down_moment(t, h) for t in params.theta]
                 + [g.up_moment(e, H) for e in params.eta], dtype=complex)
    q, resid, cond = _solve(A, J)
    m1 = params.m + 1
    return ExitCoefficients("two-sided", rs, g, float(h), float(H), q[:m1], q[m1:], resid, cond)
