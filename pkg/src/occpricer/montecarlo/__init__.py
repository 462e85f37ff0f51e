"""Monte Carlo oracle for the MEJD: occupation times, quantiles, first passage.

Paths are processed in fixed-size chunks.  Chunk ``c`` draws from
``Philox(key=seed, counter=[0, 0, stream, c])``, so results depend only on the
seed and the configuration, never on thread count or scheduling.

The compiled kernel (``_kernels``) is used when importable; set
``OCCPRICER_BACKEND=python`` to force the numpy fallback.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import exp, log

import numpy as np

from ..errors import DomainError
from ..model import MEJDParams

if os.environ.get("OCCPRICER_BACKEND", "").lower() == "python":
    from . import _fallback as _backend
    BACKEND = "python"
else:
    try:
        from . import _kernels as _backend
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from . import _fallback as _backend
        BACKEND = "python"

from . import _fallback

CHUNK = 8192
COLUMNS = _fallback.COLUMNS


@dataclass(frozen=True)
class PathConfig:
    n_paths: int = 100_000
    n_steps: int = 500          # grid steps per unit time
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise DomainError("n_paths and n_steps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "MCEstimate":
        x = np.asarray(x, dtype=float)
        return cls(float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else float("nan"),
                   int(x.size))

    def zscore(self, value: float) -> float:
        return (value - self.mean) / self.stderr if self.stderr > 0 else (0.0 if value == self.mean else np.inf)

    def agrees(self, value: float, k: float = 3.0) -> bool:
        return abs(self.zscore(value)) <= k


def jump_tables(params: MEJDParams):
    """Per-side (cumulative |w| probabilities, rates, weights, signed flag)."""
    def side(weights, rates):
        w = np.asarray(weights, dtype=float)
        r = np.asarray(rates, dtype=float)
        if w.size == 0:
            return np.ones(1), np.ones(1), np.ones(1), 0
        a = np.abs(w)
        cum = np.cumsum(a) / a.sum()
        cum[-1] = 1.0
        return cum, r, w, int(np.any(w < 0))
    return side(params.pw, params.eta) + side(params.qw, params.theta)


def _bitgen(seed: int, stream: int, chunk: int) -> np.random.Philox:
    return np.random.Philox(key=seed, counter=[0, 0, stream, chunk])


def _threads() -> int:
    cap = os.environ.get("OCCPRICER_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _chunked(n_paths: int, antithetic: bool):
    size = CHUNK
    out = []
    start = 0
    c = 0
    while start < n_paths:
        m = min(size, n_paths - start)
        out.append((c, m))
        start += m
        c += 1
    return out


def _map_chunks(fn, cfg: PathConfig):
    chunks = _chunked(cfg.n_paths, cfg.antithetic)
    workers = min(_threads(), len(chunks))
    if workers <= 1:
        return [fn(c, m) for c, m in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cm: fn(*cm), chunks))


def sample_jump(params: MEJDParams, rng: np.random.Generator | None = None, size: int | None = None):
    """Draws from the jump density (signed sides by absolute-weight envelope rejection)."""
    rng = rng if rng is not None else np.random.default_rng()
    n = 1 if size is None else int(size)
    y = _fallback.sample_jumps(rng, n, params.p_up, jump_tables(params))
    return float(y[0]) if size is None else y


def _grid(params, T_of_chunk, h, H, cfg, qfrac):
    tables = jump_tables(params)

    def run(c, m):
        T = T_of_chunk(c, m)
        return _backend.simulate_grid(_bitgen(cfg.seed, 0, c), np.ascontiguousarray(T, dtype=float),
                                      float(cfg.n_steps), params.mu, params.sigma, params.lam,
                                      params.p_up, tables, float(h), float(H), float(qfrac),
                                      bool(cfg.antithetic))
    return np.vstack(_map_chunks(run, cfg))


def simulate_functionals(params: MEJDParams, T: float, h: float, H: float | None, cfg: PathConfig,
                         qfrac: float | None = None) -> dict:
    """Per-path A_low (X <= h), A_mid, A_high (X >= H), X_T, sup, inf and the grid quantile."""
    H = h if H is None else H
    if H < h:
        raise DomainError("need h <= H")
    out = _grid(params, lambda c, m: np.full(m, float(T)), h, H, cfg,
                -1.0 if qfrac is None else qfrac)
    res = {name: out[:, i] for i, name in enumerate(COLUMNS)}
    if qfrac is None:
        del res["q"]
    return res


def _carson_T(alpha, cfg):
    def draw(c, m):
        rng = np.random.Generator(_bitgen(cfg.seed, 1, c))
        if cfg.antithetic:
            t = rng.standard_exponential((m + 1) // 2) / alpha
            return np.repeat(t, 2)[:m]
        return rng.standard_exponential(m) / alpha
    return draw


def mc_carson_transform(params: MEJDParams, alpha: float, rho, gamma: float, h: float,
                        H: float | None = None, cfg: PathConfig | None = None, x: float = 0.0,
                        kind: str = "interval") -> MCEstimate:
    """alpha * int e^{-alpha T} E_x[weight * e^{gamma X_T}] dT by sampling T ~ Exp(alpha).

    kind: ``interval`` (rho on h < X < H), ``two-barrier`` (rho = (rho1, rho2) on
    X <= h and X >= H) or ``single`` (rho = (rho1, rho2) below / above h).
    """
    cfg = cfg or PathConfig()
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    hh = h - x
    HH = (h if H is None else H) - x
    out = _grid(params, _carson_T(alpha, cfg), hh, HH, cfg, -1.0)
    a_lo, a_mid, a_hi, xt = out[:, 0], out[:, 1], out[:, 2], out[:, 3] + x
    if kind == "interval":
        pen = rho * a_mid
    elif kind == "two-barrier":
        pen = rho[0] * a_lo + rho[1] * a_hi
    elif kind == "single":
        pen = rho[0] * a_lo + rho[1] * (a_mid + a_hi)
    else:
        raise DomainError(f"unknown kind {kind!r}")
    return MCEstimate.from_samples(np.exp(-pen + gamma * xt))


def mc_first_passage(params: MEJDParams, alpha: float, g, *, h: float | None = None,
                     H: float | None = None, x: float = 0.0, cfg: PathConfig | None = None,
                     dt_max: float = 1e-3) -> MCEstimate:
    """E_x[e^{-alpha tau} g(X_tau)] for the exit from (h, H) (either side may be absent).

    Killing is realised by an independent Exp(alpha) clock; crossings between
    sub-steps are detected with the Brownian-bridge probability.
    """
    cfg = cfg or PathConfig()
    lo = -np.inf if h is None else float(h)
    hi = np.inf if H is None else float(H)
    if not lo < x < hi:
        raise DomainError("x must lie strictly between the barriers")
    tables = jump_tables(params)

    def run(c, m):
        return _backend.first_passage(_bitgen(cfg.seed, 2, c), m, float(x), float(alpha), lo, hi,
                                      float(dt_max), params.mu, params.sigma, params.lam, params.p_up, tables)
    parts = _map_chunks(run, cfg)
    side = np.concatenate([p[0] for p in parts])
    pos = np.concatenate([p[1] for p in parts])
    vals = np.where(side != 0, np.real(g(pos)), 0.0)
    return MCEstimate.from_samples(vals)


def mc_payoffs(spec, cfg: PathConfig | None = None) -> np.ndarray:
    """Discounted per-path payoffs of a StepCall, DoubleStepCall or QuantileCall."""
    from ..pricing import DoubleStepCall, QuantileCall, StepCall
    cfg = cfg or PathConfig()
    m = spec.model
    disc = exp(-spec.r * spec.T)
    if isinstance(spec, StepCall):
        f = simulate_functionals(m, spec.T, log(spec.L / spec.S0), None, cfg)
        ST = spec.S0 * np.exp(f["X_T"])
        return disc * np.exp(-spec.rho * f["A_low"]) * np.maximum(ST - spec.K, 0.0)
    if isinstance(spec, DoubleStepCall):
        f = simulate_functionals(m, spec.T, log(spec.L / spec.S0), log(spec.U / spec.S0), cfg)
        ST = spec.S0 * np.exp(f["X_T"])
        pen = spec.rho_lo * f["A_low"] + spec.rho_hi * f["A_high"]
        return disc * np.exp(-pen) * np.maximum(ST - spec.K, 0.0)
    if isinstance(spec, QuantileCall):
        f = simulate_functionals(m, spec.T, 0.0, None, cfg, qfrac=spec.frac)
        return disc * np.maximum(spec.S0 * np.exp(spec.lam_q * f["q"]) - spec.K, 0.0)
    raise DomainError(f"unknown option spec {type(spec).__name__}")


def mc_price(spec, cfg: PathConfig | None = None) -> MCEstimate:
    return MCEstimate.from_samples(mc_payoffs(spec, cfg))


def mc_vanilla(params: MEJDParams, S0: float, K: float, r: float, T: float,
               cfg: PathConfig | None = None) -> MCEstimate:
    cfg = cfg or PathConfig()
    f = simulate_functionals(params, T, 0.0, None, cfg)
    return MCEstimate.from_samples(exp(-r * T) * np.maximum(S0 * np.exp(f["X_T"]) - K, 0.0))


def richardson_gap(estimator, cfg: PathConfig, coarse_steps: int) -> tuple[MCEstimate, MCEstimate, float]:
    """Run ``estimator(cfg)`` on a coarse and the configured grid; gap in standard errors."""
    coarse = estimator(PathConfig(cfg.n_paths, coarse_steps, cfg.seed, cfg.antithetic))
    fine = estimator(cfg)
    se = np.hypot(coarse.stderr, fine.stderr)
    return coarse, fine, float(abs(fine.mean - coarse.mean) / se) if se > 0 else 0.0


__all__ = ["BACKEND", "PathConfig", "MCEstimate", "sample_jump", "simulate_functionals",
           "mc_carson_transform", "mc_first_passage", "mc_price", "mc_payoffs", "mc_vanilla",
           "richardson_gap", "jump_tables"]
