"""Pure numpy path kernels, used when the compiled extension is unavailable.

Same contract as ``_kernels``.  Jumps inside one grid step are drawn as a
Poisson count and summed, which has the same law on the grid as the exact
arrival-time construction of the compiled kernel.
"""

from __future__ import annotations

import numpy as np

from ..errors import RejectionStall

MAX_ATTEMPTS = 1_000_000
COLUMNS = ("A_low", "A_mid", "A_high", "X_T", "sup", "inf", "q")


def _side_draw(rng: np.random.Generator, size: int, cum, rates, weights, is_signed) -> np.ndarray:
    out = np.empty(size)
    todo = np.arange(size)
    attempts = 0
    while todo.size:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise RejectionStall("jump sampler exceeded the rejection attempt cap")
        comp = np.minimum(np.searchsorted(cum, rng.random(todo.size)), len(rates) - 1)
        y = rng.standard_exponential(todo.size) / rates[comp]
        if not is_signed:
            out[todo] = y
            return out
        e = rates * np.exp(-np.multiply.outer(y, rates))
        f = e @ weights
        env = e @ np.abs(weights)
        ok = rng.random(todo.size) * env <= f
        out[todo[ok]] = y[ok]
        todo = todo[~ok]
    return out


def sample_jumps(rng: np.random.Generator, size: int, p_up: float, tables) -> np.ndarray:
    up_cum, up_rates, up_w, up_signed, dn_cum, dn_rates, dn_w, dn_signed = tables
    is_up = rng.random(size) < p_up
    out = np.empty(size)
    nu = int(is_up.sum())
    if nu:
        out[is_up] = _side_draw(rng, nu, up_cum, up_rates, up_w, up_signed)
    if size - nu:
        out[~is_up] = -_side_draw(rng, size - nu, dn_cum, dn_rates, dn_w, dn_signed)
    return out


def simulate_grid(bitgen, T, steps_per_unit, mu, sigma, lam, p_up, tables, h, H, qfrac, antithetic):
    rng = np.random.Generator(bitgen)
    T = np.asarray(T, dtype=float)
    n_paths = T.size
    lanes = 2 if antithetic else 1
    npair = (n_paths + lanes - 1) // lanes
    Tp = T[::lanes][:npair]
    dt = 1.0 / steps_per_unit
    nsteps = np.maximum(np.ceil(Tp * steps_per_unit - 1e-9).astype(np.int64), 1)
    max_n = int(nsteps.max())
    want_q = qfrac >= 0
    x = np.zeros((lanes, npair))
    acc = np.zeros((lanes, 3, npair))
    sup = np.zeros((lanes, npair))
    inf = np.zeros((lanes, npair))
    grid = np.empty((lanes, npair, max_n)) if want_q else None
    sign = np.array([1.0, -1.0])[:lanes, None]
    for i in range(max_n):
        dti = np.where(i < nsteps - 1, dt, np.where(i == nsteps - 1, Tp - (nsteps - 1) * dt, 0.0))
        dti = np.maximum(dti, 0.0)
        if want_q:
            grid[:, :, i] = x
        acc[:, 0] += np.where(x <= h, dti, 0.0)
        acc[:, 2] += np.where(x >= H, dti, 0.0)
        acc[:, 1] += np.where((x > h) & (x < H), dti, 0.0)
        np.maximum(sup, x, out=sup)
        np.minimum(inf, x, out=inf)
        z = rng.standard_normal(npair)
        x += mu * dti + sign * sigma * np.sqrt(dti) * z
        if lam > 0:
            counts = rng.poisson(lam * dti)
            total = int(counts.sum())
            if total:
                y = sample_jumps(rng, total, p_up, tables)
                x += np.bincount(np.repeat(np.arange(npair), counts), weights=y, minlength=npair)
    np.maximum(sup, x, out=sup)
    np.minimum(inf, x, out=inf)
    out = np.zeros((lanes, npair, 7))
    out[:, :, 0:3] = acc.transpose(0, 2, 1)
    out[:, :, 3] = x
    out[:, :, 4] = sup
    out[:, :, 5] = inf
    if want_q:
        for lane in range(lanes):
            if np.all(nsteps == max_n):
                k = int(qfrac * max_n)
                out[lane, :, 6] = np.partition(grid[lane], k, axis=1)[:, k]
            else:
                for p in range(npair):
                    n = nsteps[p]
                    out[lane, p, 6] = np.partition(grid[lane, p, :n], int(qfrac * n))[int(qfrac * n)]
    # interleave lanes: path 2p is the + lane, 2p+1 the - lane
    return out.transpose(1, 0, 2).reshape(lanes * npair, 7)[:n_paths].copy()


def first_passage(bitgen, n_paths, x0, alpha, lo, hi, dt_max, mu, sigma, lam, p_up, tables):
    rng = np.random.Generator(bitgen)
    x = np.full(n_paths, float(x0))
    t = np.zeros(n_paths)
    clock = rng.standard_exponential(n_paths) / alpha
    next_jump = rng.standard_exponential(n_paths) / lam if lam > 0 else np.full(n_paths, np.inf)
    side = np.zeros(n_paths, dtype=np.int8)
    pos = np.zeros(n_paths)
    active = np.arange(n_paths)
    s2 = sigma * sigma
    while active.size:
        xa, ta = x[active], t[active]
        tn = np.minimum(np.minimum(ta + dt_max, next_jump[active]), clock[active])
        d = tn - ta
        xn = xa + mu * d + sigma * np.sqrt(d) * rng.standard_normal(active.size)
        up = xn >= hi
        dn = xn <= lo
        inside = ~(up | dn) & (d > 0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            p_hi = np.where(inside & np.isfinite(hi), np.exp(-2.0 * (hi - xa) * (hi - xn) / (s2 * d)), 0.0)
            u1 = rng.random(active.size)
            bu = inside & (u1 < p_hi)
            p_lo = np.where(inside & ~bu & np.isfinite(lo), np.exp(-2.0 * (xa - lo) * (xn - lo) / (s2 * d)), 0.0)
            u2 = rng.random(active.size)
            bd = inside & ~bu & (u2 < p_lo)
        up |= bu
        dn |= bd
        xn = np.where(up, hi, np.where(dn, lo, xn))
        done = up | dn
        side[active[up]] = 1
        side[active[dn]] = -1
        killed = ~done & (tn >= clock[active])
        jumping = ~done & ~killed & (tn >= next_jump[active])
        if jumping.any():
            idx = active[jumping]
            xn[jumping] += sample_jumps(rng, idx.size, p_up, tables)
            next_jump[idx] += rng.standard_exponential(idx.size) / lam
            ju = jumping & (xn >= hi)
            jd = jumping & (xn <= lo)
            side[active[ju]] = 1
            side[active[jd]] = -1
            done |= ju | jd
        finished = done | killed
        pos[active[finished]] = xn[finished]
        x[active] = xn
        t[active] = tn
        active = active[~finished]
    return side, pos
