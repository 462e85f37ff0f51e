"""Acceptance criteria AC-1 .. AC-9.

Each test prints one ``AC-k PASS|FAIL`` line (visible with ``pytest -v`` or
``python tests/test_acceptance.py``).  Tolerances are the stated ones.
"""

import os
import sys
import time

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, os.path.dirname(__file__))

from helpers import (KOU, interior_points, random_barriers, random_gamma_alpha,  # noqa: E402
                     random_hejd)
from occpricer.inversion import InversionConfig, invert_carson, invert_double  # noqa: E402
from occpricer.model import MEJDParams, levy_exponent, risk_neutral  # noqa: E402
from occpricer.montecarlo import (MCEstimate, PathConfig, mc_price, sample_jump,  # noqa: E402
                                  simulate_functionals)
from occpricer.occupation import (cauchy_determinant, cauchy_matrix,  # noqa: E402
                                  interval_occupation_transform, residual_check,
                                  single_barrier_occupation_transform,
                                  two_barrier_occupation_transform)
from occpricer.pricing import (DoubleStepCall, QuantileCall, StepCall, down_and_out_price,  # noqa: E402
                               price, vanilla_price)
from occpricer.roots import find_roots  # noqa: E402

RN_KOU = risk_neutral(KOU, 0.05)


def report(tag, ok, detail, request=None):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    capman = request.config.pluginmanager.getplugin("capturemanager") if request else None
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


# -- shared transform instances for AC-2/3/4 --------------------------------------------

def _degenerate_instances():
    rng = np.random.default_rng(20240602)
    out = []
    for i in range(50):
        params = random_hejd(rng)
        gamma, alpha = random_gamma_alpha(rng, params, complex_alpha=bool(i % 2))
        h, H = random_barriers(rng)
        out.append(("interval", params, alpha, 1e-10, gamma, h, H))
        out.append(("two-barrier", params, alpha, (1e-10, 1e-10), gamma, h, H))
    return out


def _positive_instances():
    rng = np.random.default_rng(777)
    out = []
    for i in range(50):
        params = random_hejd(rng)
        gamma, alpha = random_gamma_alpha(rng, params, complex_alpha=bool(i % 3 == 0))
        h, H = random_barriers(rng)
        if i % 2:
            out.append(("interval", params, alpha, rng.uniform(0.1, 10.0), gamma, h, H))
        else:
            out.append(("two-barrier", params, alpha, tuple(rng.uniform(0.1, 10.0, 2)), gamma, h, H))
    return out


def _solve(inst):
    kind, params, alpha, rho, gamma, h, H = inst
    if kind == "interval":
        return interval_occupation_transform(params, alpha, rho, gamma, h, H)
    return two_barrier_occupation_transform(params, alpha, rho[0], rho[1], gamma, h, H)


@pytest.fixture(scope="module")
def solved():
    deg = [(inst, _solve(inst)) for inst in _degenerate_instances()]
    pos = [(inst, _solve(inst)) for inst in _positive_instances()]
    return deg, pos


# -- AC-1 ------------------------------------------------------------------------------------

def test_ac1_root_quality(request):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    bad_interlace = 0
    count = 0
    for _ in range(100):
        params = random_hejd(rng)
        for alpha in (0.5, 1.0, 5.0, 20.0):
            rs = find_roots(params, alpha)
            assert rs.size == params.m + params.n + 2
            res = np.abs(levy_exponent(params, rs.all) - alpha) / (1 + alpha)
            worst = max(worst, float(res.max()))
            bad_interlace += not rs.interlaced
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and bad_interlace == 0 and elapsed < 10
    report("AC-1", ok, f"{count} root sets, max scaled residual {worst:.2e}, "
           f"interlacing failures {bad_interlace}, {elapsed:.2f}s", request)
    assert ok


# -- AC-2 ------------------------------------------------------------------------------------

def test_ac2_rho_to_zero(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for inst in _degenerate_instances():
        w = _solve(inst)
        _, params, alpha, _, gamma, h, H = inst
        xs = rng.uniform(h - 1.0, H + 1.0, 20)
        exact = alpha / (alpha - levy_exponent(params, gamma)) * np.exp(gamma * xs)
        worst = max(worst, float(np.max(np.abs(w(xs) / exact - 1.0))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30
    report("AC-2", ok, f"100 transforms (50 instances x interval and two-barrier), max rel dev {worst:.2e}, "
           f"{elapsed:.2f}s", request)
    assert ok


# -- AC-3 ------------------------------------------------------------------------------------

def test_ac3_residual(request, solved):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    deg, pos = solved
    worst = 0.0
    for inst, w in deg + pos:
        h, H = inst[5], inst[6]
        xs = interior_points(rng, h - 2.0, H + 2.0, (h, H), 100)
        worst = max(worst, residual_check(w, inst[1], xs))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 120
    report("AC-3", ok, f"{len(deg) + len(pos)} transforms x 100 points, max residual {worst:.2e}, "
           f"{elapsed:.2f}s", request)
    assert ok


# -- AC-4 ------------------------------------------------------------------------------------

def test_ac4_continuity(request, solved):
    deg, pos = solved
    worst_c = worst_d = 0.0
    for inst, w in deg + pos:
        for b in (w.h, w.H):
            lo, hi = w.side_values(b, 0)
            worst_c = max(worst_c, abs(lo - hi) / (1 + abs(hi)))
            dlo, dhi = w.side_values(b, 1)
            worst_d = max(worst_d, abs(dlo - dhi) / (1 + abs(dhi)))
    ok = worst_c <= 1e-9 and worst_d <= 1e-7
    report("AC-4", ok, f"max value jump {worst_c:.2e}, max derivative jump {worst_d:.2e}", request)
    assert ok


# -- AC-5 ------------------------------------------------------------------------------------

def test_ac5_single_barrier_and_determinant(request):
    rng = np.random.default_rng(55)
    worst_c = 0.0
    for _ in range(25):
        params = random_hejd(rng)
        gamma, alpha = random_gamma_alpha(rng, params)
        h = rng.uniform(-1.0, 1.0)
        r1, r2 = rng.uniform(0.1, 5.0, 2)
        single = single_barrier_occupation_transform(params, alpha, r1, r2, gamma, h)
        double = two_barrier_occupation_transform(params, alpha, r1, r2, gamma, h, h + 1e-4)
        xs = np.concatenate([rng.uniform(h - 2, h - 1e-2, 10), rng.uniform(h + 1e-4 + 1e-2, h + 2, 10)])
        worst_c = max(worst_c, float(np.max(np.abs(single(xs) / double(xs) - 1.0))))
    worst_d = 0.0
    for _ in range(50):
        m, n = rng.integers(0, 4, 2)
        while m + n + 2 > 8:
            m, n = rng.integers(0, 4, 2)
        eta = 1.0 + np.cumsum(rng.uniform(0.5, 3.0, m))
        theta = 1.0 + np.cumsum(rng.uniform(0.5, 3.0, n))
        a = rng.permutation(np.linspace(-6, 6, m + n + 2) + rng.uniform(-0.2, 0.2, m + n + 2))
        direct = np.linalg.det(cauchy_matrix(eta, theta, a)).real
        worst_d = max(worst_d, abs(cauchy_determinant(eta, theta, a) / direct - 1.0))
    ok = worst_c <= 1e-3 and worst_d <= 1e-10
    report("AC-5", ok, f"single-barrier closed form vs H=h+1e-4 solve max rel {worst_c:.2e}; "
           f"determinant closed form max rel {worst_d:.2e}", request)
    assert ok


# -- AC-6 ------------------------------------------------------------------------------------

def test_ac6_inversion_roundtrip(request):
    t0 = time.perf_counter()
    cfg = InversionConfig()
    worst = 0.0
    for T in np.linspace(0.1, 2.0, 8):
        worst = max(worst, abs(invert_carson(lambda a: a / (a - 0.3), T, cfg, growth=0.3) / np.exp(0.3 * T) - 1))
        worst = max(worst, abs(invert_carson(lambda a: 1.0 / a, T, cfg) / T - 1))
        for k in (0.3, 1.0):
            f = invert_double(lambda a, b: 1.0 / ((a - 1.0) * (b + 2.0)), T, k, cfg, growth=1.0)
            worst = max(worst, abs(f / np.exp(T - 2 * k) - 1))
            g = invert_double(lambda a, b: 1.0 / (a * a * b * b), T, k, cfg)
            worst = max(worst, abs(g / (T * k) - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 5e-7 and elapsed < 5
    report("AC-6", ok, f"max relative error {worst:.2e} (>= 6 significant digits needs <= 5e-7), "
           f"{elapsed:.2f}s", request)
    assert ok


# -- AC-7 ------------------------------------------------------------------------------------

AC7_SPECS = {
    "step": StepCall(RN_KOU, 100.0, 100.0, 95.0, 2.0, 0.05, 1.0),
    "double-step": DoubleStepCall(RN_KOU, 100.0, 100.0, 90.0, 110.0, 3.0, 3.0, 0.05, 1.0),
    "quantile": QuantileCall(RN_KOU, 100.0, 100.0, 0.5, 1.0, 0.05, 1.0),
}


@pytest.mark.slow
def test_ac7_pricing_vs_mc(request):
    t0 = time.perf_counter()
    cfg = PathConfig(n_paths=1_000_000, n_steps=2000, seed=20240607)
    parts = []
    ok = True
    for name, spec in AC7_SPECS.items():
        p = price(spec)
        est = mc_price(spec, cfg)
        z = est.zscore(p)
        ok &= abs(z) <= 3.0
        parts.append(f"{name} {p:.4f} vs MC {est.mean:.4f}+-{est.stderr:.4f} (z={z:+.2f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600
    report("AC-7", ok, "; ".join(parts) + f"; {elapsed:.0f}s", request)
    assert ok


# -- AC-8 ------------------------------------------------------------------------------------

def test_ac8_sandwich_and_monotonicity(request):
    rhos = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]
    prices = [price(StepCall(RN_KOU, 100.0, 100.0, 95.0, r, 0.05, 1.0)) for r in rhos]
    mono = all(b <= a + 1e-6 for a, b in zip(prices, prices[1:]))
    spec = StepCall(RN_KOU, 100.0, 100.0, 95.0, 2.0, 0.05, 1.0)
    ko = down_and_out_price(spec)
    step = price(spec)
    van = vanilla_price(RN_KOU, 100.0, 100.0, 0.05, 1.0)
    sandwich = ko <= step + 1e-6 and step <= van + 1e-6
    ok = mono and sandwich
    report("AC-8", ok, "step prices over rho " + ", ".join(f"{p:.4f}" for p in prices)
           + f"; knock-out {ko:.4f} <= step {step:.4f} <= vanilla {van:.4f}", request)
    assert ok


# -- AC-9 ------------------------------------------------------------------------------------

def _signed_cdf(y, w, r):
    # CDF of sum_i w_i r_i e^{-r_i y} on y >= 0
    return 1.0 - np.sum(np.asarray(w) * np.exp(-np.multiply.outer(y, r)), axis=-1)


def test_ac9_mc_self_checks(request):
    bm = MEJDParams(0.0, 1.0, 0.0, 1.0, 0.0, (1.0,), (2.0,), (), ())
    f = simulate_functionals(bm, 1.0, 0.0, None, PathConfig(200_000, 2000, seed=3))
    arc = MCEstimate.from_samples(f["A_low"])
    ok_arc = arc.agrees(0.5)
    g = simulate_functionals(KOU, 1.0, 0.0, None, PathConfig(200_000, 200, seed=4))
    mgf = MCEstimate.from_samples(np.exp(0.5 * g["X_T"]))
    ok_mgf = mgf.agrees(float(np.exp(levy_exponent(KOU, 0.5))))
    n = 100_000
    kou_up = MEJDParams(0, 0.1, 1, 1.0, 0.0, (1.0,), (5.0,), (), ())
    y1 = sample_jump(kou_up, np.random.default_rng(11), n)
    d1 = stats.kstest(y1, lambda y: _signed_cdf(y, [1.0], [5.0])).statistic
    signed = MEJDParams(0, 0.1, 1, 1.0, 0.0, (2.0, -1.0), (1.0, 2.0), (), ())
    y2 = sample_jump(signed, np.random.default_rng(12), n)
    d2 = stats.kstest(y2, lambda y: _signed_cdf(y, [2.0, -1.0], [1.0, 2.0])).statistic
    crit = 1.63 / np.sqrt(n)
    ok = ok_arc and ok_mgf and d1 < crit and d2 < crit
    report("AC-9", ok, f"arc-sine mean {arc.mean:.4f}+-{arc.stderr:.4f}; "
           f"E e^(0.5 X_1) {mgf.mean:.4f}+-{mgf.stderr:.4f} vs {np.exp(levy_exponent(KOU, 0.5)):.4f}; "
           f"KS {d1:.4f}, {d2:.4f} < {crit:.4f}", request)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
