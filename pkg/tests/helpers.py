"""Random instance generators shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from occpricer.model import MEJDParams, kou, levy_exponent

KOU = kou(0.1, 0.3, 1.0, 0.5, 5.0, 4.0)


def _rates(rng, k, start):
    return start + np.cumsum(rng.uniform(0.5, 8.0, k))


def random_hejd(rng: np.random.Generator, max_m: int = 3, max_n: int = 3) -> MEJDParams:
    """Positive-weight mixtures (hyper-exponential on both sides)."""
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    p_up = rng.uniform(0.1, 0.9)
    return MEJDParams(
        mu=rng.uniform(-0.3, 0.3), sigma=rng.uniform(0.1, 0.6), lam=rng.uniform(0.0, 3.0),
        p_up=p_up, q_down=1.0 - p_up,
        up_weights=rng.dirichlet(np.ones(m)), up_rates=_rates(rng, m, 1.5),
        down_weights=rng.dirichlet(np.ones(n)), down_rates=_rates(rng, n, 1.0),
    )


def random_gamma_alpha(rng, params, complex_alpha=False):
    """gamma in [0, 0.8 min(eta_1, theta_1)) and alpha with Re(alpha) > G(gamma) + 0.5."""
    edge = min(params.eta[0], params.theta[0])
    gamma = rng.uniform(0.0, 0.8 * edge)
    a = max(rng.uniform(0.5, 10.0), float(levy_exponent(params, gamma)) + 0.5)
    if complex_alpha:
        return gamma, complex(a, rng.uniform(-10.0, 10.0))
    return gamma, a


def random_barriers(rng):
    h = rng.uniform(-1.0, 0.5)
    return h, h + rng.uniform(0.05, 1.5)


def interior_points(rng, lo, hi, barriers, size, gap=1e-6):
    xs = rng.uniform(lo, hi, 4 * size)
    ok = np.all([np.abs(xs - b) > gap for b in barriers], axis=0)
    return xs[ok][:size]


@st.composite
def hejd_params(draw, max_m=3, max_n=3):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    up_gaps = draw(st.lists(st.floats(0.5, 8.0), min_size=m, max_size=m))
    dn_gaps = draw(st.lists(st.floats(0.5, 8.0), min_size=n, max_size=n))
    up_w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=m, max_size=m)))
    dn_w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    p_up = draw(st.floats(0.1, 0.9))
    return MEJDParams(
        mu=draw(st.floats(-0.3, 0.3)), sigma=draw(st.floats(0.1, 0.6)), lam=draw(st.floats(0.05, 3.0)),
        p_up=p_up, q_down=1.0 - p_up,
        up_weights=up_w / up_w.sum(), up_rates=1.5 + np.cumsum(up_gaps),
        down_weights=dn_w / dn_w.sum(), down_rates=1.0 + np.cumsum(dn_gaps),
    )
