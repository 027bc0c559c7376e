import math

import numpy as np
import pytest

from reset_search import analytic, mc
from reset_search.model import (BridgeReset, FixedTarget, GaussianTarget,
                                PeriodicReset, PoissonianReset, SearchSpec)


def spec_1d(mech):
    return SearchSpec(dimension=1, diffusion=1.0, mechanism=mech)


def spec_nd(dim, mech, eps0):
    return SearchSpec(dimension=dim, diffusion=1.0, mechanism=mech,
                      detection_radius=eps0)


@pytest.fixture(scope="module", autouse=True)
def warm_up_kernel():
    # trigger the jit compile outside of any timed/statistical assertions
    mc.sample_hitting_time(spec_1d(PoissonianReset(5.0)), FixedTarget((0.3,)),
                           mc.SimSettings(dt=0.01, n_replicates=1), 0)


def test_start_on_target_is_immediate():
    t, censored = mc.sample_hitting_time(
        spec_1d(PoissonianReset(1.0)), FixedTarget((0.0,)),
        mc.SimSettings(dt=0.01, n_replicates=1), 0)
    assert t == 0.0 and not censored
    t, censored = mc.sample_hitting_time(
        spec_nd(3, PoissonianReset(1.0), 0.5), FixedTarget((0.1, 0.2, 0.1)),
        mc.SimSettings(dt=1e-4, n_replicates=1), 0)
    assert t == 0.0 and not censored


def test_step_constraint_enforced_for_d_ge_2():
    spec = spec_nd(3, PoissonianReset(1.0), 0.1)
    with pytest.raises(ValueError):
        mc.sample_hitting_time(spec, FixedTarget((1.0, 0, 0)),
                               mc.SimSettings(dt=0.01, n_replicates=1), 0)


def test_sample_determinism():
    spec = spec_1d(PoissonianReset(0.5))
    settings = mc.SimSettings(dt=0.01, n_replicates=4, seed=42)
    draws = [mc.sample_hitting_time(spec, FixedTarget((1.0,)), settings, i)
             for i in range(4)]
    again = [mc.sample_hitting_time(spec, FixedTarget((1.0,)), settings, i)
             for i in range(4)]
    assert draws == again
    assert len({t for t, _ in draws}) > 1  # streams actually differ
    with pytest.raises(ValueError):
        mc.sample_hitting_time(spec, FixedTarget((1.0,)), settings, 4)


def test_estimate_determinism_across_threads(monkeypatch):
    spec = spec_1d(PeriodicReset(1.0))
    settings = mc.SimSettings(dt=0.005, n_replicates=600, seed=9)
    target = FixedTarget((1.0,))
    monkeypatch.setenv("RESET_SEARCH_THREADS", "1")
    one = mc.estimate_mean(spec, target, settings)
    monkeypatch.setenv("RESET_SEARCH_THREADS", "4")
    four = mc.estimate_mean(spec, target, settings)
    assert one == four


def test_1d_poisson_mean():
    spec = spec_1d(PoissonianReset(0.5))
    est = mc.estimate_mean(spec, FixedTarget((1.0,)),
                           mc.SimSettings(dt=0.0025, n_replicates=20000, seed=3))
    expected = analytic.poisson_fixed_1d(0.5, 1.0, 1.0).unwrap()
    assert abs(est.mean - expected) < 3.0 * est.std_error
    assert est.censored_fraction == 0.0


def test_1d_gaussian_target_mean():
    spec = spec_1d(PoissonianReset(0.5))
    est = mc.estimate_mean(spec, GaussianTarget(sigma2=1.0),
                           mc.SimSettings(dt=0.0025, n_replicates=8000, seed=5))
    expected = analytic.gauss_poisson_1d(0.5)
    assert abs(est.mean - expected) < 3.0 * est.std_error


def test_bridge_segment_hit_frequency():
    # fraction of single-segment hits matches the bridge-maximum law e^{-2a^2/DT}
    spec = spec_1d(BridgeReset(1.0))
    settings = mc.SimSettings(dt=0.0025, n_replicates=20000, max_resets=1, seed=11)
    hits = sum(1 for i in range(settings.n_replicates)
               if not mc.sample_hitting_time(spec, FixedTarget((1.0,)),
                                             settings, i)[1])
    p = analytic.bridge_crossing_prob(1.0, 1.0, 1.0)
    n = settings.n_replicates
    assert abs(hits / n - p) < 3.0 * math.sqrt(p * (1 - p) / n)


def test_periodic_segment_hit_frequency():
    from scipy.special import erfc
    spec = spec_1d(PeriodicReset(1.0))
    settings = mc.SimSettings(dt=0.0025, n_replicates=20000, max_resets=1, seed=13)
    hits = sum(1 for i in range(settings.n_replicates)
               if not mc.sample_hitting_time(spec, FixedTarget((1.0,)),
                                             settings, i)[1])
    p = erfc(1.0 / math.sqrt(2.0))
    n = settings.n_replicates
    assert abs(hits / n - p) < 3.0 * math.sqrt(p * (1 - p) / n)


@pytest.mark.xfail(
    strict=True,
    reason="quoted d=3 closed form corresponds to a variance-2Dt "
           "normalization; the simulated process (variance D*t per "
           "coordinate, matching all 1D formulas) hits later")
def test_3d_poisson_vs_quoted_closed_form():
    spec = spec_nd(3, PoissonianReset(1.0), 0.1)
    est = mc.estimate_mean(spec, FixedTarget((1.0, 0.0, 0.0)),
                           mc.SimSettings(dt=1e-4, n_replicates=400, seed=17))
    expected = analytic.poisson_fixed_3d(1.0, 1.0, (1.0, 0, 0), 0.1).unwrap()
    assert abs(est.mean - expected) < 3.0 * est.std_error + 0.02 * expected


def test_3d_bridge_mean_inside_bounds():
    spec = spec_nd(3, BridgeReset(12.0), 0.1)
    est = mc.estimate_mean(spec, FixedTarget((1.0, 0.0, 0.0)),
                           mc.SimSettings(dt=1e-4, n_replicates=150, seed=19))
    lower, upper = analytic.bridge_fixed_3d_bounds(12.0, 1.0, (1.0, 0, 0), 0.1)
    slack = 3.0 * est.std_error
    assert lower.unwrap() - slack <= est.mean <= upper.unwrap() + slack


@pytest.mark.parametrize("dim,dt", [(2, 6.25e-4), (3, 3.125e-4)])
def test_dt_halving_convergence(dim, dt):
    # O(sqrt(dt)) ball-detection bias must move the estimate by < 2% when
    # the step is halved.  The coupled estimator scores the same fine-step
    # trajectories on both detection grids, so the difference carries none
    # of the between-run Monte Carlo noise.
    a = (1.5, 0.0, 0.0)[:dim]
    spec = spec_nd(dim, PoissonianReset(1.0), 1.0)
    fine, delta = mc.dt_halving_delta(
        spec, FixedTarget(a), mc.SimSettings(dt=dt, n_replicates=10000, seed=23))
    rel_change = (delta.mean + 3.0 * delta.std_error) / fine.mean
    assert rel_change < 0.02


def test_excessive_censoring_raises():
    spec = spec_1d(PoissonianReset(1.0))
    settings = mc.SimSettings(dt=0.01, n_replicates=300, max_resets=1, seed=31)
    with pytest.raises(mc.ExcessiveCensoring):
        mc.estimate_mean(spec, FixedTarget((5.0,)), settings)


def test_bridge_increment_pinning_and_variance():
    rng = np.random.default_rng(0)
    assert mc.bridge_increment(0.7, 1.5, 2.0, 0.5, 1.0, rng) == 0.0
    with pytest.raises(ValueError):
        mc.bridge_increment(0.0, 1.5, 2.0, 0.6, 1.0, rng)

    # variance of X(T/2) across bridges is D*T/4 per coordinate
    T, D, dt = 2.0, 1.0, 0.1
    n = 10 ** 5
    x = np.zeros(n)
    t = 0.0
    while t < T / 2 - 1e-12:
        x = mc.bridge_increment(x, t, T, dt, D, rng)
        t += dt
    var = np.var(x)
    se = (D * T / 4.0) * math.sqrt(2.0 / (n - 1))
    assert abs(var - D * T / 4.0) < 3.0 * se
    assert abs(np.mean(x)) < 3.0 * np.std(x) / math.sqrt(n)


def test_crossing_correction():
    rng = np.random.default_rng(1)
    assert mc.crossing_correction_1d(1.0, 0.5, 1.0, 0.01, 1.0, rng) is True
    # straddling endpoints: certain
    assert mc.crossing_correction_1d(0.5, 1.5, 1.0, 0.01, 1.0, rng) is True

    # frequency matches exp(-2(a-x0)(a-x1)/(D dt)) over 10^6 vectorized trials
    n = 10 ** 6
    x0 = np.full(n, 0.5)
    x1 = np.full(n, 0.6)
    hits = mc.crossing_correction_1d(x0, x1, 0.8, 0.1, 1.0, rng)
    p = math.exp(-2.0 * 0.3 * 0.2 / 0.1)
    assert abs(hits.mean() - p) < 3.0 * math.sqrt(p * (1 - p) / n)

    # far from the level vs the step scale: essentially never
    hits = mc.crossing_correction_1d(x0, x1, 1.0, 0.01, 1.0, rng)
    assert hits.mean() <= 5.0 / n  # p = e^{-40}
