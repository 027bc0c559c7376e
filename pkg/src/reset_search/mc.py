"""Monte Carlo simulation of the three search processes in d = 1, 2, 3.

Independent oracle for the analytic formulas.  Each replicate draws from its
own counter-based Philox stream keyed by (seed, replicate_index), so results
are bit-identical regardless of evaluation order or thread count.

1D paths use Euler steps plus the exact within-step crossing correction, so
the time step can be coarse.  In d >= 2 detection is plain entry of the
eps0-ball at step ends, with sqrt(D*dt) <= eps0/10 enforced; the O(sqrt(dt))
detection bias is bounded by a dt-halving convergence check in the tests.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import (BridgeReset, FixedTarget, GaussianTarget, McEstimate,
                    PeriodicReset, PoissonianReset, SearchSpec, TargetSpec)

_MECH_POISSON, _MECH_PERIODIC, _MECH_BRIDGE = 0, 1, 2
_U64 = np.uint64


class ExcessiveCensoring(Exception):
    """More than 5% of replicates hit the reset-count cap."""


@dataclass(frozen=True)
class SimSettings:
    dt: float
    n_replicates: int
    max_resets: int = 10 ** 5
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_replicates < 1:
            raise ValueError("n_replicates must be >= 1")
        if self.max_resets < 1:
            raise ValueError("max_resets must be >= 1")


def default_dt(spec: SearchSpec, target: TargetSpec) -> float:
    """Coarse default step: a^2/(400 D) in 1D, eps0^2/(100 D) in d >= 2."""
    D = spec.diffusion
    if spec.dimension >= 2:
        return spec.detection_radius ** 2 / (100.0 * D)
    if isinstance(target, GaussianTarget):
        scale2 = target.sigma2
    else:
        scale2 = max(target.point[0] ** 2, 1e-6)
    return scale2 / (400.0 * D)


def _validate_step(spec: SearchSpec, dt: float):
    if spec.dimension >= 2:
        if math.sqrt(spec.diffusion * dt) > spec.detection_radius / 10.0 + 1e-15:
            raise ValueError(
                f"need sqrt(D*dt) <= eps0/10 for dimension >= 2: "
                f"sqrt(D*dt)={math.sqrt(spec.diffusion * dt):.3g}, "
                f"eps0={spec.detection_radius}")


def replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    """Counter-based per-replicate stream: Philox keyed by (seed, index)."""
    key = np.array([_U64(seed & 0xFFFFFFFFFFFFFFFF), _U64(replicate_index)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@njit(nogil=True, cache=True)
def _simulate_one(rng, dim, mech, D, rate, period, a0, a1, a2, eps0, dt,
                  max_resets):
    """One replicate of tau_a; returns (time, censored)."""
    if dim == 1:
        if a0 == 0.0:
            return 0.0, False
    else:
        r2 = a0 * a0 + a1 * a1 + a2 * a2
        if r2 <= eps0 * eps0:
            return 0.0, False

    elapsed = 0.0
    for _ in range(max_resets):
        if mech == 0:
            seg = -math.log(1.0 - rng.random()) / rate
        else:
            seg = period
        n_steps = int(math.ceil(seg / dt))
        if n_steps < 1:
            n_steps = 1
        x0 = 0.0
        x1 = 0.0
        x2 = 0.0
        t_in = 0.0
        for i in range(n_steps):
            h = dt if i < n_steps - 1 else seg - t_in
            if h <= 0.0:
                break
            rem = seg - t_in
            if mech == 2:
                shrink = 1.0 - h / rem
                var = D * h * (rem - h) / rem
            else:
                shrink = 1.0
                var = D * h
            sd = math.sqrt(var) if var > 0.0 else 0.0
            if dim == 1:
                xn = shrink * x0 + sd * rng.standard_normal()
                d_old = a0 - x0
                d_new = a0 - xn
                hit = d_old * d_new <= 0.0
                if not hit:
                    # max over the step: exact Brownian-bridge crossing law
                    p = math.exp(-2.0 * d_old * d_new / (D * h))
                    hit = rng.random() < p
                if hit:
                    return elapsed + t_in + h, False
                x0 = xn
            else:
                x0 = shrink * x0 + sd * rng.standard_normal()
                x1 = shrink * x1 + sd * rng.standard_normal()
                if dim == 3:
                    x2 = shrink * x2 + sd * rng.standard_normal()
                dx0 = x0 - a0
                dx1 = x1 - a1
                dx2 = x2 - a2
                if dx0 * dx0 + dx1 * dx1 + dx2 * dx2 <= eps0 * eps0:
                    return elapsed + t_in + h, False
            t_in += h
        elapsed += seg
    return elapsed, True


@njit(nogil=True, cache=True)
def _simulate_coupled(rng, dim, mech, D, rate, period, a0, a1, a2, eps0,
                      dt_coarse, max_resets):
    """One replicate simulated at dt_coarse/2 with ball detection evaluated on
    both the fine grid and the even-step (= dt_coarse Euler) subgrid of the
    same path; returns (t_fine, t_coarse, censored)."""
    r2 = a0 * a0 + a1 * a1 + a2 * a2
    if r2 <= eps0 * eps0:
        return 0.0, 0.0, False

    dtf = 0.5 * dt_coarse
    t_fine = -1.0
    t_coarse = -1.0
    elapsed = 0.0
    for _ in range(max_resets):
        if mech == 0:
            seg = -math.log(1.0 - rng.random()) / rate
        else:
            seg = period
        n_steps = int(math.ceil(seg / dtf))
        if n_steps < 1:
            n_steps = 1
        x0 = 0.0
        x1 = 0.0
        x2 = 0.0
        t_in = 0.0
        for i in range(n_steps):
            h = dtf if i < n_steps - 1 else seg - t_in
            if h <= 0.0:
                break
            rem = seg - t_in
            if mech == 2:
                shrink = 1.0 - h / rem
                var = D * h * (rem - h) / rem
            else:
                shrink = 1.0
                var = D * h
            sd = math.sqrt(var) if var > 0.0 else 0.0
            x0 = shrink * x0 + sd * rng.standard_normal()
            x1 = shrink * x1 + sd * rng.standard_normal()
            if dim == 3:
                x2 = shrink * x2 + sd * rng.standard_normal()
            t_in += h
            dx0 = x0 - a0
            dx1 = x1 - a1
            dx2 = x2 - a2
            inside = dx0 * dx0 + dx1 * dx1 + dx2 * dx2 <= eps0 * eps0
            if inside and t_fine < 0.0:
                t_fine = elapsed + t_in
            # the coarse grid sees every second fine step plus the segment end
            on_coarse_grid = (i % 2 == 1) or (i == n_steps - 1)
            if inside and on_coarse_grid and t_coarse < 0.0:
                t_coarse = elapsed + t_in
            if t_fine >= 0.0 and t_coarse >= 0.0:
                return t_fine, t_coarse, False
        elapsed += seg
    if t_fine < 0.0:
        t_fine = elapsed
    if t_coarse < 0.0:
        t_coarse = elapsed
    return t_fine, t_coarse, True


def dt_halving_delta(spec: SearchSpec, target: TargetSpec,
                     settings: SimSettings):
    """Coupled estimate of the detection-bias change under dt halving, d >= 2.

    Simulates at settings.dt/2 and scores the same trajectories on both the
    fine and the coarse detection grid, so the difference estimator carries
    none of the between-run Monte Carlo noise.  Returns (fine, delta)
    McEstimates; delta.mean is the expected increase of the estimate when the
    coarser grid is used.
    """
    if spec.dimension < 2:
        raise ValueError("dt_halving_delta applies to dimension >= 2 only")
    _validate_step(spec, settings.dt)
    n = settings.n_replicates
    mech, rate, period, eps0 = _kernel_args(spec)
    fine = np.empty(n)
    delta = np.empty(n)
    censored = np.zeros(n, dtype=bool)
    for i in range(n):
        rng = replicate_rng(settings.seed, i)
        a = _target_point(target, spec.dimension, rng)
        tf, tc, c = _simulate_coupled(rng, spec.dimension, mech,
                                      spec.diffusion, rate, period,
                                      a[0], a[1], a[2], eps0, settings.dt,
                                      settings.max_resets)
        fine[i] = tf
        delta[i] = tc - tf
        censored[i] = c
    frac = float(np.mean(censored))
    if frac > 0.05:
        raise ExcessiveCensoring(
            f"censored fraction {frac:.3f} exceeds 0.05; estimate unusable")
    fine_est = McEstimate(mean=float(np.mean(fine)),
                          std_error=float(np.std(fine, ddof=1) / math.sqrt(n)),
                          n=n, censored_fraction=frac)
    delta_est = McEstimate(mean=float(np.mean(delta)),
                           std_error=float(np.std(delta, ddof=1) / math.sqrt(n)),
                           n=n, censored_fraction=frac)
    return fine_est, delta_est


def _kernel_args(spec: SearchSpec):
    m = spec.mechanism
    if isinstance(m, PoissonianReset):
        mech, rate, period = _MECH_POISSON, m.rate, 0.0
    elif isinstance(m, PeriodicReset):
        mech, rate, period = _MECH_PERIODIC, 0.0, m.period
    else:
        mech, rate, period = _MECH_BRIDGE, 0.0, m.period
    eps0 = spec.detection_radius if spec.dimension >= 2 else 0.0
    return mech, rate, period, eps0


def _target_point(target: TargetSpec, dim: int, rng: np.random.Generator):
    if isinstance(target, GaussianTarget):
        sigma = math.sqrt(target.sigma2)
        pt = sigma * rng.standard_normal(dim)
    else:
        pt = np.asarray(target.point, dtype=float)
        if pt.size != dim:
            raise ValueError(f"target point has {pt.size} coordinates for dimension {dim}")
    out = np.zeros(3)
    out[:dim] = pt
    return out


def sample_hitting_time(spec: SearchSpec, target: TargetSpec,
                        settings: SimSettings, replicate_index: int):
    """One draw of the search time (possibly censored at the reset cap);
    deterministic given (seed, replicate_index)."""
    if not (0 <= replicate_index < settings.n_replicates):
        raise ValueError("replicate_index out of range")
    _validate_step(spec, settings.dt)
    rng = replicate_rng(settings.seed, replicate_index)
    a = _target_point(target, spec.dimension, rng)
    mech, rate, period, eps0 = _kernel_args(spec)
    return _simulate_one(rng, spec.dimension, mech, spec.diffusion, rate,
                         period, a[0], a[1], a[2], eps0, settings.dt,
                         settings.max_resets)


def estimate_mean(spec: SearchSpec, target: TargetSpec,
                  settings: SimSettings) -> McEstimate:
    """Sample mean of the search time over n_replicates independent draws.

    Censored replicates contribute their censoring time.  Raises
    ExcessiveCensoring above 5% censoring; warns above 0.1% (downward bias).
    """
    _validate_step(spec, settings.dt)
    n = settings.n_replicates
    mech, rate, period, eps0 = _kernel_args(spec)
    dim, D, dt, cap = spec.dimension, spec.diffusion, settings.dt, settings.max_resets
    times = np.empty(n)
    censored = np.zeros(n, dtype=bool)

    def run_range(i0, i1):
        for i in range(i0, i1):
            rng = replicate_rng(settings.seed, i)
            a = _target_point(target, dim, rng)
            t, c = _simulate_one(rng, dim, mech, D, rate, period,
                                 a[0], a[1], a[2], eps0, dt, cap)
            times[i] = t
            censored[i] = c

    n_threads = max(1, int(os.environ.get("RESET_SEARCH_THREADS", "1")))
    if n_threads == 1 or n < 2 * n_threads:
        run_range(0, n)
    else:
        bounds = np.linspace(0, n, n_threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            futs = [pool.submit(run_range, bounds[k], bounds[k + 1])
                    for k in range(n_threads)]
            for f in futs:
                f.result()

    mean = float(np.mean(times))
    std_error = float(np.std(times, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    frac = float(np.mean(censored))
    if frac > 0.05:
        raise ExcessiveCensoring(
            f"censored fraction {frac:.3f} exceeds 0.05; estimate unusable")
    if frac > 0.001:
        warnings.warn(
            f"censored fraction {frac:.4f} > 0.1%: mean is biased downward",
            stacklevel=2)
    return McEstimate(mean=mean, std_error=std_error, n=n,
                      censored_fraction=frac)


def bridge_increment(x, t: float, T: float, dt: float, D: float,
                     rng: np.random.Generator):
    """Exact bridge transition over one step: mean x*(1 - dt/(T-t)),
    variance D*dt*(T-t-dt)/(T-t) per coordinate."""
    if not (0.0 <= t and dt > 0):
        raise ValueError("need 0 <= t and dt > 0")
    if t + dt > T * (1.0 + 1e-12):
        raise ValueError(f"step past the bridge horizon: t+dt={t + dt} > T={T}")
    x = np.asarray(x, dtype=float)
    rem = T - t
    mean = x * (1.0 - dt / rem)
    var = max(D * dt * (rem - dt) / rem, 0.0)
    out = mean + math.sqrt(var) * rng.standard_normal(x.shape)
    return float(out) if out.ndim == 0 else out


def crossing_correction_1d(x0, x1, a: float, dt: float, D: float,
                           rng: np.random.Generator):
    """Hit flag for level a between endpoint values x0 and x1: certain when
    they straddle a, else with probability exp(-2(a-x0)(a-x1)/(D*dt))."""
    if not (dt > 0 and D > 0):
        raise ValueError("need dt > 0 and D > 0")
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    prod = (a - x0) * (a - x1)
    p = np.exp(-2.0 * np.clip(prod, 0.0, None) / (D * dt))
    hit = (prod <= 0.0) | (rng.random(np.broadcast(x0, x1).shape) < p)
    return bool(hit) if hit.ndim == 0 else hit
