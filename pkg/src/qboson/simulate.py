"""Continuous-time Monte Carlo estimation of J and Delta.

Event-driven dynamics: the total rate is R = sum_i u(n_i), waiting times
are exponential with mean 1/R, the jumping site is chosen with probability
u(n_i)/R, one particle hops i -> i+1 (mod N) and the displacement counter
Y increases by 1.

The event loop is the only hot kernel in the package.  It is compiled with
numba when available; setting QBOSON_DISABLE_NUMBA=1 selects the pure
Python/numpy fallback, which runs the identical source (numba reproduces
numpy's legacy MT19937 streams, so both paths see the same random numbers
for the same seed).  benchmarks/bench_simulator.py compares the two.

Estimation uses independent replicas: W_r = Y(t_burn + t_measure) -
Y(t_burn), J_hat = mean(W)/t_measure, Delta_hat = var(W)/t_measure, with
standard errors from the replica jackknife.  Replica streams are derived
from (seed, rep_index) through numpy's SeedSequence, whose spawning
contract guarantees stream independence.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .numerics import InputError, SolverError
from .stationary import ModelParams, rate_u, weight_f
from . import asymptotics

_RESYNC_EVERY = 1 << 20


def _gillespie_core(n, ut, t_burn, t_end, seed, hist):
    """Run one trajectory to t_end; n is modified in place.

    Returns (Y_burn, Y_end, events, max_drift).  hist accumulates the
    time-weighted occupation of site 0 over [t_burn, t_end).  max_drift is
    the largest deviation between the incrementally maintained total rate
    and its from-scratch recomputation (the rate is resynced each time).
    """
    np.random.seed(seed)
    N = n.shape[0]
    rates = np.empty(N)
    R = 0.0
    for i in range(N):
        rates[i] = ut[n[i]]
        R += rates[i]
    t = 0.0
    Y = 0
    Y_burn = 0
    events = 0
    max_drift = 0.0
    while True:
        u1 = np.random.random()
        dt = -np.log(1.0 - u1) / R
        tn = t + dt
        lo = t if t > t_burn else t_burn
        hi = tn if tn < t_end else t_end
        if hi > lo:
            hist[n[0]] += hi - lo
        if t < t_burn <= tn:
            Y_burn = Y
        if tn >= t_end:
            return Y_burn, Y, events, max_drift
        t = tn
        u2 = np.random.random() * R
        acc = 0.0
        site = N - 1
        for i in range(N):
            acc += rates[i]
            if acc >= u2:
                site = i
                break
        j = site + 1
        if j == N:
            j = 0
        if j != site:
            n[site] -= 1
            n[j] += 1
            R += ut[n[site]] - rates[site] + ut[n[j]] - rates[j]
            rates[site] = ut[n[site]]
            rates[j] = ut[n[j]]
        Y += 1
        events += 1
        if events % _RESYNC_EVERY == 0:
            Rs = 0.0
            for i in range(N):
                Rs += rates[i]
            drift = abs(R - Rs)
            if drift > max_drift:
                max_drift = drift
            R = Rs


def _numba_disabled() -> bool:
    return os.environ.get("QBOSON_DISABLE_NUMBA", "") not in ("", "0")


if not _numba_disabled():
    try:
        import numba
        _gillespie = numba.njit(cache=True)(_gillespie_core)
        NUMBA_ENABLED = True
    except ImportError:
        _gillespie = _gillespie_core
        NUMBA_ENABLED = False
else:
    _gillespie = _gillespie_core
    NUMBA_ENABLED = False


INIT_MODES = ("stationary-product-rejection", "all-equal", "single-pile")


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    t_measure: float
    reps: int
    seed: int
    t_burn: float | None = None
    init: str = "stationary-product-rejection"

    def __post_init__(self):
        if self.t_measure <= 0:
            raise InputError("t_measure must be positive")
        if self.t_burn is not None and self.t_burn <= 0:
            raise InputError("t_burn must be positive")
        if self.reps < 2:
            raise InputError("need reps >= 2 for variance estimation")
        if self.init not in INIT_MODES:
            raise InputError(f"init must be one of {INIT_MODES}")

    @property
    def burn_time(self) -> float:
        # 10 N^2 covers both the diffusive and the KPZ relaxation scales
        if self.t_burn is not None:
            return self.t_burn
        return 10.0 * self.params.N ** 2


@dataclass(frozen=True)
class TrajectoryResult:
    Y_burn: int
    Y_end: int
    events: int
    max_rate_drift: float
    hist: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SimEstimate:
    J_hat: float
    se_J: float
    Delta_hat: float
    se_D: float
    reps: int
    total_events: int


def _rate_table(params: ModelParams) -> np.ndarray:
    return np.array([float(rate_u(m, params.q)) for m in range(params.p + 1)],
                    dtype=np.float64)


def _stationary_fugacity(params: ModelParams) -> float:
    if params.q.is_unity:
        return float(params.rho)
    return asymptotics.saddle_point(float(params.rho), params.q, tol=1e-10)


def initial_config(params: ModelParams, mode: str,
                   rng: np.random.Generator) -> np.ndarray:
    N, p = params.N, params.p
    n = np.zeros(N, dtype=np.int64)
    if mode == "single-pile":
        n[0] = p
        return n
    if mode == "all-equal":
        base, extra = divmod(p, N)
        n[:] = base
        n[:extra] += 1
        return n
    # product-measure rejection: i.i.d. site occupations with weights
    # f(m) z^m (truncated at p), accepted when the total is exactly p
    z = _stationary_fugacity(params)
    w = np.array([float(weight_f(m, params.q)) * z ** m for m in range(p + 1)],
                 dtype=np.float64)
    w /= w.sum()
    for _ in range(1_000_000):
        sample = rng.choice(p + 1, size=N, p=w)
        if sample.sum() == p:
            return sample.astype(np.int64)
    raise SolverError("product-measure rejection sampler failed to accept; "
                      "use init='all-equal'")


def _replica_seeds(seed: int, rep_index: int) -> tuple[int, np.random.Generator]:
    ss = np.random.SeedSequence([int(seed), int(rep_index)])
    kernel_seed = int(ss.generate_state(1, np.uint32)[0])
    init_rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
    return kernel_seed, init_rng


def run_trajectory(cfg: SimConfig, rep_index: int) -> TrajectoryResult:
    params = cfg.params
    kernel_seed, init_rng = _replica_seeds(cfg.seed, rep_index)
    n = initial_config(params, cfg.init, init_rng)
    ut = _rate_table(params)
    hist = np.zeros(params.p + 1, dtype=np.float64)
    t_end = cfg.burn_time + cfg.t_measure
    Y_burn, Y_end, events, drift = _gillespie(n, ut, cfg.burn_time, t_end,
                                              kernel_seed, hist)
    return TrajectoryResult(Y_burn=int(Y_burn), Y_end=int(Y_end),
                            events=int(events), max_rate_drift=float(drift),
                            hist=hist)


def _jackknife_se(values: list, statistic) -> float:
    n = len(values)
    thetas = []
    for i in range(n):
        rest = values[:i] + values[i + 1:]
        thetas.append(statistic(rest))
    mean_t = math.fsum(thetas) / n
    var = (n - 1) / n * math.fsum((t - mean_t) ** 2 for t in thetas)
    return math.sqrt(var)


def estimate_cumulants(cfg: SimConfig) -> SimEstimate:
    t = cfg.t_measure
    windows = []
    total_events = 0
    for rep in range(cfg.reps):
        traj = run_trajectory(cfg, rep)
        windows.append(float(traj.Y_end - traj.Y_burn))
        total_events += traj.events

    def mean_stat(vals):
        return math.fsum(vals) / len(vals)

    def var_stat(vals):
        m = math.fsum(vals) / len(vals)
        return math.fsum((v - m) ** 2 for v in vals) / (len(vals) - 1)

    J_hat = mean_stat(windows) / t
    Delta_hat = var_stat(windows) / t
    se_J = _jackknife_se(windows, mean_stat) / t
    se_D = _jackknife_se(windows, var_stat) / t
    return SimEstimate(J_hat=J_hat, se_J=se_J, Delta_hat=Delta_hat,
                       se_D=se_D, reps=cfg.reps, total_events=total_events)
