"""Time evolution: uniformized transition kernels and Gillespie sampling.

The kernel exp(-H t) is computed by uniformization: with a rate bound
no smaller than the largest exit rate, the generator is traded for a
column-stochastic matrix and the exponential becomes a Poisson-weighted
power series, which preserves probability structure term by term.
Poisson weights are evaluated in log space so horizons with a large
rate-time product (the ergodic-limit checks use t = 1e3) do not
underflow; the leading negligible powers are skipped with one binary
matrix power.

Trajectories use counter-based Philox streams keyed by (master seed,
trajectory index), so every trajectory is reproducible bit for bit and
trivially parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duality import qz_value
from .generator import ModelParams, Ring, build_H_sector, local_rate
from .lattice import Config, Positions, Sector, bonds, enumerate_sector
from .measures import Measure
from .sparse import Basis, SparseMatrix


class NonConvergence(RuntimeError):
    """The Poisson tail did not fall below tolerance within the term budget."""


@dataclass(frozen=True)
class TransitionKernel:
    """Matrix of transition probabilities: entry [target, source]."""

    matrix: np.ndarray
    t: float
    basis: Basis | None = None

    def column_defect(self) -> float:
        return float(np.max(np.abs(self.matrix.sum(axis=0) - 1.0)))


def evolve(
    op: SparseMatrix, t: float, tol: float = 1e-14, max_terms: int | None = None
) -> TransitionKernel:
    """exp(-H t) for a float generator by uniformization.

    Truncates once the Poisson tail mass drops below tol; the default
    term budget is 10*lambda*t + 50 and exhausting it raises
    NonConvergence.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    a = op.to_numpy()
    n = a.shape[0]
    lam = float(np.max(np.diag(a))) if n else 0.0
    mu = lam * t
    if mu == 0.0:
        return TransitionKernel(np.eye(n), t, op.basis)
    budget = int(10 * mu + 50) if max_terms is None else max_terms
    p = np.eye(n) - a / lam

    # powers below k_lo carry no Poisson mass at double precision
    k_lo = max(0, int(mu - 12.0 * math.sqrt(mu) - 30.0))
    pk = np.linalg.matrix_power(p, k_lo) if k_lo else np.eye(n)
    out = np.zeros_like(pk)
    log_mu = math.log(mu)
    cum = 0.0
    k = k_lo
    while k <= k_lo + budget:
        w = math.exp(-mu + k * log_mu - math.lgamma(k + 1))
        if w > 0.0:
            out += w * pk
            cum += w
        if 1.0 - cum < tol:
            return TransitionKernel(out, t, op.basis)
        pk = p @ pk
        k += 1
    raise NonConvergence(f"Poisson tail above {tol} after {budget} terms")


# ---------------------------------------------------------------------
# Gillespie sampling
# ---------------------------------------------------------------------


@dataclass
class SimState:
    config: Config
    time: float
    rng: np.random.Generator


def make_sim_state(config: Config, master_seed: int, traj_index: int) -> SimState:
    """Fresh trajectory state on its own counter-based stream."""
    rng = np.random.Generator(np.random.Philox(key=[master_seed, traj_index]))
    return SimState(config=config, time=0.0, rng=rng)


def gillespie_step(state: SimState, p: ModelParams) -> SimState:
    """One jump of the continuous-time chain.

    Draws an exponential waiting time at the total exit rate, then picks
    the bond by a linear scan of the 2L-1 bond rates.  A configuration
    with zero exit rate jumps straight to t = infinity.
    """
    c = state.config
    rates = [float(local_rate(p, c, k)) for k in bonds(p.L)]
    total = sum(rates)
    if total == 0.0:
        return SimState(c, math.inf, state.rng)
    dt = state.rng.exponential(1.0 / total)
    u = state.rng.random() * total
    acc = 0.0
    for k, rate in zip(bonds(p.L), rates):
        acc += rate
        if u < acc or k == p.L - 1:
            return SimState(c.swap(k), state.time + dt, state.rng)
    raise AssertionError("unreachable")


def run_until(state: SimState, p: ModelParams, t_end: float) -> SimState:
    """Advance to the time horizon; the last overshooting jump is dropped."""
    while True:
        nxt = gillespie_step(state, p)
        if nxt.time > t_end:
            return SimState(state.config, t_end, state.rng)
        state = nxt


def simulate_trajectory(
    config: Config, p: ModelParams, t_end: float, master_seed: int, traj_index: int
) -> list[tuple[float, Config]]:
    """Event list (time, configuration) of one trajectory up to the horizon."""
    state = make_sim_state(config, master_seed, traj_index)
    events = [(0.0, config)]
    while True:
        nxt = gillespie_step(state, p)
        if nxt.time > t_end:
            return events
        events.append((nxt.time, nxt.config))
        state = nxt


def write_trajectory_csv(fh, events) -> None:
    fh.write("time,config\n")
    for time, config in events:
        fh.write(f"{time!r},{config.text()}\n")


def _rate_table(p: ModelParams):
    from .lattice import A, B, VACANT

    r0, l0 = float(p.r), float(p.ell)
    table = [[0.0] * 3 for _ in range(3)]
    for s1, s2 in ((A, VACANT), (VACANT, B), (A, B)):
        table[s1][s2] = r0
    for s1, s2 in ((VACANT, A), (B, VACANT), (B, A)):
        table[s1][s2] = l0
    return table


def _run_occ(occ: list, table, n_sites: int, t: float, t_end: float, rng) -> float:
    """Hot trajectory loop on a raw occupation list (mutated in place)."""
    exponential = rng.exponential
    uniform = rng.random
    while True:
        rates = [table[occ[i]][occ[i + 1]] for i in range(n_sites - 1)]
        total = sum(rates)
        if total == 0.0:
            return t_end
        dt = exponential(1.0 / total)
        u = uniform() * total
        if t + dt > t_end:
            return t_end
        t += dt
        acc = 0.0
        for i, rate in enumerate(rates):
            acc += rate
            if u < acc or i == n_sites - 2:
                occ[i], occ[i + 1] = occ[i + 1], occ[i]
                break


# ---------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class QEstimate:
    mean: float
    stderr: float
    n: int


def _support_arrays(p0: Measure):
    configs = sorted(p0.support(), key=Config.ternary_index)
    probs = np.array([float(p0.weights[c]) for c in configs])
    total = probs.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError("initial distribution must be normalised")
    return configs, np.cumsum(probs)


def estimate_Q_many(
    zs: list[Positions],
    p0: Measure,
    t: float,
    trajectories: int,
    seed: int,
    p: ModelParams,
) -> list[QEstimate]:
    """Monte-Carlo means of the duality products over shared trajectories.

    Every trajectory is evaluated against all coordinate sets at once, so
    a grid of observables reuses the same sampled paths.
    """
    q0 = p.q0
    table = _rate_table(p)
    n_sites = 2 * p.L
    configs, cdf = _support_arrays(p0)
    sums = [0.0] * len(zs)
    sumsq = [0.0] * len(zs)
    for i in range(trajectories):
        rng = np.random.Generator(np.random.Philox(key=[seed, i]))
        u = rng.random()
        occ = list(configs[int(np.searchsorted(cdf, u, side="right"))].occ)
        _run_occ(occ, table, n_sites, 0.0, t, rng)
        for j, z in enumerate(zs):
            v = qz_value(z, occ, p.L, q0)
            sums[j] += v
            sumsq[j] += v * v
    out = []
    n = trajectories
    for j in range(len(zs)):
        mean = sums[j] / n
        var = max(0.0, (sumsq[j] / n - mean * mean) * n / max(1, n - 1))
        out.append(QEstimate(mean=mean, stderr=math.sqrt(var / n), n=n))
    return out


def estimate_Q(
    z: Positions, p0: Measure, t: float, trajectories: int, seed: int, p: ModelParams
) -> QEstimate:
    return estimate_Q_many([z], p0, t, trajectories, seed, p)[0]


def duality_rhs(z: Positions, p0: Measure, t: float, p: ModelParams) -> float:
    """Duality prediction for the time-dependent mean of the product.

    Builds the few-particle sector kernel for the dual coordinates and
    contracts it with the initial-time means: the expectation propagates
    through the dynamics of N(z) + M(z) particles only.
    """
    sector = Sector(p.L, z.N, z.M)
    configs = enumerate_sector(sector)
    kernel = evolve(build_H_sector(p, sector, Ring.FLOAT), t).matrix
    q0 = p.q0
    row = configs.index(z.to_config())
    total = 0.0
    for j, zc in enumerate(configs):
        zj = zc.to_positions()
        init = sum(
            w * qz_value(zj, eta.occ, p.L, q0) for eta, w in p0.items()
        )
        total += init * kernel[row, j]
    return total
