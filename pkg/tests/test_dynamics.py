import math
from fractions import Fraction

import numpy as np
import pytest

from asep2.duality import qz_value, sum_rule
from asep2.dynamics import (
    NonConvergence,
    QEstimate,
    _rate_table,
    duality_rhs,
    estimate_Q,
    estimate_Q_many,
    evolve,
    gillespie_step,
    make_sim_state,
    run_until,
)
from asep2.generator import ModelParams, Ring, build_H, build_H_sector
from asep2.lattice import Config, Positions, Sector, enumerate_sector, vacant_config
from asep2.measures import Measure, canonical

P1 = ModelParams(1, Fraction(2), Fraction(1, 2))
P2 = ModelParams(2, Fraction(2), Fraction(1, 2))
SECTOR11 = Sector(2, 1, 1)


def sector_kernel(t):
    return evolve(build_H_sector(P2, SECTOR11, Ring.FLOAT), t)


class TestEvolve:
    def test_zero_time_is_identity(self):
        k = sector_kernel(0.0)
        assert np.array_equal(k.matrix, np.eye(12))

    def test_columns_stochastic(self):
        k = evolve(build_H(P2, Ring.FLOAT), 1.0)
        assert k.column_defect() < 1e-12
        assert k.matrix.min() >= 0.0
        assert k.matrix.max() <= 1.0 + 1e-12

    def test_semigroup(self):
        prod = sector_kernel(1.0).matrix @ sector_kernel(1.5).matrix
        assert float(np.max(np.abs(prod - sector_kernel(2.5).matrix))) < 1e-10

    def test_ergodic_limit(self):
        k = evolve(build_H_sector(P2, SECTOR11, Ring.FLOAT), 1e3)
        mu = canonical(SECTOR11)
        probs = np.array(
            [mu.probability(c, P2.q0) for c in enumerate_sector(SECTOR11)]
        )
        assert float(np.max(np.abs(k.matrix - probs[:, None]))) < 1e-8

    def test_term_budget(self):
        with pytest.raises(NonConvergence):
            evolve(build_H_sector(P2, SECTOR11, Ring.FLOAT), 1.0, max_terms=1)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            evolve(build_H_sector(P2, SECTOR11, Ring.FLOAT), -1.0)

    def test_absorbing_sector(self):
        k = evolve(build_H_sector(P2, Sector(2, 0, 0), Ring.FLOAT), 3.0)
        assert np.array_equal(k.matrix, np.eye(1))


class TestGillespie:
    def test_deterministic_single_bond(self):
        # only one enabled bond: always hops there, waiting time Exp(2)
        state = make_sim_state(Config.from_text("A0"), 7, 0)
        nxt = gillespie_step(state, P1)
        assert nxt.config == Config.from_text("0A")
        assert nxt.time > 0

    def test_frozen_configuration(self):
        state = make_sim_state(vacant_config(2), 7, 0)
        nxt = gillespie_step(state, P2)
        assert nxt.config == state.config
        assert math.isinf(nxt.time)
        final = run_until(make_sim_state(vacant_config(2), 7, 0), P2, 5.0)
        assert final.config == vacant_config(2) and final.time == 5.0

    def test_trajectory_log(self):
        import io

        from asep2.dynamics import simulate_trajectory, write_trajectory_csv

        events = simulate_trajectory(Config.from_text("A0BA"), P2, 2.0, 17, 0)
        assert events[0] == (0.0, Config.from_text("A0BA"))
        times = [t for t, _ in events]
        assert times == sorted(times) and times[-1] <= 2.0
        assert events == simulate_trajectory(Config.from_text("A0BA"), P2, 2.0, 17, 0)
        fh = io.StringIO()
        write_trajectory_csv(fh, events)
        lines = fh.getvalue().splitlines()
        assert lines[0] == "time,config" and len(lines) == len(events) + 1

    def test_reproducible_trajectories(self):
        def trajectory(seed, index, steps=60):
            state = make_sim_state(Config.from_text("A0BA"), seed, index)
            events = []
            for _ in range(steps):
                state = gillespie_step(state, P2)
                events.append((state.time, state.config.text()))
            return events

        assert trajectory(11, 3) == trajectory(11, 3)
        assert trajectory(11, 3) != trajectory(11, 4)

    def test_empirical_distribution_matches_kernel(self):
        # 1e5 independent trajectories at a fixed horizon against the
        # uniformized kernel column, within 3-sigma multinomial bands
        start = Config.from_text("AB00")
        t, n = 1.0, 100_000
        table = _rate_table(P2)
        counts: dict[tuple, int] = {}
        for i in range(n):
            rng = np.random.Generator(np.random.Philox(key=[2024, i]))
            rng.random()  # initial-draw slot (point mass)
            occ = list(start.occ)
            from asep2.dynamics import _run_occ

            _run_occ(occ, table, 4, 0.0, t, rng)
            key = tuple(occ)
            counts[key] = counts.get(key, 0) + 1
        configs = enumerate_sector(SECTOR11)
        kernel = sector_kernel(t).matrix
        col = configs.index(start)
        for row, c in enumerate(configs):
            p = kernel[row, col]
            freq = counts.get(c.occ, 0) / n
            band = 3.0 * math.sqrt(p * (1.0 - p) / n)
            assert abs(freq - p) <= band + 1e-12, (c.text(), freq, p)

    def test_long_run_occupancy(self):
        # time-weighted occupancy of one long trajectory against the
        # canonical measure, tolerance from batch-means standard errors
        steps, burn_in, batches = 100_000, 1000, 10
        table = _rate_table(P2)
        rng = np.random.Generator(np.random.Philox(key=[31337, 0]))
        occ = list(Config.from_text("AB00").occ)
        configs = enumerate_sector(SECTOR11)
        index = {c.occ: i for i, c in enumerate(configs)}
        per_batch = (steps - burn_in) // batches
        dwell = np.zeros((batches, len(configs)))
        batch = -1
        for step in range(steps):
            rates = [table[occ[i]][occ[i + 1]] for i in range(3)]
            total = sum(rates)
            dt = rng.exponential(1.0 / total)
            if step >= burn_in:
                batch = min(batches - 1, (step - burn_in) // per_batch)
                dwell[batch, index[tuple(occ)]] += dt
            u = rng.random() * total
            acc = 0.0
            for i, rate in enumerate(rates):
                acc += rate
                if u < acc or i == 2:
                    occ[i], occ[i + 1] = occ[i + 1], occ[i]
                    break
        fractions = dwell / dwell.sum(axis=1, keepdims=True)
        mean = fractions.mean(axis=0)
        stderr = fractions.std(axis=0, ddof=1) / math.sqrt(batches)
        mu = canonical(SECTOR11)
        probs = np.array([mu.probability(c, P2.q0) for c in configs])
        assert np.all(np.abs(mean - probs) <= 3.0 * stderr + 1e-4)


class TestEstimators:
    def test_constant_observable(self):
        p0 = Measure.point_mass(Config.from_text("A0BA"))
        est = estimate_Q(Positions(2), p0, 0.5, 200, 5, P2)
        assert est == QEstimate(mean=1.0, stderr=0.0, n=200)

    def test_zero_time_point_mass(self):
        eta = Config.from_text("A0BA")
        z = Positions(2, x=(-1,), y=(1,))
        est = estimate_Q(z, Measure.point_mass(eta), 0.0, 50, 5, P2)
        assert est.mean == qz_value(z, eta.occ, 2, P2.q0)
        assert est.stderr == 0.0

    def test_shared_trajectories(self):
        p0 = Measure.point_mass(Config.from_text("A0BA"))
        zs = [Positions(2, x=(-1,)), Positions(2, y=(1,))]
        both = estimate_Q_many(zs, p0, 0.7, 500, 9, P2)
        single = estimate_Q(zs[0], p0, 0.7, 500, 9, P2)
        assert both[0] == single

    def test_sampled_initial_distribution(self):
        p0 = canonical(SECTOR11).normalize(P2.q0)
        est = estimate_Q(Positions(2), p0, 0.0, 300, 21, P2)
        assert est.mean == 1.0


class TestDualityRhs:
    def test_zero_time_reduces_to_initial_mean(self):
        eta = Config.from_text("A0BA")
        p0 = Measure.point_mass(eta)
        for z in (Positions(2, x=(0,)), Positions(2, x=(2,), y=(1,))):
            assert duality_rhs(z, p0, 0.0, P2) == pytest.approx(
                qz_value(z, eta.occ, 2, P2.q0)
            )

    def test_stationary_initial_distribution(self):
        p0 = canonical(Sector(2, 2, 1)).normalize(P2.q0)
        z = Positions(2, x=(0,), y=(1,))
        values = [duality_rhs(z, p0, t, P2) for t in (0.0, 0.5, 1.0, 2.0)]
        assert max(values) - min(values) < 1e-10

    def test_long_time_limit_is_sum_rule_constant(self):
        source = Sector(2, 2, 1)
        target = Sector(2, 1, 1)
        p0 = canonical(source).normalize(P2.q0)
        lam = sum_rule(source, target).lam.eval(P2.q0)
        mu = canonical(target)
        for zc in enumerate_sector(target)[:4]:
            z = zc.to_positions()
            limit = duality_rhs(z, p0, 200.0, P2)
            assert limit == pytest.approx(
                lam * mu.probability(zc, P2.q0), abs=1e-9
            )

    def test_against_monte_carlo(self):
        eta = Config.from_text("A0BA")
        p0 = Measure.point_mass(eta)
        z = Positions(2, x=(-1,))
        est = estimate_Q(z, p0, 1.0, 20_000, 99, P2)
        rhs = duality_rhs(z, p0, 1.0, P2)
        assert abs(est.mean - rhs) <= 3.0 * est.stderr
