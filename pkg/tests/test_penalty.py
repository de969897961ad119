import json

import numpy as np
import pytest

from antopt.capacity import CapacityPlugin, CapacityProblem
from antopt.channel import sample_geometric_channel
from antopt.geometry import Panel, min_pairwise_distance
from antopt.penalty import (CasePlugin, IterationTrace, NonFiniteGradient,
                            PenaltySchedule, PositionBlock, StopRule,
                            finite_difference_gradient,
                            projected_gradient_descent, run_penalty_ao,
                            sequential_projection_sweep)


class TestSchedule:
    def test_exact_powers(self):
        s = PenaltySchedule()
        for k in range(30):
            assert s.rho_at(k) == 5.0 * 1.2 ** k

    def test_validation(self):
        with pytest.raises(ValueError):
            PenaltySchedule(rho_init=0.0)
        with pytest.raises(ValueError):
            PenaltySchedule(growth=1.0)
        with pytest.raises(ValueError):
            StopRule(rel_change_tol=0.0)


class TestFiniteDifference:
    def test_quadratic(self):
        def f(x):
            return float(x[0, 0] ** 2 + x[0, 1] ** 2)

        g = finite_difference_gradient(f, np.array([[1.0, 2.0]]))
        assert np.allclose(g, [[2.0, 4.0]], atol=1e-6)

    def test_constant(self):
        g = finite_difference_gradient(lambda x: 3.0, np.zeros((2, 2)))
        assert np.allclose(g, 0.0)


class TestProjectedGradientDescent:
    def test_bowl_interior(self):
        c = np.array([[0.3, -0.4], [1.0, 0.2]])
        panel = Panel.square(4.0)
        fun = lambda x: float(np.sum((x - c) ** 2))
        grad = lambda x: 2.0 * (x - c)
        x, f = projected_gradient_descent(fun, grad, np.zeros((2, 2)), panel,
                                          rel_tol=1e-10, max_iters=500)
        assert np.allclose(x, c, atol=1e-4)

    def test_bowl_outside_projects(self):
        c = np.array([[5.0, -7.0]])
        panel = Panel.square(2.0)
        fun = lambda x: float(np.sum((x - c) ** 2))
        grad = lambda x: 2.0 * (x - c)
        x, f = projected_gradient_descent(fun, grad, np.zeros((1, 2)), panel,
                                          rel_tol=1e-10, max_iters=500)
        assert np.allclose(x, [[1.0, -1.0]], atol=1e-6)

    def test_never_increases(self):
        rng = np.random.default_rng(0)
        c = rng.uniform(-1, 1, (3, 2))
        panel = Panel.square(2.0)
        fun = lambda x: float(np.sum((x - c) ** 2) + 0.3 * np.sum(x ** 4))
        grad = lambda x: 2.0 * (x - c) + 1.2 * x ** 3
        x0 = rng.uniform(-1, 1, (3, 2))
        x, f = projected_gradient_descent(fun, grad, x0, panel)
        assert f <= fun(x0) + 1e-12

    def test_non_finite_gradient(self):
        panel = Panel.square(2.0)
        with pytest.raises(NonFiniteGradient):
            projected_gradient_descent(lambda x: 0.0,
                                       lambda x: np.full((1, 2), np.nan),
                                       np.zeros((1, 2)), panel)


class TestSweep:
    def test_sweep_yields_feasible_aux(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pos = rng.uniform(0, 1.5, (6, 2))
            aux = pos.copy()
            sequential_projection_sweep(pos, aux, 0.5)
            assert min_pairwise_distance(aux) >= 0.5 - 1e-9


def small_capacity_plugin(seed=0, n=3, m=3, a=3.0):
    rng = np.random.default_rng(seed)
    real = sample_geometric_channel(6, 1.0, rng)
    panel = Panel.square(a)
    problem = CapacityProblem(
        realization=real, tx_positions=np.zeros((n, 2)),
        rx_positions=np.zeros((m, 2)), panel_tx=panel, panel_rx=panel,
        p_max=10 ** 1.5, sigma2=1.0)
    return CapacityPlugin(problem, 0.5), rng


class SingleAntennaPlugin(CasePlugin):
    """Toy case: one antenna chasing a fixed point, no other variables."""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=float)
        pos = np.zeros((1, 2))
        self.d_min = 0.5
        self.blocks = [PositionBlock("only", pos, pos.copy(),
                                     Panel.square(4.0))]

    def update_other_vars(self):
        pass

    def raw_objective(self):
        p = self.blocks[0].positions
        return float(np.sum((p - self.target) ** 2))

    def position_gradient(self, block_index, rho):
        b = self.blocks[block_index]
        return 2.0 * (b.positions - self.target) + 2.0 * rho * (
            b.positions - b.aux)


class TestEngine:
    def test_single_antenna_keeps_zero_penalty(self):
        # With a single antenna the projection is the identity, so the aux
        # point tracks the position exactly and the penalty term stays 0.
        plugin = SingleAntennaPlugin([0.7, -0.3])
        res = run_penalty_ao(plugin, rng=np.random.default_rng(1))
        assert res.converged
        assert all(t.resid == 0.0 for t in res.trace)
        assert all(t.f_pen == t.f_raw for t in res.trace)
        assert res.trace[-1].f_raw <= res.trace[0].f_raw

    def test_rho_bookkeeping(self):
        plugin, rng = small_capacity_plugin(seed=2)
        res = run_penalty_ao(plugin, rng=rng)
        for k, entry in enumerate(res.trace):
            assert entry.outer == k + 1
            assert entry.rho == 5.0 * 1.2 ** k
        assert res.rho_final == 5.0 * 1.2 ** (res.n_outer - 1)

    def test_substep_monotonicity(self):
        plugin, rng = small_capacity_plugin(seed=4)
        res = run_penalty_ao(plugin, rng=rng, collect_substeps=True)
        by_outer = {}
        for outer, label, value in res.substeps:
            by_outer.setdefault(outer, []).append(value)
        for outer, values in by_outer.items():
            for a, b in zip(values, values[1:]):
                assert b <= a + 1e-9

    def test_final_positions_feasible(self):
        plugin, rng = small_capacity_plugin(seed=5)
        res = run_penalty_ao(plugin, rng=rng)
        for pos in res.positions.values():
            if len(pos) >= 2:
                assert min_pairwise_distance(pos) >= 0.5 - 1e-9

    def test_iteration_cap_flags_non_converged(self):
        plugin, rng = small_capacity_plugin(seed=6)
        res = run_penalty_ao(plugin, stop=StopRule(max_outer_iters=3),
                             rng=rng)
        assert res.n_outer == 3
        assert not res.converged

    def test_determinism(self):
        t1 = run_penalty_ao(small_capacity_plugin(seed=8)[0],
                            rng=np.random.default_rng(99)).trace
        t2 = run_penalty_ao(small_capacity_plugin(seed=8)[0],
                            rng=np.random.default_rng(99)).trace
        assert len(t1) == len(t2)
        for a, b in zip(t1, t2):
            assert (a.outer, a.rho, a.f_pen, a.f_raw, a.resid) == \
                (b.outer, b.rho, b.f_pen, b.f_raw, b.resid)


def test_trace_json_keys():
    entry = IterationTrace(outer=1, rho=5.0, f_pen=-1.0, f_raw=-1.5,
                           resid=0.0, t_ms=2.5)
    decoded = json.loads(entry.to_json())
    assert list(decoded) == ["outer", "rho", "f_pen", "f_raw", "resid", "t_ms"]
