"""Penalty alternating-optimization engine with auxiliary separation variables.

The engine minimizes ``f(positions, X) + rho * sum ||pos - aux||^2`` where
the auxiliary points carry the pairwise-separation constraints and the
positions only the panel box constraints.  One outer iteration updates the
case-specific variables X in closed form, runs projected gradient descent on
every position block, re-projects the auxiliary points one antenna at a time
with the exact separation projection, and finally grows rho geometrically.
"""

from __future__ import annotations

import json
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .geometry import Panel, min_pairwise_distance, solve_separation_projection


class NonFiniteGradient(RuntimeError):
    """Raised when a position gradient turns non-finite (upstream model bug)."""


@dataclass
class PenaltySchedule:
    """Geometric growth of the penalty factor."""

    rho_init: float = 5.0
    growth: float = 1.2

    def __post_init__(self):
        if not self.rho_init > 0:
            raise ValueError("rho_init must be positive")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")

    def rho_at(self, k: int) -> float:
        """Penalty factor during outer iteration k (0-based)."""
        return self.rho_init * self.growth ** k


@dataclass
class StopRule:
    """Termination contract of the outer loop.

    Stops when the relative change of the penalized objective falls below
    ``rel_change_tol`` AND the residual max ||pos - aux|| is within
    ``residual_tol``; always stops after ``max_outer_iters``.
    """

    rel_change_tol: float = 1e-3
    max_outer_iters: int = 100
    residual_tol: float = 1e-9

    def __post_init__(self):
        if self.rel_change_tol <= 0 or self.residual_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")


@dataclass
class IterationTrace:
    """One outer iteration's record; serializable to JSON lines."""

    outer: int
    rho: float
    f_pen: float
    f_raw: float
    resid: float
    t_ms: float

    def to_json(self) -> str:
        return json.dumps({"outer": self.outer, "rho": self.rho,
                           "f_pen": self.f_pen, "f_raw": self.f_raw,
                           "resid": self.resid, "t_ms": self.t_ms})


@dataclass
class PositionBlock:
    """A group of antennas sharing one panel and one set of aux points."""

    name: str
    positions: np.ndarray  # (K, 2), box-constrained
    aux: np.ndarray        # (K, 2), separation-constrained
    panel: Panel


class CasePlugin(ABC):
    """Contract a case study implements to run under the penalty engine."""

    blocks: list
    d_min: float

    @abstractmethod
    def update_other_vars(self) -> None:
        """Exactly minimize the case variables X at the current positions."""

    @abstractmethod
    def raw_objective(self) -> float:
        """Objective value f at the current positions and X (no penalty)."""

    @abstractmethod
    def position_gradient(self, block_index: int, rho: float) -> np.ndarray:
        """(K, 2) gradient of the penalized objective for one block,
        including the 2*rho*(pos - aux) term."""

    def pgd_objective(self) -> float:
        """Objective driving the inner position descent.

        Defaults to the raw objective.  Cases whose objective carries a
        large position-independent offset may return only the
        position-dependent part so the relative-change stopping test of
        the descent operates at a meaningful scale; gradients and the
        location of the minimum are unchanged.
        """
        return self.raw_objective()


@dataclass
class PenaltyResult:
    positions: dict
    aux: dict
    converged: bool
    n_outer: int
    rho_final: float
    residual: float
    trace: list
    substeps: list | None = None


def finite_difference_gradient(fun, positions, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of ``fun`` over a (K, 2) position array."""
    x0 = np.array(positions, dtype=float)
    grad = np.zeros_like(x0)
    for idx in np.ndindex(x0.shape):
        xp = x0.copy()
        xp[idx] += step
        xm = x0.copy()
        xm[idx] -= step
        grad[idx] = (fun(xp) - fun(xm)) / (2.0 * step)
    fun(x0)  # restore any closure state to the base point
    return grad


def projected_gradient_descent(fun, grad, start, panel: Panel, *,
                               rel_tol: float = 1e-3, max_iters: int = 200,
                               step_length: float = 0.1, shrink: float = 0.5,
                               sufficient_decrease: float = 1e-4,
                               max_backtracks: int = 30):
    """Projected gradient descent with Armijo backtracking on a box.

    The first trial step moves the largest-gradient antenna by
    ``step_length`` wavelengths; the step size then warm-starts across
    iterations (doubled after each acceptance, halved on rejection), which
    keeps the search scale-free across objectives with very different
    gradient magnitudes.  A step is accepted when
    f(x_new) <= f(x) - c * ||x_new - x||^2 / eta.  Terminates on relative
    objective change below ``rel_tol``, on a stationary projection, or
    after ``max_iters`` iterations.  The final objective never exceeds the
    initial one.
    """
    x = panel.clip(np.array(start, dtype=float))
    f = float(fun(x))
    eta = None
    for _ in range(max_iters):
        g = np.asarray(grad(x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient("position gradient is not finite")
        gmax = float(np.max(np.hypot(g[..., 0], g[..., 1]))) if g.size else 0.0
        if gmax <= 1e-15:
            break  # stationary
        if eta is None:
            eta = step_length / gmax
        else:
            # Optimistic growth, capped at a 10*step_length displacement.
            eta = min(2.0 * eta, 10.0 * step_length / gmax)
        accepted = False
        fn = f
        for _bt in range(max_backtracks):
            xn = panel.clip(x - eta * g)
            step2 = float(np.sum((xn - x) ** 2))
            if step2 == 0.0:
                break  # projection fixed point: stationary
            fn = float(fun(xn))
            if fn <= f - sufficient_decrease * step2 / eta:
                accepted = True
                break
            eta *= shrink
        if not accepted:
            break
        rel = abs(f - fn) / max(abs(f), 1e-12)
        x, f = xn, fn
        if rel < rel_tol:
            break
    fun(x)  # leave closure state at the returned point
    return x, f


def sequential_projection_sweep(positions, aux, d_min: float) -> None:
    """One in-place sweep of exact separation projections over ``aux``.

    After a full sweep the aux points are pairwise feasible regardless of
    their starting values.
    """
    k = len(aux)
    for m in range(k):
        others = np.delete(aux, m, axis=0)
        aux[m] = solve_separation_projection(positions[m], others, d_min)


def _penalty_term(blocks) -> float:
    return float(sum(np.sum((b.positions - b.aux) ** 2) for b in blocks))


def _residual(blocks) -> float:
    return float(max(
        (np.max(np.hypot(*(b.positions - b.aux).T)) if len(b.positions) else 0.0)
        for b in blocks))


def run_penalty_ao(plugin: CasePlugin, schedule: PenaltySchedule = None,
                   stop: StopRule = None, rng: np.random.Generator = None,
                   collect_substeps: bool = False) -> PenaltyResult:
    """Run the penalty alternating optimization until the stop rule fires.

    When ``rng`` is given, block positions are re-initialized uniformly
    inside their panels before the run.  Aux points are always initialized
    by one sequential projection sweep over the starting positions.  On
    exit the positions are snapped to the aux points, which satisfy the
    pairwise separation by construction; for converged runs the two
    coincide within ``stop.residual_tol``.  Hitting the iteration cap
    returns the snapped iterate with ``converged=False`` (this covers the
    alternation deadlock where an antenna pins to the panel boundary while
    its aux point sits just outside; the reported point may then exceed
    the panel by the terminal residual).
    """
    schedule = schedule or PenaltySchedule()
    stop = stop or StopRule()
    blocks = plugin.blocks

    if rng is not None:
        for b in blocks:
            b.positions[:] = b.panel.sample_uniform(rng, len(b.positions))
    for b in blocks:
        b.aux[:] = b.positions
        sequential_projection_sweep(b.positions, b.aux, plugin.d_min)

    def f_pen(rho):
        return plugin.raw_objective() + rho * _penalty_term(blocks)

    trace = []
    substeps = [] if collect_substeps else None
    converged = False
    f_prev = None
    k = 0
    rho = schedule.rho_at(0)
    for k in range(stop.max_outer_iters):
        rho = schedule.rho_at(k)
        t0 = time.perf_counter()

        plugin.update_other_vars()
        if collect_substeps:
            substeps.append((k, "other_vars", f_pen(rho)))

        for bi, b in enumerate(blocks):
            fixed_pen = _penalty_term([bb for j, bb in enumerate(blocks) if j != bi])

            def fun(x, b=b, fixed=fixed_pen):
                b.positions[:] = x
                return plugin.pgd_objective() + rho * (
                    float(np.sum((x - b.aux) ** 2)) + fixed)

            def grad(x, bi=bi, b=b):
                b.positions[:] = x
                return plugin.position_gradient(bi, rho)

            x_new, _ = projected_gradient_descent(
                fun, grad, b.positions.copy(), b.panel,
                rel_tol=stop.rel_change_tol)
            b.positions[:] = x_new
            if collect_substeps:
                substeps.append((k, f"pgd:{b.name}", f_pen(rho)))

        for b in blocks:
            sequential_projection_sweep(b.positions, b.aux, plugin.d_min)
        if collect_substeps:
            substeps.append((k, "projection", f_pen(rho)))

        resid = _residual(blocks)
        f_cur = f_pen(rho)
        t_ms = (time.perf_counter() - t0) * 1e3
        trace.append(IterationTrace(outer=k + 1, rho=rho, f_pen=f_cur,
                                    f_raw=plugin.raw_objective(),
                                    resid=resid, t_ms=t_ms))
        if f_prev is not None:
            rel = abs(f_cur - f_prev) / max(abs(f_prev), 1e-12)
            if rel < stop.rel_change_tol and resid <= stop.residual_tol:
                converged = True
                break
        f_prev = f_cur

    resid = _residual(blocks)
    for b in blocks:
        b.positions[:] = b.aux
    return PenaltyResult(
        positions={b.name: b.positions.copy() for b in blocks},
        aux={b.name: b.aux.copy() for b in blocks},
        converged=converged,
        n_outer=k + 1,
        rho_final=rho,
        residual=resid,
        trace=trace,
        substeps=substeps,
    )


def feasibility_margin(result: PenaltyResult, d_min: float) -> float:
    """Smallest pairwise distance over all blocks minus d_min."""
    worst = np.inf
    for pos in result.positions.values():
        if len(pos) >= 2:
            worst = min(worst, min_pairwise_distance(pos))
    return float(worst - d_min)
