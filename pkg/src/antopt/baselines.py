"""Reference schemes: fixed grids, exhaustive antenna selection, and PSO.

These are the comparison points for the penalty optimizer.  Fixed-position
layouts ignore the panel size on purpose; candidate grids for antenna
selection are half-wavelength spaced so any selected subset automatically
satisfies the separation constraint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import min_pairwise_distance


def fpa_layout(count: int, spacing: float = 0.5) -> np.ndarray:
    """Fixed antenna grid with exact half-wavelength spacing, centered at
    the origin.  Row-major fill of a near-square grid; count=6 gives 2x3."""
    if count < 1:
        raise ValueError("count must be >= 1")
    cols = int(np.ceil(np.sqrt(count)))
    rows = int(np.ceil(count / cols))
    pts = []
    for i in range(count):
        r, c = divmod(i, cols)
        pts.append(((c - (cols - 1) / 2.0) * spacing,
                    (r - (rows - 1) / 2.0) * spacing))
    return np.array(pts, dtype=float)


def candidate_grid(count: int = 12, spacing: float = 0.5,
                   rows: int = 2) -> np.ndarray:
    """Candidate positions for antenna selection: a centered rows x cols
    grid (2x6 by default) spaced half a wavelength."""
    if count % rows:
        raise ValueError("count must be divisible by rows")
    cols = count // rows
    pts = []
    for r in range(rows):
        for c in range(cols):
            pts.append(((c - (cols - 1) / 2.0) * spacing,
                        (r - (rows - 1) / 2.0) * spacing))
    return np.array(pts, dtype=float)


@dataclass
class SelectionResult:
    indices_a: tuple
    indices_b: tuple | None
    value: float
    evaluations: int


def antenna_selection(objective, candidates_a, select_a: int,
                      candidates_b=None, select_b: int = None,
                      mode: str = "alternating") -> SelectionResult:
    """Exhaustive subset selection maximizing ``objective``.

    Single-sided: ``objective(positions)`` is evaluated for every
    C(len(candidates_a), select_a) subset.  Two-sided: the default
    alternating mode fixes one side, exhausts the other, and repeats once
    (2 rounds); ``mode="joint"`` exhausts every pair of subsets.
    """
    candidates_a = np.asarray(candidates_a, dtype=float)
    combos_a = list(itertools.combinations(range(len(candidates_a)), select_a))
    evals = 0

    if candidates_b is None:
        best_val, best_idx = -np.inf, None
        for idx in combos_a:
            val = float(objective(candidates_a[list(idx)]))
            evals += 1
            if val > best_val:
                best_val, best_idx = val, idx
        return SelectionResult(best_idx, None, best_val, evals)

    candidates_b = np.asarray(candidates_b, dtype=float)
    combos_b = list(itertools.combinations(range(len(candidates_b)), select_b))

    if mode == "joint":
        best_val, best_a, best_b = -np.inf, None, None
        for ia in combos_a:
            pa = candidates_a[list(ia)]
            for ib in combos_b:
                val = float(objective(pa, candidates_b[list(ib)]))
                evals += 1
                if val > best_val:
                    best_val, best_a, best_b = val, ia, ib
        return SelectionResult(best_a, best_b, best_val, evals)

    if mode != "alternating":
        raise ValueError(f"unknown mode {mode!r}")
    idx_b = tuple(range(select_b))
    best_val, idx_a = -np.inf, tuple(range(select_a))
    pb = candidates_b[list(idx_b)]
    for ia in combos_a:
        val = float(objective(candidates_a[list(ia)], pb))
        evals += 1
        if val > best_val:
            best_val, idx_a = val, ia
    pa = candidates_a[list(idx_a)]
    for ib in combos_b:
        val = float(objective(pa, candidates_b[list(ib)]))
        evals += 1
        if val > best_val:
            best_val, idx_b = val, ib
    return SelectionResult(idx_a, idx_b, best_val, evals)


@dataclass
class PsoConfig:
    """Standard global-best PSO settings with a separation penalty."""

    swarm_size: int = 50
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    max_iters: int = 200
    penalty_weight: float = None  # default: 100 * max(|objective at init|, 1)

    def __post_init__(self):
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("PSO weights must be positive")


@dataclass
class PsoResult:
    positions: list  # one (K, 2) array per group
    value: float
    feasible: bool


def _pairwise_violation(pos: np.ndarray, d_min: float) -> float:
    if len(pos) < 2:
        return 0.0
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    iu = np.triu_indices(len(pos), k=1)
    gap = np.maximum(0.0, d_min - d[iu])
    return float(np.sum(gap ** 2))


def pso_optimize(objective, panel, count, d_min: float,
                 config: PsoConfig = None,
                 rng: np.random.Generator = None) -> PsoResult:
    """Global-best PSO over antenna positions with a distance penalty.

    ``panel``/``count`` may be single values or parallel lists describing
    several antenna groups; the objective receives one (K, 2) array per
    group (a bare array in the single-group case) and is minimized.
    Fitness adds ``penalty_weight * sum max(0, d_min - dist)^2`` over all
    pairs so infeasible swarms are pushed apart.  Deterministic given rng.
    """
    config = config or PsoConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    panels = panel if isinstance(panel, (list, tuple)) else [panel]
    counts = count if isinstance(count, (list, tuple)) else [count]
    single = not isinstance(panel, (list, tuple))
    dim = 2 * sum(counts)
    lb = np.concatenate([np.tile(p.lo, k) for p, k in zip(panels, counts)])
    ub = np.concatenate([np.tile(p.hi, k) for p, k in zip(panels, counts)])

    def decode(x):
        groups, off = [], 0
        for k in counts:
            groups.append(x[off:off + 2 * k].reshape(k, 2))
            off += 2 * k
        return groups

    def raw(x):
        groups = decode(x)
        return float(objective(groups[0] if single else groups))

    def violation(x):
        return sum(_pairwise_violation(g, d_min) for g in decode(x))

    s = config.swarm_size
    x = rng.uniform(lb, ub, size=(s, dim))
    vspan = ub - lb
    v = rng.uniform(-vspan, vspan, size=(s, dim))
    raw_vals = np.array([raw(xi) for xi in x])
    pw = config.penalty_weight
    if pw is None:
        pw = 100.0 * max(1.0, float(np.abs(raw_vals).max()))
    fit = raw_vals + pw * np.array([violation(xi) for xi in x])
    pbest_x, pbest_f = x.copy(), fit.copy()
    gi = int(np.argmin(fit))
    gbest_x, gbest_f = x[gi].copy(), float(fit[gi])

    for _ in range(config.max_iters):
        r1 = rng.uniform(size=(s, dim))
        r2 = rng.uniform(size=(s, dim))
        v = (config.inertia * v
             + config.cognitive * r1 * (pbest_x - x)
             + config.social * r2 * (gbest_x - x))
        np.clip(v, -vspan, vspan, out=v)
        x = np.clip(x + v, lb, ub)
        fit = np.array([raw(xi) + pw * violation(xi) for xi in x])
        better = fit < pbest_f
        pbest_x[better] = x[better]
        pbest_f[better] = fit[better]
        gi = int(np.argmin(pbest_f))
        if pbest_f[gi] < gbest_f:
            gbest_f = float(pbest_f[gi])
            gbest_x = pbest_x[gi].copy()

    groups = decode(gbest_x)
    feasible = all(len(g) < 2 or min_pairwise_distance(g) >= d_min - 1e-9
                   for g in groups)
    return PsoResult(positions=groups, value=raw(gbest_x), feasible=feasible)
