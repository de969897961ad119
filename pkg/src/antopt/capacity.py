"""MIMO capacity maximization with movable antennas at both link ends.

The case alternates a water-filled transmit covariance with projected
gradient updates of the transmit and receive antenna positions under the
penalty engine.  Gradients are derived by direct matrix calculus on
``-log2 det(I + H Q H^H / sigma^2)`` with respect to the per-antenna field
response vectors and are verified against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, assemble_channel, response_matrix, \
    sample_geometric_channel
from .geometry import Panel
from .penalty import CasePlugin, PositionBlock, run_penalty_ao

LN2 = np.log(2.0)


class ZeroChannel(RuntimeError):
    """Raised when the channel matrix is identically zero."""


@dataclass
class CapacityProblem:
    realization: ChannelRealization
    tx_positions: np.ndarray  # (N, 2)
    rx_positions: np.ndarray  # (M, 2)
    panel_tx: Panel
    panel_rx: Panel
    p_max: float
    sigma2: float
    q: np.ndarray = None  # (N, N) Hermitian PSD, trace <= p_max

    def __post_init__(self):
        self.tx_positions = np.array(self.tx_positions, dtype=float).reshape(-1, 2)
        self.rx_positions = np.array(self.rx_positions, dtype=float).reshape(-1, 2)
        n = len(self.tx_positions)
        if self.q is None:
            self.q = (self.p_max / n) * np.eye(n, dtype=complex)

    @property
    def channel(self) -> np.ndarray:
        return assemble_channel(self.tx_positions, self.rx_positions,
                                self.realization)


def log2det_eye_plus(a: np.ndarray) -> float:
    """log2 det(I + A) for Hermitian PSD A, via Cholesky."""
    m = np.eye(a.shape[0]) + 0.5 * (a + a.conj().T)
    chol = np.linalg.cholesky(m)
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))) / LN2)


def capacity_value(h: np.ndarray, q: np.ndarray, sigma2: float) -> float:
    """Channel capacity log2 det(I + H Q H^H / sigma^2) in bits/s/Hz."""
    return log2det_eye_plus(h @ q @ h.conj().T / sigma2)


def capacity_objective(problem: CapacityProblem) -> float:
    """Negated capacity, the minimization objective of this case."""
    return -capacity_value(problem.channel, problem.q, problem.sigma2)


def water_filling_allocation(singular_values, p_max: float, sigma2: float):
    """Power split over channel modes at a common water level.

    Returns (gamma, nu) with gamma_s = max(nu - sigma2 / s_s^2, 0) and
    sum(gamma) = p_max; the level nu is found by bisection to 1e-12
    absolute accuracy on the allocated power.
    """
    s = np.asarray(singular_values, dtype=float)
    c = sigma2 / (s * s)
    lo = float(c.min())
    hi = lo + p_max
    for _ in range(200):
        nu = 0.5 * (lo + hi)
        power = float(np.sum(np.maximum(nu - c, 0.0)))
        if abs(power - p_max) <= 1e-12:
            break
        if power > p_max:
            hi = nu
        else:
            lo = nu
    gamma = np.maximum(nu - c, 0.0)
    return gamma, nu


def water_filling(h: np.ndarray, p_max: float, sigma2: float) -> np.ndarray:
    """Capacity-optimal transmit covariance at fixed channel H."""
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise ZeroChannel("channel matrix is zero")
    keep = s > s[0] * max(h.shape) * np.finfo(float).eps
    st = s[keep]
    vt = vh[keep].conj().T
    gamma, _ = water_filling_allocation(st, p_max, sigma2)
    q = (vt * gamma) @ vt.conj().T
    return 0.5 * (q + q.conj().T)


def _inverse_detail(problem: CapacityProblem):
    """Shared factors of the position gradients at the current state."""
    sg = problem.realization.sigma
    f = response_matrix(problem.rx_positions, problem.realization.angles, "rx")
    g = response_matrix(problem.tx_positions, problem.realization.angles, "tx")
    k = sg @ g @ problem.q @ g.conj().T @ sg.conj().T
    m = len(problem.rx_positions)
    t = np.eye(m) + f.conj().T @ k @ f / problem.sigma2
    tinv = np.linalg.inv(0.5 * (t + t.conj().T))
    return f, g, sg, k, tinv


def position_gradients(problem: CapacityProblem, which: str,
                       rho: float = 0.0, aux=None) -> np.ndarray:
    """(K, 2) gradient of the penalized objective for one antenna group."""
    f, g, sg, k, tinv = _inverse_detail(problem)
    alpha, beta = problem.realization.angles.direction_factors(which)
    coef = 4.0 * np.pi / (problem.sigma2 * LN2)
    if which == "rx":
        c = k @ f @ tinv
        inner = np.imag(np.conj(f) * c)  # (L_r, M)
        pos, panel_aux = problem.rx_positions, aux
    else:
        a1 = sg.conj().T @ f  # (L_t, M)
        s = a1 @ tinv @ a1.conj().T @ g @ problem.q
        inner = np.imag(np.conj(g) * s)  # (L_t, N)
        pos, panel_aux = problem.tx_positions, aux
    grad = -coef * np.stack([alpha @ inner, beta @ inner], axis=1)
    if rho and panel_aux is not None:
        grad = grad + 2.0 * rho * (pos - np.asarray(panel_aux))
    return grad


def capacity_position_gradient(problem: CapacityProblem, which: str,
                               index: int, rho: float = 0.0,
                               aux=None) -> np.ndarray:
    """Penalized-objective gradient for a single antenna (2-vector)."""
    return position_gradients(problem, which, rho, aux)[index]


class CapacityPlugin(CasePlugin):
    """Penalty-engine plugin: covariance update plus two position blocks."""

    def __init__(self, problem: CapacityProblem, d_min: float):
        self.problem = problem
        self.d_min = d_min
        self.blocks = [
            PositionBlock("rx", problem.rx_positions,
                          problem.rx_positions.copy(), problem.panel_rx),
            PositionBlock("tx", problem.tx_positions,
                          problem.tx_positions.copy(), problem.panel_tx),
        ]

    def update_other_vars(self):
        self.problem.q = water_filling(self.problem.channel,
                                       self.problem.p_max, self.problem.sigma2)

    def raw_objective(self) -> float:
        return capacity_objective(self.problem)

    def position_gradient(self, block_index: int, rho: float) -> np.ndarray:
        b = self.blocks[block_index]
        return position_gradients(self.problem, b.name, rho, aux=b.aux)


def capacity_metric(realization, tx_positions, rx_positions,
                    p_max: float, sigma2: float) -> float:
    """Water-filled capacity at fixed positions (the reported metric)."""
    h = assemble_channel(tx_positions, rx_positions, realization)
    if np.linalg.norm(h) == 0.0:
        return 0.0
    q = water_filling(h, p_max, sigma2)
    return capacity_value(h, q, sigma2)


def sample_capacity_problem(config, rng: np.random.Generator) -> CapacityProblem:
    """Draw the channel for one trial; positions start at the panel center."""
    realization = sample_geometric_channel(config.num_paths, config.kappa, rng)
    panel = Panel.square(config.panel_a)
    p_max = config.sigma2 * 10.0 ** (config.snr_db / 10.0)
    return CapacityProblem(
        realization=realization,
        tx_positions=np.zeros((config.n_tx, 2)),
        rx_positions=np.zeros((config.n_rx, 2)),
        panel_tx=panel, panel_rx=panel,
        p_max=p_max, sigma2=config.sigma2)


def run_capacity_case(config, rng: np.random.Generator, trial: int = 0,
                      seed: int = 0):
    """Run one penalty-optimized capacity trial and package the record."""
    from .harness import record_from_result

    problem = sample_capacity_problem(config, rng)
    plugin = CapacityPlugin(problem, config.d_min)
    result = run_penalty_ao(plugin, config.schedule(), config.stop_rule(), rng=rng)
    metric = capacity_metric(problem.realization, result.positions["tx"],
                             result.positions["rx"], problem.p_max,
                             problem.sigma2)
    return record_from_result(config, trial, seed, metric, result)
