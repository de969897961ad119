"""Regularized zero-forcing precoding with movable transmit antennas.

The precoder admits a closed form at fixed positions; the transmit antenna
positions minimize ``||I - H W||_F^2 + alpha ||W||_F^2`` under the penalty
engine.  Sum rate is evaluated after normalizing the precoder to the power
budget and serves as the reported metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, assemble_channel, response_matrix, \
    sample_geometric_channel
from .geometry import Panel
from .penalty import CasePlugin, PositionBlock, run_penalty_ao


class ZeroPrecoder(RuntimeError):
    """Raised when asked to rate a precoder with zero Frobenius norm."""


@dataclass
class RzfProblem:
    realization: ChannelRealization
    user_positions: np.ndarray  # (M, 2), fixed
    tx_positions: np.ndarray    # (N, 2), movable
    panel: Panel
    alpha: float
    sigma2: float               # per-user noise power
    p_max: float                # power budget for rate evaluation
    w: np.ndarray = None        # (N, M) precoder

    def __post_init__(self):
        self.user_positions = np.array(self.user_positions, dtype=float).reshape(-1, 2)
        self.tx_positions = np.array(self.tx_positions, dtype=float).reshape(-1, 2)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.w is None:
            self.w = np.zeros((len(self.tx_positions),
                               len(self.user_positions)), dtype=complex)

    @property
    def channel(self) -> np.ndarray:
        """H with one row per user, one column per transmit antenna."""
        return assemble_channel(self.tx_positions, self.user_positions,
                                self.realization)


def rzf_objective(problem: RzfProblem, rho: float = 0.0, aux=None) -> float:
    """Precoding cost, plus the position penalty term when rho is given."""
    h = problem.channel
    m = h.shape[0]
    res = np.eye(m) - h @ problem.w
    val = float(np.sum(np.abs(res) ** 2)
                + problem.alpha * np.sum(np.abs(problem.w) ** 2))
    if rho and aux is not None:
        val += rho * float(np.sum((problem.tx_positions - np.asarray(aux)) ** 2))
    return val


def rzf_closed_form(h: np.ndarray, alpha: float) -> np.ndarray:
    """Cost-minimizing precoder W = H^H (H H^H + alpha I)^{-1}."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    m = h.shape[0]
    return h.conj().T @ np.linalg.inv(h @ h.conj().T + alpha * np.eye(m))


def position_gradients(problem: RzfProblem, rho: float = 0.0,
                       aux=None) -> np.ndarray:
    """(N, 2) gradient of the penalized precoding cost."""
    sg = problem.realization.sigma
    f = response_matrix(problem.user_positions, problem.realization.angles, "rx")
    g = response_matrix(problem.tx_positions, problem.realization.angles, "tx")
    b = f.conj().T @ sg                         # (M, L_t)
    h = b @ g
    m = h.shape[0]
    res = np.eye(m) - h @ problem.w
    y = -b.conj().T @ res @ problem.w.conj().T  # (L_t, N)
    inner = np.imag(np.conj(y) * g)             # (L_t, N)
    alpha_t, beta_t = problem.realization.angles.direction_factors("tx")
    grad = -4.0 * np.pi * np.stack([alpha_t @ inner, beta_t @ inner], axis=1)
    if rho and aux is not None:
        grad = grad + 2.0 * rho * (problem.tx_positions - np.asarray(aux))
    return grad


def rzf_position_gradient(problem: RzfProblem, n: int, rho: float = 0.0,
                          aux=None) -> np.ndarray:
    return position_gradients(problem, rho, aux)[n]


def sum_rate(problem: RzfProblem) -> float:
    """Sum rate after scaling the precoder to the power budget.

    The precoder is scaled so ||W||_F^2 = p_max, then standard per-user
    SINRs are accumulated.
    """
    norm = np.linalg.norm(problem.w)
    if norm == 0.0:
        raise ZeroPrecoder("precoder has zero norm")
    w = problem.w * (np.sqrt(problem.p_max) / norm)
    hw = problem.channel @ w                    # (M, M): h_m^H w_k
    power = np.abs(hw) ** 2
    signal = np.diag(power)
    interference = power.sum(axis=1) - signal
    sinr = signal / (interference + problem.sigma2)
    return float(np.sum(np.log2(1.0 + sinr)))


class RzfPlugin(CasePlugin):
    """Penalty-engine plugin: precoder update plus the transmit block."""

    def __init__(self, problem: RzfProblem, d_min: float):
        self.problem = problem
        self.d_min = d_min
        self.blocks = [PositionBlock("tx", problem.tx_positions,
                                     problem.tx_positions.copy(),
                                     problem.panel)]

    def update_other_vars(self):
        self.problem.w = rzf_closed_form(self.problem.channel,
                                         self.problem.alpha)

    def raw_objective(self) -> float:
        return rzf_objective(self.problem)

    def position_gradient(self, block_index: int, rho: float) -> np.ndarray:
        return position_gradients(self.problem, rho,
                                  aux=self.blocks[block_index].aux)


def sum_rate_metric(problem: RzfProblem, tx_positions) -> float:
    """Sum rate with the closed-form precoder at fixed positions."""
    work = RzfProblem(
        realization=problem.realization,
        user_positions=problem.user_positions,
        tx_positions=np.array(tx_positions, dtype=float),
        panel=problem.panel,
        alpha=problem.alpha,
        sigma2=problem.sigma2,
        p_max=problem.p_max)
    work.w = rzf_closed_form(work.channel, work.alpha)
    return sum_rate(work)


def sample_rzf_problem(config, rng: np.random.Generator) -> RzfProblem:
    """Draw the channel for one trial; users sit on a fixed line."""
    realization = sample_geometric_channel(config.num_paths, config.kappa, rng)
    m = config.n_rx
    users = np.stack([np.arange(m) * config.user_spacing, np.zeros(m)], axis=1)
    p_max = config.sigma2 * 10.0 ** (config.snr_db / 10.0)
    alpha = config.rzf_alpha
    if alpha is None:
        alpha = m * config.sigma2 / p_max
    return RzfProblem(
        realization=realization,
        user_positions=users,
        tx_positions=np.zeros((config.n_tx, 2)),
        panel=Panel.square(config.panel_a),
        alpha=alpha,
        sigma2=config.sigma2,
        p_max=p_max)


def run_rzf_case(config, rng: np.random.Generator, trial: int = 0,
                 seed: int = 0):
    """Run one penalty-optimized precoding trial and package the record."""
    from .harness import record_from_result

    problem = sample_rzf_problem(config, rng)
    plugin = RzfPlugin(problem, config.d_min)
    result = run_penalty_ao(plugin, config.schedule(), config.stop_rule(), rng=rng)
    metric = sum_rate_metric(problem, result.positions["tx"])
    return record_from_result(config, trial, seed, metric, result)
