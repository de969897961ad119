"""Field-response channel model under far-field, quasi-static propagation.

The channel between N transmit and M receive antennas decomposes as
``H = F^H @ Sigma @ G`` where the columns of F and G are unit-modulus
per-path phase vectors determined solely by the antenna positions, and
Sigma couples transmit paths to receive paths.  All lengths are in
wavelengths (lambda = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_point

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PathAngles:
    """Elevation/azimuth pairs per propagation path, for both link ends.

    Angles are in radians within [0, pi).  The derived direction factors are
    sin(theta)*cos(phi) for the x coordinate and cos(theta) for y.
    """

    theta_tx: np.ndarray
    phi_tx: np.ndarray
    theta_rx: np.ndarray
    phi_rx: np.ndarray

    def __post_init__(self):
        for name in ("theta_tx", "phi_tx", "theta_rx", "phi_rx"):
            a = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if np.any(a < 0) or np.any(a >= np.pi):
                raise ValueError(f"{name} must lie in [0, pi)")
            object.__setattr__(self, name, a)

    def direction_factors(self, side: str):
        """(alpha, beta) arrays such that phase = 2*pi*(alpha*x + beta*y)."""
        if side == "tx":
            theta, phi = self.theta_tx, self.phi_tx
        elif side == "rx":
            theta, phi = self.theta_rx, self.phi_rx
        else:
            raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")
        return np.sin(theta) * np.cos(phi), np.cos(theta)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of path angles and the path response matrix."""

    angles: PathAngles
    sigma: np.ndarray  # complex (L_r, L_t) path response matrix
    kappa: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma",
                           np.atleast_2d(np.asarray(self.sigma, dtype=complex)))

    @property
    def num_paths(self) -> int:
        return self.sigma.shape[0]


def field_response_vector(pos, angles: PathAngles, side: str) -> np.ndarray:
    """Per-path unit-modulus response of one antenna at ``pos``.

    Element q equals exp(j*2*pi*(sin(theta_q)cos(phi_q)*x + cos(theta_q)*y)).
    """
    p = as_point(pos)
    alpha, beta = angles.direction_factors(side)
    return np.exp(1j * TWO_PI * (alpha * p[0] + beta * p[1]))


def response_matrix(positions, angles: PathAngles, side: str) -> np.ndarray:
    """Stack field responses of many antennas into an (L, K) matrix."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    alpha, beta = angles.direction_factors(side)
    phase = TWO_PI * (np.outer(alpha, pos[:, 0]) + np.outer(beta, pos[:, 1]))
    return np.exp(1j * phase)


def assemble_channel(tx_positions, rx_positions,
                     realization: ChannelRealization) -> np.ndarray:
    """Channel matrix H = F^H Sigma G for the given antenna positions."""
    G = response_matrix(tx_positions, realization.angles, "tx")
    F = response_matrix(rx_positions, realization.angles, "rx")
    lr, lt = realization.sigma.shape
    if F.shape[0] != lr or G.shape[0] != lt:
        raise ValueError(
            f"path count mismatch: sigma is {realization.sigma.shape}, "
            f"F has {F.shape[0]} paths, G has {G.shape[0]}")
    return F.conj().T @ realization.sigma @ G


def sample_geometric_channel(L: int, kappa: float,
                             rng: np.random.Generator) -> ChannelRealization:
    """Draw a random diagonal-path channel realization.

    The path response matrix is diagonal with the first entry carrying the
    line-of-sight power ratio kappa/(kappa+1) and the remaining L-1 entries
    sharing the rest equally, so the expected total path power is 1.  All
    angles are i.i.d. uniform over [0, pi).
    """
    if L < 1:
        raise ValueError("need at least one path")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    theta_tx = rng.uniform(0.0, np.pi, L)
    phi_tx = rng.uniform(0.0, np.pi, L)
    theta_rx = rng.uniform(0.0, np.pi, L)
    phi_rx = rng.uniform(0.0, np.pi, L)
    var = np.empty(L)
    var[0] = kappa / (kappa + 1.0)
    if L > 1:
        var[1:] = 1.0 / ((kappa + 1.0) * (L - 1))
    scale = np.sqrt(var / 2.0)
    entries = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    angles = PathAngles(theta_tx, phi_tx, theta_rx, phi_rx)
    return ChannelRealization(angles=angles, sigma=np.diag(entries), kappa=kappa)
