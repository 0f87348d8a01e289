"""Sparse delay-Doppler multipath channels and their matrix operators.

A channel is a small set of on-grid paths, each with an integer delay bin,
an integer Doppler bin and a complex gain. Applying it to a DD frame is a
twisted circular convolution: the frame is cyclically shifted by the path's
delay/Doppler offsets and picks up the phase ``exp(j2pi (l - l_p) k_p / (M N))``.
The matrix form of that linear map (under the ``d = m*M + l`` flattening) is
exactly sparse: one nonzero per path per row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import DDGrid

__all__ = [
    "PathConfig",
    "PathSet",
    "EffectiveChannel",
    "ChannelEstimate",
    "gen_paths",
    "build_effective",
    "apply_icsi",
]


@dataclass(frozen=True)
class PathConfig:
    """Delay/Doppler support of the multipath channel (bin indices)."""

    delays: tuple[int, ...] = (0, 1, 2, 3)
    dopplers: tuple[int, ...] = (0, 2, -1, 3)

    def __post_init__(self):
        if len(self.delays) != len(self.dopplers):
            raise ValueError(
                f"delays ({len(self.delays)}) and dopplers ({len(self.dopplers)}) differ in length"
            )
        if len(self.delays) == 0:
            raise ValueError("at least one path is required")


@dataclass
class PathSet:
    """Realised multipath channel: per-path integer bins and complex gains.

    ``gen_paths`` normalises gains to unit total energy; estimated path sets
    produced by ``apply_icsi`` carry the (unnormalised) perturbed gains.
    """

    delays: np.ndarray    # (P,) int, 0 <= l_p < M
    dopplers: np.ndarray  # (P,) int, -N/2 <= k_p < N/2
    gains: np.ndarray     # (P,) complex

    @property
    def num_paths(self) -> int:
        return len(self.gains)


@dataclass
class EffectiveChannel:
    """Dense matrix form of the sparse DD channel operator."""

    matrix: np.ndarray    # (N_dd, N_dd) complex
    source: PathSet


@dataclass
class ChannelEstimate:
    """Imperfect channel knowledge handed to the precoder/filter design."""

    matrix: np.ndarray        # (N_dd, N_dd) complex, built from estimated gains
    error_variance: float     # total relative error power sigma_e^2 (linear)
    paths: PathSet = field(repr=False, default=None)


def _draw_cn(rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def gen_paths(grid: DDGrid, config: PathConfig, rng: np.random.Generator) -> PathSet:
    """Draw a channel realisation on the configured delay/Doppler support.

    Gains are i.i.d. complex Gaussian, then normalised to unit total energy
    so the channel neither amplifies nor attenuates on average.
    """
    delays = np.asarray(config.delays, dtype=int)
    dopplers = np.asarray(config.dopplers, dtype=int)
    if delays.min() < 0 or delays.max() >= grid.M:
        raise ValueError(f"path delays {delays.tolist()} outside [0, {grid.M})")
    if dopplers.min() < -grid.N // 2 or dopplers.max() >= (grid.N + 1) // 2:
        raise ValueError(
            f"path Dopplers {dopplers.tolist()} outside [{-grid.N // 2}, {(grid.N + 1) // 2})"
        )
    gains = _draw_cn(rng, len(delays))
    gains /= np.linalg.norm(gains)
    return PathSet(delays=delays, dopplers=dopplers, gains=gains)


def build_effective(paths: PathSet, grid: DDGrid) -> EffectiveChannel:
    """Assemble the N_dd x N_dd matrix of the twisted-convolution channel.

    Row d_out = m*M + l, column d_in = ((m - k_p) mod N)*M + ((l - l_p) mod M),
    entry ``g_p * exp(j2pi (l - l_p) k_p / (M N))`` accumulated over paths.
    """
    M, N = grid.M, grid.N
    n_dd = grid.n_dd
    H = np.zeros((n_dd, n_dd), dtype=np.complex128)
    l_out = np.arange(M)[:, None]            # (M, 1)
    m_out = np.arange(N)[None, :]            # (1, N)
    rows = (m_out * M + l_out).reshape(-1)
    for l_p, k_p, g in zip(paths.delays, paths.dopplers, paths.gains):
        cols = (((m_out - k_p) % N) * M + ((l_out - l_p) % M)).reshape(-1)
        phase = np.exp(2j * np.pi * (l_out - l_p) * k_p / (M * N)).repeat(N, axis=1).reshape(-1)
        H[rows, cols] += g * phase
    return EffectiveChannel(matrix=H, source=paths)


def apply_icsi(
    paths: PathSet, sigma_e2: float, rng: np.random.Generator, grid: DDGrid
) -> tuple[PathSet, ChannelEstimate]:
    """Perturb the path gains to model imperfect channel knowledge.

    Each gain receives i.i.d. complex Gaussian error of variance
    ``sigma_e2 / P`` so the total relative error power is ``sigma_e2``;
    the estimate matrix is rebuilt from the perturbed gains and therefore
    keeps the true sparsity pattern.

    Returns the estimated path set and the matching ChannelEstimate.
    """
    if sigma_e2 < 0:
        raise ValueError(f"error variance must be nonnegative, got {sigma_e2}")
    P = paths.num_paths
    errors = _draw_cn(rng, P) * np.sqrt(sigma_e2 / P)
    est = PathSet(delays=paths.delays.copy(), dopplers=paths.dopplers.copy(),
                  gains=paths.gains + errors)
    H_hat = build_effective(est, grid).matrix
    return est, ChannelEstimate(matrix=H_hat, error_variance=sigma_e2, paths=est)
