"""Rate-splitting precoder sets: power budget, common/private split, symbols.

A precoder set holds one common precoder plus one private precoder per user,
all complex vectors on the DD grid. The split factor ``alpha`` fixes how the
total budget ``p_max`` divides between the common stream (``alpha * p_max``)
and the private block (``(1 - alpha) * p_max``); power shares *within* the
private block are free and controlled by the optimiser through gene
magnitudes. The budget inequality is always enforced as an equality by
projection, since the rates are monotone in transmit power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegeneratePrecoderError",
    "PrecoderSet",
    "StreamSymbols",
    "decode_chromosome",
    "encode_precoders",
    "normalize_power",
    "compose_tx",
    "draw_symbols",
]


class DegeneratePrecoderError(ValueError):
    """A precoder block is identically zero but must carry nonzero power."""


@dataclass
class PrecoderSet:
    common: np.ndarray     # (N_dd,) complex
    privates: np.ndarray   # (K, N_dd) complex
    alpha: float           # common-stream power fraction in [0, 1]
    p_max: float           # total power budget

    @property
    def num_users(self) -> int:
        return self.privates.shape[0]

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.common) ** 2) + np.sum(np.abs(self.privates) ** 2))


@dataclass
class StreamSymbols:
    """Unit-power data symbols: one common, one private per user."""

    s_c: complex
    s_p: np.ndarray  # (K,) complex


def draw_symbols(num_users: int, rng: np.random.Generator) -> StreamSymbols:
    """Draw unit-modulus symbols with uniform random phase."""
    phases = rng.uniform(0.0, 2.0 * np.pi, size=num_users + 1)
    sym = np.exp(1j * phases)
    return StreamSymbols(s_c=complex(sym[0]), s_p=sym[1:])


def normalize_power(p: PrecoderSet, alpha: float | None = None,
                    p_max: float | None = None) -> PrecoderSet:
    """Project a precoder set onto the exact power split.

    The common precoder is scaled to power ``alpha * p_max`` and the private
    block jointly to ``(1 - alpha) * p_max``, preserving relative power among
    private streams. ``alpha == 0`` zeroes the common precoder, ``alpha == 1``
    zeroes all private ones.

    Raises
    ------
    DegeneratePrecoderError
        If a block that must carry power is identically zero.
    """
    alpha = p.alpha if alpha is None else alpha
    p_max = p.p_max if p_max is None else p_max
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if p_max <= 0:
        raise ValueError(f"p_max must be positive, got {p_max}")

    common_pow = np.sum(np.abs(p.common) ** 2)
    private_pow = np.sum(np.abs(p.privates) ** 2)

    if alpha == 0.0:
        common = np.zeros_like(p.common)
    else:
        if common_pow == 0.0:
            raise DegeneratePrecoderError("common precoder is zero but alpha > 0")
        common = p.common * np.sqrt(alpha * p_max / common_pow)

    if alpha == 1.0:
        privates = np.zeros_like(p.privates)
    else:
        if private_pow == 0.0:
            raise DegeneratePrecoderError("private precoders are all zero but alpha < 1")
        privates = p.privates * np.sqrt((1.0 - alpha) * p_max / private_pow)

    return PrecoderSet(common=common, privates=privates, alpha=alpha, p_max=p_max)


def decode_chromosome(genes: np.ndarray, n_dd: int, num_users: int,
                      alpha: float, p_max: float) -> PrecoderSet:
    """Turn a flat real gene vector into a power-normalised precoder set.

    Genes are consecutive (real, imaginary) pairs filling the common precoder
    first, then each private precoder in user order; length must be exactly
    ``2 * n_dd * (num_users + 1)``.
    """
    genes = np.asarray(genes, dtype=float)
    expected = 2 * n_dd * (num_users + 1)
    if genes.shape != (expected,):
        raise ValueError(f"chromosome has shape {genes.shape}, expected ({expected},)")
    blocks = genes.reshape(num_users + 1, n_dd, 2)
    vectors = blocks[..., 0] + 1j * blocks[..., 1]
    raw = PrecoderSet(common=vectors[0], privates=vectors[1:], alpha=alpha, p_max=p_max)
    return normalize_power(raw)


def encode_precoders(p: PrecoderSet) -> np.ndarray:
    """Inverse of the chromosome layout (up to the power normalisation)."""
    vectors = np.concatenate([p.common[None, :], p.privates], axis=0)
    blocks = np.stack([vectors.real, vectors.imag], axis=-1)
    return blocks.reshape(-1)


def compose_tx(p: PrecoderSet, s: StreamSymbols) -> np.ndarray:
    """Superpose all streams into one transmitted DD frame."""
    if len(s.s_p) != p.num_users:
        raise ValueError(f"got {len(s.s_p)} private symbols for {p.num_users} users")
    return p.common * s.s_c + s.s_p @ p.privates
