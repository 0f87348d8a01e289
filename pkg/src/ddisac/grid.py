"""Delay-Doppler grid geometry and the ISFFT/SFFT symbol transforms.

Conventions used throughout the package:

* A delay-Doppler (DD) frame is a 1-D complex vector of length ``N_dd = M*N``
  flattened as ``d = m*M + l`` (Doppler-major), with delay bin ``l`` in
  ``[0, M)`` and Doppler bin ``m`` in ``[0, N)``.
* A time-frequency (TF) frame is a 2-D complex array ``X[n, i]`` of shape
  ``(N, M)`` with time index ``n`` in ``[0, N)`` and frequency index ``i``
  in ``[0, M)``.

Both transforms use the symmetric ``1/sqrt(N*M)`` normalisation, so they are
unitary and norm-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DDGrid", "isfft", "sfft", "dd_vec_to_grid", "dd_grid_to_vec"]


@dataclass(frozen=True)
class DDGrid:
    """Critically sampled OTFS grid: M delay bins x N Doppler bins.

    ``T * delta_f == 1`` is enforced at construction; delay resolution is
    ``1/(M*delta_f)`` and Doppler resolution ``1/(N*T)``.
    """

    M: int = 4            # delay bins
    N: int = 8            # Doppler bins
    delta_f: float = 12.5e3   # subcarrier spacing [Hz]
    T: float = 80e-6          # symbol duration [s]

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"grid dimensions must be positive, got M={self.M}, N={self.N}")
        if self.delta_f <= 0 or self.T <= 0:
            raise ValueError("delta_f and T must be positive")
        if abs(self.T * self.delta_f - 1.0) > 1e-9:
            raise ValueError(
                f"grid is not critically sampled: T*delta_f = {self.T * self.delta_f!r}, expected 1"
            )

    @property
    def n_dd(self) -> int:
        return self.M * self.N

    @property
    def delay_resolution(self) -> float:
        """Delay bin width [s]."""
        return 1.0 / (self.M * self.delta_f)

    @property
    def doppler_resolution(self) -> float:
        """Doppler bin width [Hz]."""
        return 1.0 / (self.N * self.T)


def dd_vec_to_grid(x: np.ndarray, grid: DDGrid) -> np.ndarray:
    """Reshape a flat DD vector into an (M, N) array indexed [l, m]."""
    x = np.asarray(x)
    if x.shape != (grid.n_dd,):
        raise ValueError(f"DD frame has shape {x.shape}, expected ({grid.n_dd},)")
    return x.reshape(grid.N, grid.M).T


def dd_grid_to_vec(x_lm: np.ndarray, grid: DDGrid) -> np.ndarray:
    """Flatten an (M, N) array indexed [l, m] back to the d = m*M + l vector."""
    x_lm = np.asarray(x_lm)
    if x_lm.shape != (grid.M, grid.N):
        raise ValueError(f"DD grid has shape {x_lm.shape}, expected ({grid.M}, {grid.N})")
    return x_lm.T.reshape(-1)


def isfft(x: np.ndarray, grid: DDGrid) -> np.ndarray:
    """Map a DD frame to TF symbols.

    Computes ``X[n,i] = (1/sqrt(N*M)) * sum_{l,m} x[l,m] exp(j2pi(n*m/N - i*l/M))``
    via row/column FFTs.

    Parameters
    ----------
    x : (N_dd,) complex array, flattened as d = m*M + l
    grid : DDGrid

    Returns
    -------
    (N, M) complex array X[n, i]
    """
    x_lm = dd_vec_to_grid(np.asarray(x, dtype=np.complex128), grid)
    # sum over m with e^{+j2pi nm/N} is N*ifft; sum over l with e^{-j2pi il/M} is fft
    tmp = np.fft.ifft(x_lm, axis=1)          # (M, N) indexed [l, n], scaled 1/N
    X_in = np.fft.fft(tmp, axis=0)           # (M, N) indexed [i, n]
    return X_in.T * (grid.N / np.sqrt(grid.N * grid.M))


def sfft(X: np.ndarray, grid: DDGrid) -> np.ndarray:
    """Map TF symbols back to a DD frame; exact inverse of :func:`isfft`.

    Parameters
    ----------
    X : (N, M) complex array X[n, i]
    grid : DDGrid

    Returns
    -------
    (N_dd,) complex array, flattened as d = m*M + l
    """
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != (grid.N, grid.M):
        raise ValueError(f"TF frame has shape {X.shape}, expected ({grid.N}, {grid.M})")
    tmp = np.fft.fft(X, axis=0)              # (N, M) indexed [m, i]
    x_ml = np.fft.ifft(tmp, axis=1)          # (N, M) indexed [m, l], scaled 1/M
    return x_ml.reshape(-1) * (grid.M / np.sqrt(grid.N * grid.M))
