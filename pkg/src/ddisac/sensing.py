"""Echo model, Fisher information, and delay/Doppler estimation bounds.

A single point target reflects the transmitted TF frame back with delay
``tau``, Doppler ``nu``, reflectivity ``beta``, and a propagation gain that
falls off as ``gain_const / tau**2``. The receiver observes the mean echo on
the DD grid in white noise of variance ``sigma2``. Estimation accuracy for
(tau, nu) is bounded by the inverse Fisher information; the delay entry
carries extra terms because the gain itself depends on the delay.

The quadruple phase sums factorize into two small matrix products, which is
what makes per-candidate evaluation cheap inside the optimiser loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import DDGrid, isfft
from .precoding import PrecoderSet, StreamSymbols, compose_tx

__all__ = [
    "SensingTarget",
    "EchoField",
    "WaveformMoments",
    "FimResult",
    "SingularFimError",
    "default_target",
    "echo_mean",
    "echo_derivatives",
    "waveform_moments",
    "fim",
    "crb",
    "sensing_for_precoders",
]


@dataclass(frozen=True)
class SensingTarget:
    tau: float                   # round-trip delay in seconds, > 0
    nu: float                    # Doppler shift in Hz
    beta: complex = 1.0 + 0j     # complex reflectivity
    gain_const: float = 1e-9     # c in gain(tau) = c / tau^2
    sigma2: float = 1e-3         # echo noise variance

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"target delay must be positive, got {self.tau}")
        if self.sigma2 <= 0:
            raise ValueError(f"echo noise variance must be positive, got {self.sigma2}")
        if self.gain_const <= 0:
            raise ValueError(f"gain constant must be positive, got {self.gain_const}")

    @property
    def echo_gain(self) -> float:
        """Propagation gain at the target delay."""
        return self.gain_const / self.tau**2


def default_target(p_max: float = 1.0, echo_snr_db: float = 10.0) -> SensingTarget:
    """Reference target: 100 us delay, Doppler on the third grid line.

    The echo noise variance is set so that the received echo power at full
    budget sits ``echo_snr_db`` above the noise.
    """
    tau, nu, beta, c = 1.0e-4, 4687.5, 1.0 + 0j, 1e-9
    gain = c / tau**2
    sigma2 = (gain * abs(beta)) ** 2 * p_max / 10.0 ** (echo_snr_db / 10.0)
    return SensingTarget(tau=tau, nu=nu, beta=beta, gain_const=c, sigma2=sigma2)


@dataclass
class EchoField:
    """Mean echo on the DD grid and its parameter derivatives.

    All arrays are (M, N), indexed [delay bin, Doppler bin]. The delay
    derivative splits into the gain part (from the 1/tau^2 falloff) and the
    phase part; ``d_tau`` is their sum.
    """

    mu: np.ndarray
    d_nu: np.ndarray | None = None
    d_tau: np.ndarray | None = None
    d_gain: np.ndarray | None = None
    d_phase_tau: np.ndarray | None = None


@dataclass
class WaveformMoments:
    s_n: float        # slot-index weighted energy
    s_i: float        # subcarrier-index weighted energy
    c_taunu: float    # phase-delay / Doppler cross term
    c_mutau: float    # echo / phase-delay cross term
    c_munu: float     # echo / Doppler cross term
    p_mu: float       # echo energy


@dataclass
class FimResult:
    i_tautau: float
    i_nunu: float
    i_taunu: float
    det: float
    crb_tau: float    # s^2
    crb_nu: float     # Hz^2


class SingularFimError(ValueError):
    """The Fisher matrix is not positive definite for this waveform."""

    def __init__(self, message: str, moments: WaveformMoments | None = None):
        super().__init__(message)
        self.moments = moments


@lru_cache(maxsize=64)
def _phase_operators(tau: float, nu: float, grid: DDGrid):
    """Left/right phase matrices that turn the echo sums into matmuls.

    The (l, k) output cell of U @ (X @ V) equals the double sum over (n, i)
    of X[n, i] times the echo phase, so one pair of small products replaces
    the quadruple loop.
    """
    m_idx = np.arange(grid.M)
    n_idx = np.arange(grid.N)
    # (M, N): rows are delay bins l, columns time slots n
    u = np.exp(2j * np.pi * (nu * grid.T - m_idx[:, None] / grid.N) * n_idx[None, :])
    # (M, N): rows are subcarriers i, columns Doppler bins k
    v = np.exp(-2j * np.pi * m_idx[:, None] * (tau * grid.delta_f - n_idx[None, :] / grid.M))
    return u, v


def _check_frame(x: np.ndarray, grid: DDGrid) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (grid.N, grid.M):
        raise ValueError(f"TF frame has shape {x.shape}, expected ({grid.N}, {grid.M})")
    return x


def echo_mean(x: np.ndarray, target: SensingTarget, grid: DDGrid) -> EchoField:
    """Mean received echo over the DD grid for one transmitted TF frame."""
    x = _check_frame(x, grid)
    u, v = _phase_operators(target.tau, target.nu, grid)
    scale = target.echo_gain * target.beta / np.sqrt(grid.M * grid.N)
    return EchoField(mu=scale * (u @ (x @ v)))


def echo_derivatives(x: np.ndarray, target: SensingTarget, grid: DDGrid) -> EchoField:
    """Mean echo plus its delay and Doppler derivatives.

    The Doppler derivative weights the sum by the slot index; the delay
    derivative combines the gain falloff term -2 mu / tau with a
    subcarrier-weighted phase term.
    """
    x = _check_frame(x, grid)
    u, v = _phase_operators(target.tau, target.nu, grid)
    scale = target.echo_gain * target.beta / np.sqrt(grid.M * grid.N)
    n_idx = np.arange(grid.N)
    i_idx = np.arange(grid.M)

    xv = x @ v
    mu = scale * (u @ xv)
    d_nu = 2j * np.pi * grid.T * scale * ((u * n_idx[None, :]) @ xv)
    d_phase_tau = -2j * np.pi * grid.delta_f * scale * (u @ ((x * i_idx[None, :]) @ v))
    d_gain = (-2.0 / target.tau) * mu
    return EchoField(mu=mu, d_nu=d_nu, d_tau=d_gain + d_phase_tau,
                     d_gain=d_gain, d_phase_tau=d_phase_tau)


def waveform_moments(field: EchoField, x: np.ndarray, target: SensingTarget,
                     grid: DDGrid) -> WaveformMoments:
    """Second-order waveform statistics entering the Fisher information.

    ``s_n`` and ``s_i`` are the index-weighted phase-sum energies of the raw
    frame (no gain factors); the cross terms couple the echo and its
    derivative fields.
    """
    if field.d_nu is None or field.d_phase_tau is None:
        raise ValueError("moments need the full derivative field")
    x = _check_frame(x, grid)
    u, v = _phase_operators(target.tau, target.nu, grid)
    n_idx = np.arange(grid.N)
    i_idx = np.arange(grid.M)
    s_n = float(np.linalg.norm((u * n_idx[None, :]) @ (x @ v)) ** 2)
    s_i = float(np.linalg.norm(u @ ((x * i_idx[None, :]) @ v)) ** 2)
    return WaveformMoments(
        s_n=s_n,
        s_i=s_i,
        c_taunu=float(np.vdot(field.d_phase_tau, field.d_nu).real),
        c_mutau=float(np.vdot(field.mu, field.d_phase_tau).real),
        c_munu=float(np.vdot(field.mu, field.d_nu).real),
        p_mu=float(np.vdot(field.mu, field.mu).real),
    )


def fim(moments: WaveformMoments, target: SensingTarget, grid: DDGrid) -> FimResult:
    """Assemble the 2x2 Fisher matrix over (tau, nu) and invert it.

    The tau-tau entry carries three pieces: the gain-falloff information,
    the subcarrier phase information, and their cross term. Raises
    SingularFimError (with the moments attached) when the matrix is not
    positive definite, e.g. for waveforms with no slot diversity.
    """
    mn = grid.M * grid.N
    ab2 = (target.echo_gain * abs(target.beta)) ** 2
    s2 = target.sigma2
    tau = target.tau

    i_nunu = 2.0 * (2.0 * np.pi * grid.T) ** 2 * ab2 * moments.s_n / (mn * s2)
    i_tautau = (8.0 * moments.p_mu / (s2 * tau**2)
                + 2.0 * (2.0 * np.pi * grid.delta_f) ** 2 * ab2 * moments.s_i / (mn * s2)
                - 8.0 * moments.c_mutau / (s2 * tau))
    i_taunu = 2.0 * moments.c_taunu / s2 - 4.0 * moments.c_munu / (s2 * tau)
    det = i_tautau * i_nunu - i_taunu**2
    if det <= 0:
        raise SingularFimError(
            f"Fisher matrix is singular or indefinite (det={det:.3e})", moments)
    return FimResult(i_tautau=i_tautau, i_nunu=i_nunu, i_taunu=i_taunu, det=det,
                     crb_tau=i_nunu / det, crb_nu=i_tautau / det)


def crb(f: FimResult) -> tuple[float, float]:
    """Diagonal of the inverse Fisher matrix: (delay bound s^2, Doppler bound Hz^2)."""
    if f.det <= 0:
        raise SingularFimError(f"Fisher matrix is singular (det={f.det:.3e})")
    return f.i_nunu / f.det, f.i_tautau / f.det


def sensing_for_precoders(p: PrecoderSet, s: StreamSymbols, target: SensingTarget,
                          grid: DDGrid) -> FimResult:
    """End-to-end bounds for one precoder set and symbol draw."""
    x_tf = isfft(compose_tx(p, s), grid)
    field = echo_derivatives(x_tf, target, grid)
    moments = waveform_moments(field, x_tf, target, grid)
    return fim(moments, target, grid)
