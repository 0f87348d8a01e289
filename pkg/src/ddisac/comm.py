"""LMMSE receive filters and stream SINR/rate metrics.

Each user applies two linear filters to its received DD frame: one to decode
the common stream, and one (after cancelling the common stream, imperfectly)
to decode its own private stream. Filters are built from the *estimated*
channel only. Channel estimation error raises the effective noise floor by
``sigma_e2 * p_tot``; imperfect cancellation leaves a fraction ``theta`` of
the common-stream power behind as residual interference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import ChannelEstimate
from .precoding import PrecoderSet

__all__ = [
    "ImpairmentConfig",
    "ReceiveFilters",
    "CommMetrics",
    "lmmse_filters",
    "sinr_common",
    "sinr_private",
    "evaluate_comm",
]

RIDGE = 1e-12


@dataclass
class ImpairmentConfig:
    sigma_n2: float          # AWGN variance
    sigma_e2: float          # channel-estimate error variance
    p_tot: float             # realized total transmit power
    theta: float | np.ndarray = 0.03   # residual common-stream fraction after SIC
    # Whether the residual factor also shapes the private filter's design
    # covariance, or only the SINR evaluation (the filter then assumes the
    # common stream cancels completely).
    theta_in_filter: bool = True

    def __post_init__(self):
        if self.sigma_n2 < 0 or self.sigma_e2 < 0 or self.p_tot < 0:
            raise ValueError("variances and power must be nonnegative")
        th = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if np.any(th < 0) or np.any(th > 1):
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")

    @property
    def noise_floor(self) -> float:
        """Effective per-entry noise power seen by every filter."""
        return self.sigma_n2 + self.sigma_e2 * self.p_tot

    def theta_for(self, k: int, num_users: int) -> float:
        th = np.broadcast_to(np.atleast_1d(np.asarray(self.theta, float)), (num_users,))
        return float(th[k])


@dataclass
class ReceiveFilters:
    w_c: np.ndarray          # (K, N_dd) complex, row filter per user, common stream
    w_p: np.ndarray          # (K, N_dd) complex, row filter per user, private stream
    used_ridge: bool = field(default=False)


def _estimate_list(h_hat, num_users: int) -> list[ChannelEstimate]:
    if isinstance(h_hat, ChannelEstimate):
        return [h_hat] * num_users
    h_list = list(h_hat)
    if len(h_list) != num_users:
        raise ValueError(f"got {len(h_list)} channel estimates for {num_users} users")
    return h_list


def _solve_hermitian(r: np.ndarray, rhs: np.ndarray):
    """Solve r @ z = rhs; fall back to a tiny ridge when r is singular."""
    try:
        return np.linalg.solve(r, rhs), False
    except np.linalg.LinAlgError:
        eye = np.eye(r.shape[0])
        return np.linalg.solve(r + RIDGE * eye, rhs), True


def lmmse_filters(h_hat, p: PrecoderSet, imp: ImpairmentConfig) -> ReceiveFilters:
    """Build per-user LMMSE row filters for the common and private streams.

    For user k with estimated channel ``Hk``, the common filter is
    ``w_c = (P_c^H Hk^H) R^-1`` with ``R`` the received-signal covariance
    (all streams plus the effective noise floor). The private filter uses the
    same form with the common-stream term scaled by the cancellation residual.

    ``h_hat`` may be one ChannelEstimate (shared by all users) or a sequence
    of K estimates.
    """
    k_users = p.num_users
    estimates = _estimate_list(h_hat, k_users)
    n_dd = p.common.shape[0]
    eye = np.eye(n_dd)
    floor = imp.noise_floor

    w_c = np.zeros((k_users, n_dd), dtype=np.complex128)
    w_p = np.zeros((k_users, n_dd), dtype=np.complex128)
    used_ridge = False

    for k in range(k_users):
        hh = estimates[k].matrix
        a_c = hh @ p.common                     # (N_dd,)
        a_p = hh @ p.privates.T                 # (N_dd, K), column j is stream j
        gram_p = a_p @ a_p.conj().T
        gram_c = np.outer(a_c, a_c.conj())

        r_common = gram_c + gram_p + floor * eye
        z_c, ridge_c = _solve_hermitian(r_common, a_c)
        w_c[k] = z_c.conj()

        theta_k = imp.theta_for(k, k_users) if imp.theta_in_filter else 0.0
        r_private = theta_k * gram_c + gram_p + floor * eye
        z_p, ridge_p = _solve_hermitian(r_private, a_p[:, k])
        w_p[k] = z_p.conj()

        used_ridge = used_ridge or ridge_c or ridge_p
    return ReceiveFilters(w_c=w_c, w_p=w_p, used_ridge=used_ridge)


def _safe_ratio(num: float, den: float) -> float:
    # A zero filter (zero-power stream) gives 0/0; the stream carries nothing.
    if den == 0.0:
        return 0.0
    return num / den


def sinr_common(filters: ReceiveFilters, h_hat, p: PrecoderSet,
                imp: ImpairmentConfig) -> np.ndarray:
    """Per-user SINR of the common stream through each user's common filter."""
    k_users = p.num_users
    estimates = _estimate_list(h_hat, k_users)
    floor = imp.noise_floor
    out = np.empty(k_users)
    for k in range(k_users):
        hh = estimates[k].matrix
        w = filters.w_c[k]
        sig = np.abs(w @ (hh @ p.common)) ** 2
        inter = sum(np.abs(w @ (hh @ p.privates[j])) ** 2 for j in range(k_users))
        noise = np.sum(np.abs(w) ** 2) * floor
        out[k] = _safe_ratio(sig, inter + noise)
    return out


def sinr_private(filters: ReceiveFilters, h_hat, p: PrecoderSet,
                 imp: ImpairmentConfig) -> np.ndarray:
    """Per-user SINR of the own private stream after imperfect cancellation.

    The denominator collects other users' private streams, the residual
    ``theta``-scaled common stream, and the effective noise floor.
    """
    k_users = p.num_users
    estimates = _estimate_list(h_hat, k_users)
    floor = imp.noise_floor
    out = np.empty(k_users)
    for k in range(k_users):
        hh = estimates[k].matrix
        w = filters.w_p[k]
        sig = np.abs(w @ (hh @ p.privates[k])) ** 2
        inter = sum(np.abs(w @ (hh @ p.privates[j])) ** 2
                    for j in range(k_users) if j != k)
        residual = imp.theta_for(k, k_users) * np.abs(w @ (hh @ p.common)) ** 2
        noise = np.sum(np.abs(w) ** 2) * floor
        out[k] = _safe_ratio(sig, inter + residual + noise)
    return out


@dataclass
class CommMetrics:
    sinr_c: np.ndarray       # (K,)
    sinr_p: np.ndarray       # (K,)
    rate_c: np.ndarray       # (K,) bits/s/Hz
    rate_p: np.ndarray       # (K,) bits/s/Hz
    r_min: float             # min over users of rate_p
    rc_met: bool             # min over users of rate_c meets the requirement
    used_ridge: bool = False


def evaluate_comm(h_hat, p: PrecoderSet, imp: ImpairmentConfig,
                  r_c_req: float = 0.1) -> CommMetrics:
    """Filters, SINRs and rates for one channel/precoder instance."""
    filters = lmmse_filters(h_hat, p, imp)
    sc = sinr_common(filters, h_hat, p, imp)
    sp = sinr_private(filters, h_hat, p, imp)
    rate_c = np.log2(1.0 + sc)
    rate_p = np.log2(1.0 + sp)
    return CommMetrics(
        sinr_c=sc,
        sinr_p=sp,
        rate_c=rate_c,
        rate_p=rate_p,
        r_min=float(rate_p.min()),
        rc_met=bool(rate_c.min() >= r_c_req),
        used_ridge=filters.used_ridge,
    )
