"""Self-contained oracle checks for the numerical core.

Each check recomputes a quantity through an independent brute-force route
(quadruple loops, dense solves, finite differences) and reports the worst
relative error against the library implementation. Library entry points are
called through their modules so a test harness can swap one out and watch
the matching check fail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel, comm, grid as grid_mod, precoding, sensing
from .channel import PathConfig
from .comm import ImpairmentConfig
from .grid import DDGrid

__all__ = ["CheckResult", "CHECK_NAMES", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_rel: float
    tolerance: float


def _rel(err: float, ref: float) -> float:
    return err / ref if ref > 0 else err


def check_isfft(seed: int) -> float:
    """Transform round trip and unitarity on random DD grids."""
    g = DDGrid()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        x_dd = rng.normal(size=g.n_dd) + 1j * rng.normal(size=g.n_dd)
        x_tf = grid_mod.isfft(x_dd, g)
        back = grid_mod.sfft(x_tf, g)
        worst = max(worst, _rel(np.linalg.norm(back - x_dd), np.linalg.norm(x_dd)))
        worst = max(worst, abs(np.linalg.norm(x_tf) - np.linalg.norm(x_dd))
                    / np.linalg.norm(x_dd))
    return worst


def check_channel(seed: int) -> float:
    """Matrix application versus the per-path twisted-convolution sum."""
    g = DDGrid()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        paths = channel.gen_paths(g, PathConfig(), rng)
        h = channel.build_effective(paths, g).matrix
        x = rng.normal(size=g.n_dd) + 1j * rng.normal(size=g.n_dd)
        x_grid = x.reshape(g.N, g.M)
        y = np.zeros((g.N, g.M), dtype=np.complex128)
        for l_p, k_p, gain in zip(paths.delays, paths.dopplers, paths.gains):
            for m in range(g.N):
                for l in range(g.M):
                    phase = np.exp(2j * np.pi * (l - l_p) * k_p / (g.M * g.N))
                    y[m, l] += gain * phase * x_grid[(m - k_p) % g.N, (l - l_p) % g.M]
        worst = max(worst, _rel(np.linalg.norm(h @ x - y.reshape(-1)),
                                np.linalg.norm(y)))
    return worst


def _random_instance(seed: int, alpha: float = 0.3, num_users: int = 2):
    g = DDGrid()
    rng = np.random.default_rng(seed)
    sigma_e2 = 10.0 ** (-2.5)
    estimates = []
    for _ in range(num_users):
        paths = channel.gen_paths(g, PathConfig(), rng)
        _, est = channel.apply_icsi(paths, sigma_e2, rng, g)
        estimates.append(est)
    genes = rng.normal(size=2 * g.n_dd * (num_users + 1))
    p = precoding.decode_chromosome(genes, g.n_dd, num_users, alpha, 1.0)
    imp = ImpairmentConfig(sigma_n2=1.0 / 10.0**2.5, sigma_e2=sigma_e2, p_tot=1.0)
    return g, estimates, p, imp


def check_lmmse(seed: int) -> float:
    """Filter rows versus a dense least-squares solve of the covariance."""
    worst = 0.0
    for trial in range(5):
        g, estimates, p, imp = _random_instance(seed + trial)
        filters = comm.lmmse_filters(estimates, p, imp)
        eye = np.eye(g.n_dd)
        for k, est in enumerate(estimates):
            hh = est.matrix
            a_c = hh @ p.common
            a_p = hh @ p.privates.T
            gram_c = np.outer(a_c, a_c.conj())
            gram_p = a_p @ a_p.conj().T
            r_c = gram_c + gram_p + imp.noise_floor * eye
            r_p = imp.theta * gram_c + gram_p + imp.noise_floor * eye
            ref_c = np.linalg.lstsq(r_c, a_c, rcond=None)[0].conj()
            ref_p = np.linalg.lstsq(r_p, a_p[:, k], rcond=None)[0].conj()
            worst = max(worst, _rel(np.linalg.norm(filters.w_c[k] - ref_c),
                                    np.linalg.norm(ref_c)))
            worst = max(worst, _rel(np.linalg.norm(filters.w_p[k] - ref_p),
                                    np.linalg.norm(ref_p)))
    return worst


def _random_frame(seed: int):
    g, _, p, _ = _random_instance(seed)
    rng = np.random.default_rng(seed + 1000)
    s = precoding.draw_symbols(p.num_users, rng)
    x_tf = grid_mod.isfft(precoding.compose_tx(p, s), g)
    return g, x_tf


def check_derivatives(seed: int) -> float:
    """Analytic echo derivatives versus central finite differences."""
    target = sensing.default_target()
    worst = 0.0
    for trial in range(5):
        g, x_tf = _random_frame(seed + trial)
        field = sensing.echo_derivatives(x_tf, target, g)
        h_tau = 1e-4 * g.delay_resolution
        h_nu = 1e-4 * g.doppler_resolution
        mu_p = sensing.echo_mean(x_tf, _shift(target, dtau=h_tau), g).mu
        mu_m = sensing.echo_mean(x_tf, _shift(target, dtau=-h_tau), g).mu
        fd_tau = (mu_p - mu_m) / (2 * h_tau)
        mu_p = sensing.echo_mean(x_tf, _shift(target, dnu=h_nu), g).mu
        mu_m = sensing.echo_mean(x_tf, _shift(target, dnu=-h_nu), g).mu
        fd_nu = (mu_p - mu_m) / (2 * h_nu)
        worst = max(worst, _rel(np.linalg.norm(fd_tau - field.d_tau),
                                np.linalg.norm(field.d_tau)))
        worst = max(worst, _rel(np.linalg.norm(fd_nu - field.d_nu),
                                np.linalg.norm(field.d_nu)))
    return worst


def _shift(t: sensing.SensingTarget, dtau: float = 0.0, dnu: float = 0.0):
    return sensing.SensingTarget(tau=t.tau + dtau, nu=t.nu + dnu, beta=t.beta,
                                 gain_const=t.gain_const, sigma2=t.sigma2)


def check_fim(seed: int) -> float:
    """Closed-form Fisher entries versus the generic 2/sigma^2 Re{d^H d} form."""
    target = sensing.default_target()
    worst = 0.0
    for trial in range(5):
        g, x_tf = _random_frame(seed + trial)
        field = sensing.echo_derivatives(x_tf, target, g)
        moments = sensing.waveform_moments(field, x_tf, target, g)
        closed = sensing.fim(moments, target, g)
        ref_tt = 2.0 / target.sigma2 * np.vdot(field.d_tau, field.d_tau).real
        ref_nn = 2.0 / target.sigma2 * np.vdot(field.d_nu, field.d_nu).real
        ref_tn = 2.0 / target.sigma2 * np.vdot(field.d_tau, field.d_nu).real
        scale = max(abs(ref_tt), abs(ref_nn), abs(ref_tn))
        worst = max(worst,
                    abs(closed.i_tautau - ref_tt) / abs(ref_tt),
                    abs(closed.i_nunu - ref_nn) / abs(ref_nn),
                    abs(closed.i_taunu - ref_tn) / scale)
    return worst


def check_crb(seed: int) -> float:
    """Bound extraction versus a full 2x2 matrix inverse."""
    target = sensing.default_target()
    worst = 0.0
    for trial in range(5):
        g, x_tf = _random_frame(seed + trial)
        field = sensing.echo_derivatives(x_tf, target, g)
        moments = sensing.waveform_moments(field, x_tf, target, g)
        result = sensing.fim(moments, target, g)
        mat = np.array([[result.i_tautau, result.i_taunu],
                        [result.i_taunu, result.i_nunu]])
        inv = np.linalg.inv(mat)
        worst = max(worst, abs(result.crb_tau - inv[0, 0]) / inv[0, 0],
                    abs(result.crb_nu - inv[1, 1]) / inv[1, 1])
    return worst


def check_power(seed: int) -> float:
    """Decoded chromosomes hit the common/private power split exactly."""
    g = DDGrid()
    rng = np.random.default_rng(seed)
    p_max = 1.0
    worst = 0.0
    for alpha in (0.0, 0.1, 0.5, 0.9, 1.0):
        genes = rng.normal(size=2 * g.n_dd * 3)
        p = precoding.decode_chromosome(genes, g.n_dd, 2, alpha, p_max)
        common = np.linalg.norm(p.common) ** 2
        private = float(np.sum(np.abs(p.privates) ** 2))
        worst = max(worst, abs(common - alpha * p_max) / p_max,
                    abs(private - (1 - alpha) * p_max) / p_max)
    return worst


# name -> (runner, tolerance)
_CHECKS = {
    "isfft": (check_isfft, 1e-12),
    "channel": (check_channel, 1e-12),
    "lmmse": (check_lmmse, 1e-9),
    "derivatives": (check_derivatives, 1e-6),
    "fim": (check_fim, 1e-9),
    "crb": (check_crb, 1e-12),
    "power": (check_power, 1e-12),
}

CHECK_NAMES = tuple(_CHECKS)


def run_checks(names=None, seed: int = 0) -> list[CheckResult]:
    """Run the named checks (all by default) and collect their results."""
    selected = CHECK_NAMES if names is None else tuple(names)
    unknown = [n for n in selected if n not in _CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)} "
                         f"(available: {', '.join(CHECK_NAMES)})")
    results = []
    for name in selected:
        runner, tol = _CHECKS[name]
        worst = float(runner(seed))
        results.append(CheckResult(name=name, passed=worst < tol,
                                   worst_rel=worst, tolerance=tol))
    return results
