"""Receive filters and SINR/rate metrics against independent oracles."""

import numpy as np
import pytest

from ddisac.channel import ChannelEstimate, PathConfig, apply_icsi, gen_paths
from ddisac.comm import (
    CommMetrics,
    ImpairmentConfig,
    ReceiveFilters,
    evaluate_comm,
    lmmse_filters,
    sinr_common,
    sinr_private,
)
from ddisac.grid import DDGrid
from ddisac.precoding import PrecoderSet, decode_chromosome

GRID = DDGrid()
N_DD = GRID.n_dd
K = 2
SIGMA_N2 = 10.0 ** (-2.5)   # 25 dB below a unit power budget
SIGMA_E2 = 10.0 ** (-2.5)


def table_instance(seed, alpha=0.3, sigma_e2=SIGMA_E2, theta=0.03):
    """One random channel/precoder draw at the default operating point."""
    rng = np.random.default_rng(seed)
    cfg = PathConfig()
    estimates = []
    for _ in range(K):
        paths = gen_paths(GRID, cfg, rng)
        _, est = apply_icsi(paths, sigma_e2, rng, GRID)
        estimates.append(est)
    genes = rng.normal(size=2 * N_DD * (K + 1))
    p = decode_chromosome(genes, N_DD, K, alpha=alpha, p_max=1.0)
    imp = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=sigma_e2, p_tot=1.0,
                           theta=theta)
    return estimates, p, imp


# -- independent oracles ------------------------------------------------------

def filters_oracle(est, p, imp, user):
    """Dense least-squares re-derivation of both filters for one user."""
    hh = est.matrix
    n = hh.shape[0]
    a_c = hh @ p.common
    streams = [hh @ p.privates[j] for j in range(p.num_users)]
    floor = imp.noise_floor

    r = floor * np.eye(n, dtype=complex)
    r += np.outer(a_c, a_c.conj())
    for a in streams:
        r += np.outer(a, a.conj())
    w_c = np.linalg.lstsq(r, a_c, rcond=None)[0].conj()

    theta = imp.theta_for(user, p.num_users) if imp.theta_in_filter else 0.0
    rp = floor * np.eye(n, dtype=complex)
    rp += theta * np.outer(a_c, a_c.conj())
    for a in streams:
        rp += np.outer(a, a.conj())
    w_p = np.linalg.lstsq(rp, streams[user], rcond=None)[0].conj()
    return w_c, w_p


def sinr_common_expr(w, est, p, imp):
    """Term-by-term common-stream ratio for an arbitrary row filter."""
    hh = est.matrix
    sig = abs(w @ hh @ p.common) ** 2
    inter = 0.0
    for j in range(p.num_users):
        inter += abs(w @ hh @ p.privates[j]) ** 2
    noise = float(np.vdot(w, w).real) * imp.noise_floor
    return sig / (inter + noise)


def sinr_private_expr(w, est, p, imp, user):
    hh = est.matrix
    sig = abs(w @ hh @ p.privates[user]) ** 2
    inter = 0.0
    for j in range(p.num_users):
        if j != user:
            inter += abs(w @ hh @ p.privates[j]) ** 2
    res = imp.theta_for(user, p.num_users) * abs(w @ hh @ p.common) ** 2
    noise = float(np.vdot(w, w).real) * imp.noise_floor
    return sig / (inter + res + noise)


# -- filter construction ------------------------------------------------------

class TestLmmseFilters:
    def test_scalar_mmse_case(self):
        # Identity channel, single user, no private power: the common filter
        # collapses to the scalar MMSE solution sqrt(P)/(P + noise) on bin 0.
        power, noise = 2.0, 0.3
        e0 = np.zeros(N_DD, complex)
        e0[0] = np.sqrt(power)
        p = PrecoderSet(common=e0, privates=np.zeros((1, N_DD), complex),
                        alpha=1.0, p_max=power)
        est = ChannelEstimate(matrix=np.eye(N_DD, dtype=complex), error_variance=0.0)
        imp = ImpairmentConfig(sigma_n2=noise, sigma_e2=0.0, p_tot=power)
        f = lmmse_filters(est, p, imp)
        expected = np.zeros(N_DD, complex)
        expected[0] = np.sqrt(power) / (power + noise)
        np.testing.assert_allclose(f.w_c[0], expected, rtol=1e-12, atol=1e-15)
        assert not f.used_ridge

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_dense_solve_oracle(self, seed):
        estimates, p, imp = table_instance(seed)
        f = lmmse_filters(estimates, p, imp)
        for k in range(K):
            w_c, w_p = filters_oracle(estimates[k], p, imp, k)
            np.testing.assert_allclose(f.w_c[k], w_c, rtol=1e-9)
            np.testing.assert_allclose(f.w_p[k], w_p, rtol=1e-9)

    def test_theta_one_treats_common_as_interference(self):
        estimates, p, imp = table_instance(3, theta=1.0)
        f = lmmse_filters(estimates, p, imp)
        # With full residual, the private design covariance equals the common
        # one, so the private filter is the common-form solve aimed at stream k.
        for k in range(K):
            hh = estimates[k].matrix
            a_c = hh @ p.common
            a_p = hh @ p.privates.T
            r = (np.outer(a_c, a_c.conj()) + a_p @ a_p.conj().T
                 + imp.noise_floor * np.eye(N_DD))
            expected = np.linalg.solve(r, a_p[:, k]).conj()
            np.testing.assert_allclose(f.w_p[k], expected, rtol=1e-9)

    def test_theta_outside_filter_design(self):
        estimates, p, _ = table_instance(4)
        imp = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=SIGMA_E2, p_tot=1.0,
                               theta=0.03, theta_in_filter=False)
        f = lmmse_filters(estimates, p, imp)
        for k in range(K):
            hh = estimates[k].matrix
            a_p = hh @ p.privates.T
            # Design assumes the common stream cancels completely.
            r = a_p @ a_p.conj().T + imp.noise_floor * np.eye(N_DD)
            expected = np.linalg.solve(r, a_p[:, k]).conj()
            np.testing.assert_allclose(f.w_p[k], expected, rtol=1e-9)

    def test_ridge_fallback_on_singular_covariance(self):
        # Zero noise floor and a rank-one precoder set leave the covariance
        # singular; the solve must fall back and flag it instead of raising.
        e0 = np.zeros(N_DD, complex)
        e0[0] = 1.0
        p = PrecoderSet(common=e0, privates=np.zeros((1, N_DD), complex),
                        alpha=1.0, p_max=1.0)
        est = ChannelEstimate(matrix=np.eye(N_DD, dtype=complex), error_variance=0.0)
        imp = ImpairmentConfig(sigma_n2=0.0, sigma_e2=0.0, p_tot=1.0)
        f = lmmse_filters(est, p, imp)
        assert f.used_ridge
        assert np.all(np.isfinite(f.w_c)) and np.all(np.isfinite(f.w_p))

    def test_estimate_count_mismatch(self):
        estimates, p, imp = table_instance(5)
        with pytest.raises(ValueError):
            lmmse_filters(estimates[:1], p, imp)


# -- SINR evaluation ----------------------------------------------------------

class TestSinrCommon:
    def test_zero_common_precoder(self):
        estimates, p, imp = table_instance(6, alpha=0.0)
        f = lmmse_filters(estimates, p, imp)
        np.testing.assert_array_equal(sinr_common(f, estimates, p, imp), 0.0)

    def test_matched_scalar_case(self):
        power, noise = 4.0, 0.5
        e0 = np.zeros(N_DD, complex)
        e0[0] = np.sqrt(power)
        p = PrecoderSet(common=e0, privates=np.zeros((1, N_DD), complex),
                        alpha=1.0, p_max=power)
        est = ChannelEstimate(matrix=np.eye(N_DD, dtype=complex), error_variance=0.0)
        imp = ImpairmentConfig(sigma_n2=noise, sigma_e2=0.0, p_tot=power)
        w = np.zeros((1, N_DD), complex)
        w[0, 0] = 1.0
        f = ReceiveFilters(w_c=w, w_p=np.zeros_like(w))
        assert sinr_common(f, est, p, imp)[0] == pytest.approx(power / noise, rel=1e-12)

    @pytest.mark.parametrize("seed", [7, 8, 9])
    def test_matches_expression_oracle(self, seed):
        estimates, p, imp = table_instance(seed)
        f = lmmse_filters(estimates, p, imp)
        got = sinr_common(f, estimates, p, imp)
        for k in range(K):
            want = sinr_common_expr(f.w_c[k], estimates[k], p, imp)
            assert got[k] == pytest.approx(want, rel=1e-10)


class TestSinrPrivate:
    def test_perfect_sic_removes_residual(self):
        estimates, p, _ = table_instance(10, alpha=0.5)
        imp0 = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=SIGMA_E2, p_tot=1.0,
                                theta=0.0)
        f = lmmse_filters(estimates, p, imp0)
        got = sinr_private(f, estimates, p, imp0)
        for k in range(K):
            hh = estimates[k].matrix
            w = f.w_p[k]
            sig = abs(w @ hh @ p.privates[k]) ** 2
            inter = sum(abs(w @ hh @ p.privates[j]) ** 2 for j in range(K) if j != k)
            noise = float(np.vdot(w, w).real) * imp0.noise_floor
            assert got[k] == pytest.approx(sig / (inter + noise), rel=1e-12)

    def test_residual_strictly_hurts(self):
        estimates, p, _ = table_instance(11, alpha=0.5)
        kw = dict(sigma_n2=SIGMA_N2, sigma_e2=SIGMA_E2, p_tot=1.0)
        imp0 = ImpairmentConfig(theta=0.0, **kw)
        imp1 = ImpairmentConfig(theta=0.03, **kw)
        f0, f1 = lmmse_filters(estimates, p, imp0), lmmse_filters(estimates, p, imp1)
        s0 = sinr_private(f0, estimates, p, imp0)
        s1 = sinr_private(f1, estimates, p, imp1)
        assert np.all(s1 < s0)

    @pytest.mark.parametrize("seed", [12, 13, 14])
    def test_matches_expression_oracle(self, seed):
        estimates, p, imp = table_instance(seed)
        f = lmmse_filters(estimates, p, imp)
        got = sinr_private(f, estimates, p, imp)
        for k in range(K):
            want = sinr_private_expr(f.w_p[k], estimates[k], p, imp, k)
            assert got[k] == pytest.approx(want, rel=1e-10)


class TestProperties:
    def test_nonnegative_and_finite(self):
        for seed in range(4):
            estimates, p, imp = table_instance(seed)
            f = lmmse_filters(estimates, p, imp)
            for s in (sinr_common(f, estimates, p, imp),
                      sinr_private(f, estimates, p, imp)):
                assert np.all(s >= 0) and np.all(np.isfinite(s))

    def test_monotone_in_theta(self):
        estimates, p, _ = table_instance(15, alpha=0.5)
        prev = np.inf
        for theta in (0.0, 0.03, 0.2, 0.6, 1.0):
            imp = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=SIGMA_E2,
                                   p_tot=1.0, theta=theta)
            f = lmmse_filters(estimates, p, imp)
            cur = sinr_private(f, estimates, p, imp).min()
            assert cur <= prev + 1e-12
            prev = cur

    def test_monotone_in_sigma_e2(self):
        # Hold the estimate fixed and raise only the error-variance knob: the
        # noise floor grows, so private SINR cannot improve.
        estimates, p, _ = table_instance(16, alpha=0.5)
        prev = np.inf
        for se2 in (0.0, 1e-3, 1e-2, 1e-1):
            imp = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=se2, p_tot=1.0)
            f = lmmse_filters(estimates, p, imp)
            cur = sinr_private(f, estimates, p, imp).min()
            assert cur <= prev + 1e-12
            prev = cur

    def test_textbook_reduction_small_instance(self):
        # sigma_e2 = 0 and theta = 0: the private filter must agree with a
        # brute-force MMSE construction (explicit received covariance, stream
        # by stream) on dense random 4x4 channels.
        rng = np.random.default_rng(17)
        n, k_users, noise = 4, 2, 0.2
        for _ in range(5):
            hh = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            est = ChannelEstimate(matrix=hh, error_variance=0.0)
            common = rng.normal(size=n) + 1j * rng.normal(size=n)
            privates = rng.normal(size=(k_users, n)) + 1j * rng.normal(size=(k_users, n))
            p = PrecoderSet(common=common, privates=privates, alpha=0.5, p_max=1.0)
            imp = ImpairmentConfig(sigma_n2=noise, sigma_e2=0.0, p_tot=1.0, theta=0.0)
            f = lmmse_filters(est, p, imp)
            a_c = hh @ common
            a_p = hh @ privates.T
            cov_y = np.outer(a_c, a_c.conj()) + a_p @ a_p.conj().T + noise * np.eye(n)
            w_c_mmse = (np.linalg.inv(cov_y) @ a_c).conj()
            np.testing.assert_allclose(f.w_c[0], w_c_mmse, rtol=1e-9)
            cov_post_sic = a_p @ a_p.conj().T + noise * np.eye(n)
            for k in range(k_users):
                w_p_mmse = (np.linalg.inv(cov_post_sic) @ a_p[:, k]).conj()
                np.testing.assert_allclose(f.w_p[k], w_p_mmse, rtol=1e-9)

    def test_common_filter_is_optimal(self):
        # No perturbation of the constructed filter may raise the common SINR.
        estimates, p, imp = table_instance(18)
        f = lmmse_filters(estimates, p, imp)
        w0 = f.w_c[0]
        base = sinr_common_expr(w0, estimates[0], p, imp)
        rng = np.random.default_rng(19)
        scale = np.linalg.norm(w0)
        for _ in range(1000):
            eps = 10.0 ** rng.uniform(-4, 0)
            delta = rng.normal(size=N_DD) + 1j * rng.normal(size=N_DD)
            w = w0 + eps * scale * delta / np.linalg.norm(delta)
            assert sinr_common_expr(w, estimates[0], p, imp) <= base * (1 + 1e-9)

    def test_scale_consistency(self):
        # Scaling every precoder by sqrt(c) and both noise contributions by c
        # leaves both SINRs unchanged.
        estimates, p, imp = table_instance(20)
        c = 7.3
        p2 = PrecoderSet(common=p.common * np.sqrt(c), privates=p.privates * np.sqrt(c),
                         alpha=p.alpha, p_max=p.p_max * c)
        imp2 = ImpairmentConfig(sigma_n2=imp.sigma_n2 * c, sigma_e2=imp.sigma_e2,
                                p_tot=imp.p_tot * c, theta=imp.theta)
        f1, f2 = lmmse_filters(estimates, p, imp), lmmse_filters(estimates, p2, imp2)
        np.testing.assert_allclose(sinr_common(f2, estimates, p2, imp2),
                                   sinr_common(f1, estimates, p, imp), rtol=1e-9)
        np.testing.assert_allclose(sinr_private(f2, estimates, p2, imp2),
                                   sinr_private(f1, estimates, p, imp), rtol=1e-9)


# -- aggregation --------------------------------------------------------------

class TestEvaluateComm:
    def test_alpha_zero_never_meets_common_qos(self):
        for seed in range(3):
            estimates, p, imp = table_instance(seed, alpha=0.0)
            m = evaluate_comm(estimates, p, imp)
            assert not m.rc_met
            assert np.all(m.rate_c == 0)

    def test_alpha_one_zeroes_private_rates(self):
        estimates, p, imp = table_instance(21, alpha=1.0)
        m = evaluate_comm(estimates, p, imp)
        assert m.r_min == 0.0
        assert np.all(m.rate_p == 0)

    def test_symmetric_users(self):
        # Identical channels and identical private precoders: both users see
        # the same private rate, which is then also the minimum.
        rng = np.random.default_rng(22)
        paths = gen_paths(GRID, PathConfig(), rng)
        _, est = apply_icsi(paths, SIGMA_E2, rng, GRID)
        common = rng.normal(size=N_DD) + 1j * rng.normal(size=N_DD)
        one = rng.normal(size=N_DD) + 1j * rng.normal(size=N_DD)
        p = PrecoderSet(common=common, privates=np.stack([one, one]),
                        alpha=0.5, p_max=1.0)
        imp = ImpairmentConfig(sigma_n2=SIGMA_N2, sigma_e2=SIGMA_E2, p_tot=1.0)
        m = evaluate_comm([est, est], p, imp)
        assert m.rate_p[0] == pytest.approx(m.rate_p[1], rel=1e-12)
        assert m.r_min == pytest.approx(m.rate_p[0], rel=1e-12)

    def test_rates_follow_sinrs(self):
        estimates, p, imp = table_instance(23)
        m = evaluate_comm(estimates, p, imp)
        np.testing.assert_allclose(m.rate_c, np.log2(1 + m.sinr_c), rtol=1e-14)
        np.testing.assert_allclose(m.rate_p, np.log2(1 + m.sinr_p), rtol=1e-14)
        assert m.r_min == m.rate_p.min()

    def test_rc_met_threshold(self):
        estimates, p, imp = table_instance(24, alpha=0.3)
        m = evaluate_comm(estimates, p, imp, r_c_req=0.1)
        assert m.rc_met == (m.rate_c.min() >= 0.1)
        strict = evaluate_comm(estimates, p, imp, r_c_req=1e9)
        assert not strict.rc_met
