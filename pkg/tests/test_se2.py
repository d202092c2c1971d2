import math

import numpy as np
import pytest

from dirkit.core import TWO_PI, integrate_box
from dirkit.circular import WrappedNormal
from dirkit.se2 import (
    Gaussian2D,
    SE2Bingham,
    SE2PartiallyWrappedDirac,
    SE2PartiallyWrappedNormal,
)

MU = np.array([1.0, 0.0, 2.0])
COV = np.array([[0.5, 0.1, 0.05], [0.1, 0.8, 0.2], [0.05, 0.2, 0.9]])


def example_pwn():
    return SE2PartiallyWrappedNormal(MU, COV)


def random_se2b(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2, 2))
    C1 = 0.3 * (A + A.T)
    C2 = 0.5 * rng.standard_normal((2, 2))
    B = rng.standard_normal((2, 2))
    C3 = -(B @ B.T + 0.5 * np.eye(2))
    return SE2Bingham(C1, C2, C3)


def pwn_pdf_oracle(x, mu, C, terms=200):
    Cinv = np.linalg.inv(C)
    norm = (TWO_PI) ** 1.5 * math.sqrt(np.linalg.det(C))
    total = 0.0
    for k in range(-terms, terms + 1):
        d = np.asarray(x, dtype=float) - mu
        d[0] += TWO_PI * k
        total += math.exp(-0.5 * d @ Cinv @ d)
    return total / norm


class TestPWNDensity:
    def test_against_wrap_sum_oracle(self):
        pwn = example_pwn()
        x = np.array([1.3, 0.4, 1.7])
        assert pwn.pdf(x) == pytest.approx(pwn_pdf_oracle(x, MU, COV), rel=1e-12)

    def test_diagonal_factorizes(self):
        C = np.diag([0.5, 0.8, 0.9])
        pwn = SE2PartiallyWrappedNormal(MU, C)
        wn = WrappedNormal(MU[0], math.sqrt(0.5))
        gauss = Gaussian2D(MU[1:], np.diag([0.8, 0.9]))
        rng = np.random.default_rng(0)
        pts = np.column_stack([rng.uniform(0, TWO_PI, 20),
                               rng.normal(0, 2, 20), rng.normal(2, 2, 20)])
        assert np.allclose(pwn.pdf(pts),
                           wn.pdf(pts[:, 0]) * gauss.pdf(pts[:, 1:]), rtol=1e-10)

    def test_integrates_to_one(self):
        pwn = example_pwn()
        lim = 6.0
        val = integrate_box(
            lambda a, u, v: pwn.pdf(np.stack([a, u, v], axis=-1)),
            [0.0, MU[1] - lim, MU[2] - lim],
            [TWO_PI, MU[1] + lim, MU[2] + lim], tol=1e-7)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            SE2PartiallyWrappedNormal(MU, np.diag([1.0, -0.5, 1.0]))
        bad = COV.copy()
        bad[0, 1] = 0.9
        with pytest.raises(ValueError):
            SE2PartiallyWrappedNormal(MU, bad)


def pwn_cross_moment_oracle(mu, C, trig, j):
    """1-d quadrature over the unwrapped angle with conditional Gaussian means.

    E[g(theta) y_j] = int g(t) (m_j + C_{j0} (t - mu0) / C_00) N(t; mu0, C00) dt,
    valid because g is 2pi-periodic so the wrapped and linear averages agree.
    """
    s = math.sqrt(C[0, 0])
    lo, hi = mu[0] - 9 * s, mu[0] + 9 * s

    def f(t):
        cond = mu[j] + C[j, 0] / C[0, 0] * (t - mu[0])
        dens = np.exp(-0.5 * ((t - mu[0]) / s) ** 2) / (s * math.sqrt(TWO_PI))
        return trig(t) * cond * dens

    return integrate_box(f, [lo], [hi], tol=1e-12)


class TestPWNMoments:
    def test_mean4d_resultant_norm(self):
        pwn = example_pwn()
        m = pwn.mean4d()
        assert np.hypot(m[0], m[1]) == pytest.approx(math.exp(-COV[0, 0] / 2))
        assert np.allclose(m[2:], MU[1:])

    def test_diagonal_cross_terms_vanish(self):
        pwn = SE2PartiallyWrappedNormal(MU, np.diag([0.5, 0.8, 0.9]))
        cov = pwn.covariance4d()
        assert np.allclose(cov[:2, 2:], 0.0, atol=1e-14)

    def test_cross_terms_against_quadrature_oracle(self):
        pwn = example_pwn()
        cov = pwn.covariance4d()
        m = pwn.mean4d()
        for j in (1, 2):
            e_cy = pwn_cross_moment_oracle(MU, COV, np.cos, j)
            e_sy = pwn_cross_moment_oracle(MU, COV, np.sin, j)
            assert cov[0, 1 + j] == pytest.approx(e_cy - m[0] * MU[j], abs=1e-10)
            assert cov[1, 1 + j] == pytest.approx(e_sy - m[1] * MU[j], abs=1e-10)

    def test_full_covariance_against_monte_carlo(self):
        pwn = example_pwn()
        s = pwn.sample(400_000, np.random.default_rng(1))
        emb = np.column_stack([np.cos(s[:, 0]), np.sin(s[:, 0]), s[:, 1], s[:, 2]])
        assert np.max(np.abs(np.cov(emb.T) - pwn.covariance4d())) < 0.01


class TestPWNMarginals:
    def test_types_and_parameters(self):
        pwn = example_pwn()
        wn, gauss = pwn.marginals()
        assert isinstance(wn, WrappedNormal)
        assert isinstance(gauss, Gaussian2D)
        assert wn.mu == pytest.approx(MU[0])
        assert wn.sigma == pytest.approx(math.sqrt(COV[0, 0]))
        assert np.allclose(gauss.C, COV[1:, 1:])

    def test_moment_consistency(self):
        pwn = example_pwn()
        wn, _ = pwn.marginals()
        m = pwn.mean4d()
        m1 = wn.trigonometric_moment(1)
        assert m[0] == pytest.approx(m1.real)
        assert m[1] == pytest.approx(m1.imag)

    def test_angle_marginal_against_numeric(self):
        pwn = example_pwn()
        wn, gauss = pwn.marginals()
        lim = 8.0
        for x in (0.5, 1.0, 2.5, 5.0):
            direct = integrate_box(
                lambda u, v, xv=x: pwn.pdf(np.stack(
                    [np.full_like(u, xv), u, v], axis=-1)),
                [MU[1] - lim, MU[2] - lim], [MU[1] + lim, MU[2] + lim], tol=1e-9)
            assert direct == pytest.approx(wn.pdf(x), abs=1e-6)

    def test_translation_marginal_against_numeric(self):
        pwn = example_pwn()
        _, gauss = pwn.marginals()
        for pt in ([0.0, 2.0], [0.5, 1.0]):
            direct = integrate_box(
                lambda a, pt=pt: pwn.pdf(np.stack(
                    [a, np.full_like(a, pt[0]), np.full_like(a, pt[1])], axis=-1)),
                [0.0], [TWO_PI], tol=1e-10)
            assert direct == pytest.approx(gauss.pdf(np.array(pt)), abs=1e-6)


class TestPWD:
    def test_moments(self):
        pts = np.array([[1.0, 0.5, -0.5], [2.0, 1.0, 0.0]])
        pwd = SE2PartiallyWrappedDirac(pts, [0.3, 0.7])
        m = pwd.mean4d()
        expected = 0.3 * np.array([np.cos(1.0), np.sin(1.0), 0.5, -0.5]) \
            + 0.7 * np.array([np.cos(2.0), np.sin(2.0), 1.0, 0.0])
        assert np.allclose(m, expected)


class TestSE2BinghamStructure:
    def test_decompose_zero_coupling(self):
        C1 = np.diag([2.0, 0.5])
        C3 = -np.eye(2)
        b = SE2Bingham(C1, np.zeros((2, 2)), C3)
        T1, T2 = b.decompose()
        assert np.allclose(T1, C1)
        assert np.allclose(T2, 0.0)

    def test_decompose_identity_c3(self):
        C2 = np.array([[0.3, -0.2], [0.1, 0.4]])
        b = SE2Bingham(np.diag([1.0, 0.2]), C2, -np.eye(2))
        _, T2 = b.decompose()
        assert np.allclose(T2, C2)

    def test_reconstruction_identity(self):
        b = random_se2b(2)
        T1, T2 = b.decompose()
        rng = np.random.default_rng(3)
        phi = rng.uniform(0, TWO_PI, 100)
        xs = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        xt = rng.normal(0, 2, (100, 2))
        direct = np.einsum("ni,ij,nj->n", np.hstack([xs, xt]), b.full_matrix(),
                           np.hstack([xs, xt]))
        resid = xt - xs @ T2.T
        decomposed = (np.einsum("ni,ij,nj->n", xs, T1, xs)
                      + np.einsum("ni,ij,nj->n", resid, b.C3, resid))
        assert np.max(np.abs(direct - decomposed)) < 1e-10

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            SE2Bingham(np.array([[1.0, 0.5], [0.4, 1.0]]), np.zeros((2, 2)),
                       -np.eye(2))
        with pytest.raises(ValueError):
            SE2Bingham(np.eye(2), np.zeros((2, 2)), np.eye(2))
        with pytest.raises(ValueError):
            SE2Bingham(np.eye(2), np.zeros((2, 2)),
                       np.array([[-1.0, 0.0], [0.0, 0.1]]))


class TestSE2BinghamNormConst:
    def test_decoupled_closed_form(self):
        C3 = -np.diag([1.5, 2.0])
        b = SE2Bingham(np.zeros((2, 2)), np.zeros((2, 2)), C3)
        expected = TWO_PI * math.pi / math.sqrt(np.linalg.det(-C3))
        assert b.norm_const() == pytest.approx(expected, rel=1e-12)

    def test_against_numeric_integral(self):
        for seed in range(5):
            b = random_se2b(seed)
            ana = b.norm_const()
            num = b.norm_const_numerical(angle_points=200, trans_points=100)
            assert abs(ana - num) / num < 1e-3

    def test_antipodal_symmetry(self):
        b = random_se2b(7)
        _, T2 = b.decompose()
        rng = np.random.default_rng(8)
        phi = rng.uniform(0, TWO_PI, 20)
        xs = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        delta = rng.normal(0, 1, (20, 2))
        plus = np.hstack([xs, xs @ T2.T + delta])
        minus = np.hstack([-xs, -(xs @ T2.T) + delta])
        assert np.allclose(b.pdf(plus), b.pdf(minus), rtol=1e-10)


class TestSE2BinghamOperations:
    def test_mode_decoupled(self):
        b = SE2Bingham(np.diag([2.0, 0.0]), np.zeros((2, 2)), -np.eye(2))
        xs, xt = b.mode()
        assert np.allclose(np.abs(xs), [1.0, 0.0], atol=1e-12)
        assert np.allclose(xt, 0.0)

    def test_mode_tie_signaled(self):
        b = SE2Bingham(np.eye(2), np.zeros((2, 2)), -np.eye(2))
        with pytest.raises(ValueError):
            b.mode()

    def test_sampled_covariance_matches_quadrature(self):
        b = random_se2b(9)
        cov_mc = b.covariance_mcmc(200_000, np.random.default_rng(10))
        second = b.second_moment_matrix()
        # means vanish by antipodal symmetry, so covariance = second moments
        assert np.max(np.abs(cov_mc - second)) < 0.01

    def test_sample_respects_constraint(self):
        b = random_se2b(11)
        s = b.sample(1_000, np.random.default_rng(12))
        assert np.max(np.abs(np.linalg.norm(s[:, :2], axis=1) - 1.0)) < 1e-12

    def test_deterministic_sample(self):
        b = random_se2b(13)
        pts, weights = b.sample_deterministic()
        assert len(pts) == 5
        assert weights.sum() == pytest.approx(1.0)
        assert np.max(np.abs(np.linalg.norm(pts[:, :2], axis=1) - 1.0)) < 1e-12
        _, T2 = b.decompose()
        assert np.allclose(pts[:, 2:], pts[:, :2] @ T2.T, atol=1e-12)

    def test_fit_round_trip(self):
        b = random_se2b(14)
        samples = b.sample(100_000, np.random.default_rng(15))
        fit = SE2Bingham.fit(samples)
        xs_true, _ = b.mode()
        xs_fit, _ = fit.mode()
        assert abs(xs_fit @ xs_true) >= 0.99
        assert np.max(np.abs(fit.second_moment_matrix()
                             - b.second_moment_matrix())) < 0.02

    def test_fit_closed_form_only(self):
        b = random_se2b(16)
        samples = b.sample(50_000, np.random.default_rng(17))
        fit = SE2Bingham.fit(samples, polish=False)
        xs_true, _ = b.mode()
        xs_fit, _ = fit.mode()
        assert abs(xs_fit @ xs_true) >= 0.99
