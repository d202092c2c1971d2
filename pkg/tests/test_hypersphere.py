import math

import numpy as np
import pytest
from scipy.special import i0

from dirkit.core import TWO_PI, bessel_ratio, surface_area_sphere
from dirkit.circular import VonMises
from dirkit.hypersphere import (
    Bingham,
    HypersphericalUniform,
    SphericalDiracMixture,
    VonMisesFisher,
    Watson,
    integrate_sphere,
    vmf_convolve,
    vmf_multiply,
)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def random_units(n, d, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestVonMisesFisher:
    def test_uniform_limit_d3(self):
        v = VonMisesFisher(np.array([0.0, 0.0, 1.0]), 0.0)
        pts = random_units(20, 3)
        assert np.allclose(v.pdf(pts), 1.0 / (4 * np.pi))

    def test_d2_reduces_to_vm(self):
        v = VonMisesFisher(np.array([np.cos(1.2), np.sin(1.2)]), 1.7)
        vm = VonMises(1.2, 1.7)
        thetas = np.random.default_rng(1).uniform(0, TWO_PI, 100)
        pts = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
        assert np.max(np.abs(v.pdf(pts) - vm.pdf(thetas))) < 1e-10

    def test_mode_value_against_quadrature(self):
        mu = unit([0.3, -0.5, 0.8])
        v = VonMisesFisher(mu, 2.0)
        mass = integrate_sphere(v.pdf, 3)
        assert mass == pytest.approx(1.0, abs=1e-8)
        # normalization oracle: unnormalized mass rescales the mode value
        raw_mass = integrate_sphere(lambda x: np.exp(2.0 * (x @ mu)), 3)
        assert v.pdf(mu) == pytest.approx(math.exp(2.0) / raw_mass, rel=1e-8)

    def test_normalization_d4(self):
        v = VonMisesFisher(unit([1.0, 1.0, 0.0, 1.0]), 3.0)
        assert integrate_sphere(v.pdf, 4) == pytest.approx(1.0, abs=1e-5)

    def test_fit_monte_carlo(self):
        rng = np.random.default_rng(2)
        v = VonMisesFisher(unit([1.0, 2.0, -1.0]), 5.0)
        samples = v.sample(100_000, rng)
        fit = VonMisesFisher.fit(samples)
        assert abs(fit.kappa - 5.0) / 5.0 < 0.05
        assert fit.mu @ v.mu > 0.999

    def test_fit_degenerate_rejected(self):
        with pytest.raises(ValueError):
            VonMisesFisher.fit(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]))
        with pytest.raises(ValueError):
            VonMisesFisher.fit(np.tile([0.0, 0.0, 1.0], (5, 1)))

    def test_sample_seeded(self):
        v = VonMisesFisher(np.array([0.0, 1.0, 0.0]), 3.0)
        a = v.sample(32, np.random.default_rng(3))
        b = v.sample(32, np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_stochastic_resultant(self):
        rng = np.random.default_rng(4)
        v = VonMisesFisher(np.array([0.0, 0.0, 1.0]), 2.5)
        s = v.sample(100_000, rng)
        emp = np.linalg.norm(s.mean(axis=0))
        assert abs(emp - v.mean_resultant_length()) < 3.0 / math.sqrt(100_000) * 2


class TestVmfAlgebra:
    def test_multiply_uniform_factor(self):
        a = VonMisesFisher(unit([1.0, 0.0, 1.0]), 2.0)
        b = VonMisesFisher(np.array([0.0, 1.0, 0.0]), 0.0)
        c = vmf_multiply(a, b)
        assert np.allclose(c.mu, a.mu)
        assert c.kappa == pytest.approx(2.0)

    def test_multiply_cancellation(self):
        e1 = np.array([1.0, 0.0, 0.0])
        c = vmf_multiply(VonMisesFisher(e1, 1.0), VonMisesFisher(-e1, 1.0))
        assert c.kappa == pytest.approx(0.0, abs=1e-12)

    def test_multiply_exact_closure(self):
        a = VonMisesFisher(unit([1.0, 0.5, 0.0]), 2.0)
        b = VonMisesFisher(unit([0.0, 1.0, 1.0]), 1.5)
        c = vmf_multiply(a, b)
        mass = integrate_sphere(lambda x: a.pdf(x) * b.pdf(x), 3)
        pts = random_units(100, 3, seed=5)
        assert np.max(np.abs(a.pdf(pts) * b.pdf(pts) / mass - c.pdf(pts))
                      / c.pdf(pts)) < 1e-9

    def test_convolve_against_monte_carlo(self):
        rng = np.random.default_rng(6)
        a = VonMisesFisher(np.array([0.0, 0.0, 1.0]), 4.0)
        b = VonMisesFisher(np.array([0.0, 0.0, 1.0]), 6.0)
        c = vmf_convolve(a, b)
        # compose: draw from a, then rotate a draw of b onto it
        n = 1_000_000
        base = a.sample(n, rng)
        pert = b.sample(n, rng)
        composed = _rotate_batch(np.array([0.0, 0.0, 1.0]), base, pert)
        emp = np.linalg.norm(composed.mean(axis=0))
        assert abs(emp - c.mean_resultant_length()) <= 1e-2

    def test_deterministic_sampling(self):
        v = VonMisesFisher(unit([1.0, -1.0, 0.5]), 3.0)
        det = v.sample_deterministic()
        res = det.resultant()
        assert np.allclose(unit(res), v.mu, atol=1e-12)
        assert np.linalg.norm(res) == pytest.approx(
            v.mean_resultant_length(), abs=1e-10)
        assert det.weights.sum() == pytest.approx(1.0)
        assert len(det.points) == 2 * (3 - 1) + 1


def _rotate_batch(src, dsts, vecs):
    """Rotate each vec by the rotation taking src to the matching dst row.

    Vectorized Rodrigues construction; antipodal dst rows fall back to a flip.
    """
    v = np.cross(np.broadcast_to(src, dsts.shape), dsts)
    c = dsts @ src
    t1 = np.cross(v, vecs)
    t2 = np.cross(v, t1)
    safe = c > -1.0 + 1e-9
    denom = np.where(safe, 1.0 + c, 1.0)
    out = vecs + t1 + t2 / denom[:, None]
    out[~safe] = -vecs[~safe]
    return out


class TestWatson:
    def test_antipodal_symmetry(self):
        w = Watson(unit([1.0, 2.0, 0.5]), 3.0)
        pts = random_units(50, 3, seed=7)
        assert np.allclose(w.pdf(pts), w.pdf(-pts), rtol=1e-12)

    def test_uniform_limit(self):
        w = Watson(np.array([0.0, 0.0, 1.0]), 0.0)
        pts = random_units(10, 3)
        assert np.allclose(w.pdf(pts), 1.0 / (4 * np.pi))

    def test_girdle_normalization(self):
        w = Watson(np.array([0.0, 0.0, 1.0]), -2.0)
        assert integrate_sphere(w.pdf, 3) == pytest.approx(1.0, abs=1e-7)

    def test_concentrated_normalization_d4(self):
        w = Watson(unit([1.0, 0.0, 1.0, 0.0]), 5.0)
        assert integrate_sphere(w.pdf, 4) == pytest.approx(1.0, abs=1e-5)


class TestBingham:
    def test_uniform_case(self):
        b = Bingham(np.eye(3), np.zeros(3))
        assert math.exp(b._log_norm) == pytest.approx(surface_area_sphere(3), rel=1e-9)
        pts = random_units(10, 3)
        assert np.allclose(b.pdf(pts), 1.0 / surface_area_sphere(3), rtol=1e-9)

    def test_antipodal(self):
        b = Bingham.from_parameter_matrix(np.diag([-4.0, -1.0, 0.0]))
        pts = random_units(50, 3, seed=8)
        assert np.allclose(b.pdf(pts), b.pdf(-pts), rtol=1e-12)

    def test_d2_bessel_identity(self):
        # N(diag(-2, 0)) = 2 pi e^-1 I0(1)
        val = Bingham.norm_const(np.array([-2.0, 0.0]))
        assert val == pytest.approx(TWO_PI * math.exp(-1.0) * i0(1.0), rel=1e-9)

    def test_normalization_d3_d4(self):
        b3 = Bingham.from_parameter_matrix(np.diag([-6.0, -2.0, 0.0]))
        assert integrate_sphere(b3.pdf, 3) == pytest.approx(1.0, abs=1e-6)
        b4 = Bingham.from_parameter_matrix(np.diag([-5.0, -3.0, -1.0, 0.0]))
        assert integrate_sphere(b4.pdf, 4) == pytest.approx(1.0, abs=1e-4)

    def test_canonicalization_idempotent(self):
        b = Bingham.from_parameter_matrix(np.diag([-4.0, -1.0, 0.0]))
        again = Bingham.from_parameter_matrix(b.parameter_matrix())
        assert np.allclose(again.Z, b.Z, atol=1e-12)
        pts = random_units(20, 3, seed=9)
        assert np.allclose(again.pdf(pts), b.pdf(pts), rtol=1e-10)

    def test_multiply_uniform_factor(self):
        b = Bingham.from_parameter_matrix(np.diag([-4.0, -1.0, 0.0]))
        flat = Bingham(np.eye(3), np.zeros(3))
        prod = b.multiply(flat)
        pts = random_units(20, 3, seed=10)
        assert np.allclose(prod.pdf(pts), b.pdf(pts), rtol=1e-9)

    def test_multiply_exponents_add(self):
        rng = np.random.default_rng(11)
        q1, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        q2, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        b1 = Bingham(q1[:, np.argsort([-3.0, -1.0, 0.0])],
                     np.array([-3.0, -1.0, 0.0]))
        b2 = Bingham(q2, np.array([-2.0, -0.5, 0.0]))
        prod = b1.multiply(b2)
        mass = integrate_sphere(lambda x: b1.pdf(x) * b2.pdf(x), 3)
        pts = random_units(100, 3, seed=12)
        assert np.max(np.abs(b1.pdf(pts) * b2.pdf(pts) / mass - prod.pdf(pts))
                      / prod.pdf(pts)) < 1e-6

    def test_mode_is_last_column(self):
        rng = np.random.default_rng(13)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        b = Bingham(q, np.array([-5.0, -2.0, 0.0]))
        assert np.allclose(b.mode(), q[:, -1])

    def test_sampler_uniform_limit(self):
        b = Bingham(np.eye(2), np.zeros(2))
        s = b.sample(20_000, np.random.default_rng(14))
        scatter = s.T @ s / len(s)
        assert np.allclose(scatter, np.eye(2) / 2, atol=0.02)

    def test_sampler_scatter_matches_moments(self):
        b = Bingham(np.eye(2), np.array([-3.0, 0.0]))
        s = b.sample(40_000, np.random.default_rng(15))
        proj = (s @ b.M) ** 2
        emp = proj.mean(axis=0)
        expected = b.second_moments()
        # 3 sigma on a bounded [0, 1] statistic
        assert np.max(np.abs(emp - expected)) < 3 * 0.5 / math.sqrt(40_000) * 2

    def test_sampler_seeded(self):
        b = Bingham(np.eye(2), np.array([-3.0, 0.0]))
        a = b.sample(64, np.random.default_rng(16))
        c = b.sample(64, np.random.default_rng(16))
        assert np.array_equal(a, c)

    def test_fit_round_trip_d2(self):
        b = Bingham(np.eye(2), np.array([-4.0, 0.0]))
        s = b.sample(50_000, np.random.default_rng(17))
        fit = Bingham.fit(samples=s)
        assert abs(fit.Z[0] - (-4.0)) / 4.0 < 0.10

    def test_fit_ambiguous_scatter_rejected(self):
        with pytest.raises(ValueError):
            Bingham.fit(scatter=np.eye(3) / 3)

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            Bingham(np.eye(3), np.array([-1.0, -2.0, 0.0]))  # not ascending
        with pytest.raises(ValueError):
            Bingham(np.eye(3), np.array([-2.0, -1.0, 0.5]))  # positive entry
        with pytest.raises(ValueError):
            Bingham(np.eye(3) * 2.0, np.array([-2.0, -1.0, 0.0]))  # not orthogonal
        with pytest.raises(ValueError):
            Bingham(np.eye(5), np.array([-4.0, -3.0, -2.0, -1.0, 0.0]))  # d > 4


class TestUniformAndDirac:
    def test_uniform_density_and_sampling(self):
        u = HypersphericalUniform(4)
        pts = random_units(10, 4)
        assert np.allclose(u.pdf(pts), 1.0 / surface_area_sphere(4))
        s = u.sample(50_000, np.random.default_rng(18))
        assert np.allclose(s.T @ s / len(s), np.eye(4) / 4, atol=0.02)

    def test_dirac_mixture(self):
        pts = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        dm = SphericalDiracMixture(pts, [0.25, 0.75])
        assert np.allclose(dm.resultant(), [0.25, 0.75, 0.0])
        with pytest.raises(ValueError):
            SphericalDiracMixture(2 * pts, [0.5, 0.5])
