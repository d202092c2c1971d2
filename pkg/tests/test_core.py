import math

import numpy as np
import pytest

from dirkit.core import (
    NonConvergenceError,
    angular_distance,
    bessel_ratio,
    integrate_box,
    integrate_periodic,
    inverse_bessel_ratio,
    kummer_1f1_elementary,
    kummer_1f1_elementary_deriv,
    kummer_series,
    wrap,
)

TWO_PI = 2 * np.pi


class TestWrap:
    def test_period_boundary(self):
        assert wrap(TWO_PI) == 0.0

    def test_negative(self):
        assert wrap(-np.pi / 2) == pytest.approx(3 * np.pi / 2, abs=1e-15)

    def test_direct_subtraction(self):
        # oracle: plain subtraction of one period
        assert wrap(7.5) == pytest.approx(7.5 - TWO_PI, abs=1e-12)

    def test_idempotent(self):
        xs = np.linspace(-20, 20, 101)
        assert np.allclose(wrap(wrap(xs)), wrap(xs))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            wrap(np.inf)
        with pytest.raises(ValueError):
            wrap(np.nan)

    def test_range(self):
        xs = np.linspace(-50, 50, 100_001)
        w = wrap(xs)
        assert np.all(w >= 0.0) and np.all(w < TWO_PI)


class TestAngularDistance:
    def test_wrap_around(self):
        assert angular_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2, abs=1e-12)

    def test_identity(self):
        assert angular_distance(1.234, 1.234) == 0.0

    def test_antipodal_max(self):
        assert angular_distance(0.0, np.pi) == pytest.approx(np.pi)

    def test_bounds(self):
        rng = np.random.default_rng(0)
        a, b = rng.uniform(0, TWO_PI, (2, 1000))
        d = angular_distance(a, b)
        assert np.all(d >= 0) and np.all(d <= np.pi + 1e-12)


class TestIntegratePeriodic:
    def test_uniform(self):
        val = integrate_periodic(lambda x: np.full_like(x, 1 / TWO_PI))
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_cos_squared(self):
        val = integrate_periodic(lambda x: np.cos(x) ** 2 / np.pi)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_vm_normalization(self):
        from dirkit.circular import VonMises

        vm = VonMises(6.0, 0.5)
        assert integrate_periodic(vm.pdf) == pytest.approx(1.0, abs=1e-9)

    def test_2d(self):
        val = integrate_periodic(lambda x, y: np.cos(x) ** 2 * np.cos(y) ** 2, d=2)
        assert val == pytest.approx(np.pi ** 2, rel=1e-8)

    def test_3d(self):
        val = integrate_periodic(
            lambda x, y, z: np.sin(x) ** 2 * np.ones_like(y) * np.ones_like(z), d=3)
        assert val == pytest.approx(np.pi * TWO_PI ** 2, rel=1e-6)

    def test_budget_exhaustion_carries_best(self):
        # integrable square-root singularity: panel doubling keeps refining
        with pytest.raises(NonConvergenceError) as err:
            integrate_box(lambda x: 1.0 / np.sqrt(np.abs(x - 1.0) + 1e-15),
                          [0.0], [TWO_PI], tol=1e-10)
        true = 2.0 + 2.0 * math.sqrt(TWO_PI - 1.0)
        assert err.value.best == pytest.approx(true, rel=5e-3)

    def test_complex_integrand(self):
        val = integrate_periodic(lambda x: np.exp(1j * x) / TWO_PI)
        assert abs(val) < 1e-12


def _bessel_i_series(nu, x, terms=60):
    """Independent oracle: modified Bessel I_nu by direct series summation."""
    total = 0.0
    for j in range(terms):
        total += (x / 2) ** (2 * j + nu) / (math.gamma(j + 1) * math.gamma(j + nu + 1))
    return total


class TestBesselRatio:
    def test_zero(self):
        for d in (2, 3, 4, 7):
            assert bessel_ratio(d, 0.0) == 0.0

    def test_closed_form_s2(self):
        # A_3(k) = coth(k) - 1/k
        for kappa in (0.5, 1.0, 3.0, 10.0):
            expected = 1.0 / math.tanh(kappa) - 1.0 / kappa
            assert bessel_ratio(3, kappa) == pytest.approx(expected, rel=1e-12)

    def test_series_oracle(self):
        expected = _bessel_i_series(1, 1.0) / _bessel_i_series(0, 1.0)
        assert bessel_ratio(2, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_monotone(self):
        ks = np.linspace(0, 50, 200)
        vals = [bessel_ratio(2, k) for k in ks]
        assert np.all(np.diff(vals) > 0)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            bessel_ratio(1, 1.0)
        with pytest.raises(ValueError):
            bessel_ratio(2, -0.1)


class TestInverseBesselRatio:
    def test_round_trip(self):
        for d in (2, 3, 5):
            for kappa in (1e-3, 0.1, 1.0, 10.0, 100.0, 500.0):
                r = bessel_ratio(d, kappa)
                assert bessel_ratio(d, inverse_bessel_ratio(d, r)) == pytest.approx(
                    r, abs=1e-9)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            inverse_bessel_ratio(2, 1.0)
        with pytest.raises(ValueError):
            inverse_bessel_ratio(2, -0.01)

    def test_zero(self):
        assert inverse_bessel_ratio(3, 0.0) == 0.0


def _hyp1f1_one_series_oracle(n, x, terms=200):
    """Independent oracle: 200-term direct power series of 1F1(1; n; x)."""
    total = 0.0
    term = 1.0
    for j in range(terms):
        total += term
        term *= x / (n + j)
    return total


class TestKummer:
    def test_at_zero(self):
        for n in (2, 3, 4, 8):
            assert kummer_1f1_elementary(n, 0.0) == pytest.approx(1.0)

    def test_closed_form_n2(self):
        assert kummer_1f1_elementary(2, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)

    def test_series_oracle_n4(self):
        expected = _hyp1f1_one_series_oracle(4, 2.5)
        assert kummer_1f1_elementary(4, 2.5) == pytest.approx(expected, rel=1e-12)

    def test_matches_series_up_to_50(self):
        for n in (2, 3, 5):
            for kappa in (-20.0, -5.0, 0.01, 1.0, 10.0, 29.0, 31.0, 50.0):
                expected = _hyp1f1_one_series_oracle(n, kappa)
                assert kummer_1f1_elementary(n, kappa) == pytest.approx(
                    expected, rel=1e-10)

    def test_derivative_finite_difference(self):
        for n in (2, 4):
            for kappa in (0.5, 5.0, 40.0):
                eps = 1e-6
                fd = (kummer_1f1_elementary(n, kappa + eps)
                      - kummer_1f1_elementary(n, kappa - eps)) / (2 * eps)
                assert kummer_1f1_elementary_deriv(n, kappa) == pytest.approx(
                    fd, rel=1e-6)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            kummer_1f1_elementary(1, 1.0)

    def test_general_series_vs_scipy(self):
        from scipy.special import hyp1f1

        for a, b, x in [(0.5, 1.5, 2.0), (0.5, 2.0, -3.0), (2.0, 5.0, 10.0)]:
            assert kummer_series(a, b, x) == pytest.approx(hyp1f1(a, b, x), rel=1e-10)
