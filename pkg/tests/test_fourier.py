import numpy as np
import pytest

from dirkit.core import TWO_PI, integrate_periodic
from dirkit.circular import (
    CircularUniform,
    VonMises,
    WrappedDiracMixture,
    WrappedNormal,
    convolve,
    multiply,
)
from dirkit.fourier import FourierDensity

XS = np.linspace(0.0, TWO_PI, 2000, endpoint=False)


def grid_tv(f, g):
    return 0.5 * np.sum(np.abs(f - g)) * TWO_PI / len(XS)


class TestFromDistribution:
    def test_uniform_identity(self):
        fd = FourierDensity.from_distribution(CircularUniform(), 11, "identity")
        assert fd.coeffs[fd.order] == pytest.approx(1 / TWO_PI)
        others = np.delete(fd.coeffs, fd.order)
        assert np.max(np.abs(others)) < 1e-14

    def test_vm_sqrt_reconstruction(self):
        vm = VonMises(6.0, 0.5)
        fd = FourierDensity.from_distribution(vm, 31, "sqrt")
        assert np.max(np.abs(fd.pdf(XS) - vm.pdf(XS))) <= 1e-6

    def test_wn_identity_coefficients_are_moments(self):
        wn = WrappedNormal(2.0, 1.3)
        fd = FourierDensity.from_distribution(wn, 21, "identity")
        for k in range(1, fd.order + 1):
            expected = np.conj(wn.trigonometric_moment(k)) / TWO_PI
            assert abs(fd.coeffs[fd.order + k] - expected) < 1e-10

    def test_wd_rejected(self):
        with pytest.raises(TypeError):
            FourierDensity.from_distribution(
                WrappedDiracMixture([1.0], [1.0]), 11, "sqrt")

    def test_even_count_normalized_to_odd(self):
        fd = FourierDensity.from_distribution(VonMises(1, 1), 10, "sqrt")
        assert len(fd.coeffs) == 11

    def test_sqrt_norm_invariant(self):
        fd = FourierDensity.from_distribution(VonMises(1.0, 2.0), 31, "sqrt")
        assert TWO_PI * np.sum(np.abs(fd.coeffs) ** 2) == pytest.approx(1.0, abs=1e-12)


class TestPdf:
    def test_sqrt_nonnegative(self):
        fd = FourierDensity.from_distribution(VonMises(1.0, 5.0), 9, "sqrt")
        assert np.all(fd.pdf(XS) >= 0.0)

    def test_identity_uniform_constant(self):
        fd = FourierDensity.from_distribution(CircularUniform(), 15, "identity")
        assert np.allclose(fd.pdf(XS), 1 / TWO_PI, atol=1e-12)

    def test_sqrt_wn_pointwise(self):
        wn = WrappedNormal(2.0, 1.3)
        fd = FourierDensity.from_distribution(wn, 31, "sqrt")
        assert fd.pdf(2.0) == pytest.approx(wn.pdf(2.0), abs=1e-6)

    def test_pdf_on_grid_matches_synthesis(self):
        fd = FourierDensity.from_distribution(VonMises(2.0, 1.5), 21, "sqrt")
        grid = fd.pdf_on_grid(128)
        xs = np.arange(128) * TWO_PI / 128
        assert np.allclose(grid, fd.pdf(xs), atol=1e-12)


class TestMultiply:
    def test_times_uniform_is_identity_op(self):
        fd = FourierDensity.from_distribution(VonMises(1.0, 2.0), 31, "sqrt")
        fu = FourierDensity.from_distribution(CircularUniform(), 31, "sqrt")
        prod = fd.multiply(fu)
        assert grid_tv(prod.pdf(XS), fd.pdf(XS)) < 1e-12

    def test_vm_pair_against_exact_product(self):
        a, b = VonMises(1.0, 2.0), VonMises(2.2, 1.3)
        exact = multiply(a, b)
        fa = FourierDensity.from_distribution(a, 61, "sqrt")
        fb = FourierDensity.from_distribution(b, 61, "sqrt")
        prod = fa.multiply(fb)
        assert grid_tv(prod.pdf(XS), exact.pdf(XS)) <= 1e-4

    def test_symmetric_pair_gives_even_result(self):
        vm = VonMises(0.0, 2.0)
        mirrored = VonMises(0.0, 2.0)
        fa = FourierDensity.from_distribution(vm, 31, "sqrt")
        fb = FourierDensity.from_distribution(mirrored, 31, "sqrt")
        prod = fa.multiply(fb)
        assert np.allclose(prod.pdf(XS), prod.pdf(wrap_neg(XS)), atol=1e-12)

    def test_tag_mismatch_rejected(self):
        fa = FourierDensity.from_distribution(VonMises(1, 1), 11, "sqrt")
        fb = FourierDensity.from_distribution(VonMises(1, 1), 11, "identity")
        with pytest.raises(ValueError):
            fa.multiply(fb)


def wrap_neg(x):
    return np.mod(-x, TWO_PI)


class TestConvolve:
    def test_wn_closure_identity_form(self):
        a, b = WrappedNormal(1.0, 0.4), WrappedNormal(2.0, 0.5)
        exact = convolve(a, b)
        fa = FourierDensity.from_distribution(a, 61, "identity")
        fb = FourierDensity.from_distribution(b, 61, "identity")
        conv = fa.convolve(fb)
        assert np.max(np.abs(conv.pdf(XS) - exact.pdf(XS))) <= 1e-6

    def test_wn_closure_sqrt_form(self):
        a, b = WrappedNormal(1.0, 0.4), WrappedNormal(2.0, 0.5)
        exact = convolve(a, b)
        fa = FourierDensity.from_distribution(a, 61, "sqrt")
        fb = FourierDensity.from_distribution(b, 61, "sqrt")
        conv = fa.convolve(fb)
        assert np.max(np.abs(conv.pdf(XS) - exact.pdf(XS))) <= 1e-6

    def test_concentrated_factor_shifts(self):
        a = WrappedNormal(1.0, 0.5)
        spike = WrappedNormal(0.5, 0.05)
        fa = FourierDensity.from_distribution(a, 101, "sqrt")
        fs = FourierDensity.from_distribution(spike, 101, "sqrt")
        conv = fa.convolve(fs)
        shifted = WrappedNormal(1.5, np.hypot(0.5, 0.05))
        assert np.max(np.abs(conv.pdf(XS) - shifted.pdf(XS))) <= 1e-3

    def test_uniform_smears_everything(self):
        fa = FourierDensity.from_distribution(VonMises(1.0, 3.0), 31, "sqrt")
        fu = FourierDensity.from_distribution(CircularUniform(), 31, "sqrt")
        conv = fa.convolve(fu)
        assert np.allclose(conv.pdf(XS), 1 / TWO_PI, atol=1e-9)


class TestInvariants:
    def test_hermitian_preserved(self):
        fa = FourierDensity.from_distribution(VonMises(1.0, 2.0), 21, "sqrt")
        fb = FourierDensity.from_distribution(WrappedNormal(2.0, 0.7), 21, "sqrt")
        for fd in (fa.multiply(fb), fa.convolve(fb)):
            assert np.allclose(fd.coeffs, np.conj(fd.coeffs[::-1]), atol=1e-14)

    def test_renormalized_after_ops(self):
        fa = FourierDensity.from_distribution(VonMises(1.0, 2.0), 31, "sqrt")
        fb = FourierDensity.from_distribution(WrappedNormal(2.0, 0.7), 31, "sqrt")
        for fd in (fa.multiply(fb), fa.convolve(fb)):
            assert integrate_periodic(fd.pdf) == pytest.approx(1.0, abs=1e-9)

    def test_trigonometric_moment_accessor(self):
        wn = WrappedNormal(2.0, 0.9)
        fd = FourierDensity.from_distribution(wn, 41, "sqrt")
        assert abs(fd.trigonometric_moment(1) - wn.trigonometric_moment(1)) < 1e-8
