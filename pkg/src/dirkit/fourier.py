"""Truncated Fourier-series representation of circular densities.

Two transformations are supported: ``identity`` (coefficients of f itself,
c_0 pinned to 1/(2 pi)) and ``sqrt`` (coefficients of sqrt(f), unit l2 mass,
so reconstructed densities are nonnegative by construction).
"""

import numpy as np

from .core import TWO_PI
from .circular import WrappedDiracMixture

_TRANSFORMATIONS = ("identity", "sqrt")


def _odd_length(n):
    """Coefficient count normalized to the odd value 2*floor(n/2)+1."""
    n = int(n)
    if n < 3:
        raise ValueError("FourierDensity: need at least 3 coefficients")
    return 2 * (n // 2) + 1


def _dft_coefficients(values, grid_size, order):
    """Central Fourier coefficients c_{-order..order} from uniform samples."""
    c = np.fft.fft(values) / grid_size
    ks = np.arange(-order, order + 1)
    return c[ks % grid_size]


def _hermitize(coeffs):
    return 0.5 * (coeffs + np.conj(coeffs[::-1]))


class FourierDensity:
    """Complex coefficient vector c_{-n..n} with a transformation tag."""

    def __init__(self, coeffs, transformation="sqrt", normalize=True):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or len(coeffs) % 2 == 0 or len(coeffs) < 3:
            raise ValueError("FourierDensity: coefficient vector must have odd length >= 3")
        if transformation not in _TRANSFORMATIONS:
            raise ValueError("FourierDensity: unknown transformation %r" % transformation)
        coeffs = _hermitize(coeffs)
        if normalize:
            if transformation == "identity":
                c0 = coeffs[len(coeffs) // 2].real
                if c0 <= 0:
                    raise ValueError("FourierDensity: nonpositive total mass")
                coeffs = coeffs / (TWO_PI * c0)
            else:
                mass = TWO_PI * np.sum(np.abs(coeffs) ** 2)
                if mass <= 0:
                    raise ValueError("FourierDensity: nonpositive total mass")
                coeffs = coeffs / np.sqrt(mass)
        self.coeffs = coeffs
        self.transformation = transformation

    def __repr__(self):
        return "FourierDensity(n=%d, transformation=%r)" % (
            len(self.coeffs), self.transformation)

    @property
    def order(self):
        return len(self.coeffs) // 2

    # ------------------------------------------------------------ creation
    @classmethod
    def from_function(cls, fn, n, transformation="sqrt"):
        """Coefficients of ``fn`` (or its square root) sampled on a fine grid.

        ``fn`` must be nonnegative and vectorized; it is renormalized to unit
        integral, so likelihoods may be passed directly.
        """
        length = _odd_length(n)
        order = length // 2
        grid_size = 2 * length + 1
        xs = np.arange(grid_size) * TWO_PI / grid_size
        vals = np.asarray(fn(xs), dtype=float)
        if np.any(vals < -1e-12):
            raise ValueError("FourierDensity: function takes negative values")
        vals = np.maximum(vals, 0.0)
        if transformation == "sqrt":
            vals = np.sqrt(vals)
        coeffs = _dft_coefficients(vals, grid_size, order)
        return cls(coeffs, transformation)

    @classmethod
    def from_distribution(cls, dist, n, transformation="sqrt"):
        """Transform of a circular distribution's pdf."""
        if isinstance(dist, WrappedDiracMixture):
            raise TypeError("FourierDensity: a Dirac mixture has no density to transform")
        return cls.from_function(dist.pdf, n, transformation)

    # ---------------------------------------------------------- evaluation
    def _synthesis(self, x):
        x = np.asarray(x, dtype=float)
        ks = np.arange(-self.order, self.order + 1)
        return np.tensordot(np.exp(1j * np.multiply.outer(x, ks)), self.coeffs, axes=1)

    def pdf(self, x):
        vals = self._synthesis(x)
        if self.transformation == "identity":
            out = np.maximum(vals.real, 0.0)
        else:
            out = np.abs(vals) ** 2
        return out if np.ndim(out) else float(out)

    def pdf_on_grid(self, grid_size):
        """Density sampled at grid_size equispaced points (fast inverse DFT)."""
        order = self.order
        if grid_size < len(self.coeffs):
            raise ValueError("pdf_on_grid: grid must resolve all coefficients")
        spectrum = np.zeros(grid_size, dtype=complex)
        ks = np.arange(-order, order + 1)
        spectrum[ks % grid_size] = self.coeffs[order + ks]
        vals = np.fft.ifft(spectrum) * grid_size
        if self.transformation == "identity":
            return np.maximum(vals.real, 0.0)
        return np.abs(vals) ** 2

    def trigonometric_moment(self, k):
        """E[exp(i k x)] of the represented density."""
        ident = self.to_identity()
        if k > ident.order:
            return 0.0 + 0.0j
        return complex(TWO_PI * np.conj(ident.coeffs[ident.order + k]))

    def circular_mean(self):
        from .core import wrap

        return wrap(np.angle(self.trigonometric_moment(1)))

    def to_identity(self):
        """Identity-form representation (self-convolution of sqrt coefficients)."""
        if self.transformation == "identity":
            return self
        conv = np.convolve(self.coeffs, self.coeffs)
        return FourierDensity(conv, "identity")

    # ------------------------------------------------------------- algebra
    def multiply(self, other):
        """Pointwise function product, truncated back and renormalized."""
        if self.transformation != other.transformation:
            raise ValueError("multiply: transformation tags must match")
        full = np.convolve(self.coeffs, other.coeffs)
        center = len(full) // 2
        keep = max(self.order, other.order)
        sliced = full[center - keep:center + keep + 1]
        return FourierDensity(sliced, self.transformation)

    def convolve(self, other):
        """Circular convolution of the two represented densities."""
        if self.transformation != other.transformation:
            raise ValueError("convolve: transformation tags must match")
        if self.transformation == "identity":
            a, b = _pad_to_match(self.coeffs, other.coeffs)
            return FourierDensity(TWO_PI * a * b, "identity")
        ia = self.to_identity()
        ib = other.to_identity()
        a, b = _pad_to_match(ia.coeffs, ib.coeffs)
        prod = FourierDensity(TWO_PI * a * b, "identity")
        # back to the sqrt domain through a dense nonnegative square root
        grid_size = 4 * len(prod.coeffs) + 1
        vals = np.sqrt(prod.pdf_on_grid(grid_size))
        coeffs = _dft_coefficients(vals, grid_size, self.order)
        return FourierDensity(coeffs, "sqrt")


def _pad_to_match(a, b):
    la, lb = len(a), len(b)
    if la == lb:
        return a, b
    size = max(la, lb)
    return _pad_center(a, size), _pad_center(b, size)


def _pad_center(c, size):
    pad = (size - len(c)) // 2
    return np.pad(c, (pad, pad))
