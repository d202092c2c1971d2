"""Distributions on the hypertorus [0, 2pi)^d.

The torus (d = 2) carries the bivariate von Mises variants, circular-circular
correlation coefficients, and 4-d trigonometric moment summaries; the wrapped
normal and its Dirac counterpart generalize to any d.
"""

import math

import numpy as np

from .core import (
    TWO_PI,
    UndefinedMeanError,
    integrate_periodic,
    wrap,
)
from .circular import (
    CustomCircular,
    CircularUniform,
    WrappedNormal,
    _check_rng,
    _wrap_count,
)


def _check_point(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise ValueError("point dimension %d does not match distribution dimension %d"
                         % (x.shape[-1], dim))
    return x


class HypertoroidalDistribution:
    """Base contract for continuous densities on [0, 2pi)^d."""

    dim = None

    def pdf(self, x):
        raise NotImplementedError

    def trigonometric_moment(self, k):
        """E[exp(i k . x)] for an integer vector k."""
        return self.trigonometric_moment_numerical(k)

    def trigonometric_moment_numerical(self, k, tol=None):
        k = np.asarray(k, dtype=float)
        if len(k) != self.dim:
            raise ValueError("moment index must have length %d" % self.dim)

        def integrand(*coords):
            pts = np.stack(np.broadcast_arrays(*coords), axis=-1)
            phase = sum(k[i] * coords[i] for i in range(self.dim))
            return np.exp(1j * phase) * self.pdf(pts)

        return complex(integrate_periodic(integrand, d=self.dim, tol=tol))

    def circular_mean(self):
        """Per-axis circular means as a d-vector."""
        out = np.empty(self.dim)
        for i in range(self.dim):
            k = np.zeros(self.dim)
            k[i] = 1
            m = self.trigonometric_moment(k)
            if abs(m) < 1e-12:
                raise UndefinedMeanError("circular mean undefined on axis %d" % i)
            out[i] = wrap(np.angle(m))
        return out

    def sample(self, n, rng, grid_size=200):
        """Categorical sampling on a fine grid with in-cell jitter (d <= 3)."""
        rng = _check_rng(rng)
        if self.dim > 3:
            raise NotImplementedError("grid sampling supports d <= 3")
        axes = [np.arange(grid_size) * TWO_PI / grid_size] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        probs = self.pdf(pts).ravel()
        probs = np.maximum(probs, 0)
        probs /= probs.sum()
        idx = rng.choice(len(probs), size=n, p=probs)
        cells = np.stack(np.unravel_index(idx, (grid_size,) * self.dim), axis=-1)
        jitter = rng.random((n, self.dim))
        return (cells + jitter) * TWO_PI / grid_size

    # ----------------------------------------------------- 4-d summaries
    def mean4d(self):
        """E[cos x1, sin x1, cos x2, sin x2] for torus distributions."""
        if self.dim != 2:
            raise ValueError("mean4d requires a torus distribution (d = 2)")
        m10 = self.trigonometric_moment([1, 0])
        m01 = self.trigonometric_moment([0, 1])
        return np.array([m10.real, m10.imag, m01.real, m01.imag])

    def covariance4d(self):
        """Covariance of (cos x1, sin x1, cos x2, sin x2)."""
        if self.dim != 2:
            raise ValueError("covariance4d requires a torus distribution (d = 2)")
        m10 = self.trigonometric_moment([1, 0])
        m01 = self.trigonometric_moment([0, 1])
        m20 = self.trigonometric_moment([2, 0])
        m02 = self.trigonometric_moment([0, 2])
        m11 = self.trigonometric_moment([1, 1])
        m1m1 = self.trigonometric_moment([1, -1])
        mean = np.array([m10.real, m10.imag, m01.real, m01.imag])
        second = np.array([
            [0.5 * (1 + m20.real), 0.5 * m20.imag,
             0.5 * (m1m1.real + m11.real), 0.5 * (m11.imag - m1m1.imag)],
            [0.5 * m20.imag, 0.5 * (1 - m20.real),
             0.5 * (m11.imag + m1m1.imag), 0.5 * (m1m1.real - m11.real)],
            [0.5 * (m1m1.real + m11.real), 0.5 * (m11.imag + m1m1.imag),
             0.5 * (1 + m02.real), 0.5 * m02.imag],
            [0.5 * (m11.imag - m1m1.imag), 0.5 * (m1m1.real - m11.real),
             0.5 * m02.imag, 0.5 * (1 - m02.real)],
        ])
        return second - np.outer(mean, mean)

    # ----------------------------------------------------- correlations
    def correlation_jammalamadaka(self):
        """E[sin(x1-mu1) sin(x2-mu2)] normalized by the sine second moments."""
        if self.dim != 2:
            raise ValueError("correlation coefficients require d = 2")
        mu = self.circular_mean()
        m11 = self.trigonometric_moment([1, 1])
        m1m1 = self.trigonometric_moment([1, -1])
        m20 = self.trigonometric_moment([2, 0])
        m02 = self.trigonometric_moment([0, 2])
        num = 0.5 * ((m1m1 * np.exp(-1j * (mu[0] - mu[1]))).real
                     - (m11 * np.exp(-1j * (mu[0] + mu[1]))).real)
        s1 = 0.5 * (1.0 - (m20 * np.exp(-2j * mu[0])).real)
        s2 = 0.5 * (1.0 - (m02 * np.exp(-2j * mu[1])).real)
        return float(num / math.sqrt(s1 * s2))

    def _canonical_blocks(self):
        cov = self.covariance4d()
        s11, s22, s12 = cov[:2, :2], cov[2:, 2:], cov[:2, 2:]
        m = np.linalg.solve(s11, s12) @ np.linalg.solve(s22, s12.T)
        eigs = np.clip(np.linalg.eigvals(m).real, 0.0, None)
        sign = np.sign(np.linalg.det(s12))
        return eigs, sign

    def correlation_johnson(self):
        """Signed first canonical correlation of the 4-d covariance blocks."""
        eigs, sign = self._canonical_blocks()
        return float(sign * math.sqrt(eigs.max()))

    def correlation_jupp(self):
        """Signed square root of the canonical trace; not confined to [-1, 1]."""
        eigs, sign = self._canonical_blocks()
        return float(sign * math.sqrt(eigs.sum()))

    # --------------------------------------------------- marginalization
    def marginalize_to_1d(self, dimension):
        """Circular marginal over one retained axis (1-based index)."""
        i = int(dimension) - 1
        if not 0 <= i < self.dim:
            raise ValueError("marginalize_to_1d: dimension out of range")
        others = [j for j in range(self.dim) if j != i]
        if self.dim not in (2, 3):
            raise NotImplementedError("numeric marginalization supports d in {2, 3}")

        def marginal(x):
            x = np.asarray(x, dtype=float)
            out = np.empty(x.shape)
            for idx in np.ndindex(x.shape):
                def slice_pdf(*coords, xi=x[idx]):
                    grids = np.broadcast_arrays(*coords)
                    pt = np.empty(grids[0].shape + (self.dim,))
                    pt[..., i] = xi
                    for axis, g in zip(others, grids):
                        pt[..., axis] = g
                    return self.pdf(pt)

                out[idx] = integrate_periodic(slice_pdf, d=self.dim - 1,
                                              tol=1e-9 if self.dim == 2 else 1e-7)
            return out

        return CustomCircular(marginal, prenormalized=True)


class HypertoroidalUniform(HypertoroidalDistribution):
    """Constant density (2 pi)^-d."""

    def __init__(self, dim):
        if dim < 1:
            raise ValueError("HypertoroidalUniform: dim must be >= 1")
        self.dim = int(dim)

    def __repr__(self):
        return "HypertoroidalUniform(dim=%d)" % self.dim

    def pdf(self, x):
        x = _check_point(x, self.dim)
        out = np.full(x.shape[:-1], TWO_PI ** (-self.dim))
        return out if out.ndim else float(out)

    def trigonometric_moment(self, k):
        k = np.asarray(k, dtype=float)
        if np.all(k == 0):
            return 1.0 + 0.0j
        return 0.0 + 0.0j

    def sample(self, n, rng, grid_size=None):
        rng = _check_rng(rng)
        return rng.random((n, self.dim)) * TWO_PI

    def marginalize_to_1d(self, dimension):
        return CircularUniform()


class HypertoroidalWN(HypertoroidalDistribution):
    """Multivariate Gaussian wrapped independently along every axis."""

    def __init__(self, mu, C):
        mu = np.asarray(mu, dtype=float)
        C = np.asarray(C, dtype=float)
        if mu.ndim != 1 or C.shape != (len(mu), len(mu)):
            raise ValueError("HypertoroidalWN: mu and C dimensions must agree")
        if np.max(np.abs(C - C.T)) > 1e-12:
            raise ValueError("HypertoroidalWN: covariance must be symmetric")
        eig = np.linalg.eigvalsh(C)
        if np.min(eig) <= 0:
            raise ValueError("HypertoroidalWN: covariance must be positive definite")
        self.mu = wrap(mu)
        self.C = 0.5 * (C + C.T)
        self.dim = len(mu)
        self._Cinv = np.linalg.inv(self.C)
        self._lognorm = 0.5 * (self.dim * math.log(TWO_PI) + math.log(np.linalg.det(self.C)))
        self._offsets = self._lattice()

    def __repr__(self):
        return "HypertoroidalWN(dim=%d)" % self.dim

    def _lattice(self):
        axes = [np.arange(-_wrap_count(math.sqrt(self.C[i, i])),
                          _wrap_count(math.sqrt(self.C[i, i])) + 1)
                for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return TWO_PI * np.stack([m.ravel() for m in mesh], axis=-1)

    def pdf(self, x):
        x = _check_point(x, self.dim)
        diffs = x[..., None, :] - self.mu + self._offsets
        q = np.einsum("...ki,ij,...kj->...k", diffs, self._Cinv, diffs)
        out = np.exp(-0.5 * q - self._lognorm).sum(axis=-1)
        return out if np.ndim(out) else float(out)

    def trigonometric_moment(self, k):
        k = np.asarray(k, dtype=float)
        if len(k) != self.dim:
            raise ValueError("moment index must have length %d" % self.dim)
        return complex(np.exp(1j * k @ self.mu - 0.5 * k @ self.C @ k))

    def circular_mean(self):
        return self.mu.copy()

    def sample(self, n, rng, grid_size=None):
        rng = _check_rng(rng)
        return wrap(rng.multivariate_normal(self.mu, self.C, size=n))

    def marginalize_to_1d(self, dimension):
        i = int(dimension) - 1
        if not 0 <= i < self.dim:
            raise ValueError("marginalize_to_1d: dimension out of range")
        return WrappedNormal(self.mu[i], math.sqrt(self.C[i, i]))

    @classmethod
    def from_moments(cls, first_moments, pair_moments):
        """Wrapped normal matched to per-axis first moments and pair moments.

        ``first_moments`` holds E[exp(i x_j)]; ``pair_moments[(i, j)]`` holds
        the pair (E[exp(i(x_i + x_j))], E[exp(i(x_i - x_j))]).
        """
        first_moments = np.asarray(first_moments, dtype=complex)
        d = len(first_moments)
        mu = wrap(np.angle(first_moments))
        C = np.zeros((d, d))
        for i in range(d):
            r = abs(first_moments[i])
            if not 0.0 < r < 1.0:
                raise ValueError("from_moments: axis moment magnitude out of (0, 1)")
            C[i, i] = -2.0 * math.log(r)
        for (i, j), (m_sum, m_diff) in pair_moments.items():
            cij = 0.5 * (math.log(abs(m_diff)) - math.log(abs(m_sum)))
            C[i, j] = C[j, i] = cij
        # nudge back to positive definiteness if moment noise pushed it out
        eig, vec = np.linalg.eigh(C)
        if np.min(eig) <= 1e-12:
            eig = np.maximum(eig, 1e-10)
            C = vec @ np.diag(eig) @ vec.T
        return cls(mu, C)


class HypertoroidalWD:
    """Weighted point masses on the hypertorus."""

    def __init__(self, d, w):
        d = np.asarray(d, dtype=float)
        w = np.asarray(w, dtype=float)
        if d.ndim != 2 or len(d) != len(w) or len(d) == 0:
            raise ValueError("HypertoroidalWD: points must be (n, dim) with matching weights")
        if np.any(w <= 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
            raise ValueError("HypertoroidalWD: weights must be positive and sum to 1")
        self.d = wrap(d)
        self.w = w / w.sum()
        self.dim = d.shape[1]

    def __repr__(self):
        return "HypertoroidalWD(n=%d, dim=%d)" % (len(self.d), self.dim)

    def pdf(self, x):
        raise NotImplementedError("a Dirac mixture has no probability density function")

    def trigonometric_moment(self, k):
        k = np.asarray(k, dtype=float)
        return complex(np.sum(self.w * np.exp(1j * self.d @ k)))

    trigonometric_moment_numerical = trigonometric_moment

    mean4d = HypertoroidalDistribution.mean4d
    covariance4d = HypertoroidalDistribution.covariance4d
    circular_mean = HypertoroidalDistribution.circular_mean
    correlation_jammalamadaka = HypertoroidalDistribution.correlation_jammalamadaka
    _canonical_blocks = HypertoroidalDistribution._canonical_blocks
    correlation_johnson = HypertoroidalDistribution.correlation_johnson
    correlation_jupp = HypertoroidalDistribution.correlation_jupp

    def sample(self, n, rng):
        rng = _check_rng(rng)
        return self.d[rng.choice(len(self.d), size=n, p=self.w)]

    def apply(self, fn):
        return HypertoroidalWD(wrap(fn(self.d)), self.w)

    def reweighted(self, factors):
        w = self.w * np.asarray(factors, dtype=float)
        total = w.sum()
        if total <= 0 or not np.isfinite(total):
            raise RuntimeError("reweighting produced a degenerate mixture")
        return HypertoroidalWD(self.d, w / total)


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


class ToroidalVMSine(HypertoroidalDistribution):
    """Sine-coupled bivariate von Mises density; normalization cached."""

    dim = 2

    def __init__(self, mu, kappa, lam):
        mu = np.asarray(mu, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        if mu.shape != (2,) or kappa.shape != (2,) or np.any(kappa < 0):
            raise ValueError("ToroidalVMSine: need two means and two nonnegative kappas")
        self.mu = wrap(mu)
        self.kappa = kappa.copy()
        self.lam = float(lam)
        self._norm = float(integrate_periodic(self._unnormalized, d=2))

    def __repr__(self):
        return "ToroidalVMSine(mu=%s, kappa=%s, lam=%.6g)" % (self.mu, self.kappa, self.lam)

    def _unnormalized(self, x1, x2):
        return np.exp(self.kappa[0] * np.cos(x1 - self.mu[0])
                      + self.kappa[1] * np.cos(x2 - self.mu[1])
                      + self.lam * np.sin(x1 - self.mu[0]) * np.sin(x2 - self.mu[1]))

    def pdf(self, x):
        x = _check_point(x, 2)
        out = self._unnormalized(x[..., 0], x[..., 1]) / self._norm
        return out if np.ndim(out) else float(out)


class ToroidalVMMatrix(HypertoroidalDistribution):
    """Matrix-coupled bivariate von Mises density; closed under multiplication."""

    dim = 2

    def __init__(self, mu, kappa, A):
        mu = np.asarray(mu, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        A = np.asarray(A, dtype=float)
        if mu.shape != (2,) or kappa.shape != (2,) or A.shape != (2, 2):
            raise ValueError("ToroidalVMMatrix: expect two means, two kappas, 2x2 coupling")
        if np.any(kappa < 0):
            raise ValueError("ToroidalVMMatrix: kappas must be nonnegative")
        self.mu = wrap(mu)
        self.kappa = kappa.copy()
        self.A = A.copy()
        self._norm = float(integrate_periodic(self._unnormalized, d=2))

    def __repr__(self):
        return "ToroidalVMMatrix(mu=%s, kappa=%s)" % (self.mu, self.kappa)

    def _unnormalized(self, x1, x2):
        u1 = np.stack([np.cos(x1 - self.mu[0]), np.sin(x1 - self.mu[0])], axis=-1)
        u2 = np.stack([np.cos(x2 - self.mu[1]), np.sin(x2 - self.mu[1])], axis=-1)
        coupling = np.einsum("...i,ij,...j->...", u1, self.A, u2)
        return np.exp(self.kappa[0] * np.cos(x1 - self.mu[0])
                      + self.kappa[1] * np.cos(x2 - self.mu[1]) + coupling)

    def pdf(self, x):
        x = _check_point(x, 2)
        out = self._unnormalized(x[..., 0], x[..., 1]) / self._norm
        return out if np.ndim(out) else float(out)

    def _global_parameters(self):
        """Exponent parameters in the frame with zero means."""
        z1 = self.kappa[0] * np.exp(1j * self.mu[0])
        z2 = self.kappa[1] * np.exp(1j * self.mu[1])
        G = _rotation(-self.mu[0]).T @ self.A @ _rotation(-self.mu[1])
        return z1, z2, G

    @classmethod
    def _from_global(cls, z1, z2, G):
        mu = np.array([np.angle(z1) if abs(z1) > 0 else 0.0,
                       np.angle(z2) if abs(z2) > 0 else 0.0])
        kappa = np.array([abs(z1), abs(z2)])
        A = _rotation(-mu[0]) @ G @ _rotation(-mu[1]).T
        return cls(mu, kappa, A)


def multiply_tvm_matrix(a, b):
    """Exact product of two matrix-coupled bivariate von Mises densities."""
    if not isinstance(a, ToroidalVMMatrix) or not isinstance(b, ToroidalVMMatrix):
        raise TypeError("multiply_tvm_matrix: both factors must be ToroidalVMMatrix")
    za1, za2, Ga = a._global_parameters()
    zb1, zb2, Gb = b._global_parameters()
    return ToroidalVMMatrix._from_global(za1 + zb1, za2 + zb2, Ga + Gb)


def convolve_hwn(a, b):
    """Exact convolution of two hypertoroidal wrapped normals."""
    if not isinstance(a, HypertoroidalWN) or not isinstance(b, HypertoroidalWN):
        raise TypeError("convolve_hwn: both factors must be HypertoroidalWN")
    if a.dim != b.dim:
        raise ValueError("convolve_hwn: dimension mismatch")
    return HypertoroidalWN(wrap(a.mu + b.mu), a.C + b.C)


def multiply_hwn(a, b, grid_size=200):
    """Moment-matched wrapped normal approximation of a pdf product (d = 2)."""
    if not isinstance(a, HypertoroidalWN) or not isinstance(b, HypertoroidalWN):
        raise TypeError("multiply_hwn: both factors must be HypertoroidalWN")
    if a.dim != b.dim:
        raise ValueError("multiply_hwn: dimension mismatch")
    if a.dim != 2:
        raise NotImplementedError("multiply_hwn: implemented for d = 2")
    xs = np.arange(grid_size) * TWO_PI / grid_size
    X1, X2 = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X1, X2], axis=-1)
    prod = a.pdf(pts) * b.pdf(pts)
    mass = prod.sum()
    if mass <= 0:
        raise RuntimeError("multiply_hwn: product density vanished on the grid")
    prod = prod / mass

    def disc_moment(k1, k2):
        return complex(np.sum(prod * np.exp(1j * (k1 * X1 + k2 * X2))))

    first = [disc_moment(1, 0), disc_moment(0, 1)]
    pair = {(0, 1): (disc_moment(1, 1), disc_moment(1, -1))}
    return HypertoroidalWN.from_moments(first, pair)


class HypertoroidalMixture(HypertoroidalDistribution):
    """Finite mixture of hypertoroidal densities with a shared dimension."""

    def __init__(self, components, weights):
        w = np.asarray(weights, dtype=float)
        if len(components) != len(w) or len(w) == 0:
            raise ValueError("HypertoroidalMixture: components and weights must align")
        if np.any(w <= 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
            raise ValueError("HypertoroidalMixture: weights must be positive and sum to 1")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise ValueError("HypertoroidalMixture: component dimensions differ")
        self.components = list(components)
        self.weights = w / w.sum()
        self.dim = components[0].dim

    def __repr__(self):
        return "HypertoroidalMixture(n=%d, dim=%d)" % (len(self.components), self.dim)

    def pdf(self, x):
        out = sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))
        return out if np.ndim(out) else float(out)

    def trigonometric_moment(self, k):
        return complex(sum(w * c.trigonometric_moment(k)
                           for w, c in zip(self.weights, self.components)))

    def sample(self, n, rng, grid_size=200):
        rng = _check_rng(rng)
        counts = rng.multinomial(n, self.weights)
        parts = [c.sample(m, rng) for c, m in zip(self.components, counts) if m > 0]
        out = np.concatenate(parts, axis=0)
        rng.shuffle(out, axis=0)
        return out


class CustomHypertoroidal(HypertoroidalDistribution):
    """User-specified density on the hypertorus; normalized unless flagged."""

    def __init__(self, fn, dim, prenormalized=False, expr=None):
        self._fn = fn
        self.dim = int(dim)
        self.expr = expr
        self.prenormalized = bool(prenormalized)
        if prenormalized:
            self._norm = 1.0
        else:
            def raw(*coords):
                pts = np.stack(np.broadcast_arrays(*coords), axis=-1)
                return np.asarray(fn(pts), dtype=float)
            self._norm = float(integrate_periodic(raw, d=self.dim))
            if self._norm <= 0:
                raise ValueError("CustomHypertoroidal: nonpositive normalization")

    def __repr__(self):
        return "CustomHypertoroidal(dim=%d)" % self.dim

    def pdf(self, x):
        x = _check_point(x, self.dim)
        out = np.asarray(self._fn(x), dtype=float) / self._norm
        return out if np.ndim(out) else float(out)


class HypertoroidalFourier:
    """Tensor of Fourier coefficients indexed k_i = -n_i..n_i per axis."""

    def __init__(self, coeffs, transformation="sqrt", normalize=True):
        coeffs = np.asarray(coeffs, dtype=complex)
        if any(s % 2 == 0 or s < 3 for s in coeffs.shape):
            raise ValueError("HypertoroidalFourier: every axis length must be odd >= 3")
        if transformation not in ("identity", "sqrt"):
            raise ValueError("HypertoroidalFourier: unknown transformation")
        coeffs = 0.5 * (coeffs + np.conj(coeffs[(slice(None, None, -1),) * coeffs.ndim]))
        if normalize:
            if transformation == "identity":
                center = tuple(s // 2 for s in coeffs.shape)
                c0 = coeffs[center].real
                if c0 <= 0:
                    raise ValueError("HypertoroidalFourier: nonpositive total mass")
                coeffs = coeffs / (TWO_PI ** coeffs.ndim * c0)
            else:
                mass = TWO_PI ** coeffs.ndim * np.sum(np.abs(coeffs) ** 2)
                coeffs = coeffs / np.sqrt(mass)
        self.coeffs = coeffs
        self.transformation = transformation
        self.dim = coeffs.ndim

    def __repr__(self):
        return "HypertoroidalFourier(shape=%s, transformation=%r)" % (
            self.coeffs.shape, self.transformation)

    @classmethod
    def from_function(cls, fn, shape, transformation="sqrt"):
        """Transform of a nonnegative vectorized function of d angle arrays."""
        shape = tuple(2 * (int(s) // 2) + 1 for s in shape)
        grid = tuple(2 * s + 1 for s in shape)
        axes = [np.arange(g) * TWO_PI / g for g in grid]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        vals = np.asarray(fn(pts), dtype=float)
        vals = np.maximum(vals, 0.0)
        if transformation == "sqrt":
            vals = np.sqrt(vals)
        c = np.fft.fftn(vals) / np.prod(grid)
        slabs = np.ix_(*[np.arange(-(s // 2), s // 2 + 1) % g
                         for s, g in zip(shape, grid)])
        return cls(c[slabs], transformation)

    @classmethod
    def from_distribution(cls, dist, shape, transformation="sqrt"):
        if isinstance(dist, (HypertoroidalWD,)):
            raise TypeError("HypertoroidalFourier: Dirac mixtures have no density")
        return cls.from_function(dist.pdf, shape, transformation)

    def _synthesis(self, x):
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, self.dim)
        bases = []
        for axis in range(self.dim):
            ks = np.arange(-(self.coeffs.shape[axis] // 2),
                           self.coeffs.shape[axis] // 2 + 1)
            bases.append(np.exp(1j * np.outer(pts[:, axis], ks)))
        if self.dim == 1:
            flat = np.einsum("pj,j->p", bases[0], self.coeffs)
        elif self.dim == 2:
            flat = np.einsum("pj,pk,jk->p", bases[0], bases[1], self.coeffs)
        elif self.dim == 3:
            flat = np.einsum("pj,pk,pl,jkl->p", bases[0], bases[1], bases[2],
                             self.coeffs)
        else:
            raise NotImplementedError("pointwise synthesis supports d <= 3")
        return flat.reshape(x.shape[:-1])

    def pdf(self, x):
        vals = self._synthesis(x)
        if self.transformation == "identity":
            out = np.maximum(vals.real, 0.0)
        else:
            out = np.abs(vals) ** 2
        return out if np.ndim(out) else float(out)

    def pdf_on_grid(self, grid_size):
        """Density on a uniform tensor grid with grid_size points per axis."""
        spectrum = np.zeros((grid_size,) * self.dim, dtype=complex)
        idx = np.ix_(*[np.arange(-(s // 2), s // 2 + 1) % grid_size
                       for s in self.coeffs.shape])
        spectrum[idx] = self.coeffs
        vals = np.fft.ifftn(spectrum) * grid_size ** self.dim
        if self.transformation == "identity":
            return np.maximum(vals.real, 0.0)
        return np.abs(vals) ** 2

    def to_identity(self):
        if self.transformation == "identity":
            return self
        from scipy.signal import fftconvolve

        conv = fftconvolve(self.coeffs, self.coeffs, mode="full")
        return HypertoroidalFourier(conv, "identity")

    def multiply(self, other):
        if self.transformation != other.transformation:
            raise ValueError("multiply: transformation tags must match")
        if self.coeffs.shape != other.coeffs.shape:
            raise ValueError("multiply: coefficient shapes must match")
        from scipy.signal import fftconvolve

        full = fftconvolve(self.coeffs, other.coeffs, mode="full")
        slices = tuple(slice(s // 2, s // 2 + s) for s in self.coeffs.shape)
        return HypertoroidalFourier(full[slices], self.transformation)

    def convolve(self, other):
        if self.transformation != other.transformation:
            raise ValueError("convolve: transformation tags must match")
        if self.transformation == "identity":
            return HypertoroidalFourier(
                TWO_PI ** self.dim * self.coeffs * other.coeffs, "identity")
        ia, ib = self.to_identity(), other.to_identity()
        prod = HypertoroidalFourier(
            TWO_PI ** self.dim * ia.coeffs * ib.coeffs, "identity")
        grid = 4 * max(prod.coeffs.shape) + 1
        vals = np.sqrt(prod.pdf_on_grid(grid))
        c = np.fft.fftn(vals) / grid ** self.dim
        idx = np.ix_(*[np.arange(-(s // 2), s // 2 + 1) % grid
                       for s in self.coeffs.shape])
        return HypertoroidalFourier(c[idx], "sqrt")

    def trigonometric_moment(self, k):
        ident = self.to_identity()
        k = np.asarray(k, dtype=int)
        center = tuple(s // 2 for s in ident.coeffs.shape)
        idx = tuple(c + ki for c, ki in zip(center, k))
        if any(not 0 <= i < s for i, s in zip(idx, ident.coeffs.shape)):
            return 0.0 + 0.0j
        return complex(TWO_PI ** self.dim * np.conj(ident.coeffs[idx]))

    mean4d = HypertoroidalDistribution.mean4d
    covariance4d = HypertoroidalDistribution.covariance4d
    circular_mean = HypertoroidalDistribution.circular_mean
