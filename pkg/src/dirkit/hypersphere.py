"""Densities on the real unit hypersphere S^{d-1} embedded in R^d.

Supported: von Mises-Fisher, Watson, Bingham (d <= 4), the uniform
distribution, and spherical Dirac mixtures.  Normalization constants beyond
closed forms are computed by adaptive surface quadrature in (hyper)spherical
coordinates.
"""

import math

import numpy as np
from scipy.special import ive

from .core import (
    TWO_PI,
    bessel_ratio,
    integrate_box,
    inverse_bessel_ratio,
    kummer_series,
    surface_area_sphere,
)
from .circular import _check_rng

_MAX_KAPPA = 1e6


def _check_unit(x, name="x", atol=1e-10):
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise ValueError("%s must have unit norm" % name)
    return x


def integrate_sphere(f, d, tol=None):
    """Integrate a vectorized function of unit vectors over S^{d-1}, d in {2,3,4}.

    ``f`` receives an (..., d) array of unit vectors.
    """
    if d == 2:
        def wrapped(phi):
            pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
            return f(pts)

        return integrate_box(wrapped, [0.0], [TWO_PI], tol=tol)
    if d == 3:
        def wrapped(theta, phi):
            st = np.sin(theta)
            pts = np.stack([st * np.cos(phi), st * np.sin(phi),
                            np.cos(theta) * np.ones_like(phi)], axis=-1)
            return f(pts) * st

        return integrate_box(wrapped, [0.0, 0.0], [np.pi, TWO_PI], tol=tol)
    if d == 4:
        def wrapped(chi, theta, phi):
            sc, st = np.sin(chi), np.sin(theta)
            pts = np.stack([sc * st * np.cos(phi), sc * st * np.sin(phi),
                            sc * np.cos(theta), np.cos(chi) * np.ones_like(phi)],
                           axis=-1)
            return f(pts) * sc * sc * st

        return integrate_box(wrapped, [0.0, 0.0, 0.0], [np.pi, np.pi, TWO_PI],
                             tol=tol if tol is not None else 1e-6)
    raise ValueError("integrate_sphere: d must be 2, 3, or 4")


def _tangent_basis(mu):
    """Orthonormal basis of the tangent space at mu (columns)."""
    d = len(mu)
    basis = np.linalg.svd(mu.reshape(-1, 1), full_matrices=True)[0][:, 1:]
    # svd may flip orientation; any orthonormal completion works
    assert basis.shape == (d, d - 1)
    return basis


class VonMisesFisher:
    """Unimodal, rotationally symmetric density exp(kappa mu.x) / C."""

    def __init__(self, mu, kappa):
        mu = np.asarray(mu, dtype=float)
        if mu.ndim != 1 or len(mu) < 2:
            raise ValueError("VonMisesFisher: mu must be a vector in R^d, d >= 2")
        if abs(np.linalg.norm(mu) - 1.0) > 1e-10:
            raise ValueError("VonMisesFisher: mu must have unit norm")
        if kappa < 0:
            raise ValueError("VonMisesFisher: kappa must be >= 0")
        if kappa > _MAX_KAPPA:
            raise ValueError("VonMisesFisher: kappa above %g is rejected" % _MAX_KAPPA)
        self.mu = mu / np.linalg.norm(mu)
        self.kappa = float(kappa)
        self.dim = len(mu)

    def __repr__(self):
        return "VonMisesFisher(dim=%d, kappa=%.6g)" % (self.dim, self.kappa)

    @staticmethod
    def log_norm(d, kappa):
        """log of the density prefactor C_d(kappa)."""
        if kappa == 0.0:
            return -math.log(surface_area_sphere(d))
        nu = d / 2.0 - 1.0
        log_bessel = math.log(ive(nu, kappa)) + kappa
        return nu * math.log(kappa) - (d / 2.0) * math.log(TWO_PI) - log_bessel

    def pdf(self, x):
        x = _check_unit(x)
        dots = x @ self.mu
        out = np.exp(self.kappa * dots + self.log_norm(self.dim, self.kappa))
        return out if np.ndim(out) else float(out)

    def mean_resultant_length(self):
        return bessel_ratio(self.dim, self.kappa)

    @classmethod
    def fit(cls, samples, weights=None):
        """Moment-matched fit from (weighted) unit-vector samples."""
        samples = _check_unit(np.asarray(samples, dtype=float), "samples")
        if weights is None:
            weights = np.full(len(samples), 1.0 / len(samples))
        weights = np.asarray(weights, dtype=float)
        resultant = weights @ samples / weights.sum()
        rbar = np.linalg.norm(resultant)
        if rbar < 1e-12:
            raise ValueError("VonMisesFisher.fit: zero resultant, direction undefined")
        if rbar >= 1.0 - 1e-12:
            raise ValueError("VonMisesFisher.fit: resultant length ~1, kappa diverges")
        d = samples.shape[1]
        return cls(resultant / rbar, inverse_bessel_ratio(d, rbar))

    def sample(self, n, rng):
        """Tangent-normal decomposition with rejection-sampled axial component."""
        rng = _check_rng(rng)
        d = self.dim
        if self.kappa < 1e-12:
            return HypersphericalUniform(d).sample(n, rng)
        w = self._sample_axial(n, rng)
        v = rng.standard_normal((n, d))
        v -= np.outer(v @ self.mu, self.mu)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return w[:, None] * self.mu + np.sqrt(1.0 - w ** 2)[:, None] * v

    def _sample_axial(self, n, rng):
        # Ulrich/Wood envelope for the cosine of the polar angle
        d = self.dim
        kappa = self.kappa
        b = (d - 1.0) / (math.sqrt(4.0 * kappa ** 2 + (d - 1.0) ** 2) + 2.0 * kappa)
        x0 = (1.0 - b) / (1.0 + b)
        c = kappa * x0 + (d - 1.0) * math.log(1.0 - x0 * x0)
        out = np.empty(n)
        filled = 0
        while filled < n:
            todo = n - filled
            z = rng.beta((d - 1.0) / 2.0, (d - 1.0) / 2.0, size=todo)
            w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
            u = rng.random(todo)
            ok = kappa * w + (d - 1.0) * np.log(1.0 - x0 * w) - c >= np.log(u)
            take = w[ok][: n - filled]
            out[filled:filled + len(take)] = take
            filled += len(take)
        return out

    def sample_deterministic(self):
        """2(d-1)+1 equally weighted points matching E[mu.x] exactly."""
        d = self.dim
        a = bessel_ratio(d, self.kappa)
        m = 2 * (d - 1) + 1
        # equal weights: mode contributes 1, ring of 2(d-1) points at angle theta
        cos_theta = (m * a - 1.0) / (m - 1.0)
        cos_theta = min(max(cos_theta, -1.0), 1.0)
        sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta ** 2))
        basis = _tangent_basis(self.mu)
        points = [self.mu]
        for i in range(d - 1):
            for sign in (+1.0, -1.0):
                points.append(cos_theta * self.mu + sign * sin_theta * basis[:, i])
        return SphericalDiracMixture(np.array(points), np.full(m, 1.0 / m))


def vmf_multiply(a, b):
    """Exact renormalized product of two von Mises-Fisher densities."""
    if a.dim != b.dim:
        raise ValueError("vmf_multiply: dimension mismatch")
    vec = a.kappa * a.mu + b.kappa * b.mu
    kappa = np.linalg.norm(vec)
    if kappa < 1e-14:
        mu = np.zeros(a.dim)
        mu[0] = 1.0
        return VonMisesFisher(mu, 0.0)
    return VonMisesFisher(vec / kappa, kappa)


def vmf_convolve(a, b):
    """Moment-matched composition: direction of ``a``, contracted concentration."""
    if a.dim != b.dim:
        raise ValueError("vmf_convolve: dimension mismatch")
    d = a.dim
    r = bessel_ratio(d, a.kappa) * bessel_ratio(d, b.kappa)
    return VonMisesFisher(a.mu, inverse_bessel_ratio(d, r))


class Watson:
    """Antipodally symmetric density proportional to exp(kappa (mu.x)^2)."""

    def __init__(self, mu, kappa):
        mu = np.asarray(mu, dtype=float)
        if abs(np.linalg.norm(mu) - 1.0) > 1e-10:
            raise ValueError("Watson: mu must have unit norm")
        if not np.isfinite(kappa):
            raise ValueError("Watson: kappa must be finite")
        self.mu = mu / np.linalg.norm(mu)
        self.kappa = float(kappa)
        self.dim = len(mu)
        # normalization relative to the uniform density: M(1/2, d/2, kappa)
        self._log_norm = (math.log(surface_area_sphere(self.dim))
                          + math.log(kummer_series(0.5, self.dim / 2.0, self.kappa)))

    def __repr__(self):
        return "Watson(dim=%d, kappa=%.6g)" % (self.dim, self.kappa)

    def pdf(self, x):
        x = _check_unit(x)
        dots = x @ self.mu
        out = np.exp(self.kappa * dots ** 2 - self._log_norm)
        return out if np.ndim(out) else float(out)


class HypersphericalUniform:
    """Uniform density on S^{d-1}."""

    def __init__(self, dim):
        if dim < 2:
            raise ValueError("HypersphericalUniform: dim must be >= 2")
        self.dim = int(dim)

    def __repr__(self):
        return "HypersphericalUniform(dim=%d)" % self.dim

    def pdf(self, x):
        x = _check_unit(x)
        out = np.full(x.shape[:-1], 1.0 / surface_area_sphere(self.dim))
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        rng = _check_rng(rng)
        v = rng.standard_normal((n, self.dim))
        return v / np.linalg.norm(v, axis=1, keepdims=True)


class SphericalDiracMixture:
    """Weighted point masses on the hypersphere."""

    def __init__(self, points, weights):
        points = _check_unit(np.asarray(points, dtype=float), "points")
        weights = np.asarray(weights, dtype=float)
        if points.ndim != 2 or len(points) != len(weights):
            raise ValueError("SphericalDiracMixture: points and weights must align")
        if np.any(weights <= 0) or not np.isclose(weights.sum(), 1.0, atol=1e-9):
            raise ValueError("SphericalDiracMixture: weights must be positive, sum 1")
        self.points = points
        self.weights = weights / weights.sum()
        self.dim = points.shape[1]

    def __repr__(self):
        return "SphericalDiracMixture(n=%d, dim=%d)" % (len(self.points), self.dim)

    def resultant(self):
        return self.weights @ self.points

    def sample(self, n, rng):
        rng = _check_rng(rng)
        return self.points[rng.choice(len(self.points), size=n, p=self.weights)]


class Bingham:
    """Antipodally symmetric density exp(x' M Z M' x) / N on S^{d-1}, d <= 4.

    The concentration diagonal Z is ascending with last entry pinned to zero
    and all entries nonpositive; M is orthogonal with the mode in its last
    column.
    """

    def __init__(self, M, Z):
        M = np.asarray(M, dtype=float)
        Z = np.asarray(Z, dtype=float)
        d = len(Z)
        if M.shape != (d, d):
            raise ValueError("Bingham: M and Z dimensions must agree")
        if d not in (2, 3, 4):
            raise ValueError("Bingham: only d in {2, 3, 4} is supported")
        if np.max(np.abs(M @ M.T - np.eye(d))) > 1e-10:
            raise ValueError("Bingham: M must be orthogonal")
        if np.any(np.diff(Z) < 0):
            raise ValueError("Bingham: Z must be ascending")
        if abs(Z[-1]) > 1e-12:
            raise ValueError("Bingham: last entry of Z must be zero")
        if np.any(Z > 1e-12):
            raise ValueError("Bingham: Z entries must be nonpositive")
        self.M = M
        self.Z = Z
        self.dim = d
        self._log_norm = math.log(Bingham.norm_const(Z))

    def __repr__(self):
        return "Bingham(dim=%d, Z=%s)" % (self.dim, np.array2string(self.Z, precision=4))

    @staticmethod
    def norm_const(Z, tol=None):
        """Surface integral of exp(sum z_i y_i^2) by adaptive quadrature."""
        Z = np.asarray(Z, dtype=float)
        d = len(Z)

        def f(pts):
            return np.exp(np.sum(Z * pts ** 2, axis=-1))

        return float(integrate_sphere(f, d, tol=tol))

    @classmethod
    def from_parameter_matrix(cls, A):
        """Canonicalized instance for the symmetric exponent matrix A."""
        A = np.asarray(A, dtype=float)
        A = 0.5 * (A + A.T)
        eigvals, eigvecs = np.linalg.eigh(A)  # ascending
        Z = eigvals - eigvals[-1]
        Z[-1] = 0.0
        return cls(eigvecs, Z)

    def parameter_matrix(self):
        return self.M @ np.diag(self.Z) @ self.M.T

    def pdf(self, x):
        x = _check_unit(x)
        proj = x @ self.M
        out = np.exp(np.sum(self.Z * proj ** 2, axis=-1) - self._log_norm)
        return out if np.ndim(out) else float(out)

    def mode(self):
        return self.M[:, -1].copy()

    def multiply(self, other):
        """Exact renormalized product: exponent matrices add."""
        if self.dim != other.dim:
            raise ValueError("Bingham.multiply: dimension mismatch")
        return Bingham.from_parameter_matrix(
            self.parameter_matrix() + other.parameter_matrix())

    def second_moments(self):
        """E[(M_i . x)^2] for each principal axis via d log N / d z_i."""
        eps = 1e-5
        out = np.empty(self.dim)
        base = math.log(Bingham.norm_const(self.Z, tol=1e-9 if self.dim == 2 else None))
        for i in range(self.dim):
            zp = self.Z.copy()
            zp[i] += eps
            zm = self.Z.copy()
            zm[i] -= eps
            lp = math.log(Bingham.norm_const(zp, tol=1e-9 if self.dim == 2 else None))
            lm = math.log(Bingham.norm_const(zm, tol=1e-9 if self.dim == 2 else None))
            out[i] = (lp - lm) / (2 * eps)
        del base
        return out

    @classmethod
    def fit(cls, samples=None, weights=None, scatter=None):
        """Maximum-likelihood style fit from samples or a scatter matrix."""
        if scatter is None:
            samples = _check_unit(np.asarray(samples, dtype=float), "samples")
            if weights is None:
                weights = np.full(len(samples), 1.0 / len(samples))
            weights = np.asarray(weights, dtype=float)
            weights = weights / weights.sum()
            scatter = np.einsum("n,ni,nj->ij", weights, samples, samples)
        scatter = np.asarray(scatter, dtype=float)
        if np.max(np.abs(scatter - scatter.T)) > 1e-10 or abs(np.trace(scatter) - 1.0) > 1e-8:
            raise ValueError("Bingham.fit: scatter must be symmetric with unit trace")
        eigvals, eigvecs = np.linalg.eigh(scatter)  # ascending
        d = len(eigvals)
        gaps = np.diff(eigvals)
        if np.any(gaps < 1e-10):
            raise ValueError("Bingham.fit: repeated scatter eigenvalues, fit ambiguous")
        Z = cls._solve_concentrations(eigvals, d)
        return cls(eigvecs, Z)

    @staticmethod
    def _solve_concentrations(target, d, sweeps=60, tol=1e-8):
        """Cyclic bracketed root finds on d log N / d z_i = target_i."""
        Z = np.zeros(d)
        # crude concentrated-limit initialization: z_i ~ -1/(2 s_i)
        for i in range(d - 1):
            Z[i] = -1.0 / max(2.0 * target[i], 1e-3)
        Z = np.minimum(Z - Z[-1], 0.0)
        Z[-1] = 0.0

        def moment(Z, i):
            eps = 1e-5
            zp = Z.copy()
            zp[i] += eps
            zm = Z.copy()
            zm[i] -= eps
            qtol = 1e-10 if d == 2 else (1e-9 if d == 3 else 1e-7)
            return (math.log(Bingham.norm_const(zp, tol=qtol))
                    - math.log(Bingham.norm_const(zm, tol=qtol))) / (2 * eps)

        for _ in range(sweeps):
            worst = 0.0
            for i in range(d - 1):
                lo, hi = -1e4, 0.0

                def g(z, i=i):
                    Zt = Z.copy()
                    Zt[i] = z
                    return moment(Zt, i) - target[i]

                # moment increases with z_i; bisect
                glo = g(lo)
                ghi = g(hi)
                if glo > 0 or ghi < 0:
                    Z[i] = lo if glo > 0 else hi
                    continue
                a, b = lo, hi
                for _ in range(60):
                    mid = 0.5 * (a + b)
                    if g(mid) < 0:
                        a = mid
                    else:
                        b = mid
                Z[i] = 0.5 * (a + b)
                worst = max(worst, abs(g(Z[i])))
            if worst < tol:
                break
        order = np.argsort(Z)
        if not np.array_equal(order, np.arange(d)):
            Z = np.sort(Z)
        Z[-1] = 0.0
        return np.minimum(Z, 0.0)

    def sample(self, n, rng, burn_in=100, thinning=5):
        """Independence Metropolis-Hastings with an angular-Gaussian proposal."""
        rng = _check_rng(rng)
        d = self.dim
        A = self.parameter_matrix()
        # proposal shape matched to the concentrations
        Sigma = self.M @ np.diag(1.0 / (1.0 - 2.0 * self.Z)) @ self.M.T
        L = np.linalg.cholesky(Sigma)
        Sinv = np.linalg.inv(Sigma)

        def draw(count):
            v = (L @ rng.standard_normal((d, count))).T
            return v / np.linalg.norm(v, axis=1, keepdims=True)

        def log_target(x):
            return np.einsum("ni,ij,nj->n", x, A, x)

        def log_proposal(x):
            return -0.5 * d * np.log(np.einsum("ni,ij,nj->n", x, Sinv, x))

        total = burn_in + n * thinning
        current = draw(1)
        lw_cur = log_target(current) - log_proposal(current)
        cand = draw(total)
        lw_cand = log_target(cand) - log_proposal(cand)
        us = np.log(rng.random(total))
        chain = np.empty((total, d))
        for t in range(total):
            if us[t] < lw_cand[t] - lw_cur[0]:
                current = cand[t:t + 1]
                lw_cur = lw_cand[t:t + 1]
            chain[t] = current[0]
        return chain[burn_in::thinning][:n]
