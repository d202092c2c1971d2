"""Densities for planar rigid-body motions.

Two parameterizations: the partially wrapped normal on [0, 2pi) x R^2
(angle plus translation) and a Bingham-type density on S^1 x R^2 whose
antipodally symmetric angle part matches the double cover used by
dual-quaternion representations.
"""

import math

import numpy as np
from scipy.special import i0e

from .core import TWO_PI, bessel_ratio, inverse_bessel_ratio, wrap
from .circular import VonMises, WrappedNormal, _check_rng, _wrap_count


class Gaussian2D:
    """Minimal bivariate Gaussian value type for translation marginals."""

    def __init__(self, mu, C):
        mu = np.asarray(mu, dtype=float)
        C = np.asarray(C, dtype=float)
        if mu.shape != (2,) or C.shape != (2, 2):
            raise ValueError("Gaussian2D: expect a 2-vector mean and 2x2 covariance")
        if np.max(np.abs(C - C.T)) > 1e-12 or np.min(np.linalg.eigvalsh(C)) <= 0:
            raise ValueError("Gaussian2D: covariance must be symmetric positive definite")
        self.mu = mu
        self.C = 0.5 * (C + C.T)

    def __repr__(self):
        return "Gaussian2D(mu=%s)" % np.array2string(self.mu, precision=4)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        diff = x - self.mu
        Cinv = np.linalg.inv(self.C)
        q = np.einsum("...i,ij,...j->...", diff, Cinv, diff)
        out = np.exp(-0.5 * q) / (TWO_PI * math.sqrt(np.linalg.det(self.C)))
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        rng = _check_rng(rng)
        return rng.multivariate_normal(self.mu, self.C, size=n)


class SE2PartiallyWrappedNormal:
    """Trivariate Gaussian with the first (angular) coordinate wrapped."""

    def __init__(self, mu, C):
        mu = np.asarray(mu, dtype=float)
        C = np.asarray(C, dtype=float)
        if mu.shape != (3,) or C.shape != (3, 3):
            raise ValueError("SE2PartiallyWrappedNormal: need a 3-vector and 3x3 covariance")
        if np.max(np.abs(C - C.T)) > 1e-12:
            raise ValueError("SE2PartiallyWrappedNormal: covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(C)) <= 0:
            raise ValueError("SE2PartiallyWrappedNormal: covariance must be positive definite")
        self.mu = mu.copy()
        self.mu[0] = wrap(mu[0])
        self.C = 0.5 * (C + C.T)
        self._Cinv = np.linalg.inv(self.C)
        self._lognorm = 0.5 * (3 * math.log(TWO_PI) + math.log(np.linalg.det(self.C)))

    def __repr__(self):
        return "SE2PartiallyWrappedNormal(mu=%s)" % np.array2string(self.mu, precision=4)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise ValueError("pdf: points must be (angle, tx, ty)")
        K = _wrap_count(math.sqrt(self.C[0, 0]))
        ks = np.arange(-K, K + 1)
        out = np.zeros(x.shape[:-1])
        diff = x - self.mu
        for k in ks:
            d = diff.copy()
            d[..., 0] += TWO_PI * k
            q = np.einsum("...i,ij,...j->...", d, self._Cinv, d)
            out = out + np.exp(-0.5 * q - self._lognorm)
        return out if np.ndim(out) else float(out)

    def mean4d(self):
        """E[cos x1, sin x1, x2, x3]."""
        rho = math.exp(-0.5 * self.C[0, 0])
        return np.array([rho * math.cos(self.mu[0]), rho * math.sin(self.mu[0]),
                         self.mu[1], self.mu[2]])

    def covariance4d(self):
        """Covariance of (cos x1, sin x1, x2, x3).

        Uses E[y exp(i theta)] = (E y + i Cov(theta, y)) exp(i mu - var/2)
        for jointly Gaussian (theta, y), which survives wrapping because the
        integrand is 2pi-periodic in theta.
        """
        mu1 = self.mu[0]
        v = self.C[0, 0]
        rho = math.exp(-0.5 * v)
        rho2 = math.exp(-2.0 * v)
        m = self.mean4d()
        out = np.empty((4, 4))
        # trigonometric block
        e_cc = 0.5 * (1 + rho2 * math.cos(2 * mu1))
        e_ss = 0.5 * (1 - rho2 * math.cos(2 * mu1))
        e_cs = 0.5 * rho2 * math.sin(2 * mu1)
        out[0, 0] = e_cc - m[0] ** 2
        out[1, 1] = e_ss - m[1] ** 2
        out[0, 1] = out[1, 0] = e_cs - m[0] * m[1]
        # translation block
        out[2:, 2:] = self.C[1:, 1:]
        # cross terms from the characteristic-function identity
        for j in (1, 2):
            c1j = self.C[0, j]
            mj = self.mu[j]
            e_cy = rho * (mj * math.cos(mu1) - c1j * math.sin(mu1))
            e_sy = rho * (mj * math.sin(mu1) + c1j * math.cos(mu1))
            out[0, 1 + j] = out[1 + j, 0] = e_cy - m[0] * mj
            out[1, 1 + j] = out[1 + j, 1] = e_sy - m[1] * mj
        return out

    def marginals(self):
        """Angle marginal as a wrapped normal, translation marginal as Gaussian."""
        return (WrappedNormal(self.mu[0], math.sqrt(self.C[0, 0])),
                Gaussian2D(self.mu[1:], self.C[1:, 1:]))

    def sample(self, n, rng):
        rng = _check_rng(rng)
        draws = rng.multivariate_normal(self.mu, self.C, size=n)
        draws[:, 0] = wrap(draws[:, 0])
        return draws


class SE2PartiallyWrappedDirac:
    """Weighted point masses on [0, 2pi) x R^2."""

    def __init__(self, points, weights):
        points = np.asarray(points, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or len(points) != len(weights):
            raise ValueError("SE2PartiallyWrappedDirac: points must be (n, 3)")
        if np.any(weights <= 0) or not np.isclose(weights.sum(), 1.0, atol=1e-9):
            raise ValueError("SE2PartiallyWrappedDirac: weights must be positive, sum 1")
        self.points = points.copy()
        self.points[:, 0] = wrap(points[:, 0])
        self.weights = weights / weights.sum()

    def __repr__(self):
        return "SE2PartiallyWrappedDirac(n=%d)" % len(self.points)

    def mean4d(self):
        c = np.cos(self.points[:, 0])
        s = np.sin(self.points[:, 0])
        emb = np.column_stack([c, s, self.points[:, 1], self.points[:, 2]])
        return self.weights @ emb

    def covariance4d(self):
        c = np.cos(self.points[:, 0])
        s = np.sin(self.points[:, 0])
        emb = np.column_stack([c, s, self.points[:, 1], self.points[:, 2]])
        m = self.weights @ emb
        centered = emb - m
        return np.einsum("n,ni,nj->ij", self.weights, centered, centered)

    def sample(self, n, rng):
        rng = _check_rng(rng)
        return self.points[rng.choice(len(self.points), size=n, p=self.weights)]


class SE2Bingham:
    """Density exp(x' C x) / N on S^1 x R^2 with block-structured C.

    C = [[C1, C2'], [C2, C3]] with symmetric C1, arbitrary C2, and symmetric
    negative definite C3.  The decomposition T1 = C1 - C2' C3^-1 C2 and
    T2 = -C3^-1 C2 splits the density into an angular Bingham factor and a
    conditional Gaussian translation.
    """

    def __init__(self, C1, C2, C3):
        C1 = np.asarray(C1, dtype=float)
        C2 = np.asarray(C2, dtype=float)
        C3 = np.asarray(C3, dtype=float)
        for name, M in (("C1", C1), ("C2", C2), ("C3", C3)):
            if M.shape != (2, 2):
                raise ValueError("SE2Bingham: %s must be 2x2" % name)
        if np.max(np.abs(C1 - C1.T)) > 1e-10:
            raise ValueError("SE2Bingham: C1 must be symmetric")
        if np.max(np.abs(C3 - C3.T)) > 1e-10:
            raise ValueError("SE2Bingham: C3 must be symmetric")
        if np.max(np.linalg.eigvalsh(C3)) >= 0:
            raise ValueError("SE2Bingham: C3 must be negative definite")
        self.C1 = 0.5 * (C1 + C1.T)
        self.C2 = C2.copy()
        self.C3 = 0.5 * (C3 + C3.T)
        self._C3inv = np.linalg.inv(self.C3)
        self.T1 = self.C1 - self.C2.T @ self._C3inv @ self.C2
        self.T2 = -self._C3inv @ self.C2
        self._log_norm = math.log(self.norm_const())

    def __repr__(self):
        return "SE2Bingham(T1 eigs=%s)" % np.array2string(
            np.linalg.eigvalsh(self.T1), precision=4)

    @classmethod
    def from_full_matrix(cls, C):
        C = np.asarray(C, dtype=float)
        if C.shape != (4, 4):
            raise ValueError("SE2Bingham: full parameter matrix must be 4x4")
        if np.max(np.abs(C - C.T)) > 1e-10:
            raise ValueError("SE2Bingham: full parameter matrix must be symmetric")
        return cls(C[:2, :2], C[2:, :2], C[2:, 2:])

    def full_matrix(self):
        return np.block([[self.C1, self.C2.T], [self.C2, self.C3]])

    def decompose(self):
        """(T1, T2) of the angular/translation factorization."""
        return self.T1.copy(), self.T2.copy()

    def _angle_parameters(self):
        """(mean angle psi, concentration R) of the doubled-angle von Mises."""
        a, b, c = self.T1[0, 0], self.T1[0, 1], self.T1[1, 1]
        R = math.hypot(0.5 * (a - c), b)
        psi = math.atan2(b, 0.5 * (a - c))
        offset = 0.5 * (a + c)
        return psi, R, offset

    def norm_const(self):
        """Closed-form normalization via exact translation marginalization."""
        psi, R, offset = self._angle_parameters()
        gauss_mass = math.pi / math.sqrt(np.linalg.det(-self.C3))
        circle = TWO_PI * math.exp(offset + R) * i0e(R)
        return gauss_mass * circle

    def norm_const_numerical(self, angle_points=400, trans_points=120):
        """Dense-grid quadrature over S^1 x R^2; test oracle for norm_const."""
        from numpy.polynomial.legendre import leggauss

        x, w = leggauss(angle_points)
        phi = math.pi * (x + 1.0)
        wphi = math.pi * w
        Sigma = -0.5 * self._C3inv
        sig = math.sqrt(np.max(np.linalg.eigvalsh(Sigma)))
        xs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        centers = xs @ self.T2.T
        lim = np.max(np.linalg.norm(centers, axis=1)) + 8.0 * sig
        xt, wt = leggauss(trans_points)
        ty = lim * xt
        wty = lim * wt
        X, Y = np.meshgrid(ty, ty, indexing="ij")
        WXY = np.outer(wty, wty)
        C = self.full_matrix()
        total = 0.0
        for k in range(angle_points):
            v = np.stack([np.full_like(X, xs[k, 0]), np.full_like(X, xs[k, 1]), X, Y],
                         axis=-1)
            q = np.einsum("...i,ij,...j->...", v, C, v)
            total += wphi[k] * np.sum(np.exp(q) * WXY)
        return total

    def pdf(self, x):
        """Density at points (s1, s2, t1, t2) with unit (s1, s2)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 4:
            raise ValueError("pdf: points must be 4-vectors (unit pair, translation)")
        s = x[..., :2]
        if np.any(np.abs(np.linalg.norm(s, axis=-1) - 1.0) > 1e-8):
            raise ValueError("pdf: first two components must have unit norm")
        C = self.full_matrix()
        q = np.einsum("...i,ij,...j->...", x, C, x)
        out = np.exp(q - self._log_norm)
        return out if np.ndim(out) else float(out)

    def mode(self):
        """Angle part along the dominant axis of T1, translation at T2 x_s."""
        eigvals, eigvecs = np.linalg.eigh(self.T1)
        if abs(eigvals[1] - eigvals[0]) < 1e-12:
            raise ValueError("SE2Bingham.mode: T1 eigenvalues tie, mode ambiguous")
        xs = eigvecs[:, -1]
        if xs[0] < 0 or (xs[0] == 0 and xs[1] < 0):
            xs = -xs
        return xs, self.T2 @ xs

    def conditional_translation_covariance(self):
        return -0.5 * self._C3inv

    def sample(self, n, rng):
        """Angle from the doubled-angle von Mises, translation conditionally."""
        rng = _check_rng(rng)
        psi, R, _ = self._angle_parameters()
        eta = VonMises(psi, R).sample(n, rng) if R > 0 else rng.random(n) * TWO_PI
        phi = wrap(0.5 * eta + math.pi * rng.integers(0, 2, size=n))
        xs = np.column_stack([np.cos(phi), np.sin(phi)])
        Sigma = self.conditional_translation_covariance()
        noise = rng.multivariate_normal(np.zeros(2), Sigma, size=n)
        xt = xs @ self.T2.T + noise
        return np.hstack([xs, xt])

    def sample_deterministic(self):
        """Five weighted points: doubled-angle moment matching plus conditional means."""
        psi, R, _ = self._angle_parameters()
        if R > 1e-8:
            wd = VonMises(psi, R).to_dirac5()
            etas, weights = wd.d, wd.w
        else:
            etas = wrap(psi + TWO_PI * np.arange(5) / 5.0)
            weights = np.full(5, 0.2)
        phi = wrap(0.5 * etas)
        xs = np.column_stack([np.cos(phi), np.sin(phi)])
        xt = xs @ self.T2.T
        return np.hstack([xs, xt]), weights

    def second_moment_matrix(self):
        """E[x x'] over (s1, s2, t1, t2); the 4-d mean vanishes by symmetry."""
        psi, R, _ = self._angle_parameters()
        a2 = bessel_ratio(2, R)
        c2, s2 = a2 * math.cos(psi), a2 * math.sin(psi)
        Ess = 0.5 * np.array([[1 + c2, s2], [s2, 1 - c2]])
        Est = Ess @ self.T2.T
        Ett = self.T2 @ Ess @ self.T2.T + self.conditional_translation_covariance()
        return np.block([[Ess, Est], [Est.T, Ett]])

    def covariance_mcmc(self, n, rng):
        """Empirical 4-d covariance of n random samples."""
        draws = self.sample(n, rng)
        return np.cov(draws.T)

    @classmethod
    def fit(cls, samples, weights=None, polish=True):
        """Moment match E[x x'] of (sign-symmetric) samples.

        Closed-form block inversion of the second-moment identities, then an
        optional simplex polish of the ten free parameters.
        """
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 4:
            raise ValueError("SE2Bingham.fit: samples must be (n, 4)")
        if weights is None:
            weights = np.full(len(samples), 1.0 / len(samples))
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        target = np.einsum("n,ni,nj->ij", weights, samples, samples)

        est = cls._from_second_moments(target)
        if not polish:
            return est

        from scipy.optimize import minimize

        def pack(b):
            L = np.linalg.cholesky(-b.C3)
            return np.concatenate([
                [b.C1[0, 0], b.C1[0, 1], b.C1[1, 1]],
                b.C2.ravel(),
                [L[0, 0], L[1, 0], L[1, 1]],
            ])

        def unpack(p):
            C1 = np.array([[p[0], p[1]], [p[1], p[2]]])
            C2 = p[3:7].reshape(2, 2)
            L = np.array([[abs(p[7]) + 1e-9, 0.0], [p[8], abs(p[9]) + 1e-9]])
            return cls(C1, C2, -(L @ L.T))

        def cost(p):
            try:
                model = unpack(p)
            except (ValueError, np.linalg.LinAlgError):
                return 1e6
            return float(np.sum((model.second_moment_matrix() - target) ** 2))

        res = minimize(cost, pack(est), method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-10, "fatol": 1e-14})
        return unpack(res.x)

    @classmethod
    def _from_second_moments(cls, M):
        """Invert the second-moment identities for the block parameters."""
        Ess, Est, Ett = M[:2, :2], M[:2, 2:], M[2:, 2:]
        T2 = np.linalg.solve(Ess, Est).T
        Sigma = Ett - T2 @ Ess @ T2.T
        Sigma = 0.5 * (Sigma + Sigma.T)
        eigvals = np.linalg.eigvalsh(Sigma)
        if np.min(eigvals) <= 0:
            raise ValueError("SE2Bingham.fit: conditional covariance not positive definite")
        C3 = -0.5 * np.linalg.inv(Sigma)
        # angle part: E[ss'] = (I + A2(R) [[cos psi, sin psi], [sin psi, -cos psi]])/2
        c2 = Ess[0, 0] - Ess[1, 1]
        s2 = 2.0 * Ess[0, 1]
        a2 = min(math.hypot(c2, s2), 1.0 - 1e-9)
        psi = math.atan2(s2, c2)
        R = inverse_bessel_ratio(2, a2) if a2 > 0 else 0.0
        v = np.array([math.cos(0.5 * psi), math.sin(0.5 * psi)])
        vperp = np.array([-v[1], v[0]])
        T1 = 0.0 * np.eye(2) - 2.0 * R * np.outer(vperp, vperp)
        C2 = -C3 @ T2
        C1 = T1 + C2.T @ np.linalg.solve(C3, C2)
        return cls(C1, C2, C3)
