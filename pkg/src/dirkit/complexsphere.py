"""Distributions on the complex unit hypersphere CS^{n-1}.

Complex Bingham, complex Watson, and the complex angular central Gaussian,
plus an EM-fitted complex Watson mixture.  All densities are invariant under
global phase rotation z -> z exp(i phi).
"""

import math

import numpy as np

from .core import (
    NonConvergenceError,
    kummer_1f1_elementary,
    kummer_1f1_elementary_deriv,
    log_kummer_1f1_one,
)
from .circular import _check_rng


class DegenerateEigenvaluesError(ValueError):
    """Raised when clustered eigenvalues break the divided-difference formula."""


def _check_unit_complex(z, name="z", atol=1e-10):
    z = np.asarray(z, dtype=complex)
    norms = np.linalg.norm(z, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise ValueError("%s must have unit norm" % name)
    return z


def _check_hermitian(B, name="B", atol=1e-12):
    B = np.asarray(B, dtype=complex)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("%s must be a square matrix" % name)
    if np.max(np.abs(B - B.conj().T)) > atol:
        raise ValueError("%s must be Hermitian" % name)
    return 0.5 * (B + B.conj().T)


def complex_sphere_log_area(n):
    """log of the surface area of CS^{n-1} (real sphere S^{2n-1})."""
    return math.log(2.0) + n * math.log(math.pi) - math.lgamma(n)


def _spread_clusters(lams, spread):
    """Symmetrically separate clustered eigenvalues before divided differences."""
    lams = np.sort(np.asarray(lams, dtype=float))
    gap = 1e-6 * spread
    delta = 1e-5 * spread
    out = lams.copy()
    i = 0
    while i < len(lams):
        j = i
        while j + 1 < len(lams) and out[j + 1] - out[j] < gap:
            j += 1
        if j > i:
            size = j - i + 1
            offsets = delta * (np.arange(size) - (size - 1) / 2.0)
            out[i:j + 1] = out[i:j + 1].mean() + offsets
        i = j + 1
    return out


def cb_log_norm(lams, perturb=False):
    """log normalization of a complex Bingham density from eigenvalues.

    The divided-difference form requires pairwise distinct eigenvalues; with
    ``perturb=True`` clustered values are separated symmetrically first,
    otherwise :class:`DegenerateEigenvaluesError` is raised.
    """
    lams = np.sort(np.asarray(lams, dtype=float))
    n = len(lams)
    if n == 1:
        return math.log(2.0 * math.pi) + lams[0]
    spread = max(lams[-1] - lams[0], 1.0)
    if np.min(np.diff(lams)) < 1e-6 * spread:
        if not perturb:
            raise DegenerateEigenvaluesError(
                "cb_log_norm: nearly repeated eigenvalues; pass perturb=True to "
                "separate them symmetrically")
        lams = _spread_clusters(lams, spread)
    shift = lams.max()
    total = 0.0
    for k in range(n):
        denom = np.prod(lams[k] - np.delete(lams, k))
        total += math.exp(lams[k] - shift) / denom
    return math.log(2.0) + n * math.log(math.pi) + shift + math.log(total)


def _sample_simplex_truncexp(rates, n, rng):
    """Kent rejection: coordinates from truncated exponentials, accept sum <= 1.

    ``rates`` are the (nonnegative) decay rates of the n-1 leading simplex
    coordinates; the acceptance test is exactly the simplex constraint.
    """
    m = len(rates)
    out = np.empty((n, m + 1))
    filled = 0
    while filled < n:
        todo = max(n - filled, 64)
        u = rng.random((todo, m))
        s = np.empty_like(u)
        for j, rate in enumerate(rates):
            if rate < 1e-12:
                s[:, j] = u[:, j]
            else:
                # inverse cdf of Exp(rate) truncated to [0, 1]
                s[:, j] = -np.log1p(-u[:, j] * (1.0 - math.exp(-rate))) / rate
        keep = s.sum(axis=1) <= 1.0
        got = s[keep][: n - filled]
        out[filled:filled + len(got), :m] = got
        out[filled:filled + len(got), m] = 1.0 - got.sum(axis=1)
        filled += len(got)
    return out


class ComplexBingham:
    """Density exp(z^H B z) / c_B(B) with Hermitian parameter matrix B."""

    def __init__(self, B):
        self.B = _check_hermitian(B)
        self.dim = self.B.shape[0]
        lams, vecs = np.linalg.eigh(self.B)
        self._eigvals = lams
        self._eigvecs = vecs
        self._log_norm = cb_log_norm(lams, perturb=True)

    def __repr__(self):
        return "ComplexBingham(dim=%d)" % self.dim

    def log_norm(self):
        return self._log_norm

    def pdf(self, z):
        z = _check_unit_complex(z)
        q = np.real(np.einsum("...i,ij,...j->...", z.conj(), self.B, z))
        out = np.exp(q - self._log_norm)
        return out if np.ndim(out) else float(out)

    def to_real(self):
        """Equivalent real quadratic-form matrix on the interleaved embedding.

        Entry B_kl = alpha exp(i phi) maps to the 2x2 block
        alpha [[cos phi, -sin phi], [sin phi, cos phi]].  With
        y = (Re z_1, Im z_1, ..., Re z_n, Im z_n) the identity
        z^H B z = y^T Btilde y holds exactly.
        """
        n = self.dim
        out = np.empty((2 * n, 2 * n))
        re, im = self.B.real, self.B.imag
        for k in range(n):
            for l in range(n):
                out[2 * k, 2 * l] = re[k, l]
                out[2 * k, 2 * l + 1] = -im[k, l]
                out[2 * k + 1, 2 * l] = im[k, l]
                out[2 * k + 1, 2 * l + 1] = re[k, l]
        return 0.5 * (out + out.T)

    def moments(self):
        """E[|v_k^H z|^2] per eigenvector via d log c_B / d lambda_k."""
        eps = 1e-6
        lams = self._eigvals
        out = np.empty(self.dim)
        for k in range(self.dim):
            lp = lams.copy()
            lp[k] += eps
            lm = lams.copy()
            lm[k] -= eps
            out[k] = (cb_log_norm(lp, perturb=True)
                      - cb_log_norm(lm, perturb=True)) / (2 * eps)
        return out

    def sample(self, n, rng):
        """Truncated-exponential simplex sampling in the eigenbasis."""
        rng = _check_rng(rng)
        lams = self._eigvals                  # ascending; last is the maximum
        shifted = lams - lams[-1]             # gauge: dominant eigenvalue at zero
        rates = -shifted[:-1]                 # decay rates of the leading coords
        mags = _sample_simplex_truncexp(rates, n, rng)
        phases = np.exp(2j * np.pi * rng.random((n, self.dim)))
        z_eig = np.sqrt(mags) * phases
        # synthesize from eigen-coordinates: column j of eigvecs carries coord j
        return z_eig @ self._eigvecs.T

    @classmethod
    def fit(cls, samples, weights=None):
        """Eigenvalues solved from the scatter moment equations."""
        samples = _check_unit_complex(np.asarray(samples, dtype=complex), "samples")
        if weights is None:
            weights = np.full(len(samples), 1.0 / len(samples))
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        scatter = np.einsum("n,ni,nj->ij", weights, samples, samples.conj())
        scatter = 0.5 * (scatter + scatter.conj().T)
        svals, svecs = np.linalg.eigh(scatter)
        if np.min(np.diff(svals)) < 1e-10:
            raise ValueError("ComplexBingham.fit: degenerate scatter eigenvalues")
        lams = cls._solve_eigenvalues(svals)
        B = svecs @ np.diag(lams) @ svecs.conj().T
        return cls(B)

    @staticmethod
    def _solve_eigenvalues(targets, sweeps=50, tol=1e-8):
        """Cyclic 1-d root finds on d log c_B / d lambda_k = target_k."""
        n = len(targets)
        lams = np.zeros(n)
        for k in range(n - 1):
            lams[k] = -1.0 / max(targets[k], 1e-3)

        def moment(lams, k):
            eps = 1e-6
            lp = lams.copy()
            lp[k] += eps
            lm = lams.copy()
            lm[k] -= eps
            return (cb_log_norm(lp, perturb=True)
                    - cb_log_norm(lm, perturb=True)) / (2 * eps)

        for _ in range(sweeps):
            worst = 0.0
            for k in range(n - 1):
                lo, hi = -1e4, 0.0

                def g(v, k=k):
                    lt = lams.copy()
                    lt[k] = v
                    return moment(lt, k) - targets[k]

                if g(lo) > 0:
                    lams[k] = lo
                    continue
                if g(hi) < 0:
                    lams[k] = hi
                    continue
                a, b = lo, hi
                for _ in range(60):
                    mid = 0.5 * (a + b)
                    if g(mid) < 0:
                        a = mid
                    else:
                        b = mid
                lams[k] = 0.5 * (a + b)
                worst = max(worst, abs(g(lams[k])))
            if worst < tol:
                break
        return lams - lams.max()


def _cw_moment_ratio(n, kappa):
    """d log c_W / d kappa = 1F1'(1; n; kappa) / 1F1(1; n; kappa), all regimes.

    Monotone increasing from 0 (kappa -> -inf) to 1 (kappa -> +inf).
    """
    if abs(kappa) <= 300.0:
        return (kummer_1f1_elementary_deriv(n, kappa)
                / kummer_1f1_elementary(n, kappa))
    if kappa > 300.0:
        # log 1F1 = kappa + (1-n) log kappa + const + O(exp(-kappa))
        return 1.0 + (1.0 - n) / kappa
    # deep negative branch: 1F1 = -(n-1)! kappa^(1-n) S_{n-2}(kappa)
    s_n2 = sum(kappa ** j / math.factorial(j) for j in range(n - 1))
    s_n3 = sum(kappa ** j / math.factorial(j) for j in range(n - 2))
    return (1.0 - n) / kappa + s_n3 / s_n2


class ComplexWatson:
    """Density exp(kappa |z^H w|^2) / c_W(kappa) around mode direction w."""

    def __init__(self, w, kappa):
        w = np.asarray(w, dtype=complex)
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise ValueError("ComplexWatson: w must have unit norm")
        self.w = w / np.linalg.norm(w)
        self.kappa = float(kappa)
        self.dim = len(w)
        self._log_norm = self.log_norm(self.dim, self.kappa)

    def __repr__(self):
        return "ComplexWatson(dim=%d, kappa=%.6g)" % (self.dim, self.kappa)

    @staticmethod
    def log_norm(n, kappa):
        """log c_W = log(2 pi^n / (n-1)!) + log 1F1(1; n; kappa)."""
        return complex_sphere_log_area(n) + log_kummer_1f1_one(n, kappa)

    def pdf(self, z):
        z = _check_unit_complex(z)
        q = np.abs(np.einsum("...i,i->...", z.conj(), self.w)) ** 2
        out = np.exp(self.kappa * q - self._log_norm)
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        """Complex Bingham sampling specialized to B = kappa w w^H."""
        b = ComplexBingham(self.kappa * np.outer(self.w, self.w.conj()))
        return b.sample(n, rng)

    @classmethod
    def fit(cls, samples, weights=None):
        """Principal scatter direction; kappa from the moment equation."""
        samples = _check_unit_complex(np.asarray(samples, dtype=complex), "samples")
        if weights is None:
            weights = np.full(len(samples), 1.0 / len(samples))
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        scatter = np.einsum("n,ni,nj->ij", weights, samples, samples.conj())
        scatter = 0.5 * (scatter + scatter.conj().T)
        svals, svecs = np.linalg.eigh(scatter)
        w = svecs[:, -1]
        n = samples.shape[1]
        kappa = cls._solve_kappa(n, float(svals[-1]))
        return cls(w, kappa)

    @staticmethod
    def _solve_kappa(n, target, lo=-1e4, hi=1e4):
        """Solve d log c_W / d kappa = target (bracketed bisection)."""
        target = min(max(target, 1e-12), 1.0 - 1e-12)

        def g(kappa):
            return _cw_moment_ratio(n, kappa) - target

        # g is increasing in kappa; expand the bracket if needed
        a, b = lo, hi
        if g(a) > 0:
            return a
        if g(b) < 0:
            return b
        for _ in range(200):
            mid = 0.5 * (a + b)
            if g(mid) < 0:
                a = mid
            else:
                b = mid
            if b - a < 1e-10 * max(1.0, abs(b)):
                break
        return 0.5 * (a + b)


class ComplexACG:
    """Angular central Gaussian: normalized complex Gaussian directions."""

    def __init__(self, Sigma):
        Sigma = _check_hermitian(Sigma, "Sigma")
        eig = np.linalg.eigvalsh(Sigma)
        if np.min(eig) <= 0:
            raise ValueError("ComplexACG: Sigma must be positive definite")
        self.dim = Sigma.shape[0]
        # scale invariance: normalize trace to the dimension
        self.Sigma = Sigma * (self.dim / np.trace(Sigma).real)
        self._Sinv = np.linalg.inv(self.Sigma)
        self._logdet = float(np.linalg.slogdet(self.Sigma)[1].real)

    def __repr__(self):
        return "ComplexACG(dim=%d)" % self.dim

    def pdf(self, z):
        z = _check_unit_complex(z)
        q = np.real(np.einsum("...i,ij,...j->...", z.conj(), self._Sinv, z))
        d = self.dim
        log_out = (math.lgamma(d) - d * math.log(math.pi) - math.log(2.0)
                   - self._logdet - d * np.log(q))
        out = np.exp(log_out)
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        rng = _check_rng(rng)
        L = np.linalg.cholesky(self.Sigma)
        g = (rng.standard_normal((n, self.dim))
             + 1j * rng.standard_normal((n, self.dim))) / math.sqrt(2.0)
        # rows are L g, giving E[y y^H] = L L^H = Sigma
        v = g @ L.T
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    @classmethod
    def fit(cls, samples, weights=None, max_iter=1000, tol=1e-8):
        """Fixed-point scatter iteration (Tyler-style)."""
        samples = _check_unit_complex(np.asarray(samples, dtype=complex), "samples")
        n, d = samples.shape
        if weights is None:
            weights = np.full(n, 1.0 / n)
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        Sigma = np.eye(d, dtype=complex)
        for _ in range(max_iter):
            Sinv = np.linalg.inv(Sigma)
            q = np.real(np.einsum("ni,ij,nj->n", samples.conj(), Sinv, samples))
            scaled = weights / q
            new = d * np.einsum("n,ni,nj->ij", scaled, samples, samples.conj())
            new = new / np.trace(new).real * d
            new = 0.5 * (new + new.conj().T)
            if np.max(np.abs(new - Sigma)) < tol:
                return cls(new)
            Sigma = new
        raise NonConvergenceError("ComplexACG.fit: fixed point did not converge",
                                  best=cls(Sigma))


class ComplexWatsonMixture:
    """Finite mixture of complex Watson components."""

    def __init__(self, weights, components):
        weights = np.asarray(weights, dtype=float)
        if len(weights) != len(components) or len(components) == 0:
            raise ValueError("ComplexWatsonMixture: weights and components must align")
        if np.any(weights <= 0) or not np.isclose(weights.sum(), 1.0, atol=1e-9):
            raise ValueError("ComplexWatsonMixture: weights must be positive, sum 1")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise ValueError("ComplexWatsonMixture: component dimensions differ")
        self.weights = weights / weights.sum()
        self.components = list(components)
        self.dim = components[0].dim

    def __repr__(self):
        return "ComplexWatsonMixture(K=%d, dim=%d)" % (len(self.components), self.dim)

    def pdf(self, z):
        out = sum(w * c.pdf(z) for w, c in zip(self.weights, self.components))
        return out if np.ndim(out) else float(out)

    def log_likelihood(self, samples):
        dens = np.stack([c.pdf(samples) for c in self.components], axis=-1)
        return float(np.sum(np.log(dens @ self.weights)))

    def sample(self, n, rng):
        rng = _check_rng(rng)
        counts = rng.multinomial(n, self.weights)
        parts = [c.sample(m, rng) for c, m in zip(self.components, counts) if m > 0]
        out = np.concatenate(parts, axis=0)
        perm = rng.permutation(len(out))
        return out[perm]

    @classmethod
    def fit_em(cls, samples, K, rng, max_iter=100, tol=1e-6):
        """Expectation-maximization with affinity-based seeding.

        Components that collapse (no responsibility mass) are re-seeded from
        the currently worst-explained sample.
        """
        rng = _check_rng(rng)
        samples = _check_unit_complex(np.asarray(samples, dtype=complex), "samples")
        n, d = samples.shape
        if K < 1 or n < K:
            raise ValueError("fit_em: need K >= 1 and at least K samples")

        # k-means++-style seeding on squared-coherence affinities
        centers = [samples[rng.integers(n)]]
        for _ in range(K - 1):
            aff = np.max(np.abs(samples @ np.stack(centers).conj().T) ** 2, axis=1)
            probs = np.maximum(1.0 - aff, 1e-12)
            probs = probs / probs.sum()
            centers.append(samples[rng.choice(n, p=probs)])
        comps = [ComplexWatson(c / np.linalg.norm(c), 10.0) for c in centers]
        weights = np.full(K, 1.0 / K)

        history = []
        prev_ll = -np.inf
        for _ in range(max_iter):
            # E-step in the log domain
            logdens = np.stack([
                comp.kappa * np.abs(samples @ comp.w.conj()) ** 2 - comp._log_norm
                for comp in comps], axis=1)
            logdens += np.log(weights)[None, :]
            mx = logdens.max(axis=1, keepdims=True)
            resp = np.exp(logdens - mx)
            norm = resp.sum(axis=1, keepdims=True)
            resp = resp / norm
            ll = float(np.sum(mx[:, 0] + np.log(norm[:, 0])))
            history.append(ll)

            # M-step
            mass = resp.sum(axis=0)
            for k in range(K):
                if mass[k] < 1e-12 * n:
                    worst = np.argmin(logdens.max(axis=1))
                    comps[k] = ComplexWatson(samples[worst], 10.0)
                    mass[k] = 1.0
                    continue
                comps[k] = ComplexWatson.fit(samples, resp[:, k])
            weights = mass / mass.sum()

            if abs(ll - prev_ll) < tol:
                prev_ll = ll
                break
            prev_ll = ll
        mix = cls(weights, comps)
        mix.em_log_likelihoods = history
        return mix
