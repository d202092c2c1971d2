"""Recursive Bayesian estimators on the circle, hypertorus, and hypersphere.

Each filter is a single-owner state machine: ``set_state`` installs an
estimate, ``predict_*`` and ``update_*`` transition it, ``get_estimate``
returns the current distribution.  Constructors of the estimate families
re-validate their invariants after every transition.
"""

import math

import numpy as np

from .core import TWO_PI, wrap
from .circular import (
    CircularDistribution,
    VonMises,
    WrappedDiracMixture,
    WrappedNormal,
    _check_rng,
    convolve,
    fit_vm_from_moment,
    fit_wn_from_moment,
    multiply,
)
from .fourier import FourierDensity
from .hypertorus import (
    HypertoroidalFourier,
    HypertoroidalWD,
    HypertoroidalWN,
    convolve_hwn,
    multiply_hwn,
)
from .hypersphere import VonMisesFisher, vmf_convolve, vmf_multiply


def additive_gaussian_likelihood(h, variance):
    """Likelihood L(z, x) for z = h(x) + N(0, variance) measurements."""
    if variance <= 0:
        raise ValueError("additive_gaussian_likelihood: variance must be positive")

    def likelihood(z, x):
        return np.exp(-(z - h(x)) ** 2 / (2.0 * variance))

    return likelihood


def _progressive_schedule(log_ratio, remaining, cap=2.0):
    """Exponent fraction keeping each sub-step's reweight ratio below e^cap."""
    if log_ratio <= cap:
        return remaining
    return min(remaining, cap / log_ratio)


class WNFilter:
    """Estimator that re-fits a wrapped normal after every transition."""

    def __init__(self):
        self._state = None

    def set_state(self, state):
        if not isinstance(state, WrappedNormal):
            raise TypeError("WNFilter: state must be a WrappedNormal")
        self._state = state

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("WNFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        self._state = convolve(self.get_estimate(), noise)

    def predict_nonlinear(self, a, noise):
        """Five-point deterministic propagation, then additive noise."""
        wd = self.get_estimate().to_dirac5().apply(a)
        propagated = fit_wn_from_moment(wd.trigonometric_moment(1))
        self._state = convolve(propagated, noise)

    def update_identity(self, z, noise):
        self._state = multiply(self.get_estimate(), WrappedNormal(wrap(z), noise.sigma))

    def update_nonlinear_progressive(self, likelihood, z, max_steps=50):
        self._state = _progressive_update(
            self.get_estimate(), likelihood, z, fit_wn_from_moment, max_steps)


class VMFilter:
    """Estimator that re-fits a von Mises after every transition."""

    def __init__(self):
        self._state = None

    def set_state(self, state):
        if not isinstance(state, VonMises):
            raise TypeError("VMFilter: state must be a VonMises")
        self._state = state

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("VMFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        self._state = convolve(self.get_estimate(), noise)

    def update_identity(self, z, noise):
        self._state = multiply(self.get_estimate(), VonMises(wrap(z), noise.kappa))

    def update_nonlinear_progressive(self, likelihood, z, max_steps=50):
        self._state = _progressive_update(
            self.get_estimate(), likelihood, z, fit_vm_from_moment, max_steps)


def _progressive_update(state, likelihood, z, refit, max_steps):
    """Shared progressive Bayes loop over fractional likelihood powers."""
    remaining = 1.0
    steps = 0
    while remaining > 1e-12:
        if steps >= max_steps:
            break
        wd = state.to_dirac5()
        lik = np.asarray(likelihood(z, wd.d), dtype=float)
        if np.all(lik <= 0) or not np.all(np.isfinite(lik)):
            raise RuntimeError("progressive update: likelihood vanished on all samples")
        lik = np.maximum(lik, 1e-300)
        log_ratio = float(np.log(lik.max() / lik.min()))
        gamma = _progressive_schedule(log_ratio, remaining)
        wd = wd.reweighted(lik ** gamma)
        state = refit(wd.trigonometric_moment(1))
        remaining -= gamma
        steps += 1
    return state


class FourierFilter:
    """Estimator carrying a truncated Fourier density (identity or sqrt form)."""

    def __init__(self, coefficient_count=101, transformation="sqrt"):
        self.coefficient_count = int(coefficient_count)
        self.transformation = transformation
        self._state = None

    def set_state(self, state):
        if isinstance(state, FourierDensity):
            if state.transformation != self.transformation:
                raise ValueError("FourierFilter: transformation tag mismatch")
            self._state = state
        else:
            self._state = FourierDensity.from_distribution(
                state, self.coefficient_count, self.transformation)

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("FourierFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        if not isinstance(noise, FourierDensity):
            noise = FourierDensity.from_distribution(
                noise, self.coefficient_count, self.transformation)
        self._state = self.get_estimate().convolve(noise)

    def predict_transition(self, transition):
        """Chapman-Kolmogorov step with a transition density on the torus.

        ``transition`` is a toroidal density (or HypertoroidalFourier) over
        (next state, current state).
        """
        state = self.get_estimate().to_identity()
        order = state.order
        if isinstance(transition, HypertoroidalFourier):
            tf = transition.to_identity()
        else:
            tf = HypertoroidalFourier.from_distribution(
                transition, (2 * order + 1, 2 * order + 1), "identity")
        tcoeffs = tf.coeffs
        if tcoeffs.shape[1] != len(state.coeffs):
            raise ValueError("FourierFilter: transition tensor size mismatch")
        # predicted_m = 2 pi * sum_l t_{m,l} p_{-l}
        pred = TWO_PI * tcoeffs @ state.coeffs[::-1]
        center = tcoeffs.shape[0] // 2
        pred = pred[center - order:center + order + 1]
        predicted = FourierDensity(pred, "identity")
        self._state = self._match_tag(predicted)

    def update_likelihood(self, likelihood, z):
        lik_fd = FourierDensity.from_function(
            lambda x: likelihood(z, x), self.coefficient_count, self.transformation)
        self._state = self.get_estimate().multiply(lik_fd)

    def _match_tag(self, identity_form):
        if self.transformation == "identity":
            return identity_form
        grid = 4 * len(identity_form.coeffs) + 1
        vals = np.sqrt(identity_form.pdf_on_grid(grid))
        from .fourier import _dft_coefficients

        order = self.coefficient_count // 2
        coeffs = _dft_coefficients(vals, grid, order)
        return FourierDensity(coeffs, "sqrt")


class CircularParticleFilter:
    """Bootstrap filter with sequential importance resampling on the circle."""

    def __init__(self, particle_count):
        if particle_count < 1:
            raise ValueError("CircularParticleFilter: need at least one particle")
        self.particle_count = int(particle_count)
        self._particles = None

    def set_state(self, state, rng):
        rng = _check_rng(rng)
        if isinstance(state, WrappedDiracMixture):
            self._particles = state.sample(self.particle_count, rng)
        else:
            self._particles = state.sample(self.particle_count, rng)

    def get_estimate(self):
        if self._particles is None:
            raise RuntimeError("CircularParticleFilter: no state set")
        n = len(self._particles)
        return WrappedDiracMixture(self._particles, np.full(n, 1.0 / n))

    def predict_nonlinear(self, a, noise, rng):
        rng = _check_rng(rng)
        pts = self._particles
        moved = np.asarray(a(pts), dtype=float)
        self._particles = wrap(moved + noise.sample(len(pts), rng))

    def predict_identity(self, noise, rng):
        self.predict_nonlinear(lambda x: x, noise, rng)

    def update_likelihood(self, likelihood, z, rng):
        rng = _check_rng(rng)
        w = np.asarray(likelihood(z, self._particles), dtype=float)
        if not np.all(np.isfinite(w)) or w.sum() <= 1e-300:
            raise RuntimeError("particle update: degenerate weights")
        w = w / w.sum()
        self._particles = self._particles[_systematic_resample(w, rng)]


def _systematic_resample(weights, rng):
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions)


class GridFilter:
    """Exact Bayes on fixed, equally spaced circular grid points."""

    def __init__(self, grid_size):
        if grid_size < 8:
            raise ValueError("GridFilter: grid size must be at least 8")
        self.grid_size = int(grid_size)
        self.points = np.arange(self.grid_size) * TWO_PI / self.grid_size
        self.weights = None

    def set_state(self, state):
        vals = np.asarray(state.pdf(self.points), dtype=float)
        if vals.sum() <= 0:
            raise ValueError("GridFilter: state density vanishes on the grid")
        self.weights = vals / vals.sum()

    def get_estimate(self):
        if self.weights is None:
            raise RuntimeError("GridFilter: no state set")
        return WrappedDiracMixture(self.points, np.maximum(self.weights, 1e-300))

    def point_estimate(self):
        m1 = np.sum(self.weights * np.exp(1j * self.points))
        return wrap(np.angle(m1))

    def predict_identity(self, noise):
        """Discrete circular convolution with the noise density (O(L log L))."""
        kernel = np.asarray(noise.pdf(self.points), dtype=float)
        w = np.fft.ifft(np.fft.fft(self.weights) * np.fft.fft(kernel)).real
        w = np.maximum(w, 0.0)
        self.weights = w / w.sum()

    def predict_transition(self, T):
        T = np.asarray(T, dtype=float)
        if T.shape != (self.grid_size, self.grid_size):
            raise ValueError("GridFilter: transition matrix size mismatch")
        w = T @ self.weights
        self.weights = w / w.sum()

    def update_likelihood(self, likelihood, z):
        w = self.weights * np.asarray(likelihood(z, self.points), dtype=float)
        total = w.sum()
        if total <= 0:
            raise RuntimeError("GridFilter: posterior vanished on the grid")
        self.weights = w / total


class PWCFilter:
    """Piecewise-constant (interval histogram) estimator on the circle."""

    def __init__(self, interval_count):
        if interval_count < 2:
            raise ValueError("PWCFilter: need at least two intervals")
        self.interval_count = int(interval_count)
        self.centers = (np.arange(interval_count) + 0.5) * TWO_PI / interval_count
        self.weights = None

    def set_state_weights(self, weights):
        w = np.asarray(weights, dtype=float)
        if len(w) != self.interval_count or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("PWCFilter: invalid interval weights")
        self.weights = w / w.sum()

    def set_state(self, state):
        vals = np.asarray(state.pdf(self.centers), dtype=float)
        self.set_state_weights(vals / vals.sum())

    def get_estimate(self):
        if self.weights is None:
            raise RuntimeError("PWCFilter: no state set")
        from .circular import PiecewiseConstant

        return PiecewiseConstant(self.weights)

    def point_estimate(self):
        m1 = np.sum(self.weights * np.exp(1j * self.centers))
        return wrap(np.angle(m1))

    def predict(self, T):
        T = np.asarray(T, dtype=float)
        L = self.interval_count
        if T.shape != (L, L):
            raise ValueError("PWCFilter: transition matrix size mismatch")
        if np.any(T < -1e-12) or np.max(np.abs(T.sum(axis=0) - 1.0)) > 1e-6:
            raise ValueError("PWCFilter: transition matrix must be column stochastic")
        w = T @ self.weights
        self.weights = w / w.sum()

    def update_likelihood(self, likelihood, z):
        w = self.weights * np.asarray(likelihood(z, self.centers), dtype=float)
        total = w.sum()
        if total <= 0:
            raise RuntimeError("PWCFilter: posterior vanished")
        self.weights = w / total

    def update_matrix(self, M, z_index):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[1] != self.interval_count:
            raise ValueError("PWCFilter: measurement matrix shape mismatch")
        if np.any(M < -1e-12) or np.max(np.abs(M.sum(axis=0) - 1.0)) > 1e-6:
            raise ValueError("PWCFilter: measurement matrix must be column stochastic")
        self.update_likelihood(lambda z, x: M[z_index, :], z_index)


def grid_transition_matrix(noise, points, system_fn=None):
    """Column-stochastic transition matrix between fixed grid points.

    Column k holds the (normalized) noise density of reaching each grid point
    from ``system_fn(points[k])``.
    """
    points = np.asarray(points, dtype=float)
    moved = points if system_fn is None else np.asarray(system_fn(points), dtype=float)
    T = np.asarray(noise.pdf(wrap(points[:, None] - moved[None, :])), dtype=float)
    T = np.maximum(T, 0.0)
    return T / T.sum(axis=0, keepdims=True)


def pwc_transition_matrix_nonlinear(noise, interval_count, system_fn, oversample=8):
    """Column-stochastic interval transition matrix for a nonlinear system.

    Interval-to-interval probabilities are approximated by subsampling each
    source interval and accumulating the noise mass per target interval.
    """
    L = int(interval_count)
    width = TWO_PI / L
    sub = (np.arange(oversample) + 0.5) / oversample
    T = np.zeros((L, L))
    targets = (np.arange(L) + 0.5) * width
    for k in range(L):
        sources = (k + sub) * width
        moved = np.asarray(system_fn(sources), dtype=float)
        dens = np.asarray(noise.pdf(wrap(targets[:, None] - moved[None, :])),
                          dtype=float)
        T[:, k] = dens.mean(axis=1)
    T = np.maximum(T, 0.0)
    return T / T.sum(axis=0, keepdims=True)


def pwc_transition_matrix(noise, interval_count, oversample=16):
    """Column-stochastic interval transition matrix for additive noise.

    Entry (j, k) is the probability of landing in interval j starting from a
    uniform draw over interval k; the circulant structure is computed on a
    fine grid and box-averaged twice.
    """
    L = int(interval_count)
    G = L * oversample
    step = TWO_PI / G
    width = TWO_PI / L
    fine = np.arange(G) * step
    dens = np.asarray(noise.pdf(fine), dtype=float)
    # double box filter: average over source position in the interval and
    # integrate over the target interval (triangle kernel in offset space)
    box = np.zeros(G)
    box[:oversample] = 1.0
    spec = np.fft.fft(dens) * np.abs(np.fft.fft(box)) ** 2
    double_integral = np.fft.ifft(spec).real * step * step
    base = np.maximum(double_integral[::oversample] / width, 0.0)
    T = np.empty((L, L))
    for k in range(L):
        T[:, k] = np.roll(base, k)
    T /= T.sum(axis=0, keepdims=True)
    return T


class ToroidalWNFilter:
    """Wrapped-normal-assumed estimator on the torus."""

    def __init__(self):
        self._state = None

    def set_state(self, state):
        if not isinstance(state, HypertoroidalWN) or state.dim != 2:
            raise TypeError("ToroidalWNFilter: state must be a bivariate HypertoroidalWN")
        self._state = state

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("ToroidalWNFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        self._state = convolve_hwn(self.get_estimate(), noise)

    def predict_nonlinear(self, a, noise):
        """Per-axis five-point grids, propagate, re-fit from moments."""
        state = self.get_estimate()
        margs = [state.marginalize_to_1d(i + 1) for i in range(2)]
        wds = [m.to_dirac5() for m in margs]
        P1, P2 = np.meshgrid(wds[0].d, wds[1].d, indexing="ij")
        W = np.outer(wds[0].w, wds[1].w)
        pts = np.column_stack([P1.ravel(), P2.ravel()])
        wd = HypertoroidalWD(pts, W.ravel()).apply(a)
        first = [wd.trigonometric_moment([1, 0]), wd.trigonometric_moment([0, 1])]
        pair = {(0, 1): (wd.trigonometric_moment([1, 1]),
                         wd.trigonometric_moment([1, -1]))}
        propagated = HypertoroidalWN.from_moments(first, pair)
        self._state = convolve_hwn(propagated, noise)

    def update_identity(self, z, noise):
        z = wrap(np.asarray(z, dtype=float))
        self._state = multiply_hwn(self.get_estimate(), HypertoroidalWN(z, noise.C))


class HypertoroidalParticleFilter:
    """Bootstrap filter with systematic resampling on the d-torus."""

    def __init__(self, particle_count, dim):
        self.particle_count = int(particle_count)
        self.dim = int(dim)
        self._particles = None

    def set_state(self, state, rng):
        rng = _check_rng(rng)
        self._particles = state.sample(self.particle_count, rng)

    def get_estimate(self):
        if self._particles is None:
            raise RuntimeError("HypertoroidalParticleFilter: no state set")
        n = len(self._particles)
        return HypertoroidalWD(self._particles, np.full(n, 1.0 / n))

    def predict_nonlinear(self, a, noise, rng):
        rng = _check_rng(rng)
        moved = np.asarray(a(self._particles), dtype=float)
        self._particles = wrap(moved + noise.sample(len(moved), rng))

    def predict_identity(self, noise, rng):
        self.predict_nonlinear(lambda x: x, noise, rng)

    def update_likelihood(self, likelihood, z, rng):
        rng = _check_rng(rng)
        w = np.asarray(likelihood(z, self._particles), dtype=float)
        if not np.all(np.isfinite(w)) or w.sum() <= 1e-300:
            raise RuntimeError("particle update: degenerate weights")
        w = w / w.sum()
        self._particles = self._particles[_systematic_resample(w, rng)]


class HypertoroidalFourierFilter:
    """Fourier-coefficient estimator on the d-torus."""

    def __init__(self, shape, transformation="sqrt"):
        self.shape = tuple(int(s) for s in shape)
        self.transformation = transformation
        self._state = None

    def set_state(self, state):
        if isinstance(state, HypertoroidalFourier):
            if state.transformation != self.transformation:
                raise ValueError("HypertoroidalFourierFilter: tag mismatch")
            self._state = state
        else:
            self._state = HypertoroidalFourier.from_distribution(
                state, self.shape, self.transformation)

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("HypertoroidalFourierFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        if not isinstance(noise, HypertoroidalFourier):
            noise = HypertoroidalFourier.from_distribution(
                noise, self.shape, self.transformation)
        self._state = self.get_estimate().convolve(noise)

    def update_likelihood(self, likelihood, z):
        lik = HypertoroidalFourier.from_function(
            lambda pts: likelihood(z, pts), self.shape, self.transformation)
        self._state = self.get_estimate().multiply(lik)


class VMFFilter:
    """Von Mises-Fisher estimator on the unit hypersphere."""

    def __init__(self):
        self._state = None

    def set_state(self, state):
        if not isinstance(state, VonMisesFisher):
            raise TypeError("VMFFilter: state must be a VonMisesFisher")
        self._state = state

    def get_estimate(self):
        if self._state is None:
            raise RuntimeError("VMFFilter: no state set")
        return self._state

    def predict_identity(self, noise):
        self._state = vmf_convolve(self.get_estimate(), noise)

    def update_identity(self, z, noise):
        z = np.asarray(z, dtype=float)
        self._state = vmf_multiply(self.get_estimate(), VonMisesFisher(z, noise.kappa))
