"""Shared numerics: angle arithmetic, periodic quadrature, special functions.

Everything in this module is pure and reentrant; no global state beyond
cached Gauss-Legendre nodes.
"""

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ive

TWO_PI = 2.0 * np.pi


class NonConvergenceError(RuntimeError):
    """Raised when an iterative numeric routine exhausts its budget.

    The best estimate reached so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UndefinedMeanError(ValueError):
    """Raised when a circular mean is requested but the first moment vanishes."""


def wrap(theta):
    """Reduce an angle (or array of angles) to the half-open interval [0, 2pi).

    Rejects non-finite input.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("wrap: input must be finite")
    out = np.mod(theta, TWO_PI)
    # mod can return 2*pi exactly for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def angular_distance(a, b):
    """Shortest arc length between two angles; lies in [0, pi]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.abs(np.mod(a - b, TWO_PI))
    out = np.minimum(d, TWO_PI - d)
    if out.ndim == 0:
        return float(out)
    return out


@lru_cache(maxsize=8)
def _gl_rule(order):
    x, w = leggauss(order)
    return x, w


def _panel_nodes(lo, hi, panels, order):
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    x, w = _gl_rule(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return nodes, wts


# refinement limits per dimension keep the tensor grids at desk scale
_MAX_PANELS = {1: 4096, 2: 256, 3: 16}
_START_PANELS = {1: 8, 2: 8, 3: 2}
_DEFAULT_TOL = {1: 1e-10, 2: 1e-8, 3: 1e-6}


def integrate_box(f, lows, highs, tol=None, order=10):
    """Integrate ``f`` over a box in up to three dimensions.

    ``f`` must accept one broadcastable ndarray argument per dimension and
    may return complex values.  Composite Gauss-Legendre panels are doubled
    until two successive estimates agree to ``tol``; if the panel budget is
    exhausted first, :class:`NonConvergenceError` carries the best estimate.
    """
    lows = np.atleast_1d(np.asarray(lows, dtype=float))
    highs = np.atleast_1d(np.asarray(highs, dtype=float))
    d = len(lows)
    if d not in (1, 2, 3):
        raise ValueError("integrate_box: dimension must be 1, 2, or 3")
    if tol is None:
        tol = _DEFAULT_TOL[d]
    if tol <= 0:
        raise ValueError("integrate_box: tol must be positive")

    panels = _START_PANELS[d]
    prev = None
    while True:
        axes = [_panel_nodes(lows[i], highs[i], panels, order) for i in range(d)]
        if d == 1:
            est = np.sum(f(axes[0][0]) * axes[0][1])
        elif d == 2:
            X, Y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
            W = np.outer(axes[0][1], axes[1][1])
            est = np.sum(f(X, Y) * W)
        else:
            X, Y, Z = np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij")
            W = (axes[0][1][:, None, None] * axes[1][1][None, :, None]
                 * axes[2][1][None, None, :])
            est = np.sum(f(X, Y, Z) * W)
        est = complex(est) if np.iscomplexobj(est) else float(est)
        if prev is not None and abs(est - prev) < tol:
            return est
        if panels >= _MAX_PANELS[d]:
            raise NonConvergenceError(
                "integrate_box: panel budget exhausted before reaching tol=%g" % tol,
                best=est,
            )
        prev = est
        panels *= 2


def integrate_periodic(f, d=1, tol=None):
    """Integrate ``f`` over the periodic box [0, 2pi)^d for d in {1, 2, 3}."""
    return integrate_box(f, [0.0] * d, [TWO_PI] * d, tol=tol)


def bessel_ratio(d, kappa):
    """Mean resultant length of a d-dimensional von Mises-Fisher density.

    Returns I_{d/2}(kappa) / I_{d/2-1}(kappa); monotone increasing in kappa,
    zero at kappa = 0, tends to 1 as kappa grows.
    """
    if d < 2:
        raise ValueError("bessel_ratio: d must be >= 2")
    if kappa < 0:
        raise ValueError("bessel_ratio: kappa must be >= 0")
    if kappa == 0.0:
        return 0.0
    # exponential scaling cancels in the ratio and avoids overflow
    num = ive(d / 2.0, kappa)
    den = ive(d / 2.0 - 1.0, kappa)
    if den == 0.0:
        # deep asymptotic regime; use the large-argument expansion
        nu = d / 2.0 - 1.0
        return 1.0 - (nu + 0.5) / kappa
    return float(num / den)


def _bessel_ratio_derivative(d, kappa, a):
    # dA/dk = 1 - A^2 - (d-1)/k * A, valid for kappa > 0
    return 1.0 - a * a - (d - 1.0) / kappa * a


def inverse_bessel_ratio(d, r):
    """Concentration kappa with bessel_ratio(d, kappa) = r; r must be in [0, 1)."""
    if not 0.0 <= r < 1.0:
        raise ValueError("inverse_bessel_ratio: r must satisfy 0 <= r < 1")
    if r == 0.0:
        return 0.0
    # Banerjee-style initial guess, then safeguarded Newton
    kappa = r * (d - r * r) / (1.0 - r * r)
    lo, hi = 0.0, max(1.0, 2.0 * kappa)
    while bessel_ratio(d, hi) < r:
        hi *= 2.0
        if hi > 1e12:
            raise NonConvergenceError("inverse_bessel_ratio: bracket expansion failed")
    kappa = min(max(kappa, lo + 1e-12), hi)
    for _ in range(100):
        a = bessel_ratio(d, kappa)
        err = a - r
        if abs(err) < 1e-13:
            break
        if err > 0:
            hi = kappa
        else:
            lo = kappa
        da = _bessel_ratio_derivative(d, kappa, a)
        step = err / da if da > 0 else np.inf
        cand = kappa - step
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        kappa = cand
    return float(kappa)


def kummer_series(a, b, x, tol=1e-14, max_terms=10000):
    """Confluent hypergeometric 1F1(a; b; x) by direct power series.

    For negative x the Kummer transform 1F1(a;b;x) = e^x 1F1(b-a;b;-x) is
    applied first so all summed terms are positive.
    """
    if x < 0:
        return math.exp(x) * kummer_series(b - a, b, -x, tol=tol, max_terms=max_terms)
    term = 1.0
    total = 1.0
    for j in range(max_terms):
        term *= (a + j) * x / ((b + j) * (j + 1.0))
        total += term
        if abs(term) < tol * abs(total):
            return total
    raise NonConvergenceError("kummer_series: did not converge", best=total)


def kummer_1f1_elementary(n, kappa):
    """1F1(1; n; kappa) for integer n >= 2 in elementary closed form.

    Uses (n-1)! kappa^(1-n) (e^kappa - sum_{j<=n-2} kappa^j/j!) away from the
    origin and the power series near it, where the closed form cancels badly.
    """
    n = int(n)
    if n < 2:
        raise ValueError("kummer_1f1_elementary: n must be an integer >= 2")
    if abs(kappa) < 30.0:
        # 1F1(1; n; x) = sum_j x^j / (n (n+1) ... (n+j-1))
        term = 1.0
        total = 1.0
        j = 0
        while True:
            term *= kappa / (n + j)
            total += term
            j += 1
            if abs(term) < 1e-16 * abs(total) or j > 500:
                return total
    partial = sum(kappa ** j / math.factorial(j) for j in range(n - 1))
    return math.factorial(n - 1) * kappa ** (1 - n) * (math.exp(kappa) - partial)


def kummer_1f1_elementary_deriv(n, kappa):
    """Derivative d/dkappa of 1F1(1; n; kappa); equals 1F1(2; n+1; kappa)/n."""
    n = int(n)
    if n < 2:
        raise ValueError("kummer_1f1_elementary_deriv: n must be an integer >= 2")
    if abs(kappa) < 30.0:
        return kummer_series(2.0, n + 1.0, kappa) / n
    # differentiate the closed form directly
    s_n2 = sum(kappa ** j / math.factorial(j) for j in range(n - 1))
    s_n3 = sum(kappa ** j / math.factorial(j) for j in range(n - 2))
    e = math.exp(kappa)
    return math.factorial(n - 1) * (
        (1 - n) * kappa ** (-n) * (e - s_n2) + kappa ** (1 - n) * (e - s_n3)
    )


def log_kummer_1f1_one(n, kappa):
    """log 1F1(1; n; kappa), stable for large positive kappa."""
    n = int(n)
    if kappa < 700.0:
        return math.log(kummer_1f1_elementary(n, kappa))
    # e^kappa dominates: log 1F1 = kappa + log((n-1)!) - (n-1) log kappa + log1p(...)
    log_partial = -np.inf
    for j in range(n - 1):
        log_partial = np.logaddexp(log_partial, j * math.log(kappa) - math.lgamma(j + 1))
    correction = math.log1p(-math.exp(log_partial - kappa))
    return math.lgamma(n) + (1 - n) * math.log(kappa) + kappa + correction


def surface_area_sphere(d):
    """Surface area of the unit sphere S^{d-1} embedded in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
