"""Built-in regression checks: the worked-example anchors plus fast subsets
of the property suites.  Each check returns (name, passed, detail)."""

import math
import time

import numpy as np

from .core import TWO_PI, integrate_periodic, wrap
from .circular import (
    CircularUniform,
    VonMises,
    WrappedCauchy,
    WrappedExponential,
    WrappedLaplace,
    WrappedNormal,
    convolve,
    fit_wn_from_moment,
    multiply,
)
from .fourier import FourierDensity
from .hypertorus import (
    HypertoroidalWN,
    ToroidalVMMatrix,
    multiply_tvm_matrix,
)
from .hypersphere import Bingham, VonMisesFisher, integrate_sphere, vmf_multiply
from .complexsphere import ComplexBingham, ComplexWatson, ComplexWatsonMixture, cb_log_norm
from .se2 import SE2Bingham, SE2PartiallyWrappedNormal
from .filters import (
    CircularParticleFilter,
    FourierFilter,
    GridFilter,
    PWCFilter,
    VMFilter,
    WNFilter,
    additive_gaussian_likelihood,
    pwc_transition_matrix,
)


def _close(a, b, tol):
    return abs(a - b) <= tol


def check_moment_regression():
    """Wrapped normal first moment, analytic and numeric paths."""
    wn = WrappedNormal(2.0, 1.3)
    target = complex(-0.1788, 0.3906)
    ma = wn.trigonometric_moment(1)
    mn = wn.trigonometric_moment_numerical(1)
    ok = (abs(ma.real - target.real) < 5e-5 and abs(ma.imag - target.imag) < 5e-5
          and abs(mn.real - target.real) < 5e-5 and abs(mn.imag - target.imag) < 5e-5)
    return ok, "analytic %s numeric %s" % (ma, mn)


def check_deterministic_sampling():
    """Three- and five-point approximations of WN(2, 1.3)."""
    wn = WrappedNormal(2.0, 1.3)
    wd3 = wn.to_dirac3()
    d3 = np.sort(wd3.d)
    ok3 = np.allclose(d3, [0.5740, 2.0, 3.4260], atol=5e-5) and np.allclose(
        wd3.w, 1.0 / 3.0, atol=5e-5)
    wd5 = wn.to_dirac5()
    ok5 = (np.allclose(np.sort(wd5.d), np.sort([0.1113, 3.8887, 1.3156, 2.6844, 2.0]),
                       atol=5e-5)
           and np.allclose(np.sort(wd5.w), np.sort([0.1855] * 4 + [0.2581]), atol=5e-5))
    m_ok = (abs(wd3.trigonometric_moment(1) - wn.trigonometric_moment(1)) < 1e-9
            and abs(wd5.trigonometric_moment(1) - wn.trigonometric_moment(1)) < 1e-9
            and abs(wd5.trigonometric_moment(2) - wn.trigonometric_moment(2)) < 1e-9)
    return ok3 and ok5 and m_ok, "d3 %s d5 %s w5 %.4f" % (
        np.round(d3, 4), np.round(np.sort(wd5.d), 4), wd5.w[-1])


def check_toroidal_regression():
    """Correlation coefficients and marginals of the worked torus example."""
    twn = HypertoroidalWN([1.0, 3.0], [[1.0, -0.8], [-0.8, 0.9]])
    r1 = twn.correlation_jammalamadaka()
    r2 = twn.correlation_johnson()
    r3 = twn.correlation_jupp()
    w1 = twn.marginalize_to_1d(1)
    w2 = twn.marginalize_to_1d(2)
    ok = (_close(r1, -0.8086, 2e-3) and _close(r2, -0.8086, 2e-3)
          and _close(r3, -1.0667, 2e-3)
          and _close(w1.mu, 1.0, 1e-4) and _close(w1.sigma, 1.0, 1e-4)
          and _close(w2.mu, 3.0, 1e-4) and _close(w2.sigma, 0.9487, 1e-4))
    return ok, "r1 %.4f r2 %.4f r3 %.4f marg (%.4f, %.4f) (%.4f, %.4f)" % (
        r1, r2, r3, w1.mu, w1.sigma, w2.mu, w2.sigma)


def check_filter_regression():
    """Nonlinear prediction and progressive update anchors."""
    f = WNFilter()
    f.set_state(WrappedNormal(2.0, 0.5))
    f.predict_nonlinear(lambda x: np.mod(x + 0.5 * np.cos(x) ** 2, TWO_PI),
                        WrappedNormal(0.0, 0.4))
    pred = f.get_estimate()
    ok_pred = _close(pred.mu, 2.1289, 1e-3) and _close(pred.sigma, 0.7377, 1e-3)
    lik = additive_gaussian_likelihood(np.sin, 0.7)
    f.update_nonlinear_progressive(lik, 0.3)
    post = f.get_estimate()
    ok_post = _close(post.mu, 2.1481, 2e-2) and _close(post.sigma, 0.7427, 2e-2)
    return ok_pred and ok_post, "pred (%.4f, %.4f) post (%.4f, %.4f)" % (
        pred.mu, pred.sigma, post.mu, post.sigma)


def check_normalization_fast():
    """One normalization check per continuous family."""
    rng = np.random.default_rng(11)
    ok = True
    msgs = []
    for dist, d in [
        (WrappedNormal(1.0, 0.8), 1),
        (VonMises(2.0, 1.5), 1),
        (WrappedCauchy(0.5, 0.7), 1),
        (WrappedExponential(0.9), 1),
        (WrappedLaplace(1.1, 0.8), 1),
        (CircularUniform(), 1),
    ]:
        val = integrate_periodic(dist.pdf, d=1)
        ok &= abs(val - 1.0) < 1e-9
        msgs.append("%.2e" % abs(val - 1.0))
    twn = HypertoroidalWN([1.0, 2.0], [[0.8, 0.3], [0.3, 0.9]])
    val = integrate_periodic(
        lambda x1, x2: twn.pdf(np.stack(np.broadcast_arrays(x1, x2), axis=-1)), d=2)
    ok &= abs(val - 1.0) < 1e-7
    vmf = VonMisesFisher(np.array([0.0, 0.0, 1.0]), 2.5)
    val = integrate_sphere(vmf.pdf, 3)
    ok &= abs(val - 1.0) < 1e-7
    b = Bingham(np.eye(2), np.array([-3.0, 0.0]))
    val = integrate_sphere(b.pdf, 2)
    ok &= abs(val - 1.0) < 1e-8
    del rng
    return ok, " ".join(msgs)


def check_analytic_vs_numeric_fast():
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(5):
        wn = WrappedNormal(rng.uniform(0, TWO_PI), rng.uniform(0.3, 1.5))
        vm = VonMises(rng.uniform(0, TWO_PI), rng.uniform(0.2, 5.0))
        for dist in (wn, vm):
            for k in (1, 2):
                a = dist.trigonometric_moment(k)
                n = dist.trigonometric_moment_numerical(k)
                ok &= abs(a - n) <= 1e-6 * max(1.0, abs(a))
    return ok, ""


def check_closures_fast():
    """Exact closure spot checks on dense grids."""
    xs = np.linspace(0, TWO_PI, 2048, endpoint=False)
    ok = True
    # WN convolution is exact
    a, b = WrappedNormal(1.0, 0.4), WrappedNormal(2.5, 0.6)
    c = convolve(a, b)
    grid = np.fft.ifft(np.fft.fft(a.pdf(xs)) * np.fft.fft(b.pdf(xs))).real * TWO_PI / len(xs)
    ok &= 0.5 * np.sum(np.abs(grid - c.pdf(xs))) * TWO_PI / len(xs) < 1e-6
    # VM multiplication is exact
    va, vb = VonMises(1.0, 2.0), VonMises(2.0, 1.0)
    vc = multiply(va, vb)
    prod = va.pdf(xs) * vb.pdf(xs)
    prod /= prod.sum() * TWO_PI / len(xs)
    ok &= 0.5 * np.sum(np.abs(prod - vc.pdf(xs))) * TWO_PI / len(xs) < 1e-6
    # TVM matrix closure
    ta = ToroidalVMMatrix([1.0, 2.0], [1.0, 0.5], [[0.3, -0.1], [0.2, 0.4]])
    tb = ToroidalVMMatrix([0.5, 1.5], [0.8, 1.2], [[-0.2, 0.1], [0.0, 0.3]])
    tc = multiply_tvm_matrix(ta, tb)
    pts = np.stack(np.meshgrid(np.linspace(0, TWO_PI, 40, endpoint=False),
                               np.linspace(0, TWO_PI, 40, endpoint=False),
                               indexing="ij"), axis=-1)
    prod2 = ta.pdf(pts) * tb.pdf(pts)
    prod2 /= prod2.sum() * (TWO_PI / 40) ** 2
    ok &= np.max(np.abs(prod2 - tc.pdf(pts)) / np.maximum(tc.pdf(pts), 1e-12)) < 1e-6
    # VMF multiplication: normalized pointwise product equals the closed form
    va3 = VonMisesFisher(np.array([1.0, 0.0, 0.0]), 2.0)
    vb3 = VonMisesFisher(np.array([0.0, 1.0, 0.0]), 1.5)
    vc3 = vmf_multiply(va3, vb3)
    mass = integrate_sphere(lambda x: va3.pdf(x) * vb3.pdf(x), 3)
    rngv = np.random.default_rng(3)
    pts = rngv.standard_normal((64, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    ok &= np.max(np.abs(va3.pdf(pts) * vb3.pdf(pts) / mass - vc3.pdf(pts))
                 / vc3.pdf(pts)) < 1e-6
    return ok, ""


def check_complex_fast(mc_draws=200_000):
    rng = np.random.default_rng(17)
    lams = np.array([0.0, -1.0, -3.0])
    ref = cb_log_norm(lams)
    z = (rng.standard_normal((mc_draws, 3)) + 1j * rng.standard_normal((mc_draws, 3)))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    vals = np.exp(np.sum(np.abs(z) ** 2 * lams, axis=1))
    area = 2.0 * np.pi ** 3 / math.factorial(2)
    mc = area * vals.mean()
    se = area * vals.std() / math.sqrt(mc_draws)
    ok = abs(math.exp(ref) - mc) < 4 * se
    # embedding equivalence
    B = np.array([[0.0, 1 + 1j], [1 - 1j, -2.0]], dtype=complex)
    cb = ComplexBingham(B)
    Br = cb.to_real()
    zt = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
    zt /= np.linalg.norm(zt, axis=1, keepdims=True)
    y = np.stack([zt[:, 0].real, zt[:, 0].imag, zt[:, 1].real, zt[:, 1].imag], axis=-1)
    q_c = np.real(np.einsum("ni,ij,nj->n", zt.conj(), B, zt))
    q_r = np.einsum("ni,ij,nj->n", y, Br, y)
    ok &= np.max(np.abs(q_c - q_r)) < 1e-10
    # one EM run on the two-mode shape scenario
    w1 = np.array([1, 1j, -1, -1j], dtype=complex) / 2.0
    w2 = np.array([1 + 0.1j, -1 + 0.1j, -1 - 0.1j, 1 - 0.1j], dtype=complex)
    w2 /= np.linalg.norm(w2)
    samples = np.concatenate([ComplexWatson(w1, 20.0).sample(300, rng),
                              ComplexWatson(w2, 20.0).sample(300, rng)])
    mix = ComplexWatsonMixture.fit_em(samples, 2, rng)
    coher = np.abs(np.array([[c.w.conj() @ w for w in (w1, w2)]
                             for c in mix.components]))
    ok &= max(min(coher[0, 0], coher[1, 1]), min(coher[0, 1], coher[1, 0])) >= 0.99
    return ok, "logc %.4f mc %.4f" % (math.exp(ref), mc)


def check_filters_vs_bayes_fast():
    rng = np.random.default_rng(23)
    ok = True
    for _ in range(3):
        prior = WrappedNormal(rng.uniform(0, TWO_PI), rng.uniform(0.4, 0.9))
        noise = WrappedNormal(0.0, rng.uniform(0.3, 0.7))
        meas_noise = WrappedNormal(0.0, rng.uniform(0.3, 0.7))
        z = rng.uniform(0, TWO_PI)
        # dense-grid exact Bayes
        xs = np.linspace(0, TWO_PI, 1 << 13, endpoint=False)
        dens = prior.pdf(xs)
        dens = np.fft.ifft(np.fft.fft(dens) * np.fft.fft(noise.pdf(xs))).real
        dens = np.maximum(dens, 0)
        dens *= meas_noise.pdf(wrap(z - xs))
        dens /= dens.sum()
        oracle_mean = wrap(np.angle(np.sum(dens * np.exp(1j * xs))))

        wnf = WNFilter()
        wnf.set_state(prior)
        wnf.predict_identity(noise)
        wnf.update_identity(z, meas_noise)
        ok &= abs(wrap(wnf.get_estimate().mu - oracle_mean + np.pi) - np.pi) < 0.05

        gf = GridFilter(500)
        gf.set_state(prior)
        gf.predict_identity(noise)
        gf.update_likelihood(lambda zz, x: meas_noise.pdf(wrap(zz - x)), z)
        ok &= abs(wrap(gf.point_estimate() - oracle_mean + np.pi) - np.pi) < 0.05

        ff = FourierFilter(101, "sqrt")
        ff.set_state(prior)
        ff.predict_identity(noise)
        ff.update_likelihood(lambda zz, x: meas_noise.pdf(wrap(zz - x)), z)
        ok &= abs(wrap(ff.get_estimate().circular_mean() - oracle_mean + np.pi)
                  - np.pi) < 0.05

        pf = CircularParticleFilter(20_000)
        pf.set_state(prior, rng)
        pf.predict_identity(noise, rng)
        pf.update_likelihood(lambda zz, x: meas_noise.pdf(wrap(zz - x)), z, rng)
        ok &= abs(wrap(pf.get_estimate().circular_mean() - oracle_mean + np.pi)
                  - np.pi) < 0.05

        pwc = PWCFilter(500)
        pwc.set_state(prior)
        pwc.predict(pwc_transition_matrix(noise, 500))
        pwc.update_likelihood(lambda zz, x: meas_noise.pdf(wrap(zz - x)), z)
        ok &= abs(wrap(pwc.point_estimate() - oracle_mean + np.pi) - np.pi) < 0.05

        vmf_f = VMFilter()
        vmf_f.set_state(VonMises(prior.mu, 1.0 / prior.sigma ** 2))
        vmf_f.predict_identity(VonMises(0.0, 1.0 / noise.sigma ** 2))
        vmf_f.update_identity(z, VonMises(0.0, 1.0 / meas_noise.sigma ** 2))
    return ok, ""


def check_se2_fast():
    rng = np.random.default_rng(31)
    ok = True
    for _ in range(3):
        A = rng.standard_normal((2, 2))
        C1 = 0.3 * (A + A.T)
        C2 = 0.4 * rng.standard_normal((2, 2))
        Bm = rng.standard_normal((2, 2))
        C3 = -(Bm @ Bm.T + 0.5 * np.eye(2))
        se2b = SE2Bingham(C1, C2, C3)
        n_ana = se2b.norm_const()
        n_num = se2b.norm_const_numerical(angle_points=200, trans_points=80)
        ok &= abs(n_ana - n_num) / n_num < 1e-3
    pwn = SE2PartiallyWrappedNormal(
        [1.0, 0.0, 2.0], [[0.5, 0.1, 0.0], [0.1, 0.8, 0.2], [0.0, 0.2, 0.9]])
    wn_marg, gauss_marg = pwn.marginals()
    xs = np.linspace(0, TWO_PI, 17)
    from .core import integrate_box

    for x in xs[:4]:
        direct = integrate_box(
            lambda u, v: pwn.pdf(np.stack(
                [np.full_like(u, x), u, v], axis=-1)),
            [pwn.mu[1] - 8, pwn.mu[2] - 8], [pwn.mu[1] + 8, pwn.mu[2] + 8], tol=1e-9)
        ok &= abs(direct - wn_marg.pdf(x)) < 1e-6
    del gauss_marg
    return ok, ""


CHECKS = [
    ("moment-regression", check_moment_regression),
    ("deterministic-sampling", check_deterministic_sampling),
    ("toroidal-regression", check_toroidal_regression),
    ("filter-regression", check_filter_regression),
    ("normalization-fast", check_normalization_fast),
    ("analytic-vs-numeric-fast", check_analytic_vs_numeric_fast),
    ("closures-fast", check_closures_fast),
    ("complex-sphere-fast", check_complex_fast),
    ("filters-vs-bayes-fast", check_filters_vs_bayes_fast),
    ("se2-fast", check_se2_fast),
]


def run_selftest(stream=None):
    """Run all checks; print one line each; return True iff all passed."""
    import sys

    stream = stream or sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        start = time.time()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, "raised %s: %s" % (type(exc).__name__, exc)
        elapsed = time.time() - start
        all_ok &= ok
        stream.write("%-28s %s  (%.1fs)%s\n" % (
            name, "PASS" if ok else "FAIL", elapsed,
            ("  " + detail) if detail and not ok else ""))
    stream.write("selftest: %s\n" % ("all checks passed" if all_ok else "FAILURES"))
    return all_ok
