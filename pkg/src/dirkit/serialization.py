"""JSON encoding of every distribution type.

Layout: ``{"type": name, "params": {...}}`` for all families except the
Fourier densities, which use the flat layout
``{"type": "fourier", "transformation": ..., "coeffs": [[re, im], ...]}``.
Complex entries are always ``[re, im]`` pairs; matrices are row-major nested
lists.  Dump/parse round trips are byte-identical because floats are emitted
with ``repr`` precision and constructors never renormalize loaded values.
"""

import json

import numpy as np

from . import circular, complexsphere, fourier, hypersphere, hypertorus, se2
from .cliexpr import compile_expression


def _c2pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _pair2c(p):
    return complex(p[0], p[1])


def _cmat(M):
    M = np.asarray(M, dtype=complex)
    return [[_c2pair(v) for v in row] for row in M]


def _cmat_load(rows):
    return np.array([[_pair2c(v) for v in row] for row in rows], dtype=complex)


def _cvec(v):
    return [_c2pair(x) for x in np.asarray(v, dtype=complex)]


def _cvec_load(rows):
    return np.array([_pair2c(p) for p in rows], dtype=complex)


def to_json_dict(dist):
    """JSON-ready dictionary for any supported distribution."""
    enc = _ENCODERS.get(type(dist))
    if enc is None:
        raise TypeError("no JSON encoding for %s" % type(dist).__name__)
    return enc(dist)


def from_json_dict(obj):
    """Distribution instance from a parsed JSON dictionary."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError("distribution JSON must be an object with a 'type' field")
    dec = _DECODERS.get(obj["type"])
    if dec is None:
        raise ValueError("unknown distribution type %r" % obj["type"])
    return dec(obj)


def dumps(dist):
    """Canonical JSON text (sorted keys, compact separators)."""
    return json.dumps(to_json_dict(dist), sort_keys=True, separators=(",", ":"))


def loads(text):
    return from_json_dict(json.loads(text))


def _params(obj):
    p = obj.get("params")
    if not isinstance(p, dict):
        raise ValueError("distribution JSON missing 'params' object")
    return p


def _custom_circular_encode(d):
    if d.expr is None:
        raise TypeError("CustomCircular built from a raw callable is not serializable; "
                        "construct it with an expression string instead")
    return {"type": "custom_circular",
            "params": {"expr": d.expr, "prenormalized": d.prenormalized}}


def _custom_circular_decode(obj):
    p = _params(obj)
    fn = compile_expression(p["expr"], ("x",))
    return circular.CustomCircular(fn, prenormalized=p.get("prenormalized", False),
                                   expr=p["expr"])


def _custom_ht_encode(d):
    if d.expr is None:
        raise TypeError("CustomHypertoroidal built from a raw callable is not "
                        "serializable; construct it with an expression string instead")
    return {"type": "ht_custom",
            "params": {"expr": d.expr, "dim": d.dim, "prenormalized": d.prenormalized}}


def _custom_ht_decode(obj):
    p = _params(obj)
    dim = int(p["dim"])
    names = tuple("x%d" % (i + 1) for i in range(dim))
    raw = compile_expression(p["expr"], names)

    def fn(pts):
        pts = np.asarray(pts, dtype=float)
        return raw(*[pts[..., i] for i in range(dim)])

    return hypertorus.CustomHypertoroidal(fn, dim,
                                          prenormalized=p.get("prenormalized", False),
                                          expr=p["expr"])


_ENCODERS = {
    circular.WrappedNormal: lambda d: {
        "type": "wn", "params": {"mu": d.mu, "sigma": d.sigma}},
    circular.VonMises: lambda d: {
        "type": "vm", "params": {"mu": d.mu, "kappa": d.kappa}},
    circular.WrappedCauchy: lambda d: {
        "type": "wc", "params": {"mu": d.mu, "gamma": d.gamma}},
    circular.WrappedExponential: lambda d: {
        "type": "we", "params": {"lam": d.lam}},
    circular.WrappedLaplace: lambda d: {
        "type": "wl", "params": {"lam": d.lam, "kappa": d.kappa}},
    circular.CircularUniform: lambda d: {
        "type": "circular_uniform", "params": {}},
    circular.GeneralizedVonMises: lambda d: {
        "type": "gvm", "params": {"mu1": d.mu1, "kappa1": d.kappa1,
                                  "mu2": d.mu2, "kappa2": d.kappa2}},
    circular.PiecewiseConstant: lambda d: {
        "type": "pwc", "params": {"weights": d.weights.tolist()}},
    circular.WrappedDiracMixture: lambda d: {
        "type": "wd", "params": {"d": d.d.tolist(), "w": d.w.tolist()}},
    circular.CircularMixture: lambda d: {
        "type": "mixture",
        "params": {"weights": d.weights.tolist(),
                   "components": [to_json_dict(c) for c in d.components]}},
    circular.CustomCircular: _custom_circular_encode,
    fourier.FourierDensity: lambda d: {
        "type": "fourier", "transformation": d.transformation,
        "coeffs": _cvec(d.coeffs)},
    hypertorus.HypertoroidalWN: lambda d: {
        "type": "hwn", "params": {"mu": d.mu.tolist(), "C": d.C.tolist()}},
    hypertorus.HypertoroidalWD: lambda d: {
        "type": "hwd", "params": {"d": d.d.tolist(), "w": d.w.tolist()}},
    hypertorus.HypertoroidalUniform: lambda d: {
        "type": "ht_uniform", "params": {"dim": d.dim}},
    hypertorus.ToroidalVMSine: lambda d: {
        "type": "tvm_sine", "params": {"mu": d.mu.tolist(), "kappa": d.kappa.tolist(),
                                       "lam": d.lam}},
    hypertorus.ToroidalVMMatrix: lambda d: {
        "type": "tvm_matrix", "params": {"mu": d.mu.tolist(), "kappa": d.kappa.tolist(),
                                         "A": d.A.tolist()}},
    hypertorus.HypertoroidalMixture: lambda d: {
        "type": "ht_mixture",
        "params": {"weights": d.weights.tolist(),
                   "components": [to_json_dict(c) for c in d.components]}},
    hypertorus.CustomHypertoroidal: _custom_ht_encode,
    hypertorus.HypertoroidalFourier: lambda d: {
        "type": "ht_fourier", "transformation": d.transformation,
        "shape": list(d.coeffs.shape),
        "coeffs": np.stack([d.coeffs.real, d.coeffs.imag], axis=-1).tolist()},
    hypersphere.VonMisesFisher: lambda d: {
        "type": "vmf", "params": {"mu": d.mu.tolist(), "kappa": d.kappa}},
    hypersphere.Watson: lambda d: {
        "type": "watson", "params": {"mu": d.mu.tolist(), "kappa": d.kappa}},
    hypersphere.Bingham: lambda d: {
        "type": "bingham", "params": {"M": d.M.tolist(), "Z": d.Z.tolist()}},
    hypersphere.HypersphericalUniform: lambda d: {
        "type": "sph_uniform", "params": {"dim": d.dim}},
    hypersphere.SphericalDiracMixture: lambda d: {
        "type": "sph_dirac", "params": {"points": d.points.tolist(),
                                        "weights": d.weights.tolist()}},
    complexsphere.ComplexBingham: lambda d: {
        "type": "complex_bingham", "params": {"B": _cmat(d.B)}},
    complexsphere.ComplexWatson: lambda d: {
        "type": "complex_watson", "params": {"w": _cvec(d.w), "kappa": d.kappa}},
    complexsphere.ComplexACG: lambda d: {
        "type": "cacg", "params": {"Sigma": _cmat(d.Sigma)}},
    complexsphere.ComplexWatsonMixture: lambda d: {
        "type": "cw_mixture",
        "params": {"weights": d.weights.tolist(),
                   "components": [to_json_dict(c) for c in d.components]}},
    se2.SE2PartiallyWrappedNormal: lambda d: {
        "type": "se2_pwn", "params": {"mu": d.mu.tolist(), "C": d.C.tolist()}},
    se2.SE2PartiallyWrappedDirac: lambda d: {
        "type": "se2_pwd", "params": {"points": d.points.tolist(),
                                      "weights": d.weights.tolist()}},
    se2.SE2Bingham: lambda d: {
        "type": "se2_bingham", "params": {"C1": d.C1.tolist(), "C2": d.C2.tolist(),
                                          "C3": d.C3.tolist()}},
}

_DECODERS = {
    "wn": lambda o: circular.WrappedNormal(_params(o)["mu"], _params(o)["sigma"]),
    "vm": lambda o: circular.VonMises(_params(o)["mu"], _params(o)["kappa"]),
    "wc": lambda o: circular.WrappedCauchy(_params(o)["mu"], _params(o)["gamma"]),
    "we": lambda o: circular.WrappedExponential(_params(o)["lam"]),
    "wl": lambda o: circular.WrappedLaplace(_params(o)["lam"], _params(o)["kappa"]),
    "circular_uniform": lambda o: circular.CircularUniform(),
    "gvm": lambda o: circular.GeneralizedVonMises(
        _params(o)["mu1"], _params(o)["kappa1"],
        _params(o)["mu2"], _params(o)["kappa2"]),
    "pwc": lambda o: circular.PiecewiseConstant(_params(o)["weights"]),
    "wd": lambda o: circular.WrappedDiracMixture(_params(o)["d"], _params(o)["w"]),
    "mixture": lambda o: circular.CircularMixture(
        [from_json_dict(c) for c in _params(o)["components"]],
        _params(o)["weights"]),
    "custom_circular": _custom_circular_decode,
    "fourier": lambda o: fourier.FourierDensity(
        _cvec_load(o["coeffs"]), o["transformation"], normalize=False),
    "hwn": lambda o: hypertorus.HypertoroidalWN(_params(o)["mu"], _params(o)["C"]),
    "hwd": lambda o: hypertorus.HypertoroidalWD(_params(o)["d"], _params(o)["w"]),
    "ht_uniform": lambda o: hypertorus.HypertoroidalUniform(_params(o)["dim"]),
    "tvm_sine": lambda o: hypertorus.ToroidalVMSine(
        _params(o)["mu"], _params(o)["kappa"], _params(o)["lam"]),
    "tvm_matrix": lambda o: hypertorus.ToroidalVMMatrix(
        _params(o)["mu"], _params(o)["kappa"], _params(o)["A"]),
    "ht_mixture": lambda o: hypertorus.HypertoroidalMixture(
        [from_json_dict(c) for c in _params(o)["components"]],
        _params(o)["weights"]),
    "ht_custom": _custom_ht_decode,
    "ht_fourier": lambda o: hypertorus.HypertoroidalFourier(
        np.asarray(o["coeffs"], dtype=float)[..., 0]
        + 1j * np.asarray(o["coeffs"], dtype=float)[..., 1],
        o["transformation"], normalize=False),
    "vmf": lambda o: hypersphere.VonMisesFisher(_params(o)["mu"], _params(o)["kappa"]),
    "watson": lambda o: hypersphere.Watson(_params(o)["mu"], _params(o)["kappa"]),
    "bingham": lambda o: hypersphere.Bingham(
        np.asarray(_params(o)["M"], dtype=float),
        np.asarray(_params(o)["Z"], dtype=float)),
    "sph_uniform": lambda o: hypersphere.HypersphericalUniform(_params(o)["dim"]),
    "sph_dirac": lambda o: hypersphere.SphericalDiracMixture(
        _params(o)["points"], _params(o)["weights"]),
    "complex_bingham": lambda o: complexsphere.ComplexBingham(
        _cmat_load(_params(o)["B"])),
    "complex_watson": lambda o: complexsphere.ComplexWatson(
        _cvec_load(_params(o)["w"]), _params(o)["kappa"]),
    "cacg": lambda o: complexsphere.ComplexACG(_cmat_load(_params(o)["Sigma"])),
    "cw_mixture": lambda o: complexsphere.ComplexWatsonMixture(
        _params(o)["weights"],
        [from_json_dict(c) for c in _params(o)["components"]]),
    "se2_pwn": lambda o: se2.SE2PartiallyWrappedNormal(
        _params(o)["mu"], _params(o)["C"]),
    "se2_pwd": lambda o: se2.SE2PartiallyWrappedDirac(
        _params(o)["points"], _params(o)["weights"]),
    "se2_bingham": lambda o: se2.SE2Bingham(
        _params(o)["C1"], _params(o)["C2"], _params(o)["C3"]),
}
