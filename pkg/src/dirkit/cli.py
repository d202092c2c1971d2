"""Command-line front end.

Subcommands: pdf, moment, fit, sample, approx, filter-run, selftest.
Exit codes: 0 success, 1 check failure, 2 usage or validation error.
CSV output uses 17 significant digits so floats round trip losslessly.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import TWO_PI, angular_distance, wrap
from . import serialization
from .circular import WrappedDiracMixture, fit_vm_to_samples, fit_wn_to_samples
from .cliexpr import compile_expression
from .fourier import FourierDensity
from .hypersphere import Bingham, VonMisesFisher
from .hypertorus import HypertoroidalWN
from .se2 import SE2Bingham, SE2PartiallyWrappedNormal
from .filters import (
    CircularParticleFilter,
    FourierFilter,
    GridFilter,
    HypertoroidalParticleFilter,
    PWCFilter,
    ToroidalWNFilter,
    VMFFilter,
    VMFilter,
    WNFilter,
    additive_gaussian_likelihood,
    pwc_transition_matrix,
)


class UsageError(ValueError):
    """Invalid arguments or malformed inputs; maps to exit code 2."""


def _fmt(x):
    return "%.17g" % float(x)


def _load_dist(spec):
    """Distribution from an inline JSON string or a file path."""
    text = spec
    if not spec.lstrip().startswith("{"):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError("cannot read distribution file %r: %s" % (spec, exc))
    try:
        return serialization.loads(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError("malformed distribution JSON: %s" % exc)


def _write_output(text, out_path):
    """Write atomically when a path is given, else print to stdout."""
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ pdf

def cmd_pdf(args):
    dist = _load_dist(args.dist)
    n = args.points
    if hasattr(dist, "dim") and getattr(dist, "dim", 1) == 2:
        axis = np.arange(n) * TWO_PI / n
        X1, X2 = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([X1, X2], axis=-1)
        vals = dist.pdf(pts)
        rows = [(X1.ravel()[i], X2.ravel()[i], vals.ravel()[i])
                for i in range(n * n)]
        _write_output(_csv(["x1", "x2", "f"], rows), args.out)
    else:
        xs = np.arange(n) * TWO_PI / n
        vals = np.asarray(dist.pdf(xs), dtype=float)
        _write_output(_csv(["x", "f"], zip(xs, vals)), args.out)
    return 0


# --------------------------------------------------------------- moment

def cmd_moment(args):
    dist = _load_dist(args.dist)
    if args.numerical:
        m = dist.trigonometric_moment_numerical(args.k, tol=args.tol)
    else:
        m = dist.trigonometric_moment(args.k)
    _write_output(json.dumps({"re": m.real, "im": m.imag}), args.out)
    return 0


# ------------------------------------------------------------------ fit

def cmd_fit(args):
    try:
        data = np.loadtxt(args.samples, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError("cannot read samples file: %s" % exc)
    if args.family == "wn":
        dist = fit_wn_to_samples(data[:, 0])
    elif args.family == "vm":
        dist = fit_vm_to_samples(data[:, 0])
    elif args.family == "vmf":
        dist = VonMisesFisher.fit(data)
    elif args.family == "bingham":
        dist = Bingham.fit(samples=data)
    else:
        raise UsageError("unknown fit family %r" % args.family)
    _write_output(serialization.dumps(dist), args.out)
    return 0


# --------------------------------------------------------------- sample

def cmd_sample(args):
    dist = _load_dist(args.dist)
    rng = np.random.default_rng(args.seed)
    draws = dist.sample(args.n, rng)
    draws = np.asarray(draws)
    if args.format == "json":
        if isinstance(dist, SE2Bingham):
            payload = [{"angle_pair": [float(r[0]), float(r[1])],
                        "translation": [float(r[2]), float(r[3])]} for r in draws]
        else:
            payload = draws.tolist()
        _write_output(json.dumps(payload), args.out)
        return 0
    if np.iscomplexobj(draws):
        cols = draws.shape[1]
        header = []
        rows = []
        for i in range(cols):
            header += ["re%d" % (i + 1), "im%d" % (i + 1)]
        for r in draws:
            rows.append([v for pair in ((z.real, z.imag) for z in r) for v in pair])
        _write_output(_csv(header, rows), args.out)
        return 0
    if draws.ndim == 1:
        _write_output(_csv(["x"], [(v,) for v in draws]), args.out)
    else:
        header = ["x%d" % (i + 1) for i in range(draws.shape[1])]
        _write_output(_csv(header, draws), args.out)
    return 0


# --------------------------------------------------------------- approx

def cmd_approx(args):
    dist = _load_dist(args.dist)
    scheme = args.scheme
    try:
        if scheme == "dirac3":
            out = dist.to_dirac3()
        elif scheme == "dirac5":
            out = dist.to_dirac5()
        elif scheme.startswith("fourier:"):
            n = int(scheme.split(":", 1)[1])
            out = FourierDensity.from_distribution(dist, n, args.transformation)
        else:
            raise UsageError("unknown approximation scheme %r" % scheme)
    except ValueError as exc:
        raise UsageError("scheme inadmissible: %s" % exc)
    _write_output(serialization.dumps(out), args.out)
    return 0


# ----------------------------------------------------------- filter-run

_CIRCLE_FILTERS = {"wn", "vm", "fourier", "grid", "particle", "pwc"}
_TORUS_FILTERS = {"twn", "particle"}
_SPHERE_FILTERS = {"vmf"}


def _build_circle_filter(spec, scenario, rng):
    name = spec["name"]
    if name == "wn":
        flt = WNFilter()
        flt.set_state(scenario["initial"])
        return flt
    if name == "vm":
        flt = VMFilter()
        init = scenario["initial"]
        from .circular import VonMises, WrappedNormal, fit_vm_from_moment

        if isinstance(init, VonMises):
            flt.set_state(init)
        else:
            flt.set_state(fit_vm_from_moment(init.trigonometric_moment(1)))
        return flt
    if name == "fourier":
        flt = FourierFilter(spec.get("coefficients", 101),
                            spec.get("transformation", "sqrt"))
        flt.set_state(scenario["initial"])
        return flt
    if name == "grid":
        flt = GridFilter(spec.get("grid_size", 100))
        flt.set_state(scenario["initial"])
        return flt
    if name == "particle":
        flt = CircularParticleFilter(spec.get("particle_count", 1000))
        flt.set_state(scenario["initial"], rng)
        return flt
    if name == "pwc":
        flt = PWCFilter(spec.get("interval_count", 100))
        flt.set_state(scenario["initial"])
        return flt
    raise UsageError("unknown circle filter %r" % name)


def _estimate_angle(flt):
    est = flt.get_estimate()
    if hasattr(est, "circular_mean"):
        mean = est.circular_mean()
        return float(mean) if np.ndim(mean) == 0 else np.asarray(mean)
    raise UsageError("filter estimate does not expose a circular mean")


def _parse_scenario(config):
    try:
        manifold = config["manifold"]
        scenario = {
            "manifold": manifold,
            "initial": serialization.from_json_dict(config["initial"]),
            "steps": int(config["steps"]),
            "runs": int(config.get("runs", 1)),
            "seed": int(config.get("seed", 0)),
            "filters": config["filters"],
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError("invalid scenario config: %s" % exc)
    if scenario["steps"] < 1 or scenario["runs"] < 1:
        raise UsageError("scenario needs steps >= 1 and runs >= 1")

    system = config.get("system", {"type": "identity"})
    if system.get("type") == "identity":
        scenario["system_fn"] = None
    elif system.get("type") == "nonlinear":
        if manifold != "circle":
            raise UsageError("nonlinear system models are supported on the circle")
        fn = compile_expression(system["function"], ("x",))
        scenario["system_fn"] = lambda x: wrap(fn(x))
    else:
        raise UsageError("system type must be 'identity' or 'nonlinear'")
    scenario["system_noise"] = serialization.from_json_dict(system["noise"])

    meas = config.get("measurement", {"type": "identity"})
    scenario["measurement_type"] = meas.get("type", "identity")
    if scenario["measurement_type"] == "identity":
        scenario["measurement_noise"] = serialization.from_json_dict(meas["noise"])
    elif scenario["measurement_type"] == "likelihood":
        if manifold != "circle":
            raise UsageError("likelihood measurements are supported on the circle")
        h = compile_expression(meas["h"], ("x",))
        scenario["measurement_fn"] = h
        scenario["measurement_variance"] = float(meas["noise_variance"])
        scenario["likelihood"] = additive_gaussian_likelihood(
            h, scenario["measurement_variance"])
    else:
        raise UsageError("measurement type must be 'identity' or 'likelihood'")

    fixed = config.get("measurements")
    if fixed is not None:
        fixed = [float(v) for v in fixed]
        if len(fixed) != scenario["steps"]:
            raise UsageError("fixed measurement list must have one entry per step")
    scenario["fixed_measurements"] = fixed

    names = {f["name"] for f in scenario["filters"]}
    allowed = {"circle": _CIRCLE_FILTERS, "torus": _TORUS_FILTERS,
               "sphere": _SPHERE_FILTERS}.get(manifold)
    if allowed is None:
        raise UsageError("unknown manifold %r" % manifold)
    if not names <= allowed:
        raise UsageError("filters %s not available on manifold %r"
                         % (sorted(names - allowed), manifold))

    if manifold == "circle":
        scenario["transitions"] = _precompute_transitions(scenario)
    return scenario


def _precompute_transitions(scenario):
    """Per-filter transition structures, built once and shared read-only."""
    from .circular import CustomCircular
    from .hypertorus import CustomHypertoroidal
    from .filters import grid_transition_matrix, pwc_transition_matrix_nonlinear

    noise = scenario["system_noise"]
    sys_fn = scenario["system_fn"]
    out = []
    for spec in scenario["filters"]:
        name = spec["name"]
        entry = None
        if name == "grid" and sys_fn is not None:
            points = np.arange(spec.get("grid_size", 100)) * TWO_PI / spec.get(
                "grid_size", 100)
            entry = grid_transition_matrix(noise, points, sys_fn)
        elif name == "pwc":
            L = spec.get("interval_count", 100)
            if sys_fn is None:
                entry = pwc_transition_matrix(noise, L)
            else:
                entry = pwc_transition_matrix_nonlinear(noise, L, sys_fn)
        elif name == "fourier" and sys_fn is not None:
            entry = CustomHypertoroidal(
                lambda pts: noise.pdf(wrap(pts[..., 0] - sys_fn(pts[..., 1]))),
                2, prenormalized=True)
        out.append(entry)
    return out


def _run_circle_once(scenario, run_index):
    seed = scenario["seed"] + run_index
    truth_rng = np.random.default_rng(seed)
    sys_fn = scenario["system_fn"]
    noise = scenario["system_noise"]
    fixed = scenario["fixed_measurements"]

    truths, measurements = [], []
    if fixed is None:
        state = float(scenario["initial"].sample(1, truth_rng)[0])
        for _ in range(scenario["steps"]):
            moved = sys_fn(state) if sys_fn is not None else state
            state = wrap(moved + float(noise.sample(1, truth_rng)[0]))
            truths.append(state)
            if scenario["measurement_type"] == "identity":
                z = wrap(state
                         + float(scenario["measurement_noise"].sample(1, truth_rng)[0]))
            else:
                gauss = truth_rng.normal(0.0, np.sqrt(scenario["measurement_variance"]))
                z = float(scenario["measurement_fn"](state) + gauss)
            measurements.append(z)
    else:
        truths = [None] * scenario["steps"]
        measurements = list(fixed)

    rows = []
    estimates = {}
    runtimes = {}
    for idx, spec in enumerate(scenario["filters"]):
        flt_rng = np.random.default_rng(seed + 10_000_019)
        flt = _build_circle_filter(spec, scenario, flt_rng)
        transition = scenario["transitions"][idx]
        start = time.time()
        for step, (truth, z) in enumerate(zip(truths, measurements)):
            _circle_predict(flt, spec, scenario, transition, flt_rng)
            _circle_update(flt, spec, scenario, z, flt_rng)
            err = (float(angular_distance(_estimate_angle(flt), truth))
                   if truth is not None else float("nan"))
            rows.append({"run": run_index, "step": step, "filter": spec["name"],
                         "error": err})
        runtimes[spec["name"]] = time.time() - start
        estimates[spec["name"]] = serialization.to_json_dict(flt.get_estimate())
    return rows, estimates, runtimes


def _circle_predict(flt, spec, scenario, transition, rng):
    noise = scenario["system_noise"]
    sys_fn = scenario["system_fn"]
    name = spec["name"]
    if name == "wn":
        if sys_fn is None:
            flt.predict_identity(_family_noise(flt, noise))
        else:
            flt.predict_nonlinear(sys_fn, noise)
    elif name == "vm":
        if sys_fn is not None:
            raise UsageError("vm filter supports identity system models only")
        flt.predict_identity(_family_noise(flt, noise))
    elif name == "fourier":
        if sys_fn is None:
            flt.predict_identity(noise)
        else:
            flt.predict_transition(transition)
    elif name == "grid":
        if sys_fn is None:
            flt.predict_identity(noise)
        else:
            flt.predict_transition(transition)
    elif name == "particle":
        flt.predict_nonlinear(sys_fn or (lambda x: x), noise, rng)
    elif name == "pwc":
        flt.predict(transition)


def _family_noise(flt, noise):
    from .circular import VonMises, WrappedNormal, fit_vm_from_moment

    if isinstance(flt, VMFilter) and isinstance(noise, WrappedNormal):
        return fit_vm_from_moment(noise.trigonometric_moment(1))
    return noise


def _circle_update(flt, spec, scenario, z, rng):
    name = spec["name"]
    if scenario["measurement_type"] == "identity":
        noise = scenario["measurement_noise"]
        lik = lambda zz, x: noise.pdf(wrap(zz - x))
        if name in ("wn", "vm"):
            flt.update_identity(z, _family_noise(flt, noise))
        elif name in ("grid", "pwc", "fourier"):
            flt.update_likelihood(lik, z)
        elif name == "particle":
            flt.update_likelihood(lik, z, rng)
    else:
        lik = scenario["likelihood"]
        if name in ("wn", "vm"):
            flt.update_nonlinear_progressive(lik, z)
        elif name in ("grid", "pwc", "fourier"):
            flt.update_likelihood(lik, z)
        elif name == "particle":
            flt.update_likelihood(lik, z, rng)


def _run_torus_once(scenario, run_index):
    seed = scenario["seed"] + run_index
    truth_rng = np.random.default_rng(seed)
    noise = scenario["system_noise"]
    meas_noise = scenario["measurement_noise"]
    state = scenario["initial"].sample(1, truth_rng)[0]

    truths, measurements = [], []
    for _ in range(scenario["steps"]):
        state = wrap(state + noise.sample(1, truth_rng)[0])
        truths.append(state)
        measurements.append(wrap(state + meas_noise.sample(1, truth_rng)[0]))

    rows = []
    estimates = {}
    runtimes = {}
    for spec in scenario["filters"]:
        flt_rng = np.random.default_rng(seed + 10_000_019)
        name = spec["name"]
        start = time.time()
        if name == "twn":
            flt = ToroidalWNFilter()
            flt.set_state(scenario["initial"])
            for step, (truth, z) in enumerate(zip(truths, measurements)):
                flt.predict_identity(noise)
                flt.update_identity(z, meas_noise)
                err = float(np.mean(angular_distance(flt.get_estimate().mu, truth)))
                rows.append({"run": run_index, "step": step, "filter": name,
                             "error": err})
        else:
            flt = HypertoroidalParticleFilter(spec.get("particle_count", 1000), 2)
            flt.set_state(scenario["initial"], flt_rng)
            for step, (truth, z) in enumerate(zip(truths, measurements)):
                flt.predict_identity(noise, flt_rng)
                flt.update_likelihood(
                    lambda zz, x: meas_noise.pdf(wrap(zz - x)), z, flt_rng)
                est = flt.get_estimate().circular_mean()
                err = float(np.mean(angular_distance(est, truth)))
                rows.append({"run": run_index, "step": step, "filter": name,
                             "error": err})
        runtimes[name] = time.time() - start
        estimates[name] = serialization.to_json_dict(flt.get_estimate())
    return rows, estimates, runtimes


def _run_sphere_once(scenario, run_index):
    seed = scenario["seed"] + run_index
    truth_rng = np.random.default_rng(seed)
    noise = scenario["system_noise"]
    meas_noise = scenario["measurement_noise"]
    state = scenario["initial"].sample(1, truth_rng)[0]

    truths, measurements = [], []
    for _ in range(scenario["steps"]):
        state = VonMisesFisher(state, noise.kappa).sample(1, truth_rng)[0]
        truths.append(state)
        measurements.append(
            VonMisesFisher(state, meas_noise.kappa).sample(1, truth_rng)[0])

    rows = []
    estimates = {}
    runtimes = {}
    for spec in scenario["filters"]:
        flt = VMFFilter()
        flt.set_state(scenario["initial"])
        start = time.time()
        for step, (truth, z) in enumerate(zip(truths, measurements)):
            flt.predict_identity(noise)
            flt.update_identity(z, meas_noise)
            dot = np.clip(flt.get_estimate().mu @ truth, -1.0, 1.0)
            rows.append({"run": run_index, "step": step, "filter": spec["name"],
                         "error": float(np.arccos(dot))})
        runtimes[spec["name"]] = time.time() - start
        estimates[spec["name"]] = serialization.to_json_dict(flt.get_estimate())
    return rows, estimates, runtimes


def cmd_filter_run(args):
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError("cannot read config: %s" % exc)
    scenario = _parse_scenario(config)
    config_hash = hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode()).hexdigest()

    runner = {"circle": _run_circle_once, "torus": _run_torus_once,
              "sphere": _run_sphere_once}[scenario["manifold"]]
    max_workers = int(os.environ.get("DIRKIT_THREADS", "1"))
    runs = range(scenario["runs"])
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda r: runner(scenario, r), runs))
    else:
        results = [runner(scenario, r) for r in runs]
    rows = [row for batch, _, _ in results for row in batch]
    estimates = [est for _, est, _ in results]

    summary = {}
    total_runtimes = {}
    for spec in scenario["filters"]:
        name = spec["name"]
        finals = [r["error"] for r in rows
                  if r["filter"] == name and r["step"] == scenario["steps"] - 1]
        summary[name] = {
            "mean_final_error": float(np.mean(finals)),
            "median_final_error": float(np.median(finals)),
        }
        total_runtimes[name] = float(sum(rt[name] for _, _, rt in results))
    report = {"config_hash": config_hash, "seed": scenario["seed"],
              "runs": scenario["runs"], "steps": scenario["steps"],
              "summary": summary, "runtimes_s": total_runtimes,
              "final_estimates": estimates}

    if args.format == "csv":
        text = _csv(["run", "step", "filter", "error"],
                    [(r["run"], r["step"], r["filter"], r["error"]) for r in rows])
        _write_output(text, args.out)
        meta_path = (args.out + ".json") if args.out and args.out != "-" else None
        _write_output(json.dumps(report, indent=2, sort_keys=True), meta_path)
    else:
        report["rows"] = rows
        _write_output(json.dumps(report, indent=2, sort_keys=True), args.out)
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    return 0 if run_selftest() else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dirkit",
        description="Directional distributions and recursive filters toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", help="evaluate a density on a uniform grid (CSV)")
    p.add_argument("dist", help="distribution JSON (inline or file path)")
    p.add_argument("--points", type=int, default=360)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_pdf)

    p = sub.add_parser("moment", help="trigonometric moment as JSON {re, im}")
    p.add_argument("dist")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--numerical", action="store_true",
                   help="force the quadrature path")
    p.add_argument("--tol", type=float, default=None,
                   help="quadrature tolerance for --numerical")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_moment)

    p = sub.add_parser("fit", help="fit a family to samples from a CSV file")
    p.add_argument("family", choices=["wn", "vm", "vmf", "bingham"])
    p.add_argument("samples")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("sample", help="draw seeded samples (CSV or JSON)")
    p.add_argument("dist")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("approx", help="deterministic approximation of a density")
    p.add_argument("dist")
    p.add_argument("scheme", help="dirac3 | dirac5 | fourier:N")
    p.add_argument("--transformation", choices=["identity", "sqrt"], default="sqrt")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_approx)

    p = sub.add_parser("filter-run", help="run a filtering scenario from a config file")
    p.add_argument("config")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_filter_run)

    p = sub.add_parser("selftest", help="run the built-in regression checks")
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except (ValueError, TypeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
