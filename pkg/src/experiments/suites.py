"""Verification suites

A suite is a list of steps, a step returns named checks. Each check records
the measured value, the expected value, the tolerance, the margin and the
verdict. A step that raises one of the lab's numerical errors becomes a
single failed check, the remaining steps still run.
"""
import logging
from dataclasses import replace
import numpy as np
from scipy import special
from src.errors import (PropertyViolation, FitError, AccuracyError,
                        DomainError, SingularityError)
from src.params import (SUITES, HalfSpacePoint, SpaceTimePoint, ShearParams,
                        GFunArgs)
from src import kernels
from src import quad
from src import force
from src import greens
from src import fields
from src import regions
from src import shearflow
from src import analysis
from src.utils_dir import experiments
from src.utils_dir import pytorch as torch_utils

LOGGER = logging.getLogger(__name__)

CHECK_ERRORS = (PropertyViolation, FitError, AccuracyError, DomainError,
                SingularityError)
DEFAULT_LAGS = (1e-4, 1e-2, 9)


def _check(name, passed, value=None, expected=None, tolerance=None,
           margin=None, **extra):
    entry = {
        "name": name,
        "passed": bool(passed),
        "value": value,
        "expected": expected,
        "tolerance": tolerance,
        "margin": margin
    }
    entry.update(extra)
    return entry


def _within(name, value, expected, tolerance, **extra):
    margin = tolerance - abs(value - expected)
    return _check(name, margin >= 0.0, value, expected, tolerance, margin,
                  **extra)


def _at_least(name, value, minimum, **extra):
    return _check(name, value >= minimum, value, minimum, None,
                  value - minimum, **extra)


def _at_most(name, value, maximum, **extra):
    return _check(name, value <= maximum, value, maximum, None,
                  maximum - value, **extra)


def _info(name, value, **extra):
    """Reported quantity without a verdict"""
    return _check(name, True, value, informational=True, **extra)


class SuiteRunner():
    """Runs the suites of one configuration and collects their checks"""

    def __init__(self, config):
        self.config = config
        self.params = config.params
        self.profiles = config.profiles
        self.spec = config.quad
        self.workers = config.workers
        self._log = logging.getLogger(self.__class__.__name__)

    def grid(self, suite, key, default):
        """Per suite override of a sample grid or fit window"""
        return self.config.grids.get(suite, {}).get(key, default)

    def lags(self, suite):
        low, high, count = self.grid(suite, "lags", DEFAULT_LAGS)
        return np.geomspace(low, high, int(count))

    def tangential(self, values):
        """Tangential coordinates padded with zeros to n - 1 components"""
        values = [float(value) for value in values]
        return tuple(values + [0.0] * (self.params.n - 1 - len(values)))

    def emit(self, suite, name, samples):
        path = self.config.output_dir / suite / "{}.csv".format(name)
        experiments.emit_series(path, samples, self.params.n)
        return "{}/{}.csv".format(suite, name)

    def batch(self, points, name, component, params=None):
        return fields.evaluate_batch(points, name, component, params
                                     or self.params, self.spec,
                                     self.profiles, self.workers)

    def attempt(self, name, step):
        try:
            return step()
        except CHECK_ERRORS as err:
            self._log.warning("Step '{}' failed: {}".format(name, err))
            extra = dict()
            if isinstance(err, PropertyViolation) and err.report:
                extra["report"] = err.report
            if isinstance(err, AccuracyError):
                extra["estimate"] = err.estimate
                extra["error_estimate"] = err.error_estimate
            return [
                _check(name,
                       False,
                       error="{}: {}".format(err.__class__.__name__, err),
                       **extra)
            ]

    def run_suite(self, suite):
        self._log.info("Suite {}".format(suite))
        checks = []
        for name, step in STEPS[suite](self):
            checks.extend(self.attempt(name, step))
        failed = [check["name"] for check in checks if not check["passed"]]
        self._log.info("Suite {}: {} of {} checks passed".format(
            suite, len(checks) - len(failed), len(checks)))
        for name in failed:
            self._log.warning("  failed: {}".format(name))
        return {"passed": not failed, "checks": checks}

    def run(self, suite=None):
        """Report of one suite, or of every suite in order for "all" """
        suite = suite or self.config.suite
        names = [name for name in SUITES if name != "all"
                 ] if suite == "all" else [suite]
        results = {name: self.run_suite(name) for name in names}
        return {
            "suites": results,
            "passed": all(result["passed"] for result in results.values()),
            "config": self.config.info()
        }


def _kernels(runner):

    def heat_mass():
        checks = []
        for dim in range(1, 5):
            sphere = 2.0 * np.pi**(0.5 * dim) / special.gamma(0.5 * dim)
            for t in (1e-2, 1.0):

                def radial(r, dim=dim, t=t):
                    point = np.zeros(dim)
                    point[0] = r
                    return sphere * r**(dim - 1) * kernels.heat_kernel(
                        point, t)

                mass = quad.adaptive_quad(radial, 0.0, 40.0 * np.sqrt(t),
                                          runner.spec).value
                checks.append(
                    _within("heat mass d={} t={}".format(dim, t), mass, 1.0,
                            1e-6))
        return checks

    def newton_flux():
        directions, weights = quad.sphere_directions(3, 32)
        gradient = np.stack([
            kernels.newton_deriv(directions, kernels.derivative_counts(3, k))
            for k in (1, 2, 3)
        ],
                            axis=-1)
        flux = float(np.sum(weights * np.sum(gradient * directions, axis=-1)))
        return [_within("Newton flux through the unit sphere", flux, 1.0, 1e-4)]

    def harmonicity():
        checks = []
        for dim in (3, 4):
            points = torch_utils.uniform_box(100, np.full(dim, 0.5),
                                             np.full(dim, 3.0), runner.config.seed)
            laplacian = sum(
                kernels.newton_deriv(points, kernels.derivative_counts(
                    dim, k, k)) for k in range(1, dim + 1))
            scale = sum(
                np.abs(kernels.newton_deriv(
                    points, kernels.derivative_counts(dim, k, k)))
                for k in range(1, dim + 1))
            checks.append(
                _at_most("Newton harmonicity d={}".format(dim),
                         float(np.max(np.abs(laplacian) / scale)), 1e-6))
        return checks

    def hermite():
        checks = []
        step = 1e-4
        x_values = np.linspace(-1.5, 1.5, 13)
        t = 0.3
        for order in range(1, 5):
            exact = kernels.heat_kernel_normal_deriv(x_values, t, order)
            lower = kernels.heat_kernel_normal_deriv(x_values - step, t,
                                                     order - 1)
            upper = kernels.heat_kernel_normal_deriv(x_values + step, t,
                                                     order - 1)
            differences = (upper - lower) / (2.0 * step)
            relative = np.max(np.abs(differences - exact)) / np.max(
                np.abs(exact))
            checks.append(
                _at_most("Hermite P_{} against differences".format(order),
                         float(relative), 1e-5))
        return checks

    def closed_forms():
        checks = []
        for name, integral, exact in quad.closed_form_library():
            first, second = integral(), integral()
            error = abs(first.value - exact)
            allowed = 3.0 * first.error_estimate + quad.ROUNDOFF * max(
                1.0, abs(exact))
            checks.append(
                _at_most("closed form '{}'".format(name),
                         error,
                         allowed,
                         estimate=first.error_estimate))
            checks.append(
                _check("closed form '{}' rerun".format(name),
                       first.value == second.value and
                       first.error_estimate == second.error_estimate))
        return checks

    return [("heat mass", heat_mass), ("Newton flux", newton_flux),
            ("harmonicity", harmonicity), ("Hermite", hermite),
            ("closed forms", closed_forms)]


def _force(runner):
    params, profiles = runner.params, runner.profiles

    def divergence():
        step = 1e-5
        dim = params.n
        centre = profiles.center_array(dim - 1)
        points = torch_utils.uniform_box(
            runner.grid("force", "samples", 200),
            np.concatenate([centre - 0.6, [0.05]]),
            np.concatenate([centre + 0.6, [1.8]]), runner.config.seed)
        residuals, scales = [], []
        for point in points:
            div, scale = 0.0, 0.0
            for k in range(dim):
                shift = np.eye(dim)[k] * step
                upper = force.force_at(HalfSpacePoint.from_array(point + shift),
                                       0.75, params, profiles)[k]
                lower = force.force_at(HalfSpacePoint.from_array(point - shift),
                                       0.75, params, profiles)[k]
                term = (upper - lower) / (2.0 * step)
                div += term
                scale = max(scale, abs(term))
            residuals.append(abs(div))
            scales.append(scale)
        return [
            _at_most("force divergence by differences",
                     float(np.max(residuals) / max(np.max(scales), 1e-300)),
                     1e-5)
        ]

    def causality():
        y = HalfSpacePoint(runner.tangential([0.1, 0.2]), 0.3)
        values = [
            float(np.max(np.abs(force.force_at(y, t, params, profiles))))
            for t in (0.0, 0.3, 0.5)
        ]
        return [_check("force vanishes for t <= 1/2", max(values) == 0.0,
                       max(values), 0.0)]

    def norms():
        deltas = np.geomspace(1e-1, 1e-12, 12)
        checks = []
        for q1, p1, bounded in ((1.8, 2.0, False), (1.0, 2.0, True)):
            rows = force.mixed_norm(params, profiles, q1, p1, deltas,
                                    runner.spec)
            growth = rows[-1]["norm"] / rows[-2]["norm"]
            expected = (1.0 / q1 > params.alpha and 1.0 / p1 > params.beta)
            name = "mixed norm q1={} p1={} {}".format(
                q1, p1, "bounded" if expected else "unbounded")
            if expected:
                checks.append(_at_most(name, growth, 1.05, rows=rows))
            else:
                checks.append(_at_least(name, growth, 1.5, rows=rows))
        return checks

    return [("divergence", divergence), ("causality", causality),
            ("mixed norms", norms)]


def _greens(runner):
    spec = runner.spec

    def point(tangential, normal):
        return HalfSpacePoint(runner.tangential(tangential), normal)

    xs = [point([1.0, 0.5], 0.2), point([2.0, -1.0], 0.05),
          point([0.3, 0.2], 0.5)]
    ys = [point([0.0, 0.0], 0.3), point([0.5, 0.1], 0.1)]

    def bound():
        grid = [(x, y, t, i, j, 0, 0, 0) for x in xs for y in ys
                for t in runner.grid("greens-bound", "times", [0.05, 0.5])
                for i, j in ((1, 2), (2, 1), (3, 2))]
        grid += [(xs[0], ys[0], 0.1, 1, 1, k, l_prime, l_n)
                 for k, l_prime, l_n in ((1, 0, 0), (0, 1, 0), (0, 0, 1),
                                         (0, 1, 1))]
        report = greens.verify_L_bound(grid, spec, runner.workers)
        return [
            _check("L bound ratios finite",
                   report["finite"],
                   report["max_ratio"],
                   argmax=report["argmax"],
                   skipped=report["skipped"])
        ]

    def no_slip():
        report = greens.verify_no_slip(runner.params.n,
                                       samples=50,
                                       seed=runner.config.seed,
                                       spec=spec)
        return [
            _at_most("Green tensor on the boundary",
                     report["max_abs"],
                     1e-12,
                     samples=report["samples"],
                     argmax=report["argmax"])
        ]

    def oracle():
        x, y, t = xs[0], ys[0], 0.05
        exact = greens.L_tensor(x, y, t, 1, 1, spec)
        sampled = greens.L_tensor_mc(x, y, t, 1, 1, spec.mc_samples,
                                     runner.config.seed)
        return [
            _at_most("L_11 against Monte Carlo",
                     abs(exact.value - sampled.value),
                     4.0 * sampled.error_estimate + exact.error_estimate,
                     quadrature=exact.value,
                     monte_carlo=sampled.value)
        ]

    return [("bound", bound), ("no slip", no_slip), ("oracle", oracle)]


def _fit_check(name, s, values, expected, tolerance, **extra):
    fit = analysis.fit_power_law(s, np.abs(values))
    return _within(name, fit.exponent, expected, tolerance, fit=fit.info(),
                   **extra)


def _rates_normal_deriv(runner):
    suite = "rates-normal-deriv"
    params = runner.params
    lags = runner.lags(suite)
    a11 = runner.tangential(runner.grid(suite, "x_a11", [5.0, 5.0]))
    a12 = runner.tangential(runner.grid(suite, "x_a12", [5.0, -5.0]))
    expected = 1.0 - 0.5 * params.beta - params.alpha

    def boundary_points(tangential, normals=None):
        normals = np.zeros(len(lags)) if normals is None else normals
        return [
            SpaceTimePoint.from_coords(tangential, x_n, 0.5 + lag)
            for x_n, lag in zip(normals, lags)
        ]

    def bad_term():
        samples = runner.batch(boundary_points(a11), "Bw", 1)
        values = np.array([sample.value for sample in samples])
        return [
            _fit_check("B^w_1 exponent on the boundary",
                       lags,
                       values,
                       expected,
                       0.05,
                       series=runner.emit(suite, "Bw_A11", samples)),
            _check("B^w_1 positive on A_11", np.all(values > 0.0),
                   float(values.min()), "> 0")
        ]

    def sign_a12():
        samples = runner.batch(boundary_points(a12)[:3], "Bw", 1)
        values = np.array([sample.value for sample in samples])
        runner.emit(suite, "Bw_A12", samples)
        return [
            _check("B^w_1 negative on A_12", np.all(values < 0.0),
                   float(values.max()), "< 0")
        ]

    def dominance():
        points = boundary_points(a11, np.sqrt(lags))
        bad = runner.batch(points, "Bw", 1)
        normal = runner.batch(points, "dnV", 1)
        tangential = runner.batch(points, "d2WG", 1)
        ratios = np.array([
            abs(first.value + second.value) / abs(third.value)
            for first, second, third in zip(normal, tangential, bad)
        ])
        fit = analysis.fit_power_law(lags, ratios)
        runner.emit(suite, "dominance_Bw", bad)
        return [
            _at_least("subleading to B^w ratio exponent on x_n^2 = t - 1/2",
                      fit.exponent, 0.4, fit=fit.info())
        ]

    def normal_deriv():
        samples = runner.batch(boundary_points(a11), "dnw", 1)
        values = np.array([sample.value for sample in samples])
        return [
            _fit_check("D_n w_1 exponent on the boundary",
                       lags,
                       values,
                       expected,
                       0.05,
                       series=runner.emit(suite, "dnw_A11", samples))
        ]

    def decomposition():
        x = SpaceTimePoint.from_coords(a11, 0.05, 0.5 + 1e-3)
        direct = fields.normal_deriv_W_direct(x, 1, params, runner.spec,
                                              runner.profiles)
        tangential = fields.velocity_WG(x, 1, params, runner.spec,
                                        runner.profiles, True)
        bad = fields.bad_term_Bw(x, 1, params, runner.spec, runner.profiles)
        allowed = 1e-3 * abs(direct.value) + direct.error_estimate + \
            tangential.error_estimate + bad.error_estimate
        return [
            _at_most("D_n W_1 = D_2 W^G_1 + B^w_1",
                     abs(direct.value - tangential.value - bad.value),
                     allowed)
        ]

    def lower_scan():
        report = analysis.normal_deriv_lower_scan(
            a11, 1, 1, runner.grid(suite, "ratios", [0.25, 0.5, 1.0, 2.0]),
            params, runner.spec, profiles=runner.profiles)
        return [_info("c_1 of the lower bound of D_n B^w_1", report["c_l"],
                      rows=report["rows"])]

    return [("bad term", bad_term), ("sign on A_12", sign_a12),
            ("dominance", dominance), ("normal derivative", normal_deriv),
            ("decomposition", decomposition), ("lower scan", lower_scan)]


def _rates_pressure(runner):
    suite = "rates-pressure"
    params = runner.params
    lags = runner.lags(suite)
    tangential = runner.tangential(runner.grid(suite, "x", [0.0, 5.0]))
    x_n = runner.grid(suite, "x_n", 0.5)
    expected = 0.5 - 0.5 * params.beta - params.alpha
    points = [
        SpaceTimePoint.from_coords(tangential, x_n, 0.5 + lag) for lag in lags
    ]
    state = dict()

    def bad():
        samples = runner.batch(points, "PiB", None)
        state["PiB"] = np.array([sample.value for sample in samples])
        return [
            _fit_check("Pi^B exponent",
                       lags,
                       state["PiB"],
                       expected,
                       0.05,
                       series=runner.emit(suite, "PiB", samples))
        ]

    def good():
        if "PiB" not in state:
            raise DomainError("Pi^B series missing, its step failed")
        samples = runner.batch(points, "PiG", None)
        values = np.array([sample.value for sample in samples])
        fit_good = analysis.fit_power_law(lags, np.abs(values))
        fit_bad = analysis.fit_power_law(lags, np.abs(state["PiB"]))
        checks = [
            _within("Pi^G exponent above Pi^B",
                    fit_good.exponent - fit_bad.exponent,
                    0.5,
                    0.1,
                    fit=fit_good.info(),
                    series=runner.emit(suite, "PiG", samples))
        ]
        ratio = np.abs(state["PiB"]) / np.abs(values)
        decades = [(k, k + 4) for k in range(0, len(lags) - 4, 4)]
        growth = min(ratio[k] / ratio[m] for k, m in decades) if decades \
            and np.allclose(lags[4] / lags[0], 10.0) else None
        if growth is not None:
            checks.append(
                _at_least("|Pi^B| / |Pi^G| growth per decade", float(growth),
                          3.0))
        return checks

    def sign():
        count = runner.grid(suite, "sign_samples", 8)
        coords = torch_utils.uniform_box(count, [-5.0, 2.0, 0.1],
                                         [5.0, 8.0, 1.0], runner.config.seed)
        mismatches, rows = 0, []
        for x1, x2, normal in coords:
            x = SpaceTimePoint.from_coords(runner.tangential([x1, x2]), normal,
                                           0.5 + 1e-3)
            value = fields.pressure_PiB(x, params, runner.spec,
                                        runner.profiles).value
            mirrored = fields.pressure_PiB(
                SpaceTimePoint.from_coords(runner.tangential([x1, -x2]),
                                           normal, 0.5 + 1e-3), params,
                runner.spec, runner.profiles)
            psi = kernels.psi_profile(x.point, params, runner.spec,
                                      runner.profiles)
            mismatches += int(np.sign(value) != -np.sign(psi))
            rows.append({
                "x": [float(x1), float(x2), float(normal)],
                "PiB": value,
                "psi": float(psi),
                "odd_gap": abs(value + mirrored.value),
                "allowed": 2.0 * mirrored.error_estimate + 1e-6 * abs(value)
            })
        odd = all(row["odd_gap"] <= row["allowed"] for row in rows)
        return [
            _check("sign of Pi^B equals -sgn(psi)", mismatches == 0,
                   mismatches, 0, rows=rows),
            _check("Pi^B odd in x_2", odd)
        ]

    return [("bad pressure", bad), ("good pressure", good), ("sign", sign)]


def _holder(runner):
    suite = "holder"
    params = runner.params
    tangential = runner.tangential(runner.grid(suite, "x", [5.0, 5.0]))

    def spatial():
        checks = []
        for alpha, beta in runner.grid(suite, "params",
                                       [[0.9, 0.4], [0.7, 0.4], [0.8, 0.3]]):
            variant = replace(params, alpha=alpha, beta=beta)
            fit = analysis.holder_exponent(tangential,
                                           1,
                                           variant,
                                           runner.spec,
                                           profiles=runner.profiles,
                                           workers=runner.workers)
            checks.append(
                _within("Hoelder exponent alpha={} beta={}".format(
                    alpha, beta),
                        fit.exponent,
                        variant.holder_exponent,
                        0.1,
                        fit=fit.info()))
        return checks

    def temporal():
        x = HalfSpacePoint(tangential, runner.grid(suite, "x_n", 0.1))
        fit = analysis.temporal_holder(x,
                                       1,
                                       params,
                                       runner.spec,
                                       profiles=runner.profiles,
                                       workers=runner.workers)
        return [
            _within("temporal exponent",
                    fit.exponent,
                    1.5 - 0.5 * params.beta - params.alpha,
                    0.05,
                    fit=fit.info())
        ]

    def divergence():
        report = fields.weak_divergence(HalfSpacePoint(tangential, 0.5),
                                        0.2,
                                        0.5 + 1e-2,
                                        params,
                                        runner.spec,
                                        runner.profiles,
                                        workers=runner.workers)
        return [
            _at_most("weak divergence", abs(report["residual"]),
                     1e-3 * report["scale"], scale=report["scale"])
        ]

    return [("spatial", spatial), ("temporal", temporal),
            ("weak divergence", divergence)]


def _lemma_calg(runner):
    suite = "lemma-calg"
    params = runner.params

    def time_exponents():
        checks = []
        for alpha, beta, gamma in runner.grid(
                suite, "triples",
            [[0.9, 0.4, -0.5], [0.5, 0.5, 0.0], [0.3, 0.8, -1.0]]):
            variant = replace(params, alpha=alpha, beta=beta)
            fit = analysis.calG_time_fit(variant, gamma, spec=runner.spec)
            checks.append(
                _within("calG exponent alpha={} beta={} gamma={}".format(
                    alpha, beta, gamma),
                        fit.exponent,
                        analysis.calG_exponent(variant, gamma),
                        0.03,
                        fit=fit.info()))
        return checks

    def normal_exponent():
        variant = replace(params, beta=0.4)
        gamma = -1.5
        fit = analysis.calG_normal_fit(variant, gamma, spec=runner.spec)
        return [
            _within("calG second branch x_n exponent", fit.exponent,
                    3.0 - variant.beta + 2.0 * gamma, 0.05, fit=fit.info())
        ]

    def bounds():
        grid = [(x_n, 0.5 + lag) for x_n in (0.0, 0.01, 0.05, 0.1)
                for lag in np.geomspace(1e-4, 1e-1, 4)]
        report = analysis.verify_calG_bounds(grid, params, -0.5, runner.spec,
                                             strict=False)
        return [
            _check("calG between its Gaussian envelopes", report["passed"],
                   [report["c_lower"], report["c_upper"]])
        ]

    def closed_form():
        checks = []
        for lag in (1e-3, 1e-2):
            value = analysis.calG(GFunArgs(0.0, 0.5 + lag, -0.5), params,
                                  runner.spec)
            exact = analysis.calG_boundary_closed_form(0.5 + lag, params,
                                                       -0.5)
            checks.append(
                _at_most("calG boundary closed form lag={}".format(lag),
                         abs(value / exact - 1.0), 1e-4))
        return checks

    return [("time exponents", time_exponents),
            ("normal exponent", normal_exponent), ("bounds", bounds),
            ("closed form", closed_form)]


def _lemma_jkl(runner):
    suite = "lemma-jkl"
    spec = runner.spec.tightened(100.0)
    t_list = np.geomspace(1e-3, 1e-1, 5)
    bases = runner.grid(suite, "points",
                        [[1.0, 0.0, 0.5], [2.0, 1.0, 0.1], [0.0, 3.0, 1.0],
                         [1.5, -1.5, 0.05], [5.0, 5.0, 0.2]])
    orders = [(k, l) for k in range(3) for l in range(3) if k + l <= 2]

    def step(base):

        def run():
            x = HalfSpacePoint(runner.tangential(base[:-1]), base[-1])
            checks = []
            for k, l in orders:
                report = analysis.verify_Jkl(x, t_list, k, l, spec,
                                             strict=False)
                checks.append(
                    _at_least("J_{}{} at {}".format(k, l, base),
                              report["fit"]["exponent"],
                              0.45,
                              constant=report["constant"]))
            return checks

        return run

    return [("J at {}".format(base), step(base)) for base in bases]


def _shear(runner):
    suite = "shear"
    spec = runner.spec

    def rates():
        checks = []
        for alpha in runner.grid(suite, "alphas", [0.1, 0.25, 0.4]):
            sp = ShearParams(alpha)
            fit = shearflow.shear_normal_deriv_rate(sp, spec,
                                                    variant="duhamel")
            checks.append(
                _within("shear D_x3 w exponent alpha={}".format(alpha),
                        fit.exponent,
                        2.0 * alpha - 1.0,
                        0.05,
                        fit=fit.info()))
        return checks

    def near_limit():
        sp = ShearParams(0.49)
        fit = shearflow.shear_normal_deriv_rate(sp, spec, variant="duhamel")
        return [_info("shear exponent alpha=0.49", fit.exponent,
                      expected=2.0 * sp.alpha - 1.0)]

    def residuals():
        sp = ShearParams(0.25)
        values = [
            shearflow.pde_residual(x3, t, sp, spec=spec)
            for x3 in (0.5, 1.0, 2.0) for t in (-3.0, -1.5, -0.5)
        ]
        return [_at_most("shear PDE residual", max(values), 1e-3)]

    def variants():
        sp = ShearParams(0.25)
        gaps = []
        for x3 in (0.01, 0.5, 3.0):
            for t in (-3.5, -1.0, -0.01):
                printed = shearflow.shear_velocity(x3, t, sp, spec, "printed")
                duhamel = shearflow.shear_velocity(x3, t, sp, spec, "duhamel")
                gaps.append(abs(printed - duhamel) / max(abs(duhamel), 1e-300))
        return [_at_most("printed and Duhamel forms agree", max(gaps), 1e-6)]

    return [("rates", rates), ("near limit", near_limit),
            ("residuals", residuals), ("variants", variants)]


def _regions(runner):
    suite = "regions"
    n, seed = runner.params.n, runner.config.seed

    def inequalities():
        report = regions.verify_sign_inequalities(
            runner.grid(suite, "samples", 10**5),
            seed,
            n=n,
            workers=runner.workers,
            strict=False)
        return [
            _check("{}: {}".format(entry["region"], entry["name"]),
                   entry["counterexample"] is None,
                   entry["min_slack"],
                   counterexample=entry["counterexample"])
            for entry in report["inequalities"]
        ]

    def printed():
        report = regions.printed_b2_is_empty(
            runner.grid(suite, "search_samples", 10**6), seed, n)
        return [
            _info("printed B_12 is empty",
                  report["empty"],
                  members=report["members"],
                  note="empty-set erratum detected" if report["empty"] else
                  None)
        ]

    def corrected():
        report = regions.check_disjointness(
            runner.grid(suite, "search_samples", 10**6), seed, n)
        return [
            _check("corrected B_12 nonempty",
                   report["counts"]["B_i2"] > 0,
                   report["counts"]["B_i2"]),
            _check("sets pairwise disjoint", report["disjoint"],
                   report["overlaps"])
        ]

    return [("inequalities", inequalities), ("printed B_12", printed),
            ("corrected B_12", corrected)]


FEASIBILITY_CASES = (
    ((0.9, 0.4), {
        "weak_solution": True,
        "velocity_blowup": True,
        "pressure_bound_beta": True,
        "pressure_bound": False,
        "pressure_unbounded": True,
        "force_time_integrable": False,
        "force_space_integrable": True,
        "holder_range": True
    }),
    ((0.3, 0.4), {
        "weak_solution": True,
        "velocity_blowup": False,
        "pressure_bound": True,
        "pressure_unbounded": False,
        "force_time_integrable": True
    }),
    ((0.9, 0.6), {
        "weak_solution": False,
        "velocity_blowup": True,
        "pressure_bound": False,
        "pressure_unbounded": True,
        "force_space_integrable": False,
        "holder_range": True
    }),
)


def _params_feasibility(runner):
    params = runner.params

    def cases():
        checks = []
        for (alpha, beta), expected in FEASIBILITY_CASES:
            report = analysis.check_conditions(
                replace(params, n=3, alpha=alpha, beta=beta),
                seed=runner.config.seed)
            actual = {
                name: report["conditions"][name]["holds"]
                for name in expected
            }
            checks.append(
                _check("conditions alpha={} beta={}".format(alpha, beta),
                       actual == expected, actual, expected))
        return checks

    def chain():
        report = analysis.check_conditions(replace(params, n=3),
                                           seed=runner.config.seed)
        ns = {
            name: condition
            for name, condition in report["conditions"].items()
            if name.startswith("ns_")
        }
        return [
            _check("Navier-Stokes exponent chain",
                   all(condition["holds"] for condition in ns.values()),
                   report["navier_stokes"],
                   margins={name: c["margin"] for name, c in ns.items()}),
            _check("bounded and unbounded pressure sets disjoint",
                   report["pressure_bound_sets"]["members"] == 0,
                   report["pressure_bound_sets"]["members"], 0),
            _check("integrable force and singular pressure rate disjoint",
                   report["pressure_rate_sets"]["members"] == 0,
                   report["pressure_rate_sets"]["members"], 0)
        ]

    return [("hand cases", cases), ("chain and searches", chain)]


STEPS = {
    "kernels": _kernels,
    "force": _force,
    "greens-bound": _greens,
    "rates-normal-deriv": _rates_normal_deriv,
    "rates-pressure": _rates_pressure,
    "holder": _holder,
    "lemma-calg": _lemma_calg,
    "lemma-jkl": _lemma_jkl,
    "shear": _shear,
    "regions": _regions,
    "params-feasibility": _params_feasibility,
}
