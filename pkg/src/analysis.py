"""Rate analysis

Power-law fits of sampled quantities, the auxiliary function

    calG(x_n, t) = int_{1/2}^t int_0^2 y^-beta (tau - 1/2)^-alpha (t - tau)^gamma
                   exp(-(x_n + y)^2 / 4 (t - tau)) dy dtau

with its two sided Gaussian bounds, the remainder J_kl of the tangential
heat convolution of Newtonian derivatives, Hoelder exponents of the
velocity and the parameter inequalities of the existence and blow-up
statements.
"""
import logging
import numpy as np
from scipy import special, stats
from src.errors import DomainError, FitError, PropertyViolation
from src.params import (GFunArgs, HalfSpacePoint, PowerLawFit, QuadSpec,
                        QuadResult, SpaceTimePoint)
from src.utils_dir import pytorch as torch_utils
from src import kernels
from src import quad
from src import fields

LOGGER = logging.getLogger(__name__)

MIN_R_SQUARED = 0.99
INNER_TIGHTENING = 100.0
DEFAULT_WINDOW = (1e-4, 1e-2)


def _reject(message):
    LOGGER.warning(message)
    raise FitError(message)


def fit_power_law(s, v, min_r_squared=MIN_R_SQUARED, min_points=4):
    """Least squares fit of log|v| = log C + p log s

    Args:
        s (array): positive abscissae spanning at least one decade
        v (array): values of one sign
        min_r_squared (float): gate on the coefficient of determination
        min_points (int): smallest accepted sample

    Returns:
        PowerLawFit
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    if s.ndim != 1 or s.shape != v.shape:
        _reject("Fit needs two 1-D arrays of equal length")
    if len(s) < min_points:
        _reject("Fit needs at least {} points, got {}".format(
            min_points, len(s)))
    if np.any(s <= 0.0) or not np.all(np.isfinite(v)):
        _reject("Fit needs positive abscissae and finite values")
    if not (np.all(v > 0.0) or np.all(v < 0.0)):
        _reject("Values change sign or vanish, no power law")
    if np.log10(s.max() / s.min()) < 1.0 - 1e-12:
        _reject("Abscissae span less than one decade: [{}, {}]".format(
            s.min(), s.max()))
    log_s, log_v = np.log(s), np.log(np.abs(v))
    regression = stats.linregress(log_s, log_v)
    residual = log_v - (regression.intercept + regression.slope * log_s)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((log_v - log_v.mean())**2))
    if ss_tot > 0.0:
        r_squared = max(0.0, 1.0 - ss_res / ss_tot)
    else:
        r_squared = 1.0
    fit = PowerLawFit(exponent=float(regression.slope),
                      log_coefficient=float(regression.intercept),
                      r_squared=r_squared,
                      n_points=len(s),
                      stderr=float(regression.stderr))
    if r_squared < min_r_squared:
        _reject("Rejected fit: exponent {:.4f} with r2 = {:.5f} < {}".format(
            fit.exponent, r_squared, min_r_squared))
    LOGGER.debug("Fitted exponent {:.4f} (r2 = {:.6f})".format(
        fit.exponent, r_squared))
    return fit


def local_exponents(s, v):
    """Slopes between consecutive points in log-log coordinates"""
    s = np.asarray(s, dtype=float)
    v = np.abs(np.asarray(v, dtype=float))
    return np.diff(np.log(v)) / np.diff(np.log(s))


def fit_power_law_differences(s, v, **kwargs):
    """Exponent of v - D from successive differences on a geometric grid

    For v = C s^p + D and s_(k+1) = q s_k the differences
    v_k - v_(k+1) = C (1 - q^p) s_k^p carry the exponent without the
    constant D.
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    ratios = s[1:] / s[:-1]
    if len(s) < 2 or not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise DomainError("Difference fit needs a geometric grid")
    return fit_power_law(s[:-1], v[:-1] - v[1:], **kwargs)


def divergence_exponent_criteria(rate, q):
    """|F| ~ s^rate near s = 0 is not in L^q iff rate * q <= -1"""
    product = rate * q
    return {
        "rate": float(rate),
        "q": float(q),
        "product": float(product),
        "diverges": bool(product <= -1.0)
    }


def _boundary_factor(sigma, params):
    """int_0^2 y^-beta exp(-y^2 / 4 sigma) dy without the power sigma^a"""
    a = 0.5 * (1.0 - params.beta)
    return 4.0**(-0.5 * params.beta) * special.gamma(a) * special.gammainc(
        a, 1.0 / np.asarray(sigma, dtype=float))


def _normal_factor(x_n, sigma, params, spec):
    """int_0^2 y^-beta exp(-(x_n + y)^2 / 4 sigma) dy"""
    if x_n == 0.0:
        a = 0.5 * (1.0 - params.beta)
        return sigma**a * float(_boundary_factor(sigma, params))
    return quad.integrate_singular_1d(
        lambda y: np.exp(-(x_n + y)**2 / (4.0 * sigma)),
        0.0,
        2.0,
        -params.beta,
        spec=spec,
        regular=True).value


def calG_result(args, params, spec=None):
    """calG with its error estimate

    The time integral is split at the midpoint of (1/2, t). The left half
    carries (tau - 1/2)^-alpha, the right half is written in
    sigma = t - tau and carries sigma^(gamma + (1 - beta) / 2) on the
    boundary, where the inner integral is known in closed form.
    """
    spec = spec or QuadSpec()
    inner = spec.tightened(INNER_TIGHTENING)
    alpha, gamma, x_n = params.alpha, args.gamma, args.x_n
    a = 0.5 * (1.0 - params.beta)
    lag = args.t - 0.5
    half = 0.5 * lag

    def left(tau):
        sigma = args.t - tau
        return sigma**gamma * _normal_factor(x_n, sigma, params, inner)

    left_part = quad.integrate_singular_1d(left,
                                           0.5,
                                           0.5 + half,
                                           -alpha,
                                           spec=spec,
                                           regular=True)
    if x_n == 0.0:
        if gamma + a <= -1.0:
            err_str = "calG diverges on the boundary for gamma - beta / 2 " \
                "= {} <= -3/2".format(gamma - 0.5 * params.beta)
            LOGGER.error(err_str)
            raise DomainError(err_str)

        def right(sigma):
            return (lag - sigma)**(-alpha) * _boundary_factor(sigma, params)

        right_part = quad.integrate_singular_1d(right,
                                                0.0,
                                                half,
                                                gamma + a,
                                                spec=spec,
                                                regular=True)
    else:
        exponent = gamma + a if gamma + a > -1.0 else 0.0

        def right(sigma):
            return (lag - sigma)**(-alpha) * sigma**gamma * _normal_factor(
                x_n, sigma, params, inner)

        right_part = quad.integrate_singular_1d(right,
                                                0.0,
                                                half,
                                                exponent,
                                                spec=spec,
                                                points=[x_n**2])
    return left_part + right_part


def calG(args, params, spec=None):
    """calG(x_n, t) for GFunArgs(x_n, t, gamma)"""
    return float(calG_result(args, params, spec).value)


def calG_exponent(params, gamma):
    return 1.5 - 0.5 * params.beta - params.alpha + gamma


def calG_boundary_closed_form(t, params, gamma):
    """Leading term of calG(0, t) as t -> 1/2

    4^(-beta/2) Gamma(a) B(1 - alpha, gamma + (3 - beta) / 2)
    (t - 1/2)^(3/2 - beta/2 - alpha + gamma), a = (1 - beta) / 2, exact up
    to a relative error below exp(-1 / (t - 1/2)).
    """
    a = 0.5 * (1.0 - params.beta)
    if gamma + a <= -1.0:
        raise DomainError("No boundary limit for gamma = {}".format(gamma))
    return 4.0**(-0.5 * params.beta) * special.gamma(a) * special.beta(
        1.0 - params.alpha, gamma + 0.5 * (3.0 - params.beta)) * (
            t - 0.5)**calG_exponent(params, gamma)


def _calG_envelopes(x_n, t, params, gamma, branch):
    lag = t - 0.5
    if branch == 1:
        power = lag**calG_exponent(params, gamma)
    else:
        if x_n == 0.0:
            raise DomainError("Second bound of calG needs x_n > 0")
        power = lag**(-params.alpha) * x_n**(3.0 - params.beta + 2.0 * gamma)
    return (power * np.exp(-x_n**2 / (2.0 * lag)),
            power * np.exp(-x_n**2 / (8.0 * lag)))


def calG_branch(params, gamma):
    return 1 if gamma - 0.5 * params.beta > -1.5 else 2


def verify_calG_bounds(grid, params, gamma, spec=None, band=None,
                       strict=True):
    """Ratios of calG to its lower and upper Gaussian envelopes

    Args:
        grid (iterable): (x_n, t) pairs with t - 1/2 in [1e-4, 1/2]
        params (ModelParams): alpha and beta
        gamma (float): time power
        spec (QuadSpec): tolerances
        band (tuple, optional): (low, high) the ratios must stay in
        strict (bool): raise PropertyViolation on failure

    Returns:
        report (dict): branch, empirical constants (c_lower is the smallest
            ratio to the lower envelope, c_upper the largest ratio to the
            upper one), rows and the verdict
    """
    branch = calG_branch(params, gamma)
    rows = []
    for x_n, t in grid:
        if not 1e-4 <= t - 0.5 <= 0.5:
            raise DomainError("t - 1/2 = {} outside [1e-4, 1/2]".format(
                t - 0.5))
        value = calG(GFunArgs(x_n, t, gamma), params, spec)
        lower, upper = _calG_envelopes(x_n, t, params, gamma, branch)
        rows.append({
            "x_n": float(x_n),
            "t": float(t),
            "calG": value,
            "lower_ratio": value / lower,
            "upper_ratio": value / upper
        })
    lower_ratios = np.array([row["lower_ratio"] for row in rows])
    upper_ratios = np.array([row["upper_ratio"] for row in rows])
    c_lower, c_upper = float(lower_ratios.min()), float(upper_ratios.max())
    passed = bool(
        np.all(np.isfinite(lower_ratios)) and np.all(np.isfinite(upper_ratios))
        and c_lower > 0.0)
    if band is not None:
        passed = passed and band[0] <= c_lower and c_upper <= band[1]
    report = {
        "branch": branch,
        "gamma": float(gamma),
        "c_lower": c_lower,
        "c_upper": c_upper,
        "rows": rows,
        "passed": passed
    }
    LOGGER.info("calG bounds, branch {}: c_lower = {:.4g}, c_upper = {:.4g}"
                .format(branch, c_lower, c_upper))
    if strict and not passed:
        raise PropertyViolation("calG envelope ratios left their band",
                                report)
    return report


def calG_time_fit(params, gamma, lags=None, spec=None):
    """Fit of calG(0, 1/2 + lag) in lag"""
    lags = np.geomspace(*DEFAULT_WINDOW, 9) if lags is None else lags
    values = [calG(GFunArgs(0.0, 0.5 + lag, gamma), params, spec)
              for lag in lags]
    return fit_power_law(lags, values)


def calG_normal_fit(params, gamma, ratio=1.0, x_values=None, spec=None):
    """Fit of calG (t - 1/2)^alpha in x_n along t = 1/2 + ratio x_n^2

    Along the parabola the product is proportional to x_n^(3 - beta + 2 gamma)
    up to exponentially small terms.
    """
    x_values = np.geomspace(1e-2, 1e-1, 5) if x_values is None else x_values
    values = []
    for x_n in x_values:
        lag = ratio * x_n**2
        values.append(
            calG(GFunArgs(x_n, 0.5 + lag, gamma), params, spec) *
            lag**params.alpha)
    return fit_power_law(x_values, values)


def gaussian_decay_slope(t, params, gamma, z_values=None, spec=None):
    """Slope of log calG against z = x_n^2 / (t - 1/2) at fixed t"""
    z_values = np.linspace(2.0, 20.0, 7) if z_values is None else z_values
    lag = t - 0.5
    values = [
        calG(GFunArgs(np.sqrt(z * lag), t, gamma), params, spec)
        for z in z_values
    ]
    regression = stats.linregress(z_values, np.log(values))
    return float(regression.slope)


def J_kl(x, t, k, l, spec=None):
    """J_kl(x, t) = (Gamma' * D^k_1 D^l_n N(., x_n))(x') - D^k_1 D^l_n N(x)"""
    if k < 0 or l < 0 or k + l > 2:
        raise DomainError("Need k, l >= 0 and k + l <= 2")
    dim = x.dim
    counts = kernels.derivative_counts(dim, *([1] * k + [dim] * l))

    def density(z):
        points = np.concatenate(
            [z, np.full(z.shape[:-1] + (1, ), x.normal)], axis=-1)
        return kernels.newton_deriv(points, counts)

    convolution = quad.convolve_tangential(x.tangential_array,
                                           t,
                                           density,
                                           spec,
                                           singular_point=np.zeros(dim - 1),
                                           radial_scale=x.normal or None)
    exact = kernels.newton_deriv(x.as_array(), counts)
    return QuadResult(convolution.value - exact,
                      convolution.error_estimate, convolution.evaluations)


def verify_Jkl(x, t_list, k, l, spec=None, min_exponent=0.45, strict=True):
    """Fit of |J_kl(x, t)| in t, the exponent must reach min_exponent"""
    t_list = np.asarray(t_list, dtype=float)
    radius = np.linalg.norm(x.tangential_array)
    if radius < max(1.0, np.sqrt(t_list.max())):
        err_str = "|x'| = {} below max(1, sqrt(t))".format(radius)
        LOGGER.error(err_str)
        raise DomainError(err_str)
    results = [J_kl(x, t, k, l, spec) for t in t_list]
    values = np.array([result.value for result in results])
    fit = fit_power_law(t_list, np.abs(values))
    constant = float(np.max(np.abs(values) / np.sqrt(t_list)))
    report = {
        "x": list(x.as_array()),
        "k": k,
        "l": l,
        "t": list(t_list),
        "J": list(values),
        "error": [result.error_estimate for result in results],
        "fit": fit.info(),
        "constant": constant,
        "passed": bool(fit.exponent >= min_exponent)
    }
    LOGGER.info("J_{}{} at {}: exponent {:.3f}, c = {:.3g}".format(
        k, l, x.as_array(), fit.exponent, constant))
    if strict and not report["passed"]:
        raise PropertyViolation(
            "J_{}{} exponent {:.3f} below {}".format(k, l, fit.exponent,
                                                     min_exponent), report)
    return report


def holder_exponent(x_tangential,
                    i,
                    params,
                    spec=None,
                    x_values=None,
                    profiles=None,
                    workers=1):
    """Fit of |W_i(x', x_n, t) - W_i(x', 0, t)| along t = 1/2 + 2 x_n^2

    W_i vanishes on the boundary, so the difference is W_i itself. The
    exponent is expected at 3 - 2 alpha - beta.
    """
    if not 0.0 < params.holder_exponent < 2.0:
        raise DomainError("Hoelder exponent {} outside (0, 2)".format(
            params.holder_exponent))
    x_values = np.geomspace(1e-2, 1e-1, 9) if x_values is None else x_values
    points = [
        SpaceTimePoint.from_coords(x_tangential, x_n, 0.5 + 2.0 * x_n**2)
        for x_n in x_values
    ]
    samples = fields.evaluate_batch(points, "W", i, params, spec, profiles,
                                    workers)
    return fit_power_law(x_values, [abs(sample.value) for sample in samples])


def temporal_holder(x,
                    i,
                    params,
                    spec=None,
                    lags=None,
                    profiles=None,
                    workers=1):
    """Fit of |w_i(x, 1/2 + lag)| in lag at a point with x_n^2 >= lag"""
    lags = np.geomspace(*DEFAULT_WINDOW, 9) if lags is None else lags
    if x.normal**2 < np.max(lags):
        raise DomainError("Temporal fit needs x_n^2 >= t - 1/2")
    points = [SpaceTimePoint(x, 0.5 + lag) for lag in lags]
    samples = fields.evaluate_batch(points, "w", i, params, spec, profiles,
                                    workers)
    return fit_power_law(lags, [abs(sample.value) for sample in samples])


def normal_deriv_lower_scan(x_tangential,
                            i,
                            l,
                            ratios,
                            params,
                            spec=None,
                            x_n=0.1,
                            floor=0.1,
                            profiles=None):
    """Empirical c_l of the lower bound for D^l_{x_n} B^w_i

    For every ratio c the quotient
    |D^l B^w_i| / ((t - 1/2)^(1 - (l + beta + 2 alpha) / 2)
    exp(-x_n^2 / 2 (t - 1/2))) is evaluated at sqrt(t - 1/2) = c x_n. The
    bound holds up to c_l when every quotient with c <= c_l stays above
    floor times the largest quotient.
    """
    ratios = np.sort(np.asarray(ratios, dtype=float))
    rows = []
    for ratio in ratios:
        lag = (ratio * x_n)**2
        point = SpaceTimePoint.from_coords(x_tangential, x_n, 0.5 + lag)
        sample = fields.bad_term_Bw(point, i, params, spec, profiles, order=l)
        envelope = lag**(1.0 - 0.5 * (l + params.beta + 2.0 * params.alpha)) \
            * np.exp(-x_n**2 / (2.0 * lag))
        rows.append({
            "ratio": float(ratio),
            "value": sample.value,
            "quotient": abs(sample.value) / envelope
        })
    quotients = np.array([row["quotient"] for row in rows])
    threshold = floor * quotients.max()
    c_l = None
    for row in rows:
        if row["quotient"] < threshold:
            break
        c_l = row["ratio"]
    return {"l": l, "x_n": x_n, "rows": rows, "c_l": c_l}


def _condition(margin):
    return {"holds": bool(margin > 0.0), "margin": float(margin)}


def _uniform_unit_square(samples, seed, stream):
    return torch_utils.uniform_box(samples, [0.0, 0.0], [1.0, 1.0], seed,
                                   stream)


def pressure_bound_sets_disjoint(n, p, q, samples=10**4, seed=1):
    """Random search for (alpha, beta) in both the bounded pressure set and
    the unbounded pressure set, p > 2n / (n - 1), q > 1"""
    if not (p > 2.0 * n / (n - 1) and q > 1.0):
        raise DomainError("Needs p > 2n / (n - 1) and q > 1")
    points = _uniform_unit_square(samples, seed, 0)
    alpha, beta = points[:, 0], points[:, 1]
    bounded = 2 * alpha + n * beta < 2.0 / q + n / p + 1.0
    unbounded = (beta > n / ((n - 1) * p)) & (1.0 + 2.0 / q < 2 * alpha + beta)
    members = int(np.sum(bounded & unbounded))
    return {"samples": int(samples), "members": members,
            "disjoint": members == 0}


def pressure_rate_sets_disjoint(n, p, q, p1, q1, samples=10**4, seed=1):
    """Random search for (alpha, beta) in both the integrability set of the
    force and the set where the boundary pressure rate is not L^q,
    1 < p1 < (n - 1) p / n, 1 < q1 < q"""
    if not (1.0 < p1 < (n - 1) * p / n and 1.0 < q1 < q):
        raise DomainError("Needs 1 < p1 < (n - 1) p / n and 1 < q1 < q")
    points = _uniform_unit_square(samples, seed, 1)
    alpha, beta = points[:, 0], points[:, 1]
    exponents = 1.0 / q1 - 1.0 / q + n / (2.0 * p1) - n / (2.0 * p) <= 0.5
    integrable = exponents & (alpha < 1.0 / q1) & (beta < 1.0 / p1)
    singular = 0.5 + 1.0 / q < alpha + 0.5 * beta
    members = int(np.sum(integrable & singular))
    return {"samples": int(samples), "members": members,
            "disjoint": members == 0}


def navier_stokes_chain(n=3, s=4.5, r=None, eps=None, delta=None, r0=None):
    """Exponents of the Navier-Stokes extension and their margins

    Defaults: r = 3 s (n + 2) / (n + 2 - s) * 1.01, eps = 0.8 (n + 2) / 2rn,
    delta = 2 eps, r0 = 1.01 * 3 / (delta - eps). Then
    alpha = 1 - (n + 2) / 4r + delta / 2 and beta = (n + 2) / 2r - eps.
    """
    if r is None:
        r = 3.0 * s * (n + 2) / (n + 2 - s) * 1.01
    if eps is None:
        eps = 0.8 * (n + 2) / (2.0 * r * n)
    if delta is None:
        delta = 2.0 * eps
    if r0 is None:
        r0 = 1.01 * 3.0 / (delta - eps)
    alpha = 1.0 - (n + 2) / (4.0 * r) + 0.5 * delta
    beta = (n + 2) / (2.0 * r) - eps
    conditions = {
        "ns_s_range": _condition(min(s - max(0.5 * (n + 2), 4.0),
                                     n + 2 - s)),
        "ns_r_lower": _condition(r - s * (n + 2) / (n + 2 - s)),
        "ns_r_above_2s": _condition(r - 2.0 * s),
        "ns_eps_delta": _condition(
            min(eps, delta - eps, n * eps - delta,
                (n + 2) / (2.0 * r) - n * eps)),
        "ns_r0": _condition(delta - eps - 3.0 / r0),
        "ns_alpha_beta_lower": _condition(2 * alpha + beta -
                                          (2.0 + 3.0 / r0)),
        "ns_alpha_beta_upper": _condition(2.0 + (n + 2) / r -
                                          (2 * alpha + n * beta)),
        "ns_weak_beta": _condition(0.5 - beta),
        "ns_alpha_unit": _condition(min(alpha, 1.0 - alpha)),
    }
    values = {"s": s, "r": r, "eps": eps, "delta": delta, "r0": r0,
              "alpha": alpha, "beta": beta}
    return values, conditions


def check_conditions(params,
                     q=16.0,
                     p=4.0,
                     q1=1.8,
                     p1=2.0,
                     r=None,
                     s=4.5,
                     r0=None,
                     samples=10**4,
                     seed=1):
    """Margins of the parameter inequalities, positive margin means holds

    Returns:
        report (dict): conditions {name: {"holds", "margin"}}, the
            Navier-Stokes exponents and the two disjointness searches
    """
    n, alpha, beta = params.n, params.alpha, params.beta
    conditions = {
        "weak_solution": _condition(0.5 - beta),
        "velocity_blowup_q": _condition(q - 6.0),
        "velocity_blowup": _condition(2 * alpha + beta - (2.0 + 3.0 / q)),
        "pressure_bound_p": _condition(p - 2.0 * n / (n - 1)),
        "pressure_bound_q": _condition(q - 1.0),
        "pressure_bound_beta": _condition(beta - n / ((n - 1) * p)),
        "pressure_bound": _condition(2.0 / q + n / p + 1.0 -
                                     (2 * alpha + n * beta)),
        "pressure_unbounded": _condition(2 * alpha + beta - (1.0 + 2.0 / q)),
        "force_time_integrable": _condition(1.0 / q1 - alpha),
        "force_space_integrable": _condition(1.0 / p1 - beta),
        "holder_range": _condition(
            min(params.holder_exponent, 2.0 - params.holder_exponent)),
    }
    ns_values, ns_conditions = navier_stokes_chain(n, s, r, r0=r0)
    conditions.update(ns_conditions)
    report = {"conditions": conditions, "navier_stokes": ns_values}
    if p > 2.0 * n / (n - 1) and q > 1.0:
        report["pressure_bound_sets"] = pressure_bound_sets_disjoint(
            n, p, q, samples, seed)
    if 1.0 < p1 < (n - 1) * p / n and 1.0 < q1 < q:
        report["pressure_rate_sets"] = pressure_rate_sets_disjoint(
            n, p, q, p1, q1, samples, seed)
    failing = [name for name, cond in conditions.items() if not cond["holds"]]
    LOGGER.info("Parameter conditions: {} of {} hold{}".format(
        len(conditions) - len(failing), len(conditions),
        "" if not failing else ", failing: " + ", ".join(failing)))
    return report
