"""Quadrature engine

Every integral of the lab goes through one of the rules below:
  * integrate_singular_1d: adaptive Gauss-Kronrod (scipy quad_vec) after the
    substitution u = (s - endpoint)^(1 + e) which removes an endpoint power
    singularity |s - endpoint|^e, e > -1.
  * integrate_nd: tensor Gauss-Legendre rules with order doubling up to three
    dimensions, seeded Monte Carlo above.
  * convolve_tangential: Gaussian weighted convolution over the tangential
    plane, either centred on the Gaussian or, for densities with a singular
    point close by, in polar coordinates around that point with graded
    radial panels.
"""
import logging
import warnings
import functools
import numpy as np
from scipy import integrate, special
from src.errors import AccuracyError, DomainError
from src.params import QuadSpec, QuadResult
from src.utils_dir import pytorch as torch_utils

LOGGER = logging.getLogger(__name__)

ROUNDOFF = 64 * np.finfo(float).eps
TAIL_RADIUS = 10.0
GRADED_PANELS = 12


def _fail(message, estimate=None, error_estimate=None):
    LOGGER.warning(message)
    raise AccuracyError(message,
                        estimate=estimate,
                        error_estimate=error_estimate)


def _as_value(value):
    if np.ndim(value) == 0:
        return float(value)
    return np.asarray(value, dtype=float)


def adaptive_quad(func, lower, upper, spec=None, points=None):
    """Adaptive Gauss-Kronrod on [lower, upper] for scalar or vector integrands

    An unmet tolerance raises AccuracyError carrying the estimate, integration
    warnings within tolerance are only logged.
    """
    spec = spec or QuadSpec()
    if upper == lower:
        value = np.zeros_like(np.asarray(func(lower), dtype=float))
        return QuadResult(_as_value(value), 0.0, 1)
    if points is not None:
        points = sorted(p for p in points if lower < p < upper)
        points = points or None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, error, info = integrate.quad_vec(func,
                                                lower,
                                                upper,
                                                epsabs=spec.abs_tol,
                                                epsrel=spec.rel_tol,
                                                norm="max",
                                                limit=spec.max_subdivisions,
                                                points=points,
                                                full_output=True)
    value = _as_value(value)
    error = max(float(error), ROUNDOFF * float(np.max(np.abs(value))))
    if error > spec.tolerance(value):
        _fail(
            "No convergence on [{}, {}] after {} evaluations: {} +- {}".format(
                lower, upper, info.neval, value, error), value, error)
    for warn in caught:
        LOGGER.debug("Integration warning within tolerance: {}".format(
            warn.message))
    if not info.success:
        LOGGER.debug("quad_vec status {} within tolerance".format(
            info.status))
    return QuadResult(value, error, int(info.neval))


def integrate_singular_1d(func,
                          lower,
                          upper,
                          endpoint_exponent,
                          at="lower",
                          spec=None,
                          regular=False,
                          points=None):
    """Integral of func over [lower, upper] with a power singularity at one end

    func behaves like |s - endpoint|^e times a smooth factor. With
    regular=True func is the smooth factor itself and the power is implied.
    The substitution u = |s - endpoint|^(1 + e) turns the integral into
    1 / (1 + e) times the integral of the smooth factor in u.

    Args:
        func (callable): integrand, may return arrays
        lower, upper (float): limits, lower <= upper
        endpoint_exponent (float): e > -1
        at (str): "lower" or "upper", the singular end
        spec (QuadSpec): tolerances
        regular (bool): func already has the power split off
        points (list): break points in s

    Returns:
        QuadResult
    """
    if endpoint_exponent <= -1.0:
        err_str = "Endpoint exponent {} is not integrable".format(
            endpoint_exponent)
        LOGGER.error(err_str)
        raise DomainError(err_str)
    if at not in ("lower", "upper"):
        raise DomainError("Unknown endpoint '{}'".format(at))
    if upper < lower:
        raise DomainError("Empty interval [{}, {}]".format(lower, upper))
    endpoint, sign = (lower, 1.0) if at == "lower" else (upper, -1.0)
    power = 1.0 + endpoint_exponent
    floor = 4.0 * np.spacing(abs(endpoint))

    def smooth_part(u):
        dist = max(u**(1.0 / power), floor)
        position = endpoint + sign * dist
        value = np.asarray(func(position), dtype=float)
        if not regular:
            value = value * abs(position - endpoint)**(-endpoint_exponent)
        return value / power

    if upper == lower:
        return adaptive_quad(smooth_part, 0.0, 0.0, spec)
    mapped = None
    if points is not None:
        mapped = [abs(p - endpoint)**power for p in points if lower < p < upper]
    return adaptive_quad(smooth_part, 0.0, (upper - lower)**power, spec,
                         mapped)


def graded_midpoint(func, lower, upper, nodes, grading=3.0, at="lower"):
    """Midpoint rule on a mesh graded towards one endpoint

    Brute force oracle: cells s_k = endpoint +- L (k / N)^grading.
    """
    fractions = (np.arange(nodes + 1) / nodes)**grading
    if at == "lower":
        edges = lower + (upper - lower) * fractions
    else:
        edges = upper - (upper - lower) * fractions[::-1]
    widths = np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    return float(np.sum(func(mids) * widths))


@functools.lru_cache(maxsize=64)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre(order, lower=-1.0, upper=1.0):
    """Gauss-Legendre nodes and weights on [lower, upper]"""
    nodes, weights = _leggauss(int(order))
    half = 0.5 * (upper - lower)
    return lower + half * (nodes + 1.0), half * weights


def _tensor_rule(box, order):
    rules = [gauss_legendre(order, lo, hi) for lo, hi in box]
    nodes = np.meshgrid(*[rule[0] for rule in rules], indexing="ij")
    weights = np.meshgrid(*[rule[1] for rule in rules], indexing="ij")
    points = np.stack([node.ravel() for node in nodes], axis=-1)
    return points, np.prod([w.ravel() for w in weights], axis=0)


def integrate_nd(func, box, spec=None):
    """Integral of a smooth func over a box

    func maps points of shape (N, d) to values of shape (N,). Up to three
    dimensions the order of a tensor Gauss rule is doubled until two
    successive rules agree, above that the Monte Carlo fallback is used.
    """
    spec = spec or QuadSpec()
    box = [(float(lo), float(hi)) for lo, hi in box]
    if len(box) > 3:
        return monte_carlo(func, box, spec.mc_samples, spec.seed)
    order = spec.order
    points, weights = _tensor_rule(box, order)
    previous = float(np.sum(weights * func(points)))
    evaluations = len(weights)
    for _ in range(spec.max_refinements):
        order *= 2
        points, weights = _tensor_rule(box, order)
        current = float(np.sum(weights * func(points)))
        evaluations += len(weights)
        error = max(abs(current - previous), ROUNDOFF * abs(current))
        if error <= spec.tolerance(current):
            return QuadResult(current, error, evaluations)
        previous = current
    _fail(
        "Tensor rule did not converge at order {}: {} +- {}".format(
            order, current, error), current, error)


def monte_carlo(func, box, samples, seed, batch_size=100000):
    """Uniform Monte Carlo estimate with its standard error"""
    lows = np.array([lo for lo, _ in box])
    widths = np.array([hi - lo for lo, hi in box])
    volume = float(np.prod(widths))
    total, total_sq = 0.0, 0.0
    for uniforms in torch_utils.uniform_batches(samples, len(box), seed,
                                                batch_size):
        values = func(lows + widths * uniforms)
        total += float(np.sum(values))
        total_sq += float(np.sum(values**2))
    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0)
    stderr = volume * np.sqrt(variance / samples)
    return QuadResult(volume * mean, stderr, samples)


def gaussian_tail_mass(dim, radius, t):
    """Mass of the heat kernel in dimension dim outside the ball of radius"""
    return float(special.gammaincc(0.5 * dim, radius**2 / (4.0 * t)))


def _gaussian_factor(offsets, t, derivative):
    """D^m Gamma'(w, t) evaluated at offsets (..., m)

    Tensor product of 1-D Hermite derivatives,
    D^l Gamma_1(x, t) = (-1)^l (2 sqrt t)^-l H_l(x / 2 sqrt t) Gamma_1(x, t).
    """
    scale = 2.0 * np.sqrt(t)
    eta = offsets / scale
    value = np.exp(-np.sum(eta**2, axis=-1)) / (np.pi * scale**2)**(
        0.5 * offsets.shape[-1])
    for axis, order in enumerate(derivative):
        if order:
            value = value * (-1.0 / scale)**order * special.eval_hermite(
                order, eta[..., axis])
    return value


def sphere_directions(dim, count):
    """Unit directions and weights of a rule on the circle or sphere"""
    if dim == 2:
        theta = (np.arange(count) + 0.5) * 2.0 * np.pi / count
        return np.stack([np.cos(theta), np.sin(theta)],
                        axis=-1), np.full(count, 2.0 * np.pi / count)
    cos_nodes, cos_weights = gauss_legendre(count // 2)
    phi = (np.arange(count) + 0.5) * 2.0 * np.pi / count
    sin_nodes = np.sqrt(1.0 - cos_nodes**2)
    directions = np.stack([
        np.outer(sin_nodes, np.cos(phi)),
        np.outer(sin_nodes, np.sin(phi)),
        np.outer(cos_nodes, np.ones(count))
    ],
                          axis=-1).reshape(-1, 3)
    weights = np.outer(cos_weights, np.full(count,
                                            2.0 * np.pi / count)).ravel()
    return directions, weights


def panel_rule(edges, order):
    """Composite Gauss-Legendre rule over consecutive panels"""
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        panel_nodes, panel_weights = gauss_legendre(order, lo, hi)
        nodes.append(panel_nodes)
        weights.append(panel_weights)
    return np.concatenate(nodes), np.concatenate(weights)


class _TangentialConvolution():
    """Refinement driver for one convolution call"""
    def __init__(self, centres, t, density, spec, derivative,
                 density_sup=None):
        self._log = logging.getLogger(self.__class__.__name__)
        self.centres = centres
        self.t = t
        self.density = density
        self.density_sup = density_sup
        self.spec = spec
        self.derivative = derivative
        self.dim = centres.shape[1]
        self.evaluations = 0

    def _tail_density(self, ring):
        """Bound of |density| outside the truncation radius"""
        if self.density_sup is None:
            return ring
        return max(ring, self.density_sup)

    def _derivative_growth(self, radius):
        order = int(np.sum(self.derivative))
        return max(1.0, radius / (2.0 * self.t))**order

    def _sum(self, origins, radii, radial_weights, directions, weights):
        """Sum over polar nodes origin + r * direction for every centre"""
        offsets = radii[:, None, None] * directions[None, :, :]
        points = origins[:, None, None, :] + offsets[None]
        values = self.density(points)
        gauss = _gaussian_factor(self.centres[:, None, None, :] - points,
                                 self.t, self.derivative)
        node_weights = (radial_weights * radii**(self.dim - 1))[:, None] \
            * weights[None, :]
        self.evaluations += values.size
        total = np.sum(values * gauss * node_weights[None], axis=(1, 2))
        ring = np.max(np.abs(values[:, -1, :]))
        return total, ring

    def gaussian_centred(self, level):
        radius = TAIL_RADIUS * np.sqrt(self.t)
        order = self.spec.order + 4 * level
        edges = np.linspace(0.0, radius, 6)
        radii, radial_weights = panel_rule(edges, order)
        directions, weights = sphere_directions(
            self.dim, 2 * self.spec.order * 2**level)
        total, ring = self._sum(self.centres, radii, radial_weights,
                                directions, weights)
        tail = self._tail_density(ring) * gaussian_tail_mass(
            self.dim, radius, self.t) * self._derivative_growth(radius)
        return total, tail

    def singular_centred(self, level, singular_point, radial_scale):
        distance = np.max(
            np.linalg.norm(self.centres - singular_point, axis=-1))
        root_t = np.sqrt(self.t)
        r_max = distance + TAIL_RADIUS * root_t
        scale = min(radial_scale or root_t, 0.5 * r_max)
        grading = self.spec.grading_strength
        if grading > 1.0:
            graded = scale * grading**(-np.arange(GRADED_PANELS, 0, -1.0))
        else:
            graded = np.array([])
        uniform = np.linspace(scale, r_max,
                              int(min(np.ceil((r_max - scale) /
                                              (0.5 * root_t)), 64)) + 1)
        edges = np.concatenate([[0.0], graded, uniform])
        radii, radial_weights = panel_rule(edges, self.spec.order +
                                            4 * level)
        directions, weights = sphere_directions(
            self.dim, 2 * self.spec.order * 2**level)
        origins = np.broadcast_to(singular_point, self.centres.shape)
        total, ring = self._sum(origins, radii, radial_weights, directions,
                                weights)
        outer = TAIL_RADIUS * root_t
        tail = self._tail_density(ring) * gaussian_tail_mass(
            self.dim, outer, self.t) * self._derivative_growth(outer)
        return total, tail

    def refine(self, rule):
        previous, tail = rule(0)
        for level in range(1, self.spec.max_refinements + 1):
            current, tail = rule(level)
            error = float(np.max(np.abs(current - previous))) + tail
            error = max(error, ROUNDOFF * float(np.max(np.abs(current))))
            if error <= self.spec.tolerance(current):
                if tail > 0.5 * error:
                    self._log.debug(
                        "Tail bound {} dominates the error".format(tail))
                return QuadResult(current, error, self.evaluations)
            previous = current
        _fail(
            "Tangential convolution did not converge (t = {}): error {}".
            format(self.t, error), current, error)


def convolve_tangential(x,
                        t,
                        density,
                        spec=None,
                        singular_point=None,
                        gaussian_derivative=None,
                        radial_scale=None,
                        density_sup=None):
    """Convolution of D^m Gamma'(., t) with a density over the tangential plane

    Computes the integral of D^m Gamma'(x' - z', t) density(z') dz'. The
    density maps points of shape (..., m) to values of shape (...). When the
    density has a singular point closer than the Gaussian truncation radius
    the rule is centred at that point with geometrically graded panels of
    smallest size radial_scale * grading_strength^-12.

    The Gaussian is truncated at 10 sqrt(t) around the centres, or beyond the
    farthest centre when the rule is centred at the singular point. The tail
    is bounded by the largest |density| on the outer ring times the Gaussian
    tail mass, which holds for densities non-increasing in modulus outside
    the ring. Densities that grow outside the ring must pass density_sup,
    a bound of |density| there.

    Args:
        x (np.array): centre (m,) or batch of centres (k, m), m in {2, 3}
        t (float): time, > 0
        density (callable): vectorized density
        spec (QuadSpec): tolerances
        singular_point (np.array, optional): singular point of the density
        gaussian_derivative (sequence, optional): derivative counts on Gamma'
        radial_scale (float, optional): scale of the density near its
            singular point
        density_sup (float, optional): bound of |density| outside the
            truncation radius, used in the tail bound

    Returns:
        QuadResult with a value per centre
    """
    spec = spec or QuadSpec()
    centres = np.asarray(x, dtype=float)
    single = centres.ndim == 1
    centres = np.atleast_2d(centres)
    dim = centres.shape[1]
    if dim not in (2, 3):
        raise DomainError(
            "Tangential dimension {} not supported".format(dim))
    if t <= 0.0:
        raise DomainError("Convolution needs t > 0, got {}".format(t))
    if gaussian_derivative is None:
        derivative = np.zeros(dim, dtype=int)
    else:
        derivative = np.asarray(gaussian_derivative, dtype=int)
    driver = _TangentialConvolution(centres, t, density, spec, derivative,
                                    density_sup)
    use_singular = False
    if singular_point is not None:
        singular_point = np.asarray(singular_point, dtype=float)
        closest = np.min(np.linalg.norm(centres - singular_point, axis=-1))
        use_singular = 0.9 * closest < TAIL_RADIUS * np.sqrt(t)
    if use_singular:
        result = driver.refine(lambda level: driver.singular_centred(
            level, singular_point, radial_scale))
    else:
        result = driver.refine(driver.gaussian_centred)
    if single:
        return QuadResult(float(result.value[0]), result.error_estimate,
                          result.evaluations)
    return result


def closed_form_library():
    """Integrals with known values: (name, callable returning QuadResult,
    exact value)"""
    library = []
    for power in (-0.9, -0.5, -0.1, 0.0, 0.5, 2.0):
        library.append(("power {}".format(power),
                        lambda p=power: integrate_singular_1d(
                            lambda s: s**p, 0.0, 1.0, min(p, 0.0)),
                        1.0 / (power + 1.0)))
    for power in (-0.9, -0.3):
        library.append(("upper power {}".format(power),
                        lambda p=power: integrate_singular_1d(
                            lambda s: (2.0 - s)**p, 1.0, 2.0, p, at="upper"),
                        1.0 / (power + 1.0)))
    library.append(("shifted power", lambda: integrate_singular_1d(
        lambda s: (s - 0.5)**-0.9, 0.5, 1.0, -0.9), 10 * 0.5**0.1))
    for width in (0.1, 1.0, 3.0):
        library.append(("gaussian {}".format(width),
                        lambda w=width: adaptive_quad(
                            lambda s: np.exp(-s**2 / w**2), -10 * w, 10 * w),
                        width * np.sqrt(np.pi)))
    library.append(("erf", lambda: adaptive_quad(
        lambda s: np.exp(-s**2), 0.0, 1.5), 0.5 * np.sqrt(np.pi) *
                    special.erf(1.5)))
    library.append(("power gaussian", lambda: integrate_singular_1d(
        lambda y: y**-0.4 * np.exp(-y**2), 0.0, 2.0, -0.4),
                    0.5 * special.gamma(0.3) * special.gammainc(0.3, 4.0)))
    library.append(("regular power gaussian",
                    lambda: integrate_singular_1d(lambda y: np.exp(
                        -y**2), 0.0, 2.0, -0.4, regular=True),
                    0.5 * special.gamma(0.3) * special.gammainc(0.3, 4.0)))
    library.append(("beta", lambda: integrate_singular_1d(
        lambda s: s**-0.5 * (1 - s)**0.7, 0.0, 1.0, -0.5),
                    special.beta(0.5, 1.7)))
    library.append(("product exp", lambda: adaptive_quad(
        lambda s: s * np.exp(-s), 0.0, 5.0), 1.0 - 6.0 * np.exp(-5.0)))
    library.append(("cosine", lambda: adaptive_quad(
        lambda s: np.cos(s), 0.0, np.pi / 2), 1.0))
    library.append(("square", lambda: integrate_nd(
        lambda pts: np.ones(len(pts)), [(0, 1), (0, 1)]), 1.0))
    library.append(("box gaussian", lambda: integrate_nd(
        lambda pts: np.exp(-np.sum(pts**2, axis=1)), [(-6, 6)] * 2), np.pi *
                    special.erf(6.0)**2))
    return library
