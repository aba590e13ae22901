"""Velocity and pressure generated by the singular force

Every field is reduced to products of 1-D integrals and one smooth
tangential integral. With h(tau) = (tau - 1/2)^-alpha, sigma = t - tau and

  s_sigma        = Gamma'(., sigma) * g^T, radial around the force centre,
  A_l(xi, sigma) = int_0^2 (g^N)'(y) D^l Gamma_1(xi + y, sigma) dy,
  T_{j,mu}(z_n)  = int D_j s_sigma(x' - z') D^mu N(z', z_n) dz'
                   (T_{-,mu} carries s_sigma itself),

the pieces read
  W_i   = -4a int h int_0^{x_n} A_0(x_n - z_n) T_{2,e_i}(z_n) dz_n dtau,
  W^G_i = -4a int h int_0^{x_n} A_0(x_n - z_n) T_{i,e_n}(z_n) dz_n dtau,
  B^w_i = -4a int h A_l(x_n) T_{2,e_i}(0) dtau        (l-th x_n derivative),
  Pi^B  =   a int h A_1(0) T_{-,e_2}(x_n) dtau,
  Pi^G  =   a int h A_0(0) T_{-,e_2+e_n}(x_n) dtau,
  V_2   =   a int h s_sigma(x') int (g^N)'(y) [Gamma_1(x_n - y) - Gamma_1(x_n + y)] dy dtau,
  V_n   =  -a int h D_2 s_sigma(x') int g^N(y) [...] dy dtau,
and w = V + W, Pi = 4 (Pi^G + Pi^B), D_{x_n} w_i = D_{x_n} V_i + D_2 W^G_i + B^w_i.

The tangential integrals use polar coordinates around x' - centre, which
keeps the Newtonian singularity outside the disc for points of the far
region |x' - centre| >= 2.
"""
import logging
import numpy as np
from scipy import special
from src.errors import AccuracyError, DomainError
from src.params import FieldSample, ForceProfiles, QuadSpec, SpaceTimePoint
from src.utils_dir.parallel import parallel_map
from src import force
from src import kernels
from src import quad

LOGGER = logging.getLogger(__name__)

FAR_DISTANCE = 2.0
SINGULAR_CLEARANCE = 0.5
PROFILE_ORDERS = (8, 12)
SMALL_SIGMA = 1e-6
DISC_LEVELS = {2: ((8, 32), (12, 64)), 3: ((6, 12), (8, 20))}
DISC_PANEL = 0.15
XI_STEPS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
XI_ORDERS = (8, 12)
INNER_TIGHTENING = 10.0
OUTER_LOOSENING = 100.0
ACCEPT_LOOSENING = 1e4
MAX_POINTS = 2000000
COST_BUDGET = 5 * 10**9


def _shell_factors(z):
    """(1 - e^-2z) / 2z and (z (1 + e^-2z) - (1 - e^-2z)) / 2z^2"""
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0.0, z, 1.0)
    first = np.where(z > 0.0, -np.expm1(-2.0 * safe) / (2.0 * safe),
                     1.0 - z)
    direct = (safe * (1.0 + np.exp(-2.0 * safe)) +
              np.expm1(-2.0 * safe)) / (2.0 * safe**2)
    series = z / 3.0 - z**2 / 3.0 + z**3 / 5.0
    second = np.where(z > 1e-3, direct, series)
    return first, second


class RadialProfile():
    """s_sigma and its radial derivative as functions of the distance rho to
    the force centre

    Angular integrals of the Gaussian are exact: a modified Bessel function
    in the plane, a hyperbolic sine in three tangential dimensions. The
    remaining integral over the bump radius uses composite Gauss rules of two
    orders, their difference being the error estimate. Below SMALL_SIGMA the
    profile is replaced by its limit g^T.
    """
    def __init__(self, sigma, dim, profiles=None):
        if dim not in DISC_LEVELS:
            raise DomainError(
                "Tangential dimension {} not supported".format(dim))
        self.sigma = sigma
        self.dim = dim
        self.profiles = profiles or ForceProfiles()
        radius = self.profiles.bump_radius
        self.rules = []
        if sigma < SMALL_SIGMA:
            return
        width = min(0.5 * np.sqrt(sigma), radius / 16.0)
        edges = np.linspace(0.0, radius, int(np.ceil(radius / width)) + 1)
        for order in PROFILE_ORDERS:
            nodes, weights = quad.panel_rule(edges, order)
            bump = force.bump_profile(nodes, dim, self.profiles)
            self.rules.append((nodes, weights * bump))

    def _single(self, rho, nodes, weights, derivative):
        sigma = self.sigma
        rho_col, r = rho[:, None], nodes[None, :]
        z = rho_col * r / (2.0 * sigma)
        gauss = np.exp(-(rho_col - r)**2 / (4.0 * sigma))
        if self.dim == 2:
            if derivative:
                shell = (r * special.i1e(z) -
                         rho_col * special.i0e(z)) / (2.0 * sigma)
            else:
                shell = special.i0e(z)
            values = shell * gauss * r / (2.0 * sigma)
        else:
            first, second = _shell_factors(z)
            if derivative:
                shell = (r * second - rho_col * first) / (2.0 * sigma)
            else:
                shell = first
            values = shell * gauss * r**2 / np.sqrt(4.0 * np.pi * sigma**3)
        return values @ weights

    def _limit(self, rho, derivative):
        """g^T for sigma below SMALL_SIGMA, error sigma |Delta g^T|"""
        radius = self.profiles.bump_radius

        def laplacian(r):
            gap = np.where(r < radius, radius**2 - r**2, 1.0)
            return force.bump_profile(r, self.dim, self.profiles) * (
                4.0 * r**2 / gap**4 - 8.0 * r**2 / gap**3 -
                2.0 * self.dim / gap**2)

        value = force.bump_profile(rho, self.dim, self.profiles)
        if not derivative:
            return value, self.sigma * np.abs(laplacian(rho))
        gap = np.where(rho < radius, radius**2 - rho**2, 1.0)
        step = 1e-4
        slope = (laplacian(rho + step) -
                 laplacian(np.abs(rho - step))) / (2.0 * step)
        return -2.0 * rho * value / gap**2, self.sigma * np.abs(slope)

    def __call__(self, rho, derivative=False):
        """Values at rho and their error estimate"""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if self.sigma < SMALL_SIGMA:
            return self._limit(rho, derivative)
        coarse, fine = [
            self._single(rho, nodes, weights, derivative)
            for nodes, weights in self.rules
        ]
        return fine, np.abs(fine - coarse)


class DiscLayer():
    """T(z_n) = int D_j s_sigma(x' - z') D^mu N(z', z_n) dz' for arrays of z_n

    The disc is centred at x' - centre with radius r0 + 10 sqrt(sigma),
    capped to stay clear of the Newtonian singularity at z' = 0. Two rules
    of increasing order give the error estimate, a capped disc adds the
    Gaussian tail bound.
    """
    def __init__(self, offset, sigma, profile):
        self._log = logging.getLogger(self.__class__.__name__)
        self.offset = np.asarray(offset, dtype=float)
        self.sigma = sigma
        self.dim = len(self.offset)
        bump_radius = profile.profiles.bump_radius
        reach = bump_radius + quad.TAIL_RADIUS * np.sqrt(sigma)
        self.radius = min(reach,
                          np.linalg.norm(self.offset) - SINGULAR_CLEARANCE)
        self.tail_mass = 0.0
        if self.radius < reach:
            self.tail_mass = quad.gaussian_tail_mass(
                self.dim, self.radius - bump_radius, sigma)
            self._log.debug("Disc capped at {:.3f}, tail mass {:.3g}".format(
                self.radius, self.tail_mass))
        panels = max(4, int(np.ceil(self.radius / DISC_PANEL)))
        edges = np.linspace(0.0, self.radius, panels + 1)
        self.levels = []
        for order, count in DISC_LEVELS[self.dim]:
            rho, weights = quad.panel_rule(edges, order)
            directions, direction_weights = quad.sphere_directions(
                self.dim, count)
            value, value_error = profile(rho)
            deriv, deriv_error = profile(rho, derivative=True)
            self.levels.append({
                "points": self.offset - rho[:, None, None] * directions[None],
                "radial": weights * rho**(self.dim - 1),
                "directions": directions,
                "direction_weights": direction_weights,
                "profile": (value, value_error),
                "deriv": (deriv, deriv_error)
            })
        self.evaluations = 0

    def _level_sum(self, level, s_axis, multi_index, z_n):
        if s_axis is None:
            radial, radial_error = level["profile"]
            angular = level["direction_weights"]
        else:
            radial, radial_error = level["deriv"]
            angular = level["direction_weights"] * \
                level["directions"][:, s_axis - 1]
        weights = (level["radial"] * radial)[:, None] * angular[None, :]
        error_weights = (level["radial"] *
                         radial_error)[:, None] * np.abs(angular)[None, :]
        points = level["points"]
        chunk = max(1, MAX_POINTS // points[..., 0].size)
        totals, errors, rings = [], [], []
        for start in range(0, len(z_n), chunk):
            heights = z_n[start:start + chunk]
            full = np.concatenate([
                np.broadcast_to(points[None],
                                (len(heights), ) + points.shape),
                np.broadcast_to(heights[:, None, None, None],
                                (len(heights), ) + points.shape[:2] + (1, ))
            ],
                                  axis=-1)
            newton = kernels.newton_deriv(full, multi_index)
            self.evaluations += newton.size
            totals.append(np.sum(newton * weights[None], axis=(1, 2)))
            errors.append(
                np.sum(np.abs(newton) * error_weights[None], axis=(1, 2)))
            rings.append(
                np.max(np.abs(newton[:, -1, :]), axis=-1) *
                np.sum(np.abs(weights)))
        return (np.concatenate(totals), np.concatenate(errors),
                np.concatenate(rings))

    def __call__(self, s_axis, multi_index, z_n):
        """Values over the heights z_n and their error estimates

        Args:
            s_axis (int): direction j of D_j s_sigma, None for s_sigma
            multi_index (sequence): derivative counts on N
            z_n (array): heights
        """
        z_n = np.atleast_1d(np.asarray(z_n, dtype=float))
        coarse, _, _ = self._level_sum(self.levels[0], s_axis, multi_index,
                                       z_n)
        fine, profile_error, ring = self._level_sum(self.levels[1], s_axis,
                                                    multi_index, z_n)
        return fine, np.abs(fine - coarse) + profile_error + \
            ring * self.tail_mass


class _FieldEvaluator():
    """Shared machinery for the fields at one space-time point"""
    def __init__(self, x, params, spec, profiles):
        self._log = logging.getLogger(self.__class__.__name__)
        params.check_point(x.point)
        self.x = x
        self.point = x.point
        self.t = x.t
        self.params = params
        self.spec = spec or QuadSpec()
        self.profiles = profiles or ForceProfiles()
        self.dim = params.n
        self.offset = self.point.tangential_array - \
            self.profiles.center_array(self.dim - 1)
        self.inner = self.spec.tightened(INNER_TIGHTENING)
        self.evaluations = 0
        self._layer = (None, None)

    def check_far(self):
        distance = np.linalg.norm(self.offset)
        if distance < FAR_DISTANCE:
            err_str = "|x' - centre| = {:.3f} outside the far region".format(
                distance)
            self._log.error(err_str)
            raise DomainError(err_str)

    def profile(self, sigma):
        return RadialProfile(sigma, self.dim - 1, self.profiles)

    def layer(self, sigma):
        cached_sigma, cached = self._layer
        if cached_sigma != sigma:
            cached = DiscLayer(self.offset, sigma, self.profile(sigma))
            self._layer = (sigma, cached)
        return cached

    def normal_factor(self, xi, sigma, order):
        """A_order(xi, sigma) for an array of xi"""
        params, profiles = self.params, self.profiles
        xi = np.atleast_1d(np.asarray(xi, dtype=float))

        def smooth(y):
            return force.g_normal_deriv(
                y, params, profiles,
                regular=True) * kernels.heat_kernel_normal_deriv(
                    xi + y, sigma, order)

        return quad.integrate_singular_1d(
            smooth,
            0.0,
            2.0,
            -params.beta,
            spec=self.inner,
            regular=True,
            points=[profiles.cutoff_start, profiles.cutoff_end])

    def layer_values(self, sigma, s_axis, multi_index, z_n):
        layer = self.layer(sigma)
        before = layer.evaluations
        values = layer(s_axis, multi_index, z_n)
        self.evaluations += layer.evaluations - before
        return values

    def normal_integral(self, sigma, s_axis, multi_index, order=0):
        """int_0^{x_n} A_order(x_n - z_n) T(z_n) dz_n"""
        x_n = self.point.normal
        root = np.sqrt(sigma)
        edges = [0.0] + [root * step for step in XI_STEPS
                         if root * step < x_n] + [x_n]
        results = []
        for order_xi in XI_ORDERS:
            xi, weights = quad.panel_rule(edges, order_xi)
            factor = self.normal_factor(xi, sigma, order)
            values, errors = self.layer_values(sigma, s_axis, multi_index,
                                               x_n - xi)
            results.append(
                (np.sum(weights * factor.value * values),
                 np.sum(weights * (np.abs(factor.value) * errors +
                                   factor.error_estimate * np.abs(values)))))
        (coarse, _), (fine, error) = results
        return fine, abs(fine - coarse) + error

    def time_integral(self, kernel, exponent, points=None):
        """int_{1/2}^t h(tau) kernel(t - tau) dtau

        kernel returns (value, error), values may be arrays. The right half
        of the interval is written in sigma and carries sigma^exponent.
        """
        alpha = self.params.alpha
        lag = self.t - 0.5
        half = 0.5 * lag
        outer = self.spec.loosened(OUTER_LOOSENING)

        def stacked(sigma):
            value, error = kernel(sigma)
            return np.concatenate([np.atleast_1d(value),
                                   np.atleast_1d(error)])

        left = quad.integrate_singular_1d(lambda tau: stacked(self.t - tau),
                                          0.5,
                                          0.5 + half,
                                          -alpha,
                                          spec=outer,
                                          regular=True)
        right = quad.integrate_singular_1d(
            lambda sigma: (lag - sigma)**(-alpha) * stacked(sigma),
            0.0,
            half,
            exponent,
            spec=outer,
            points=points)
        total = left.value + right.value
        size = len(total) // 2
        value = total[:size]
        error = left.error_estimate + right.error_estimate + np.abs(
            total[size:])
        if self.evaluations > COST_BUDGET:
            self._log.warning(
                "Field at {} used {} kernel evaluations".format(
                    self.point.as_array(), self.evaluations))
        accepted = self.spec.loosened(ACCEPT_LOOSENING)
        if np.max(error) > accepted.tolerance(value):
            err_str = "Field at {}, t = {}: error {} above tolerance".format(
                self.point.as_array(), self.t, np.max(error))
            self._log.warning(err_str)
            raise AccuracyError(err_str, estimate=value, error_estimate=error)
        return value, error

    def sample(self, component, value, error):
        scale = self.params.a
        return FieldSample(self.x, component, float(scale * value),
                           float(abs(scale) * error))


def _zero(x, component):
    return FieldSample(x, component, 0.0, 0.0)


def _check_component(i, params, tangential=False):
    upper = params.n - 1 if tangential else params.n
    if not 1 <= i <= upper:
        err_str = "Component {} outside 1..{}".format(i, upper)
        LOGGER.error(err_str)
        raise DomainError(err_str)


def _image_integral(x_n, sigma, params, profiles, spec, normal=False,
                    derivative=0):
    """D^d_{x_n} int F(y) [Gamma_1(x_n - y) - Gamma_1(x_n + y)] dy

    F is (g^N)' for the tangential component and g^N for the normal one.
    """
    breaks = [x_n, profiles.cutoff_start, profiles.cutoff_end]

    def image(y):
        return kernels.heat_kernel_normal_deriv(
            x_n - y, sigma, derivative) - kernels.heat_kernel_normal_deriv(
                x_n + y, sigma, derivative)

    if normal:
        return quad.adaptive_quad(
            lambda y: force.g_normal(y, params, profiles) * image(y), 0.0,
            2.0, spec, breaks)
    return quad.integrate_singular_1d(
        lambda y: force.g_normal_deriv(y, params, profiles, regular=True) *
        image(y),
        0.0,
        2.0,
        -params.beta,
        spec=spec,
        regular=True,
        points=breaks)


def _velocity_V(x, i, params, spec, profiles, derivative):
    _check_component(i, params)
    if x.t <= 0.5 or i not in (2, params.n):
        return _zero(x, i)
    field = _FieldEvaluator(x, params, spec, profiles)
    x_n = field.point.normal
    distance = np.linalg.norm(field.offset)
    normal = i == params.n
    if normal and distance == 0.0:
        return _zero(x, i)

    def kernel(sigma):
        profile = field.profile(sigma)
        if normal:
            value, error = profile(distance, derivative=True)
            direction = field.offset[1] / distance
            value, error = -value[0] * direction, error[0] * abs(direction)
        else:
            value, error = profile(distance)
            value, error = value[0], error[0]
        image = _image_integral(x_n, sigma, params, field.profiles,
                                field.inner, normal, derivative)
        return value * image.value, abs(value) * image.error_estimate + \
            error * abs(image.value)

    if derivative and x_n == 0.0:
        exponent, points = -0.5 * (1.0 + params.beta), None
    else:
        exponent, points = 0.0, [x_n**2]
    value, error = field.time_integral(kernel, exponent, points)
    return field.sample(i, value[0], error[0])


def velocity_V(x, i, params, spec=None, profiles=None):
    """V_i, the heat potential part of the velocity"""
    return _velocity_V(x, i, params, spec, profiles, 0)


def normal_deriv_V(x, i, params, spec=None, profiles=None):
    """D_{x_n} V_i"""
    return _velocity_V(x, i, params, spec, profiles, 1)


def velocity_W(x, i, params, spec=None, profiles=None):
    """W_i = int int L_i2(x, y, t - tau) f_2(y, tau) dy dtau"""
    _check_component(i, params)
    if x.t <= 0.5 or x.point.normal == 0.0:
        return _zero(x, i)
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    counts = kernels.derivative_counts(params.n, i)
    value, error = field.time_integral(
        lambda sigma: field.normal_integral(sigma, 2, counts),
        0.5 * (1.0 - params.beta), [field.point.normal**2])
    return field.sample(i, -4.0 * value[0], 4.0 * error[0])


def velocity_WG(x, i, params, spec=None, profiles=None,
                tangential_derivative=False):
    """W^G_i = int int L_ni f_2, or D_{x_2} W^G_i"""
    _check_component(i, params, tangential=True)
    if x.t <= 0.5 or x.point.normal == 0.0:
        return _zero(x, i)
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    n = params.n
    if tangential_derivative:
        counts = kernels.derivative_counts(n, 2, n)
    else:
        counts = kernels.derivative_counts(n, n)
    value, error = field.time_integral(
        lambda sigma: field.normal_integral(sigma, i, counts),
        0.5 * (1.0 - params.beta), [field.point.normal**2])
    return field.sample(i, -4.0 * value[0], 4.0 * error[0])


def bad_term_Bw(x, i, params, spec=None, profiles=None, order=0):
    """D^order_{x_n} B^w_i, the boundary layer part of D_{x_n} W_i

    On the boundary the order is limited by integrability,
    (beta + order) / 2 < 1.
    """
    _check_component(i, params, tangential=True)
    if x.t <= 0.5:
        return _zero(x, i)
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    x_n = field.point.normal
    if x_n == 0.0:
        exponent = -0.5 * (params.beta + order)
        if exponent <= -1.0:
            raise DomainError(
                "D^{} B^w is not defined on the boundary".format(order))
        points = None
    else:
        exponent, points = 0.0, [x_n**2]
    counts = kernels.derivative_counts(params.n, i)

    def kernel(sigma):
        factor = field.normal_factor(x_n, sigma, order)
        values, errors = field.layer_values(sigma, 2, counts, 0.0)
        return factor.value[0] * values[0], abs(factor.value[0]) * errors[0] \
            + factor.error_estimate * abs(values[0])

    value, error = field.time_integral(kernel, exponent, points)
    return field.sample(i, -4.0 * value[0], 4.0 * error[0])


def normal_deriv_W_direct(x, i, params, spec=None, profiles=None):
    """D_{x_n} W_i by differentiating the z_n integral of W_i"""
    _check_component(i, params)
    if x.t <= 0.5:
        return _zero(x, i)
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    x_n = field.point.normal
    counts = kernels.derivative_counts(params.n, i)

    def kernel(sigma):
        factor = field.normal_factor(0.0, sigma, 0)
        values, errors = field.layer_values(sigma, 2, counts, x_n)
        value = factor.value[0] * values[0]
        error = abs(factor.value[0]) * errors[0] + \
            factor.error_estimate * abs(values[0])
        if x_n > 0.0:
            inner, inner_error = field.normal_integral(sigma, 2, counts, 1)
            value, error = value + inner, error + inner_error
        return value, error

    value, error = field.time_integral(kernel, -0.5 * params.beta,
                                       [x_n**2] if x_n > 0.0 else None)
    return field.sample(i, -4.0 * value[0], 4.0 * error[0])


def pressure_PiB_split(x, params, spec=None, profiles=None):
    """Pi^B = I + J, I = a psi(x) int h A_1(0, sigma) dtau

    psi(x) = int D_2 N(x' - y', x_n) g^T(y') dy' is the limit of the layer
    as sigma -> 0, J carries the difference.
    """
    if x.t <= 0.5:
        return {"I": _zero(x, "pressure"), "J": _zero(x, "pressure")}
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    x_n = field.point.normal
    psi = kernels.psi_profile(field.point, params, field.inner,
                              field.profiles)
    counts = kernels.derivative_counts(params.n, 2)

    def kernel(sigma):
        factor = field.normal_factor(0.0, sigma, 1)
        values, errors = field.layer_values(sigma, None, counts, x_n)
        scale = factor.value[0]
        return np.array([scale * psi, scale * (values[0] - psi)]), np.array([
            factor.error_estimate * abs(psi),
            abs(scale) * errors[0] + factor.error_estimate *
            abs(values[0] - psi)
        ])

    value, error = field.time_integral(kernel, -0.5 * (1.0 + params.beta))
    return {
        "I": field.sample("pressure", value[0], error[0]),
        "J": field.sample("pressure", value[1], error[1])
    }


def pressure_PiB(x, params, spec=None, profiles=None):
    """Pi^B, the boundary layer part of the pressure"""
    split = pressure_PiB_split(x, params, spec, profiles)
    return FieldSample(x, "pressure", split["I"].value + split["J"].value,
                       split["I"].error_estimate + split["J"].error_estimate)


def pressure_PiG(x, params, spec=None, profiles=None):
    """Pi^G, zero on the boundary"""
    if x.t <= 0.5 or x.point.normal == 0.0:
        return _zero(x, "pressure")
    field = _FieldEvaluator(x, params, spec, profiles)
    field.check_far()
    x_n = field.point.normal
    counts = kernels.derivative_counts(params.n, 2, params.n)

    def kernel(sigma):
        factor = field.normal_factor(0.0, sigma, 0)
        values, errors = field.layer_values(sigma, None, counts, x_n)
        return factor.value[0] * values[0], abs(factor.value[0]) * errors[0] \
            + factor.error_estimate * abs(values[0])

    value, error = field.time_integral(kernel, -0.5 * params.beta)
    return field.sample("pressure", value[0], error[0])


def normal_deriv_w(x, i, params, spec=None, profiles=None):
    """D_{x_n} w_i = D_{x_n} V_i + D_{x_2} W^G_i + B^w_i"""
    pieces = [
        normal_deriv_V(x, i, params, spec, profiles),
        velocity_WG(x, i, params, spec, profiles, tangential_derivative=True),
        bad_term_Bw(x, i, params, spec, profiles)
    ]
    return FieldSample(x, i, sum(piece.value for piece in pieces),
                       sum(piece.error_estimate for piece in pieces))


def velocity(x, i, params, spec=None, profiles=None):
    """w_i = V_i + W_i"""
    first = velocity_V(x, i, params, spec, profiles)
    second = velocity_W(x, i, params, spec, profiles)
    return FieldSample(x, i, first.value + second.value,
                       first.error_estimate + second.error_estimate)


def pressure(x, params, spec=None, profiles=None):
    """Pi = 4 (Pi^G + Pi^B)"""
    good = pressure_PiG(x, params, spec, profiles)
    bad = pressure_PiB(x, params, spec, profiles)
    return FieldSample(x, "pressure", 4.0 * (good.value + bad.value),
                       4.0 * (good.error_estimate + bad.error_estimate))


FIELDS = {
    "V": velocity_V,
    "dnV": normal_deriv_V,
    "W": velocity_W,
    "WG": velocity_WG,
    "d2WG": lambda x, i, params, spec, profiles: velocity_WG(
        x, i, params, spec, profiles, tangential_derivative=True),
    "Bw": bad_term_Bw,
    "dnW": normal_deriv_W_direct,
    "dnw": normal_deriv_w,
    "w": velocity,
}
PRESSURES = {"PiB": pressure_PiB, "PiG": pressure_PiG, "Pi": pressure}


def _evaluate(job):
    name, x, component, params, spec, profiles = job
    if name in PRESSURES:
        return PRESSURES[name](x, params, spec, profiles)
    return FIELDS[name](x, component, params, spec, profiles)


def evaluate_batch(points,
                   name,
                   component,
                   params,
                   spec=None,
                   profiles=None,
                   workers=1):
    """One field at many space-time points, samples in input order"""
    if name not in FIELDS and name not in PRESSURES:
        raise DomainError("Unknown field '{}'".format(name))
    jobs = [(name, x, component, params, spec, profiles) for x in points]
    return parallel_map(_evaluate, jobs, workers)


def _bump_1d(s, centre, half_width, order):
    u = (s - centre) / half_width
    inside = np.abs(u) < 1.0
    value = np.where(inside, (1.0 - u**2)**order, 0.0)
    deriv = np.where(inside,
                     -2.0 * order * u * (1.0 - u**2)**(order - 1) / half_width,
                     0.0)
    return value, deriv


def weak_divergence(center,
                    half_width,
                    t,
                    params,
                    spec=None,
                    profiles=None,
                    order=3,
                    nodes=4,
                    workers=1):
    """int w . grad zeta for zeta a product of (1 - u^2)^order bumps

    The cube of the given half width around center must lie in the far
    region and inside the half space. Returns the residual and the scale
    sum_i int |w_i D_i zeta|.
    """
    params.check_point(center)
    centre = center.as_array()
    if center.normal - half_width <= 0.0:
        raise DomainError("Test cube leaves the half space")
    dim = params.n
    box = [(c_k - half_width, c_k + half_width) for c_k in centre]
    rules = [quad.gauss_legendre(nodes, lo, hi) for lo, hi in box]
    grids = np.meshgrid(*[rule[0] for rule in rules], indexing="ij")
    weight_grids = np.meshgrid(*[rule[1] for rule in rules], indexing="ij")
    coords = np.stack([grid.ravel() for grid in grids], axis=-1)
    weights = np.prod([grid.ravel() for grid in weight_grids], axis=0)
    parts = [
        _bump_1d(coords[:, k], centre[k], half_width, order)
        for k in range(dim)
    ]
    points = [SpaceTimePoint.from_coords(c[:-1], c[-1], t) for c in coords]
    residual, scale = 0.0, 0.0
    for i in range(1, dim + 1):
        gradient = np.prod([
            parts[k][1] if k == i - 1 else parts[k][0] for k in range(dim)
        ],
                           axis=0)
        samples = evaluate_batch(points, "w", i, params, spec, profiles,
                                 workers)
        values = np.array([sample.value for sample in samples])
        residual += float(np.sum(weights * values * gradient))
        scale += float(np.sum(weights * np.abs(values * gradient)))
    LOGGER.info("Weak divergence at {}: {:.3g} (scale {:.3g})".format(
        centre, residual, scale))
    return {"residual": residual, "scale": scale}
