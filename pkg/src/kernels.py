"""Heat and Newtonian kernels

Gamma_d(x, t) = (4 pi t)^(-d/2) exp(-|x|^2 / 4t), N(x) = -c_d |x|^(2-d) with
c_d = 1 / (d (d - 2) omega_d), omega_d the volume of the unit ball, so that
Delta N = delta.

Derivative multi-indices are count vectors, multi_index[k] being the number
of derivatives in direction k + 1. derivative_counts builds them from the
1-based directions used throughout the lab.
"""
import logging
import functools
import numpy as np
from scipy import special
from src.errors import DomainError, SingularityError
from src.params import ForceProfiles
from src import force
from src import quad

LOGGER = logging.getLogger(__name__)


def derivative_counts(dim, *axes):
    """Count vector of D_{axes[0]} D_{axes[1]} ..., axes are 1-based"""
    counts = np.zeros(dim, dtype=int)
    for axis in axes:
        if not 1 <= axis <= dim:
            raise DomainError("Direction {} outside 1..{}".format(axis, dim))
        counts[axis - 1] += 1
    return counts


def _check_time(t):
    if np.any(np.asarray(t) <= 0.0):
        err_str = "Heat kernel needs t > 0, got {}".format(t)
        LOGGER.error(err_str)
        raise DomainError(err_str)


def _as_points(x, d):
    x = np.asarray(x, dtype=float)
    if d is not None and x.shape[-1] != d:
        raise DomainError("Expected points of dimension {}, got {}".format(
            d, x.shape[-1]))
    return x


def heat_kernel(x, t, d=None):
    """Gamma_d(x, t) for points x (..., d)"""
    _check_time(t)
    x = _as_points(x, d)
    dim = x.shape[-1]
    return (4.0 * np.pi * t)**(-0.5 * dim) * np.exp(
        -np.sum(x**2, axis=-1) / (4.0 * t))


@functools.lru_cache(maxsize=None)
def hermite_coefficients(order):
    """Integer coefficients of P_l, lowest degree first

    P_0 = 1, P_l = P_{l-1}' - 2 eta P_{l-1}, so that
    D^l exp(-eta^2) = P_l(eta) exp(-eta^2).
    """
    if order < 0:
        raise DomainError("Polynomial order must be >= 0")
    if order == 0:
        return (1, )
    previous = hermite_coefficients(order - 1)
    coeffs = [0] * (order + 1)
    for power, coeff in enumerate(previous):
        if power > 0:
            coeffs[power - 1] += power * coeff
        coeffs[power + 1] -= 2 * coeff
    return tuple(coeffs)


def hermite_poly(order, eta):
    """P_l(eta) by Horner's scheme, exact for Fraction arguments"""
    value = 0
    for coeff in reversed(hermite_coefficients(order)):
        value = value * eta + coeff
    return value


def heat_kernel_normal_deriv(x_n, t, order):
    """D^l Gamma_1(x_n, t) = (2 sqrt t)^-l P_l(eta) Gamma_1, eta = x_n / 2 sqrt t"""
    _check_time(t)
    x_n = np.asarray(x_n, dtype=float)
    root = np.sqrt(t)
    eta = x_n / (2.0 * root)
    value = hermite_poly(order, eta) * np.exp(-eta**2) / (
        2.0 * np.sqrt(np.pi) * root * (2.0 * root)**order)
    return float(value) if np.ndim(value) == 0 else value


def heat_kernel_deriv(x, t, multi_index):
    """D^m Gamma_d(x, t), product of 1-D derivatives"""
    _check_time(t)
    x = np.asarray(x, dtype=float)
    value = 1.0
    for axis, order in enumerate(multi_index):
        value = value * heat_kernel_normal_deriv(x[..., axis], t, int(order))
    return value


def heat_kernel_time_deriv(x, t):
    """D_t Gamma = Delta Gamma"""
    x = np.asarray(x, dtype=float)
    dim = x.shape[-1]
    return sum(
        heat_kernel_deriv(x, t, 2 * np.eye(dim, dtype=int)[k])
        for k in range(dim))


def newton_constant(dim):
    """c_d = 1 / (d (d - 2) omega_d)"""
    if dim < 3:
        raise DomainError(
            "Newtonian kernel implemented for d >= 3, got {}".format(dim))
    volume = np.pi**(0.5 * dim) / special.gamma(0.5 * dim + 1.0)
    return 1.0 / (dim * (dim - 2) * volume)


def _radius(x):
    radius = np.linalg.norm(x, axis=-1)
    if np.any(radius == 0.0):
        err_str = "Newtonian kernel evaluated at its singularity"
        LOGGER.error(err_str)
        raise SingularityError(err_str)
    return radius


def newton_kernel(x, d=None):
    """N(x) = -c_d |x|^(2 - d)"""
    x = _as_points(x, d)
    dim = x.shape[-1]
    return -newton_constant(dim) * _radius(x)**(2 - dim)


def newton_deriv(x, multi_index, d=None):
    """Closed form derivatives of N up to second order

    D_i N = c (d - 2) x_i / |x|^d,
    D_i D_j N = c (d - 2) (delta_ij |x|^2 - d x_i x_j) / |x|^(d + 2).
    """
    x = _as_points(x, d)
    dim = x.shape[-1]
    multi_index = np.asarray(multi_index, dtype=int)
    if len(multi_index) != dim or np.any(multi_index < 0):
        raise DomainError("Invalid multi-index {}".format(multi_index))
    total = int(np.sum(multi_index))
    if total == 0:
        return newton_kernel(x)
    if total > 2:
        raise DomainError(
            "Newtonian derivatives implemented up to order 2, got {}".format(
                total))
    radius = _radius(x)
    coeff = newton_constant(dim) * (dim - 2)
    axes = np.repeat(np.arange(dim), multi_index)
    if total == 1:
        return coeff * x[..., axes[0]] / radius**dim
    first, second = axes
    diagonal = radius**2 if first == second else 0.0
    return coeff * (diagonal - dim * x[..., first] * x[..., second]) / \
        radius**(dim + 2)


def _ball_rule(dim, radius):
    """Polar box and map to points of the ball of the given radius"""
    if dim == 2:
        box = [(0.0, radius), (0.0, 2.0 * np.pi)]

        def to_points(nodes):
            r, theta = nodes[:, 0], nodes[:, 1]
            return np.stack([r * np.cos(theta), r * np.sin(theta)],
                            axis=-1), r
    elif dim == 3:
        box = [(0.0, radius), (0.0, np.pi), (0.0, 2.0 * np.pi)]

        def to_points(nodes):
            r, theta, phi = nodes[:, 0], nodes[:, 1], nodes[:, 2]
            return np.stack([
                r * np.sin(theta) * np.cos(phi),
                r * np.sin(theta) * np.sin(phi), r * np.cos(theta)
            ],
                            axis=-1), r**2 * np.sin(theta)
    else:
        raise DomainError("Profiles implemented for n in {3, 4}")
    return box, to_points


def newton_profile(x,
                   multi_index,
                   params,
                   profiles=None,
                   spec=None,
                   weight_derivative=None):
    """Integral of D^m N(x' - y', x_n) w(y') over the support of g^T

    w is g^T, or its derivative D_k g^T when weight_derivative = k (1-based).
    """
    profiles = profiles or ForceProfiles()
    params.check_point(x)
    dim = params.n - 1
    centre = profiles.center_array(dim)
    offset = x.tangential_array - centre
    if x.normal == 0.0 and np.linalg.norm(offset) < 2.0:
        err_str = "Profile at x' = {} needs |x' - centre| >= 2 on the " \
            "boundary".format(x.tangential)
        LOGGER.error(err_str)
        raise DomainError(err_str)
    box, to_points = _ball_rule(dim, profiles.bump_radius)

    def integrand(nodes):
        local, jacobian = to_points(nodes)
        support = centre + local
        if weight_derivative is None:
            weight = force.g_tangential(support, profiles)
        else:
            weight = force.g_tangential_grad(
                support, profiles)[:, weight_derivative - 1]
        differences = np.concatenate(
            [x.tangential_array - support,
             np.full((len(support), 1), x.normal)],
            axis=-1)
        return newton_deriv(differences, multi_index) * weight * jacobian

    return quad.integrate_nd(integrand, box, spec).value


def phi_profile(x, i, params, spec=None, profiles=None):
    """phi_i(x) = int D_i D_2 N(x' - y', x_n) g^T(y') dy', i in 1..n"""
    return newton_profile(x, derivative_counts(params.n, i, 2), params,
                          profiles, spec)


def psi_profile(x, params, spec=None, profiles=None):
    """psi(x) = int D_2 N(x' - y', x_n) g^T(y') dy'"""
    return newton_profile(x, derivative_counts(params.n, 2), params,
                          profiles, spec)
