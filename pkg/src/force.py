"""Divergence free singular force

f = (0, a g^T (g^N)' h, 0, ..., 0, -a D_2 g^T g^N h) with
  g^T(y') = c exp(-1 / (r0^2 - |y' - centre|^2)) on |y' - centre| < r0,
  g^N(y_n) = y_n^(1 - beta) S(y_n), S a smooth cut-off equal to 1 on [0, 1],
  h(t) = (t - 1/2)^-alpha for t > 1/2.
"""
import logging
import functools
import numpy as np
from scipy import integrate, special
from src.errors import DomainError
from src.params import ForceProfiles
from src import quad

LOGGER = logging.getLogger(__name__)


@functools.lru_cache(maxsize=32)
def bump_normalization(radius, dim):
    """c such that c exp(-1 / (r0^2 - |y|^2)) has unit mass in R^dim"""
    sphere = 2.0 * np.pi**(0.5 * dim) / special.gamma(0.5 * dim)

    def radial(r):
        return np.exp(-1.0 / (radius**2 - r**2)) * r**(dim - 1)

    mass, _ = integrate.quad(radial, 0.0, radius, epsabs=1e-15, epsrel=1e-13)
    return 1.0 / (sphere * mass)


def _bump_parts(y, profiles):
    y = np.asarray(y, dtype=float)
    dim = y.shape[-1]
    shifted = y - profiles.center_array(dim)
    gap = profiles.bump_radius**2 - np.sum(shifted**2, axis=-1)
    inside = gap > 0.0
    safe_gap = np.where(inside, gap, 1.0)
    value = np.where(
        inside,
        bump_normalization(profiles.bump_radius, dim) *
        np.exp(-1.0 / safe_gap), 0.0)
    return shifted, safe_gap, value


def bump_profile(r, dim, profiles=None):
    """g^T as a function of the distance r to its centre"""
    profiles = profiles or ForceProfiles()
    r = np.asarray(r, dtype=float)
    gap = profiles.bump_radius**2 - r**2
    safe_gap = np.where(gap > 0.0, gap, 1.0)
    return np.where(
        gap > 0.0,
        bump_normalization(profiles.bump_radius, dim) * np.exp(-1.0 / safe_gap),
        0.0)


def g_tangential(y, profiles=None):
    """g^T at points y (..., n - 1)"""
    profiles = profiles or ForceProfiles()
    return _bump_parts(y, profiles)[2]


def g_tangential_grad(y, profiles=None):
    """Gradient of g^T, shape (..., n - 1)"""
    profiles = profiles or ForceProfiles()
    shifted, safe_gap, value = _bump_parts(y, profiles)
    return (value * (-2.0) / safe_gap**2)[..., None] * shifted


def _exp_step(u):
    safe = np.where(u > 0.0, u, 1.0)
    return np.where(u > 0.0, np.exp(-1.0 / safe), 0.0)


def _exp_step_deriv(u):
    safe = np.where(u > 0.0, u, 1.0)
    return np.where(u > 0.0, np.exp(-1.0 / safe) / safe**2, 0.0)


def smoothstep(u):
    """B(u) = E(u) / (E(u) + E(1 - u)), E(u) = exp(-1/u), rising 0 -> 1"""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return _exp_step(u) / (_exp_step(u) + _exp_step(1.0 - u))


def smoothstep_deriv(u):
    u = np.asarray(u, dtype=float)
    inner = np.clip(u, 0.0, 1.0)
    rising, falling = _exp_step(inner), _exp_step(1.0 - inner)
    numer = _exp_step_deriv(inner) * falling + rising * _exp_step_deriv(
        1.0 - inner)
    deriv = numer / (rising + falling)**2
    return np.where((u > 0.0) & (u < 1.0), deriv, 0.0)


def cutoff(s, profiles=None):
    """S(s): 1 up to cutoff_start, 0 from cutoff_end on"""
    profiles = profiles or ForceProfiles()
    width = profiles.cutoff_end - profiles.cutoff_start
    return smoothstep((profiles.cutoff_end - np.asarray(s, dtype=float)) /
                      width)


def cutoff_deriv(s, profiles=None):
    profiles = profiles or ForceProfiles()
    width = profiles.cutoff_end - profiles.cutoff_start
    return -smoothstep_deriv(
        (profiles.cutoff_end - np.asarray(s, dtype=float)) / width) / width


def _check_height(y_n):
    y_n = np.asarray(y_n, dtype=float)
    if np.any(y_n < 0.0):
        err_str = "Force profile evaluated below the boundary"
        LOGGER.error(err_str)
        raise DomainError(err_str)
    return y_n


def g_normal(y_n, params, profiles=None):
    """g^N(y_n) = y_n^(1 - beta) S(y_n)"""
    y_n = _check_height(y_n)
    return y_n**(1.0 - params.beta) * cutoff(y_n, profiles)


def g_normal_deriv(y_n, params, profiles=None, regular=False):
    """(g^N)'(y_n) = (1 - beta) y^-beta S + y^(1 - beta) S'

    With regular=True the singular factor y^-beta is split off and
    (1 - beta) S + y S' is returned, finite at y_n = 0.
    """
    y_n = _check_height(y_n)
    beta = params.beta
    smooth = (1.0 - beta) * cutoff(y_n, profiles) + y_n * cutoff_deriv(
        y_n, profiles)
    if regular:
        return smooth
    with np.errstate(divide="ignore"):
        return y_n**(-beta) * smooth


def h_time(t, params):
    """(t - 1/2)^-alpha for t > 1/2, else 0"""
    t = np.asarray(t, dtype=float)
    lag = np.where(t > 0.5, t - 0.5, 1.0)
    value = np.where(t > 0.5, lag**(-params.alpha), 0.0)
    return float(value) if value.ndim == 0 else value


def force_at(y, t, params, profiles=None):
    """Force vector at a point of the closed half space"""
    profiles = profiles or ForceProfiles()
    params.check_point(y)
    tangential = y.tangential_array
    force = np.zeros(params.n)
    time_factor = h_time(t, params)
    if time_factor == 0.0:
        return force
    bump = g_tangential(tangential, profiles)
    if bump != 0.0:
        force[1] = params.a * bump * g_normal_deriv(y.normal, params,
                                                    profiles) * time_factor
    force[-1] = -params.a * g_tangential_grad(
        tangential, profiles)[1] * g_normal(y.normal, params,
                                            profiles) * time_factor
    return force


def _power_integral(exponent, lower, upper):
    """Integral of s^exponent over [lower, upper]"""
    if exponent == -1.0:
        return np.log(upper / lower)
    return (upper**(exponent + 1.0) - lower**(exponent + 1.0)) / (exponent +
                                                                  1.0)


def mixed_norm(params, profiles, q1, p1, deltas, spec=None):
    """L^q1_t L^p1_x norm of f_2 over (1/2, 1) x R^n_+, singular set cut at delta

    The norm factorizes:
    a ||h||_{L^q1(1/2 + delta, 1)} ||g^T||_{L^p1} ||(g^N)'||_{L^p1(delta, 2)}.
    Returns one row per delta, the sequence stays bounded iff
    q1 < 1 / alpha and p1 < 1 / beta.
    """
    profiles = profiles or ForceProfiles()
    dim = params.n - 1
    sphere = 2.0 * np.pi**(0.5 * dim) / special.gamma(0.5 * dim)
    radius = profiles.bump_radius
    coefficient = bump_normalization(radius, dim)
    bump = quad.adaptive_quad(
        lambda r: sphere * (coefficient * np.exp(-1.0 / (radius**2 - r**2)))
        **p1 * r**(dim - 1), 0.0, radius, spec)
    tail = quad.adaptive_quad(
        lambda y: abs(g_normal_deriv(y, params, profiles))**p1,
        profiles.cutoff_start, profiles.cutoff_end, spec)
    rows = []
    for delta in deltas:
        time_part = _power_integral(-params.alpha * q1, delta, 0.5)
        normal_part = (1.0 - params.beta)**p1 * _power_integral(
            -params.beta * p1, delta, profiles.cutoff_start) + tail.value
        norm = params.a * time_part**(1.0 / q1) * bump.value**(
            1.0 / p1) * normal_part**(1.0 / p1)
        rows.append({"delta": float(delta), "norm": float(norm)})
    LOGGER.info("Mixed norm (q1 = {}, p1 = {}): {}".format(
        q1, p1, ", ".join("{:.4g}".format(row["norm"]) for row in rows)))
    return rows
