"""Half space Stokes kernels

K_ij(x, y, t) = delta_ij (Gamma(x - y, t) - Gamma(x - y*, t)) + L_ij(x, y, t),

L_ij = -4 (1 - delta_jn) D_{x_j} int_0^{x_n} int Gamma(x - y* - z, t)
       D_{z_i} N(z) dz' dz_n.

The heat kernel factorizes into Gamma_1(x_n + y_n - z_n, t) and
Gamma'(x' - y' - z', t), so L is a 1-D integral in z_n of tangential
convolutions C_g(z_n) = int D^g Gamma'(x' - y' - z', t) D_i N(z', z_n) dz'.
Derivatives in x and t are taken analytically:
  * D_{x'} raises g,
  * D_t = Delta maps (m, g) to (m + 2, g) + sum_k (m, g + 2 e_k), m the
    order on Gamma_1,
  * D_{x_n} differentiates Gamma_1 under the integral and adds the term
    Gamma_1^(m)(y_n, t) C_g(x_n) from the upper limit.
"""
import logging
from collections import defaultdict
import numpy as np
from src.errors import DomainError
from src.params import HalfSpacePoint, KernelEval, QuadResult, QuadSpec
from src.utils_dir import pytorch as torch_utils
from src.utils_dir.parallel import parallel_map
from src import kernels
from src import quad

LOGGER = logging.getLogger(__name__)

INNER_TIGHTENING = 100.0
BOUND_FLOOR = 1e-300


def _check_indices(dim, *indices):
    for index in indices:
        if not 1 <= index <= dim:
            err_str = "Index {} outside 1..{}".format(index, dim)
            LOGGER.error(err_str)
            raise DomainError(err_str)


def _check_time(t):
    if t <= 0.0:
        err_str = "Kernels need t > 0, got {}".format(t)
        LOGGER.error(err_str)
        raise DomainError(err_str)


def bound_value(x, y, t, k=0, l_tangential=0, l_n=0):
    """e^(-y_n^2/t) / (t^k (t + x_n^2)^(l_n/2) (|x - y*|^2 + t)^((n + |l'|)/2))"""
    dim = x.dim
    distance_sq = float(np.sum((x.as_array() - y.reflected())**2))
    return np.exp(-y.normal**2 / t) / (t**k * (t + x.normal**2)**(0.5 * l_n) *
                                       (distance_sq + t)**(0.5 *
                                                           (dim + l_tangential)))


def kernel_terms(dim, j, k=0, l_prime=0, l_n=0):
    """Terms (kind, m, g, coeff) of D_t^k D_{x_n}^l_n D_{x'}^l' of L_ij

    kind is "integral" or "boundary", m the derivative order on Gamma_1 and
    g the derivative counts on Gamma'. l_prime is a tangential direction
    (1-based) or 0.
    """
    if k not in (0, 1) or l_n not in (0, 1) or k + l_n + bool(l_prime) > 2:
        raise DomainError(
            "Derivatives limited to k, l_n <= 1, |l'| <= 1, order <= 2")
    tangential = dim - 1
    unit = np.eye(tangential, dtype=int)
    terms = [("integral", 0, tuple(unit[j - 1]), 1)]
    if l_n:
        terms = [(kind, m + 1, g, c) for kind, m, g, c in terms] + \
            [("boundary", m, g, c) for _, m, g, c in terms]
    if k:
        raised = []
        for kind, m, g, c in terms:
            raised.append((kind, m + 2, g, c))
            raised.extend((kind, m, tuple(np.add(g, 2 * unit[q])), c)
                          for q in range(tangential))
        terms = raised
    if l_prime:
        _check_indices(tangential, l_prime)
        terms = [(kind, m, tuple(np.add(g, unit[l_prime - 1])), c)
                 for kind, m, g, c in terms]
    merged = defaultdict(int)
    for kind, m, g, c in terms:
        merged[(kind, m, g)] += c
    return [(kind, m, g, c) for (kind, m, g), c in merged.items() if c]


class _LayerConvolutions():
    """Tangential convolutions C_g(z_n) shared by the terms of one kernel"""
    def __init__(self, offset, t, i, derivatives, spec):
        self._log = logging.getLogger(self.__class__.__name__)
        self.offset = offset
        self.t = t
        self.i = i
        self.derivatives = sorted(set(derivatives))
        self.spec = spec
        self.dim = len(offset) + 1

    def __call__(self, z_n):
        dim, i = self.dim, self.i
        if z_n == 0.0 and i == dim:
            err_str = "Normal Newtonian layer undefined on the boundary"
            self._log.error(err_str)
            raise DomainError(err_str)
        counts = kernels.derivative_counts(dim, i)

        def density(z):
            points = np.concatenate(
                [z, np.full(z.shape[:-1] + (1, ), z_n)], axis=-1)
            return kernels.newton_deriv(points, counts)

        return {
            g: quad.convolve_tangential(self.offset,
                                        self.t,
                                        density,
                                        self.spec,
                                        singular_point=np.zeros(dim - 1),
                                        gaussian_derivative=g,
                                        radial_scale=z_n or None)
            for g in self.derivatives
        }


def _evaluate_terms(x, y, t, i, terms, spec):
    """-4 times the sum of the terms, with error estimate"""
    inner = spec.tightened(INNER_TIGHTENING)
    layers = _LayerConvolutions(x.tangential_array - y.tangential_array, t, i,
                                [g for _, _, g, _ in terms], inner)
    integral = [term for term in terms if term[0] == "integral"]
    boundary = [term for term in terms if term[0] == "boundary"]
    value, error, evaluations = 0.0, 0.0, 0
    if integral and x.normal > 0.0:

        def integrand(z_n):
            convolutions = layers(z_n)
            total, total_error = 0.0, 0.0
            for _, m, g, coeff in integral:
                factor = coeff * kernels.heat_kernel_normal_deriv(
                    x.normal + y.normal - z_n, t, m)
                total += factor * convolutions[g].value
                total_error += abs(factor) * convolutions[g].error_estimate
            return np.array([total, total_error])

        result = quad.adaptive_quad(integrand, 0.0, x.normal, spec)
        value += result.value[0]
        error += result.error_estimate + abs(result.value[1])
        evaluations += result.evaluations
    if boundary:
        convolutions = layers(x.normal)
        for _, m, g, coeff in boundary:
            factor = coeff * kernels.heat_kernel_normal_deriv(y.normal, t, m)
            value += factor * convolutions[g].value
            error += abs(factor) * convolutions[g].error_estimate
    return QuadResult(-4.0 * value, 4.0 * error, evaluations)


def L_tensor(x, y, t, i, j, spec=None, k=0, l_prime=0, l_n=0):
    """D_t^k D_{x_n}^l_n D_{x'}^l' L_ij(x, y, t)

    Args:
        x, y (HalfSpacePoint): points of the closed half space
        t (float): time, > 0
        i, j (int): components, 1..n
        spec (QuadSpec): tolerances
        k, l_n (int): time and normal derivative orders, 0 or 1
        l_prime (int): tangential derivative direction, 0 for none

    Returns:
        KernelEval, bound_value being the pointwise bound with constant 1
    """
    spec = spec or QuadSpec()
    _check_time(t)
    dim = x.dim
    if y.dim != dim:
        raise DomainError("Points of different dimension")
    _check_indices(dim, i, j)
    bound = bound_value(x, y, t, k, int(bool(l_prime)), l_n)
    if j == dim:
        return KernelEval(0.0, 0.0, bound)
    terms = kernel_terms(dim, j, k, l_prime, l_n)
    result = _evaluate_terms(x, y, t, i, terms, spec)
    return KernelEval(float(result.value), result.error_estimate, bound)


def L_tensor_mc(x, y, t, i, j, samples=10**7, seed=1, batch_size=100000):
    """Monte Carlo oracle of L_ij with its standard error

    The tangential derivative is moved onto N, z' is drawn from the Gaussian
    Gamma'(x' - y' - ., t) and z_n uniformly from (0, x_n).
    """
    _check_time(t)
    dim = x.dim
    _check_indices(dim, i, j)
    if j == dim or x.normal == 0.0:
        return QuadResult(0.0, 0.0, 0)
    counts = kernels.derivative_counts(dim, i, j)
    centre = x.tangential_array - y.tangential_array
    total, total_sq = 0.0, 0.0
    for stream, normals in enumerate(
            torch_utils.normal_batches(samples, dim - 1, seed, batch_size)):
        size = len(normals)
        uniforms = next(
            torch_utils.uniform_batches(size, 1, seed, size, stream + 1))
        z_n = x.normal * uniforms[:, 0]
        z_t = centre + np.sqrt(2.0 * t) * normals
        points = np.concatenate([z_t, z_n[:, None]], axis=-1)
        values = -4.0 * x.normal * kernels.heat_kernel_normal_deriv(
            x.normal + y.normal - z_n, t, 0) * kernels.newton_deriv(
                points, counts)
        total += float(np.sum(values))
        total_sq += float(np.sum(values**2))
    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0)
    return QuadResult(mean, float(np.sqrt(variance / samples)), samples)


def green_tensor(x, y, t, i, j, spec=None):
    """K_ij(x, y, t) with its error estimate"""
    _check_time(t)
    dim = x.dim
    _check_indices(dim, i, j)
    image = 0.0
    if i == j:
        image = kernels.heat_kernel(x.as_array() - y.as_array(),
                                    t) - kernels.heat_kernel(
                                        x.as_array() - y.reflected(), t)
    correction = L_tensor(x, y, t, i, j, spec)
    return QuadResult(float(image + correction.value),
                      correction.error_estimate)


def _tangential_layer(x, y, t, multi_index, spec, gaussian_derivative=None):
    """int D^m Gamma'(x' - y' - w, t) D^mu N(w, x_n) dw"""
    dim = x.dim

    def density(w):
        points = np.concatenate(
            [w, np.full(w.shape[:-1] + (1, ), x.normal)], axis=-1)
        return kernels.newton_deriv(points, multi_index)

    return quad.convolve_tangential(x.tangential_array - y.tangential_array,
                                    t,
                                    density,
                                    spec,
                                    singular_point=np.zeros(dim - 1),
                                    gaussian_derivative=gaussian_derivative,
                                    radial_scale=x.normal or None)


def pressure_kernel(x, y, t, j, spec=None):
    """P_j = 4 (1 - delta_jn) D_{x_j} (D_{x_n} + D_{y_n}) int N(x - z') Gamma(z' - y, t) dz'

    With Gamma(z' - y, t) = Gamma'(z' - y', t) Gamma_1(y_n, t) this is
    4 [Gamma_1(y_n) (Gamma' * D_j D_n N(., x_n)) + D Gamma_1(y_n)
    (Gamma' * D_j N(., x_n))] at x' - y'. The point x must be interior.
    """
    spec = spec or QuadSpec()
    _check_time(t)
    dim = x.dim
    _check_indices(dim, j)
    if j == dim:
        return QuadResult(0.0, 0.0)
    if x.normal == 0.0:
        err_str = "Pressure kernel evaluated on the boundary"
        LOGGER.error(err_str)
        raise DomainError(err_str)
    inner = spec.tightened(10.0)
    mixed = _tangential_layer(x, y, t, kernels.derivative_counts(dim, j, dim),
                              inner)
    single = _tangential_layer(x, y, t, kernels.derivative_counts(dim, j),
                               inner)
    gauss = kernels.heat_kernel_normal_deriv(y.normal, t, 0)
    gauss_deriv = kernels.heat_kernel_normal_deriv(y.normal, t, 1)
    return QuadResult(
        4.0 * (gauss * mixed.value + gauss_deriv * single.value),
        4.0 * (gauss * mixed.error_estimate +
               abs(gauss_deriv) * single.error_estimate),
        mixed.evaluations + single.evaluations)


def boundary_kernel(x, y, t, i, spec=None):
    """-4 D_{x_2} int Gamma(x - y* - z', t) D_i N(z', 0) dz', i tangential"""
    spec = spec or QuadSpec()
    _check_time(t)
    dim = x.dim
    if not 1 <= i <= dim - 1:
        raise DomainError(
            "Boundary kernel needs a tangential index, got {}".format(i))
    layer = _tangential_layer(x.with_normal(0.0), y, t,
                              kernels.derivative_counts(dim, i), spec,
                              kernels.derivative_counts(dim - 1, 2))
    factor = -4.0 * kernels.heat_kernel_normal_deriv(x.normal + y.normal, t,
                                                     0)
    return QuadResult(factor * layer.value, abs(factor) * layer.error_estimate,
                      layer.evaluations)


def _bound_entry(job):
    x, y, t, i, j, k, l_prime, l_n, spec = job
    bound = bound_value(x, y, t, k, int(bool(l_prime)), l_n)
    if bound < BOUND_FLOOR:
        return None
    return L_tensor(x, y, t, i, j, spec, k, l_prime, l_n)


def verify_L_bound(grid, spec=None, workers=1):
    """Largest ratio of |D L_ij| to its pointwise bound over a grid

    Args:
        grid (list): entries (x, y, t, i, j, k, l_prime, l_n), l_prime a
            tangential direction or 0
        spec (QuadSpec): tolerances
        workers (int): parallel workers

    Returns:
        report (dict): max ratio, its location, all ratios, skipped entries
    """
    spec = spec or QuadSpec()
    grid = list(grid)
    jobs = [tuple(entry) + (spec, ) for entry in grid]
    results = parallel_map(_bound_entry, jobs, workers)
    rows, skipped = [], 0
    for entry, result in zip(grid, results):
        if result is None:
            skipped += 1
            continue
        x, y, t, i, j, k, l_prime, l_n = entry
        rows.append({
            "x": list(x.as_array()),
            "y": list(y.as_array()),
            "t": float(t),
            "indices": [i, j],
            "orders": [k, l_prime, l_n],
            "value": result.value,
            "error": result.error_estimate,
            "bound": result.bound_value,
            "ratio": result.ratio
        })
    ratios = np.array([row["ratio"] for row in rows])
    if len(rows) == 0:
        raise DomainError("Every grid entry fell below the bound floor")
    worst = int(np.argmax(ratios))
    report = {
        "max_ratio": float(ratios[worst]),
        "argmax": rows[worst],
        "finite": bool(np.all(np.isfinite(ratios))),
        "skipped": skipped,
        "rows": rows
    }
    LOGGER.info("Kernel bound: max ratio {:.4g} over {} entries ({} skipped)"
                .format(report["max_ratio"], len(rows), skipped))
    return report


def verify_no_slip(dim=3, samples=50, seed=1, spec=None, box=3.0,
                   times=(1e-2, 1.0)):
    """Largest |K_ij(x', 0, y, t)| over a seeded sample and all i, j

    x' and y' are drawn from [-box, box]^(n-1), y_n from (0.05, 1) and t
    from the given interval.
    """
    spec = spec or QuadSpec()
    tangential = dim - 1
    lows = np.concatenate([np.full(2 * tangential, -box), [0.05, times[0]]])
    highs = np.concatenate([np.full(2 * tangential, box), [1.0, times[1]]])
    draws = torch_utils.uniform_box(samples, lows, highs, seed)
    worst, argmax = 0.0, None
    for draw in draws:
        x = HalfSpacePoint(tuple(draw[:tangential]), 0.0)
        y = HalfSpacePoint(tuple(draw[tangential:2 * tangential]),
                           draw[-2])
        t = float(draw[-1])
        for i in range(1, dim + 1):
            for j in range(1, dim + 1):
                value = abs(green_tensor(x, y, t, i, j, spec).value)
                if argmax is None or value > worst:
                    worst = value
                    argmax = {"x": list(x.as_array()),
                              "y": list(y.as_array()),
                              "t": t,
                              "indices": [i, j]}
    LOGGER.info("No-slip: max |K_ij| = {:.3g} over {} samples".format(
        worst, samples))
    return {"samples": int(samples), "max_abs": float(worst),
            "argmax": argmax}
