"""Boundary sets of the far region and their sign inequalities

For a tangential index i != 2 and x' in R^(n-1):
  A_i:  |x_i| / 2 <= |x_2| <= 2 |x_i|, |x'|^2 <= 2 (x_i^2 + x_2^2),
        |x_i| > 2 and |x_2| > 2, split by the sign of x_i x_2 into
        A_i1 (x_i x_2 > 0) and A_i2 (x_i x_2 < 0),
  B_i1: |x'| / (4 sqrt n) > |x_2| and |x_i| > 2,
  B_i2: 4 sqrt n |x'| < |x_2| and |x_2| > 2 as printed. This set is empty
        since |x_2| <= |x'|. The corrected variant reads
        4 sqrt n |x' - x_2 e_2| < |x_2|, |x_2| > 2.

The constraint |x'|^2 <= 2 (x_i^2 + x_2^2) is vacuous for n = 3.
"""
import logging
import numpy as np
from src.errors import DomainError, PropertyViolation
from src.params import ForceProfiles, RegionKind, RegionLabel
from src.utils_dir import pytorch as torch_utils
from src.utils_dir.parallel import parallel_map

LOGGER = logging.getLogger(__name__)

ORDER = (RegionKind.A_I1, RegionKind.A_I2, RegionKind.B_I1, RegionKind.B_I2)
CHUNK = 50000


def _check_index(i, n):
    if i == 2 or not 1 <= i <= n - 1:
        err_str = "Region index must lie in 1..{} and differ from 2, got {}" \
            .format(n - 1, i)
        LOGGER.error(err_str)
        raise DomainError(err_str)


def region_masks(points, i, corrected=False):
    """Membership masks of the four sets for points of shape (N, n - 1)"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[1] + 1
    _check_index(i, n)
    x_i, x_2 = points[:, i - 1], points[:, 1]
    abs_i, abs_2 = np.abs(x_i), np.abs(x_2)
    norm = np.linalg.norm(points, axis=-1)
    in_a = (0.5 * abs_i <= abs_2) & (abs_2 <= 2.0 * abs_i) & (
        norm**2 <= 2.0 * (x_i**2 + x_2**2)) & (abs_i > 2.0) & (abs_2 > 2.0)
    if corrected:
        transverse = points.copy()
        transverse[:, 1] = 0.0
        b_2 = (4.0 * np.sqrt(n) * np.linalg.norm(transverse, axis=-1) <
               abs_2) & (abs_2 > 2.0)
    else:
        b_2 = (4.0 * np.sqrt(n) * norm < abs_2) & (abs_2 > 2.0)
    return {
        RegionKind.A_I1: in_a & (x_i * x_2 > 0.0),
        RegionKind.A_I2: in_a & (x_i * x_2 < 0.0),
        RegionKind.B_I1: (norm / (4.0 * np.sqrt(n)) > abs_2) & (abs_i > 2.0),
        RegionKind.B_I2: b_2
    }


def classify(x_tangential, i, corrected=False):
    """First set containing x' in the order A_i1, A_i2, B_i1, B_i2"""
    masks = region_masks(x_tangential, i, corrected)
    for kind in ORDER:
        if masks[kind][0]:
            return RegionLabel(kind, i)
    return RegionLabel(RegionKind.NONE)


def _sampling_box(kind, i, n, patch):
    """Box containing the part of a set with |x_i|, |x_2| in the patch"""
    low, high = patch
    small = high / (4.0 * np.sqrt(n))
    lows, highs = np.full(n - 1, -high), np.full(n - 1, high)
    if kind is RegionKind.A_I1:
        lows[[i - 1, 1]], highs[[i - 1, 1]] = low, high
    elif kind is RegionKind.A_I2:
        lows[i - 1], highs[i - 1] = low, high
        lows[1], highs[1] = -high, -low
    elif kind is RegionKind.B_I1:
        lows[i - 1], highs[i - 1] = low, high
        lows[1], highs[1] = -small, small
    elif kind is RegionKind.B_I2:
        lows[:], highs[:] = -small, small
        lows[1], highs[1] = low, high
    else:
        raise DomainError("No sampling box for {}".format(kind))
    return lows, highs


def sample_region(kind,
                  i,
                  n,
                  patch=(2.0, 50.0),
                  samples=1000,
                  seed=1,
                  corrected=True,
                  stream=0,
                  max_rounds=1000):
    """Uniform samples of a set restricted to a bounded patch, by rejection"""
    _check_index(i, n)
    lows, highs = _sampling_box(kind, i, n, patch)
    accepted, count = [], 0
    for round_ in range(max_rounds):
        candidates = torch_utils.uniform_box(max(samples, 1000), lows, highs,
                                             seed,
                                             stream * max_rounds + round_)
        members = candidates[region_masks(candidates, i, corrected)[kind]]
        accepted.append(members)
        count += len(members)
        if count >= samples:
            return np.concatenate(accepted)[:samples]
    err_str = "Rejection sampling of {} found {} of {} points".format(
        kind.value, count, samples)
    LOGGER.error(err_str)
    raise DomainError(err_str)


def sample_ball(samples, dim, radius, seed, stream=0):
    """Uniform samples of the ball of the given radius"""
    directions = next(
        torch_utils.normal_batches(samples, dim, seed, samples, stream))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    radii = torch_utils.uniform_box(samples, [0.0], [1.0], seed,
                                    stream + 1)[:, 0]**(1.0 / dim)
    return radius * radii[:, None] * directions


def _slacks(kind, x, y, n, i):
    """Slack of every link of the inequality chain, >= 0 when it holds"""
    d = x - y
    d_i, d_2 = d[:, i - 1], d[:, 1]
    x_i, x_2 = x[:, i - 1], x[:, 1]
    x_sq = np.sum(x**2, axis=-1)
    d_sq = np.sum(d**2, axis=-1)
    if kind is RegionKind.A_I1:
        return np.stack([
            d_i * d_2 - 0.25 * x_i * x_2,
            0.25 * x_i * x_2 - (x_i**2 + x_2**2) / 64.0,
            (x_i**2 + x_2**2) / 64.0 - x_sq / 128.0,
            x_sq / 128.0 - d_sq / 512.0
        ],
                        axis=-1)
    if kind is RegionKind.A_I2:
        return np.stack([
            0.25 * x_i * x_2 - d_i * d_2,
            -(x_i**2 + x_2**2) / 64.0 - 0.25 * x_i * x_2,
            -x_sq / 128.0 + (x_i**2 + x_2**2) / 64.0,
            -d_sq / 512.0 + x_sq / 128.0
        ],
                        axis=-1)
    if kind is RegionKind.B_I1:
        return (d_sq - n * d_2**2 - d_sq / 64.0)[:, None]
    return (-d_sq / 64.0 - d_sq + n * d_2**2)[:, None]


INEQUALITIES = {
    RegionKind.A_I1: "(x_i - y_i)(x_2 - y_2) >= x_i x_2 / 4 >= |x' - y'|^2 / 512",
    RegionKind.A_I2: "(x_i - y_i)(x_2 - y_2) <= x_i x_2 / 4 <= -|x' - y'|^2 / 512",
    RegionKind.B_I1: "|x' - y'|^2 - n (x_2 - y_2)^2 >= |x' - y'|^2 / 64",
    RegionKind.B_I2: "|x' - y'|^2 - n (x_2 - y_2)^2 <= -|x' - y'|^2 / 64",
}


def _chunk_slack(job):
    kind, i, n, patch, y_radius, size, seed, stream = job
    x = sample_region(kind, i, n, patch, size, seed, True, 2 * stream)
    y = sample_ball(size, n - 1, y_radius, seed, 2 * stream + 1 + 10**6)
    slack = np.min(_slacks(kind, x, y, n, i), axis=-1)
    worst = int(np.argmin(slack))
    return float(slack[worst]), x[worst], y[worst]


def check_inequality(kind,
                     i=1,
                     n=3,
                     samples=10**5,
                     seed=1,
                     patch=(2.0, 50.0),
                     y_radius=None,
                     workers=1):
    """Smallest slack of the inequality of one set over random (x', y')

    x' is drawn from the set within the patch, y' from the ball of radius
    y_radius, the support of the force by default. Chunks use their own
    seeded streams and are merged in order.
    """
    _check_index(i, n)
    y_radius = y_radius or ForceProfiles().bump_radius
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK]
                                             if samples % CHUNK else [])
    jobs = [(kind, i, n, patch, y_radius, size, seed, stream)
            for stream, size in enumerate(sizes)]
    results = parallel_map(_chunk_slack, jobs, workers)
    slack, x_worst, y_worst = min(results, key=lambda result: result[0])
    entry = {
        "name": INEQUALITIES[kind],
        "region": str(RegionLabel(kind, i)),
        "samples": int(samples),
        "y_radius": float(y_radius),
        "min_slack": slack,
        "counterexample": None
    }
    if slack < 0.0:
        entry["counterexample"] = {"x": list(x_worst), "y": list(y_worst)}
    return entry


def verify_sign_inequalities(samples=10**5,
                             seed=1,
                             i=1,
                             n=3,
                             patch=(2.0, 50.0),
                             y_radius=None,
                             workers=1,
                             strict=True):
    """Pointwise check of the sign inequalities on A_i1, A_i2, B_i1 and the
    corrected B_i2

    Returns:
        report (dict): one entry per set, verdict under "passed"
    """
    if samples < 1:
        raise DomainError("Need at least one sample")
    entries = [
        check_inequality(kind, i, n, samples, seed, patch, y_radius, workers)
        for kind in ORDER
    ]
    report = {
        "b2_variant": "corrected",
        "inequalities": entries,
        "passed": all(entry["counterexample"] is None for entry in entries)
    }
    for entry in entries:
        LOGGER.info("{}: min slack {:.4g} over {} samples".format(
            entry["region"], entry["min_slack"], entry["samples"]))
    if strict and not report["passed"]:
        raise PropertyViolation("Counterexample to a sign inequality", report)
    return report


def check_disjointness(samples=10**6, seed=1, n=3, i=1, corrected=True,
                       half_width=50.0):
    """Pairwise overlaps of the four sets on uniform points of a box"""
    points = torch_utils.uniform_box(samples, np.full(n - 1, -half_width),
                                     np.full(n - 1, half_width), seed)
    masks = region_masks(points, i, corrected)
    overlaps = {}
    for first, kind in enumerate(ORDER):
        for other in ORDER[first + 1:]:
            overlaps["{}/{}".format(kind.value, other.value)] = int(
                np.sum(masks[kind] & masks[other]))
    counts = {kind.value: int(np.sum(masks[kind])) for kind in ORDER}
    return {
        "samples": int(samples),
        "corrected": corrected,
        "counts": counts,
        "overlaps": overlaps,
        "disjoint": all(count == 0 for count in overlaps.values())
    }


def printed_b2_is_empty(samples=10**6, seed=1, n=3, i=1, half_width=50.0):
    """Random search for members of B_i2 as printed"""
    points = torch_utils.uniform_box(samples, np.full(n - 1, -half_width),
                                     np.full(n - 1, half_width), seed, 1)
    members = int(np.sum(region_masks(points, i)[RegionKind.B_I2]))
    if members == 0:
        LOGGER.info("Printed B_{}2: no member among {} points, empty-set "
                    "erratum detected".format(i, samples))
    return {"samples": int(samples), "members": members, "empty": members == 0}
