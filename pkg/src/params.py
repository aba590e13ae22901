"""Domain types and run configuration

All value objects of the lab are frozen dataclasses. Invalid field values
raise DomainError at construction, configuration files that cannot be
turned into a RunConfig raise ConfigError.
"""
import json
import logging
import enum
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
import numpy as np
from src.errors import DomainError, ConfigError

LOGGER = logging.getLogger(__name__)

SUITES = ("kernels", "force", "greens-bound", "rates-normal-deriv",
          "rates-pressure", "holder", "lemma-calg", "lemma-jkl", "shear",
          "regions", "params-feasibility", "all")


def _require(condition, message):
    if not condition:
        LOGGER.error(message)
        raise DomainError(message)


@dataclass(frozen=True)
class ModelParams:
    """Dimension, force exponents and amplitude"""
    n: int = 3
    alpha: float = 0.9
    beta: float = 0.4
    a: float = 1.0

    def __post_init__(self):
        _require(int(self.n) == self.n and self.n >= 3,
                 "Dimension must be an integer >= 3, got {}".format(self.n))
        _require(0.0 < self.alpha < 1.0,
                 "alpha must lie in (0, 1), got {}".format(self.alpha))
        _require(0.0 < self.beta < 1.0,
                 "beta must lie in (0, 1), got {}".format(self.beta))
        _require(self.a > 0.0,
                 "Amplitude must be positive, got {}".format(self.a))

    @property
    def weak_solution(self):
        """Finite energy holds iff beta < 1/2"""
        return self.beta < 0.5

    @property
    def holder_exponent(self):
        return 3.0 - 2.0 * self.alpha - self.beta

    def check_point(self, point):
        _require(
            point.dim == self.n,
            "Point of dimension {} used with n = {}".format(
                point.dim, self.n))

    def info(self):
        info = asdict(self)
        info["weak_solution"] = self.weak_solution
        return info


@dataclass(frozen=True)
class HalfSpacePoint:
    """x = (x', x_n) with x_n >= 0"""
    tangential: tuple
    normal: float

    def __post_init__(self):
        object.__setattr__(self, "tangential",
                           tuple(float(x_k) for x_k in self.tangential))
        object.__setattr__(self, "normal", float(self.normal))
        _require(len(self.tangential) >= 2,
                 "Need at least two tangential components")
        _require(self.normal >= 0.0,
                 "Normal component must be >= 0, got {}".format(self.normal))

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(tuple(x[:-1]), x[-1])

    @property
    def dim(self):
        return len(self.tangential) + 1

    @property
    def tangential_array(self):
        return np.array(self.tangential)

    def as_array(self):
        return np.append(self.tangential_array, self.normal)

    def reflected(self):
        """y* = (y', -y_n), which leaves the half space"""
        return np.append(self.tangential_array, -self.normal)

    def with_normal(self, normal):
        return HalfSpacePoint(self.tangential, normal)

    def translated(self, shift):
        return HalfSpacePoint(tuple(self.tangential_array + shift),
                              self.normal)


@dataclass(frozen=True)
class SpaceTimePoint:
    point: HalfSpacePoint
    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_coords(cls, tangential, normal, t):
        return cls(HalfSpacePoint(tangential, normal), t)


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and budgets shared by every quadrature rule

    order is the starting order of tensor Gauss rules, which are doubled at
    most max_refinements times.
    """
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    grading_strength: float = 2.0
    mc_samples: int = 1000000
    seed: int = 1
    order: int = 8
    max_refinements: int = 4

    def __post_init__(self):
        _require(self.rel_tol > 0.0 and self.abs_tol > 0.0,
                 "Tolerances must be positive")
        _require(self.max_subdivisions >= 1,
                 "max_subdivisions must be >= 1")
        _require(self.grading_strength >= 1.0,
                 "grading_strength must be >= 1")
        _require(self.mc_samples >= 1, "mc_samples must be >= 1")
        _require(self.order >= 2, "Gauss order must be >= 2")
        _require(self.max_refinements >= 1, "max_refinements must be >= 1")

    def tolerance(self, value):
        return max(self.abs_tol, self.rel_tol * float(np.max(np.abs(value))))

    def loosened(self, factor):
        return replace(self,
                       rel_tol=self.rel_tol * factor,
                       abs_tol=self.abs_tol * factor)

    def tightened(self, factor):
        """Tolerances of inner integrals nested inside an outer rule"""
        return self.loosened(1.0 / factor)


def fast_quad_spec():
    """Reduced accuracy used by the unit tests"""
    return QuadSpec(rel_tol=1e-6,
                    abs_tol=1e-12,
                    max_subdivisions=100,
                    mc_samples=200000,
                    order=8,
                    max_refinements=4)


@dataclass(frozen=True)
class QuadResult:
    value: object
    error_estimate: float
    evaluations: int = 0

    def __post_init__(self):
        _require(self.error_estimate >= 0.0,
                 "Negative error estimate {}".format(self.error_estimate))

    def __add__(self, other):
        return QuadResult(self.value + other.value,
                          self.error_estimate + other.error_estimate,
                          self.evaluations + other.evaluations)

    def scaled(self, factor):
        return QuadResult(self.value * factor,
                          self.error_estimate * abs(factor), self.evaluations)


@dataclass(frozen=True)
class ForceProfiles:
    """Shape of the force: bump g^T, cut-off of g^N

    center is the tangential centre of g^T, None meaning the origin.
    """
    bump_radius: float = 0.9
    cutoff_start: float = 1.0
    cutoff_end: float = 1.9
    center: tuple = None

    def __post_init__(self):
        _require(0.0 < self.bump_radius < 1.0,
                 "bump_radius must lie in (0, 1)")
        _require(self.cutoff_start == 1.0, "cutoff_start must be 1")
        _require(1.0 < self.cutoff_end < 2.0,
                 "cutoff_end must lie in (1, 2)")
        if self.center is not None:
            object.__setattr__(self, "center",
                               tuple(float(c_k) for c_k in self.center))

    def center_array(self, dim):
        if self.center is None:
            return np.zeros(dim)
        _require(
            len(self.center) == dim,
            "Force centre of dimension {} used in dimension {}".format(
                len(self.center), dim))
        return np.array(self.center)

    def info(self):
        return asdict(self)


@dataclass(frozen=True)
class KernelEval:
    value: float
    error_estimate: float
    bound_value: float

    @property
    def ratio(self):
        return abs(self.value) / self.bound_value


@dataclass(frozen=True)
class FieldSample:
    """One evaluated field value, component is an index or "pressure" """
    location: SpaceTimePoint
    component: object
    value: float
    error_estimate: float

    def __post_init__(self):
        _require(self.error_estimate >= 0.0, "Negative error estimate")

    def row(self):
        point = self.location.point
        return list(point.tangential) + [
            point.normal, self.location.t, self.component, self.value,
            self.error_estimate
        ]


class RegionKind(enum.Enum):
    A_I1 = "A_i1"
    A_I2 = "A_i2"
    B_I1 = "B_i1"
    B_I2 = "B_i2"
    NONE = "none"


@dataclass(frozen=True)
class RegionLabel:
    kind: RegionKind
    i: int = None

    def __post_init__(self):
        if self.kind is RegionKind.NONE:
            _require(self.i is None, "Label 'none' carries no index")
        else:
            _require(self.i is not None, "Region label needs an index")

    def __str__(self):
        if self.kind is RegionKind.NONE:
            return "none"
        return "{}_{}{}".format(self.kind.value[0], self.i,
                                self.kind.value[-1])


@dataclass(frozen=True)
class ShearParams:
    alpha: float = 0.25

    def __post_init__(self):
        _require(0.0 < self.alpha < 0.5,
                 "Shear alpha must lie in (0, 1/2), got {}".format(
                     self.alpha))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_coefficient: float
    r_squared: float
    n_points: int
    stderr: float = 0.0

    def info(self):
        return asdict(self)


@dataclass(frozen=True)
class GFunArgs:
    x_n: float
    t: float
    gamma: float

    def __post_init__(self):
        _require(self.x_n >= 0.0, "x_n must be >= 0")
        _require(self.t > 0.5, "calG needs t > 1/2, got {}".format(self.t))


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    profiles: ForceProfiles = field(default_factory=ForceProfiles)
    quad: QuadSpec = field(default_factory=QuadSpec)
    suite: str = "all"
    output_dir: Path = Path("./results")
    seed: int = 1
    workers: int = -1
    grids: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError("Unknown suite '{}', expected one of {}".format(
                self.suite, ", ".join(SUITES)))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.workers == 0:
            raise ConfigError("workers must be non-zero (-1: all cores)")

    def info(self):
        return {
            "params": self.params.info(),
            "profiles": self.profiles.info(),
            "quad": asdict(self.quad),
            "suite": self.suite,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "workers": self.workers,
            "grids": self.grids
        }


_DOC = {
    "params.n": "space dimension, n >= 3",
    "params.alpha": "time exponent of the force, h(t) = (t - 1/2)^-alpha",
    "params.beta": "boundary exponent of the force, g^N = y_n^(1 - beta)",
    "params.a": "force amplitude",
    "profiles.bump_radius": "support radius of the tangential bump g^T",
    "profiles.cutoff_start": "g^N equals y_n^(1 - beta) up to this height",
    "profiles.cutoff_end": "g^N vanishes from this height on",
    "profiles.center": "tangential centre of g^T, null for the origin",
    "quad.rel_tol": "relative tolerance of every quadrature",
    "quad.abs_tol": "absolute tolerance of every quadrature",
    "quad.max_subdivisions": "adaptive panel budget",
    "quad.grading_strength": "geometric ratio of graded radial panels",
    "quad.mc_samples": "Monte Carlo budget above three dimensions",
    "quad.seed": "seed of the Monte Carlo streams",
    "quad.order": "starting order of tensor Gauss rules",
    "quad.max_refinements": "number of order doublings",
    "suite": "one of: " + ", ".join(SUITES),
    "output_dir": "directory receiving report.json, CSV series and logs",
    "seed": "seed of randomized checks",
    "workers": "parallel workers, -1 for all cores",
    "grids": "per suite overrides of sample grids and fit windows"
}


def default_config_dict():
    """Default configuration document with inline documentation"""
    config = RunConfig().info()
    config["_doc"] = dict(_DOC)
    return config


def config_from_dict(raw):
    """Build a RunConfig, unknown keys are configuration errors"""
    raw = {key: value for key, value in raw.items() if key != "_doc"}
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError("Unknown configuration keys: {}".format(
            ", ".join(sorted(unknown))))
    sections = {
        "params": ModelParams,
        "profiles": ForceProfiles,
        "quad": QuadSpec
    }
    kwargs = dict()
    try:
        for key, value in raw.items():
            if key in sections:
                if not isinstance(value, dict):
                    raise ConfigError(
                        "Section '{}' must be an object".format(key))
                kwargs[key] = sections[key](**value)
            else:
                kwargs[key] = value
        return RunConfig(**kwargs)
    except (DomainError, TypeError) as err:
        raise ConfigError("Invalid configuration: {}".format(err)) from err


def load_config(path):
    """Read a JSON configuration file"""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as config_file:
            raw = json.load(config_file)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError("Could not read config {}: {}".format(path,
                                                                 err)) from err
    if not isinstance(raw, dict):
        raise ConfigError("Config root must be a JSON object")
    LOGGER.info("Loaded config from {}".format(path))
    return config_from_dict(raw)
