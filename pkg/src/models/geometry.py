"""
Radial intensity models and exact PPP sampling of transmitter distances.

Interference only depends on the distances T_k to the receiver, so the planar
process is handled through its one-dimensional image: a PPP on [0, inf) with
density lambda * p(t). Radii are drawn in distance space by the inverse-CDF
transform of the cumulative measure.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import optimize

from models.channel import (
    FadingModel, PathLossModel, fading_from_config, pathloss_from_config
)
from utils.config import Config
from utils.errors import ModelValidationError, QuadratureError
from utils.logger import setup_logger, log_with_extra
from utils.quadrature import quad

logger = setup_logger(__name__)

ArrayLike = Union[float, np.ndarray]

TWO_PI = 2.0 * math.pi

# Growth probe: 256 log-spaced points up to 1e6, split into head and tail at 1e3
GROWTH_PROBE_POINTS = 256
GROWTH_PROBE_MAX = 1e6
GROWTH_PROBE_SPLIT = 1e3
GROWTH_PROBE_SLACK = 10.0

# Quadrature error estimates above this fraction of the value mean the integral diverges
DIVERGENCE_REL_ERROR = 1e-4

MAX_DOUBLINGS = 60
MAX_BISECTIONS = 200


# ============================================================================
# Radial intensity
# ============================================================================

class IntensityKind(str, Enum):
    """Supported radial intensity families"""
    STATIONARY = 'stationary'   # p(t) = 2 pi t on t >= t_min
    LOG_RADIAL = 'lograd'       # p(t) = 2 pi / t on t >= r
    CUSTOM = 'custom'


@dataclass(frozen=True)
class RadialIntensity:
    """
    Density p(t) of the distance-mapped point process, per unit lambda.

    The stationary disk with t_min = eta * d is the exclusion-zone model: no
    interferer closer than eta * d to the receiver.
    """
    kind: IntensityKind
    t_min: float = 0.0
    r: float = 1.0
    custom_density: Optional[Callable[[float], float]] = None
    custom_growth: Optional[float] = None
    custom_lower: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', IntensityKind(self.kind))

        if self.kind is IntensityKind.STATIONARY:
            if not (math.isfinite(self.t_min) and self.t_min >= 0.0):
                raise ModelValidationError(f"Stationary exclusion radius must satisfy t_min >= 0, got {self.t_min}")

        elif self.kind is IntensityKind.LOG_RADIAL:
            if not (math.isfinite(self.r) and self.r > 0.0):
                raise ModelValidationError(f"Log-radial inner radius must satisfy r > 0, got {self.r}")

        else:
            if self.custom_density is None:
                raise ModelValidationError("Custom intensity needs custom_density")
            if not (math.isfinite(self.custom_lower) and self.custom_lower >= 0.0):
                raise ModelValidationError(f"Custom support edge must be >= 0, got {self.custom_lower}")

    @classmethod
    def stationary(cls, t_min: float = 0.0) -> 'RadialIntensity':
        return cls(IntensityKind.STATIONARY, t_min=float(t_min))

    @classmethod
    def log_radial(cls, r: float) -> 'RadialIntensity':
        return cls(IntensityKind.LOG_RADIAL, r=float(r))

    @classmethod
    def custom(
        cls,
        density: Callable[[float], float],
        growth: Optional[float] = None,
        lower: float = 0.0
    ) -> 'RadialIntensity':
        """
        Wrap an arbitrary radial density.

        Args:
            density: Scalar function t -> p(t) (per unit lambda), zero below `lower`
            growth: Declared exponent g with p(t) = O(t^g)
            lower: Lower edge of the support
        """
        return cls(
            IntensityKind.CUSTOM,
            custom_density=density,
            custom_growth=None if growth is None else float(growth),
            custom_lower=float(lower)
        )

    @property
    def lower_edge(self) -> float:
        """Infimum of the support of p."""
        if self.kind is IntensityKind.STATIONARY:
            return self.t_min
        if self.kind is IntensityKind.LOG_RADIAL:
            return self.r
        return self.custom_lower

    def density(self, t: ArrayLike) -> ArrayLike:
        """p(t), zero outside the support."""
        arr = np.asarray(t, dtype=float)
        inside = arr >= self.lower_edge

        if self.kind is IntensityKind.STATIONARY:
            return np.where(inside, TWO_PI * arr, 0.0)[()]
        if self.kind is IntensityKind.LOG_RADIAL:
            safe = np.where(inside, arr, 1.0)
            return np.where(inside, TWO_PI / safe, 0.0)[()]

        values = np.vectorize(self.custom_density, otypes=[float])(arr)
        return np.where(inside, values, 0.0)[()]

    def cumulative(self, t: float) -> float:
        """Integral of p over [0, t]."""
        lower = self.lower_edge
        if t <= lower:
            return 0.0

        if self.kind is IntensityKind.STATIONARY:
            return math.pi * (t * t - lower * lower)
        if self.kind is IntensityKind.LOG_RADIAL:
            return TWO_PI * math.log(t / lower)

        value, _ = quad(lambda s: float(self.density(s)), lower, t)
        return value

    def inverse_cumulative(self, u: ArrayLike) -> ArrayLike:
        """Smallest t with cumulative(t) = u, for u >= 0."""
        arr = np.asarray(u, dtype=float)
        lower = self.lower_edge

        if self.kind is IntensityKind.STATIONARY:
            return np.sqrt(lower * lower + arr / math.pi)[()]
        if self.kind is IntensityKind.LOG_RADIAL:
            return (lower * np.exp(arr / TWO_PI))[()]

        return np.vectorize(self._invert_custom, otypes=[float])(arr)[()]

    def _invert_custom(self, u: float) -> float:
        lower = self.lower_edge
        if u <= 0.0:
            return lower

        hi = max(1.0, 2.0 * lower)
        for _ in range(MAX_DOUBLINGS):
            if self.cumulative(hi) >= u:
                break
            hi *= 2.0
        else:
            raise ModelValidationError(f"Custom intensity never accumulates measure {u}")

        return optimize.brentq(lambda t: self.cumulative(t) - u, lower, hi, xtol=1e-12, rtol=1e-12)

    def growth_exponent(self) -> Optional[float]:
        """Exponent g with p(t) = O(t^g); None when a custom density declares nothing."""
        if self.kind is IntensityKind.STATIONARY:
            return 1.0
        if self.kind is IntensityKind.LOG_RADIAL:
            return -1.0
        return self.custom_growth

    def describe(self) -> Dict[str, Any]:
        """JSON-friendly summary"""
        if self.kind is IntensityKind.STATIONARY:
            return {'kind': self.kind.value, 't_min': self.t_min}
        if self.kind is IntensityKind.LOG_RADIAL:
            return {'kind': self.kind.value, 'r': self.r}
        return {'kind': self.kind.value, 'lower': self.custom_lower, 'growth': self.custom_growth}


def validate_growth(intensity: RadialIntensity, alpha: float, epsilon: Optional[float] = None) -> None:
    """
    Check p(t) = O(t^(alpha - 1 - epsilon)) on a deterministic probe grid.

    The scaled density p(t) * t^-(alpha - 1 - epsilon) counts as bounded when its
    maximum over probe points t >= 1e3 stays within 10x its maximum below 1e3.

    Raises:
        ModelValidationError: If the density is negative or grows too fast
    """
    if epsilon is None:
        epsilon = Config.GROWTH_EPSILON
    exponent = alpha - 1.0 - epsilon

    declared = intensity.growth_exponent()
    if intensity.kind is IntensityKind.CUSTOM and declared is not None and declared > exponent:
        raise ModelValidationError(
            f"Declared density growth t^{declared} exceeds t^{exponent:.3f} allowed by alpha={alpha}"
        )

    start = max(intensity.lower_edge, 1e-3)
    grid = np.logspace(math.log10(start), math.log10(GROWTH_PROBE_MAX), GROWTH_PROBE_POINTS)
    density = np.asarray(intensity.density(grid), dtype=float)

    if not np.all(np.isfinite(density)) or np.any(density < 0.0):
        raise ModelValidationError("Radial density must be finite and non-negative on its support")

    scaled = density * grid ** (-exponent)
    head = grid < GROWTH_PROBE_SPLIT
    head_max = float(scaled[head].max()) if head.any() else 0.0
    tail_max = float(scaled[~head].max())

    if tail_max > GROWTH_PROBE_SLACK * head_max:
        raise ModelValidationError(
            f"Radial density violates the growth condition p(t) = O(t^{exponent:.3f}) "
            f"(scaled max {tail_max:.4g} beyond t=1e3 vs {head_max:.4g} before)"
        )


# ============================================================================
# Path integrals
# ============================================================================

def path_integral(
    pathloss: PathLossModel,
    intensity: RadialIntensity,
    k: int,
    lower: Optional[float] = None,
    upper: float = math.inf
) -> float:
    """
    Integral of G(t)^k p(t) dt over [lower, upper] intersected with the support.

    Per unit lambda, geometry factor (2 pi) included.

    Raises:
        QuadratureError: If the integral does not converge
    """
    a = intensity.lower_edge if lower is None else max(lower, intensity.lower_edge)
    if upper <= a:
        return 0.0

    def integrand(t: float) -> float:
        return float(pathloss.evaluate(t)) ** k * float(intensity.density(t))

    value, error = quad(integrand, a, upper, pivot=max(1.0, a))

    # Only full-support integrals are checked; tail pieces may be legitimately tiny
    full_support = lower is None and math.isinf(upper)
    if full_support and error > DIVERGENCE_REL_ERROR * abs(value):
        raise QuadratureError(
            f"Integral of G^{k} p over [{a}, {upper}] looks divergent (value={value:.6g}, error={error:.3g})"
        )
    return value


@lru_cache(maxsize=256)
def path_integrals(pathloss: PathLossModel, intensity: RadialIntensity) -> Tuple[float, float, float]:
    """(i1, i2, i3) over the whole support, cached per model pair."""
    return tuple(path_integral(pathloss, intensity, k) for k in (1, 2, 3))


# ============================================================================
# Network model
# ============================================================================

@dataclass(frozen=True)
class NetworkModel:
    """
    Interference field I = sum_k P H_k G(T_k) over a PPP with density lam * p(t).

    `lam` is the dimensionless multiplier of the radial density (lambda).
    """
    lam: float
    power: float
    pathloss: PathLossModel
    fading: FadingModel
    intensity: RadialIntensity

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ModelValidationError(f"Intensity parameter lambda must be positive, got {self.lam}")
        if not (math.isfinite(self.power) and self.power > 0.0):
            raise ModelValidationError(f"Transmit power must be positive, got {self.power}")

        validate_growth(self.intensity, self.pathloss.alpha)

        integrals = path_integrals(self.pathloss, self.intensity)
        if not all(math.isfinite(v) and v > 0.0 for v in integrals):
            raise ModelValidationError(f"Campbell integrals must be finite and positive, got {integrals}")

    @property
    def integrals(self) -> Tuple[float, float, float]:
        return path_integrals(self.pathloss, self.intensity)

    def with_lambda(self, lam: float) -> 'NetworkModel':
        return replace(self, lam=float(lam))

    def with_power(self, power: float) -> 'NetworkModel':
        return replace(self, power=float(power))

    def describe(self) -> Dict[str, Any]:
        """JSON-friendly summary"""
        return {
            'lambda': self.lam,
            'power': self.power,
            'pathloss': self.pathloss.describe(),
            'fading': self.fading.describe(),
            'intensity': self.intensity.describe(),
        }


# ============================================================================
# Operations
# ============================================================================

def cumulative_measure(intensity: RadialIntensity, lam: float, t: float) -> float:
    """lam times the integral of p over [0, t]; 0 below the support."""
    return lam * intensity.cumulative(t)


def sample_radii(
    intensity: RadialIntensity,
    lam: float,
    window_max: float,
    rng: np.random.Generator
) -> np.ndarray:
    """
    Exact PPP draw of the distances in [0, window_max].

    Returns:
        Unsorted array of radii (empty when the window misses the support)
    """
    if window_max <= intensity.lower_edge:
        return np.empty(0)

    measure = intensity.cumulative(window_max)
    count = rng.poisson(lam * measure)
    return np.asarray(intensity.inverse_cumulative(rng.uniform(0.0, measure, size=count)), dtype=float)


def sample_radii_batch(
    intensity: RadialIntensity,
    lam: float,
    window_max: float,
    rng: np.random.Generator,
    size: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    `size` independent PPP draws on [0, window_max], flattened.

    Returns:
        (counts per realization, all radii concatenated in realization order)
    """
    if window_max <= intensity.lower_edge:
        return np.zeros(size, dtype=np.int64), np.empty(0)

    measure = intensity.cumulative(window_max)
    counts = rng.poisson(lam * measure, size=size)
    radii = intensity.inverse_cumulative(rng.uniform(0.0, measure, size=int(counts.sum())))
    return counts, np.asarray(radii, dtype=float)


def truncation_radius(model: NetworkModel, tail_tolerance: float, moment: int = 1) -> float:
    """
    Radius R beyond which the Campbell tail is negligible.

    With moment=1 the tail of the mean, lam P m_H * int_R^inf G p, is kept below
    tail_tolerance times the full mean; moment=2 applies the same rule to the
    variance integral int G^2 p.

    Args:
        model: Network model
        tail_tolerance: Relative tail budget in (0, 1)
        moment: Power of G in the tail integral (1 or 2)

    Returns:
        The smallest bracketing R found by doubling then bisection

    Raises:
        ModelValidationError: If the tail never drops below the budget
    """
    if not 0.0 < tail_tolerance < 1.0:
        raise ModelValidationError(f"tail_tolerance must lie in (0, 1), got {tail_tolerance}")
    if moment not in (1, 2):
        raise ModelValidationError(f"Truncation moment must be 1 or 2, got {moment}")

    full = model.integrals[moment - 1]
    budget = tail_tolerance * full

    def tail(radius: float) -> float:
        return path_integral(model.pathloss, model.intensity, moment, lower=radius)

    lo = model.intensity.lower_edge
    hi = max(1.0, 2.0 * lo)
    for _ in range(MAX_DOUBLINGS):
        if tail(hi) <= budget:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ModelValidationError(
            f"Campbell tail did not fall below {tail_tolerance} of the total before R={hi:.3g}"
        )

    for _ in range(MAX_BISECTIONS):
        if hi - lo <= 1e-9 * hi:
            break
        mid = 0.5 * (lo + hi)
        if tail(mid) <= budget:
            hi = mid
        else:
            lo = mid

    log_with_extra(
        logger, logging.DEBUG, "Truncation radius",
        radius=hi, tail_tolerance=tail_tolerance, moment=moment, lam=model.lam
    )
    return hi


# ============================================================================
# Config loaders
# ============================================================================

def intensity_from_config(cfg: Mapping[str, Any]) -> RadialIntensity:
    """
    Build an intensity from {"kind": "stationary"|"lograd", "t_min": real, "r": real}.

    Raises:
        ModelValidationError: On unknown kinds or keys
    """
    kind = str(cfg.get('kind', '')).lower()
    allowed = {'stationary': {'kind', 't_min'}, 'lograd': {'kind', 'r'}}
    if kind not in allowed:
        raise ModelValidationError(f"Unknown intensity kind '{kind}' (expected stationary or lograd)")

    unknown = set(cfg) - allowed[kind]
    if unknown:
        raise ModelValidationError(f"Unknown keys for {kind} intensity: {sorted(unknown)}")

    if kind == 'stationary':
        return RadialIntensity.stationary(float(cfg.get('t_min', 0.0)))
    if 'r' not in cfg:
        raise ModelValidationError("Log-radial intensity config needs 'r'")
    return RadialIntensity.log_radial(float(cfg['r']))


def network_from_config(cfg: Mapping[str, Any]) -> NetworkModel:
    """Build a NetworkModel from {"pathloss", "fading", "intensity", "lambda", "power"}."""
    unknown = set(cfg) - {'pathloss', 'fading', 'intensity', 'lambda', 'power'}
    if unknown:
        raise ModelValidationError(f"Unknown model keys: {sorted(unknown)}")

    for key in ('pathloss', 'fading', 'intensity', 'lambda'):
        if key not in cfg:
            raise ModelValidationError(f"Model config needs '{key}'")

    return NetworkModel(
        lam=float(cfg['lambda']),
        power=float(cfg.get('power', 1.0)),
        pathloss=pathloss_from_config(cfg['pathloss']),
        fading=fading_from_config(cfg['fading']),
        intensity=intensity_from_config(cfg['intensity'])
    )
