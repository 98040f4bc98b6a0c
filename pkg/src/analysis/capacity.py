"""
Outage and sum capacity envelopes built on the Gaussian interference bounds.

Link model: a receiver at distance d from its transmitter decodes at rate R
unless log(1 + SINR) < R, with

    SINR = H G(d) / (1/snr + I / pg)

and I the interference of a unit-power network. Sum capacity is the ergodic
E[log(1 + I(snr))] of the network with power replaced by snr.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from analysis.gaussian_bounds import (
    BE_NONUNIFORM, Envelope, normal_quantile, uniform_constant
)
from analysis.montecarlo import SimulationConfig, sample_interference
from models.channel import FadingKind, FadingModel, db_to_linear, fading_from_config
from models.geometry import NetworkModel
from models.results import CapacityBounds, SimulatedValue, SweepRow, create_sweep_row
from utils.config import Config
from utils.errors import DomainError, ModelValidationError
from utils.logger import setup_logger, log_with_extra
from utils.quadrature import quad_value

logger = setup_logger(__name__)

RATE_GRID_POINTS = 512
RATE_GRID_MIN = 1e-6
BISECTION_STEPS = 60

# Sum-capacity integrand tail budget beyond x_max
SUMCAP_TAIL_BUDGET = 1e-6
SUMCAP_MIN_K = 10.0

# Seed-sequence key separating the direct-link fading stream from the interference chunks
DIRECT_LINK_STREAM = 0xD1EC7

# Numerical noise tolerated when a lower bound lands just above its upper bound
ORDER_REL_TOL = 1e-7


# ============================================================================
# Bound pairs
# ============================================================================

def _ordered_bounds(lower: float, upper: float, what: str) -> CapacityBounds:
    """
    CapacityBounds(lower, upper), absorbing only round-off sized inversions.

    Raises:
        ModelValidationError: If lower exceeds upper by more than ORDER_REL_TOL
    """
    if upper < lower - ORDER_REL_TOL * max(1.0, abs(lower)):
        raise ModelValidationError(f"{what}: lower bound {lower} exceeds upper bound {upper}")
    return CapacityBounds(lower, max(lower, upper))


# ============================================================================
# Scenario
# ============================================================================

@dataclass(frozen=True)
class OutageScenario:
    """
    Single link in a Poisson field of interferers.

    The interferer network carries unit power; snr = P / N0 scales the link instead.
    """
    d: float
    snr: float
    pg: float
    gamma: float
    direct_fading: FadingModel
    interferers: NetworkModel

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d) and self.d > 0.0):
            raise ModelValidationError(f"Link distance must be positive, got {self.d}")
        if not (math.isfinite(self.snr) and self.snr > 0.0):
            raise ModelValidationError(f"SNR must be positive, got {self.snr}")
        if not self.pg >= 1.0:
            raise ModelValidationError(f"Processing gain must be >= 1, got {self.pg}")
        if not 0.0 < self.gamma < 1.0:
            raise ModelValidationError(f"Target outage probability must lie in (0, 1), got {self.gamma}")
        if self.interferers.power != 1.0:
            raise ModelValidationError(
                f"Interferer power must be normalized to 1 (the link SNR carries P), got {self.interferers.power}"
            )

    @property
    def link_gain(self) -> float:
        """G(d)"""
        return float(self.interferers.pathloss.evaluate(self.d))

    def with_lambda(self, lam: float) -> 'OutageScenario':
        return replace(self, interferers=self.interferers.with_lambda(lam))

    def threshold(self, rate: float) -> float:
        """Smallest direct-link fading h that supports `rate` without interference."""
        return math.expm1(rate) / (self.snr * self.link_gain)

    def h_max(self) -> float:
        """Direct-link fading cut at upper tail mass FADING_TAIL_MASS."""
        return self.direct_fading.upper_quantile(Config.FADING_TAIL_MASS)

    def max_rate(self) -> float:
        """Interference-free capacity at h_max."""
        return math.log1p(self.snr * self.h_max() * self.link_gain)


def scenario_from_config(model: NetworkModel, task: Mapping[str, Any]) -> OutageScenario:
    """
    Build a scenario from a model and the outage task keys.

    Keys: d, snr_db, pg, gamma, direct_fading.
    """
    return OutageScenario(
        d=float(task.get('d', 1.0)),
        snr=db_to_linear(float(task.get('snr_db', 20.0))),
        pg=float(task.get('pg', 100.0)),
        gamma=float(task.get('gamma', 0.1)),
        direct_fading=fading_from_config(task.get('direct_fading') or {'kind': 'deterministic'}),
        interferers=model.with_power(1.0)
    )


# ============================================================================
# Outage probability
# ============================================================================

def _check_rate(rate: float) -> None:
    if not rate > 0.0:
        raise DomainError(f"Rate must be positive, got {rate}")


def zeta(scn: OutageScenario, h, rate: float, envelope: Optional[Envelope] = None):
    """
    Normalized interference level at which the link with fading h and rate R breaks.

    ((h G(d) / (e^R - 1) - 1/snr) pg - E[I]) / sqrt(Var[I])
    """
    _check_rate(rate)
    arr = np.asarray(h, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError(f"Fading value must be non-negative, got {h}")

    envelope = envelope or Envelope.for_model(scn.interferers)
    level = (arr * scn.link_gain / math.expm1(rate) - 1.0 / scn.snr) * scn.pg
    return envelope.normalize(level)[()]


def _h_at_zeta(scn: OutageScenario, z: float, rate: float, envelope: Envelope) -> float:
    return math.expm1(rate) / scn.link_gain * ((envelope.mean + z * envelope.std) / scn.pg + 1.0 / scn.snr)


def outage_probability_bounds(
    scn: OutageScenario,
    rate: float,
    envelope: Optional[Envelope] = None
) -> Tuple[float, float]:
    """
    Lower and upper bound on P[log(1 + SINR) < rate].

    lower = 1 - E[min(1, Q+(zeta(H, R))) 1{H >= thr}]
    upper = 1 - E[max(0, Q-(zeta(H, R))) 1{H >= thr}]

    The expectation is a quadrature against the direct-link fading density on
    [thr, h_max], or a single evaluation for deterministic fading.

    Raises:
        DomainError: If rate <= 0
        UnsupportedOperationError: If the direct-link fading has no density
    """
    _check_rate(rate)
    envelope = envelope or Envelope.for_model(scn.interferers)
    thr = scn.threshold(rate)

    if scn.direct_fading.kind is FadingKind.DETERMINISTIC:
        h0 = scn.direct_fading.h0
        if h0 < thr:
            return 1.0, 1.0
        z = zeta(scn, h0, rate, envelope)
        return 1.0 - float(envelope.upper(z)), 1.0 - float(envelope.lower(z))

    pdf = scn.direct_fading.pdf
    h_max = scn.h_max()
    if thr >= h_max:
        return 1.0, 1.0

    points = [_h_at_zeta(scn, z, rate, envelope) for z in envelope.kinks()]

    def expectation(bound: Callable) -> float:
        def integrand(h: float) -> float:
            z = (h * scn.link_gain / math.expm1(rate) - 1.0 / scn.snr) * scn.pg
            return float(bound((z - envelope.mean) / envelope.std)) * pdf(h)
        return quad_value(integrand, thr, h_max, points=points, rel_tol=1e-8, abs_tol=1e-12)

    lower = 1.0 - expectation(envelope.upper)
    upper = 1.0 - expectation(envelope.lower)
    return min(1.0, max(0.0, lower)), min(1.0, max(0.0, upper))


# ============================================================================
# Outage capacity
# ============================================================================

def _last_feasible_rate(grid: np.ndarray, feasible: np.ndarray, predicate: Callable[[float], bool]) -> float:
    """sup{R : predicate(R)} from a scan, refined by bisection past the last feasible grid point."""
    indices = np.flatnonzero(feasible)
    if indices.size == 0:
        return 0.0

    j = int(indices[-1])
    if j == grid.size - 1:
        return float(grid[-1])

    lo, hi = float(grid[j]), float(grid[j + 1])
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def outage_capacity_bounds(scn: OutageScenario, grid_points: int = RATE_GRID_POINTS) -> CapacityBounds:
    """
    sup{R > 0 : outage bound(R) <= gamma} for both outage-probability bounds.

    The upper outage bound gives the lower capacity and vice versa. Q+- are not
    monotone in x, so the supremum comes from a log-spaced scan over
    [1e-6, R_max] refined by bisection past the last feasible grid point.

    Args:
        scn: Outage scenario
        grid_points: Number of scan points

    Returns:
        CapacityBounds (0 where no rate is feasible)
    """
    envelope = Envelope.for_model(scn.interferers)
    r_max = scn.max_rate()
    if r_max <= RATE_GRID_MIN:
        return CapacityBounds(0.0, 0.0)

    grid = np.geomspace(RATE_GRID_MIN, r_max, grid_points)
    probabilities = np.array([outage_probability_bounds(scn, r, envelope) for r in grid])

    lower = _last_feasible_rate(
        grid, probabilities[:, 1] <= scn.gamma,
        lambda r: outage_probability_bounds(scn, r, envelope)[1] <= scn.gamma
    )
    upper = _last_feasible_rate(
        grid, probabilities[:, 0] <= scn.gamma,
        lambda r: outage_probability_bounds(scn, r, envelope)[0] <= scn.gamma
    )

    log_with_extra(
        logger, logging.DEBUG, "Outage capacity bounds",
        lam=scn.interferers.lam, lower=lower, upper=upper, r_max=r_max
    )
    return _ordered_bounds(lower, upper, "Outage capacity")


def _simulated_rates(scn: OutageScenario, cfg: SimulationConfig) -> np.ndarray:
    """Samples of log(1 + SINR) with independent direct-link fading."""
    interference = sample_interference(scn.interferers, cfg)
    rng = np.random.default_rng([cfg.seed, DIRECT_LINK_STREAM])
    h = np.asarray(scn.direct_fading.sample(rng, interference.size), dtype=float)
    sinr = h * scn.link_gain / (1.0 / scn.snr + interference / scn.pg)
    return np.log1p(sinr)


def outage_probability_simulated(scn: OutageScenario, rate: float, cfg: SimulationConfig) -> SimulatedValue:
    """Empirical P[log(1 + SINR) < rate] with its binomial standard error."""
    _check_rate(rate)
    rates = _simulated_rates(scn, cfg)
    p = float(np.mean(rates < rate))
    return SimulatedValue(value=p, stderr=math.sqrt(p * (1.0 - p) / rates.size), n=int(rates.size))


def outage_capacity_simulated(scn: OutageScenario, cfg: SimulationConfig) -> SimulatedValue:
    """
    Empirical sup{R : P[log(1 + SINR) < R] <= gamma}.

    With k = floor(gamma N) this is the (k+1)-th smallest simulated rate. The
    standard error is half the spread of the order statistics one binomial
    standard deviation either side of k.
    """
    rates = np.sort(_simulated_rates(scn, cfg))
    n = rates.size
    k = min(int(math.floor(scn.gamma * n)), n - 1)

    spread = math.sqrt(n * scn.gamma * (1.0 - scn.gamma))
    lo = max(0, int(math.floor(k - spread)))
    hi = min(n - 1, int(math.ceil(k + spread)))

    return SimulatedValue(value=float(rates[k]), stderr=0.5 * float(rates[hi] - rates[lo]), n=int(n))


def gaussian_rate_adaptation(scn: OutageScenario) -> CapacityBounds:
    """
    Average rate of a link that adapts its rate to the direct-link fading.

    For fading h the link sends at R(h) = log(1 + h G(d) / (1/snr + q / pg)) where
    q = E[I] + sqrt(Var[I]) Psi^-1(1 - gamma -+ eps) and eps = c / sqrt(lambda) is
    the uniform approximation error, which keeps the conditional outage at most
    gamma (lower) or at least gamma (upper) for every h.
    """
    envelope = Envelope.for_model(scn.interferers)
    eps = uniform_constant(scn.interferers) / math.sqrt(scn.interferers.lam)
    tiny = 1e-12

    def average_rate(level: float) -> float:
        p = min(1.0 - tiny, max(tiny, level))
        q = max(0.0, envelope.mean + envelope.std * float(normal_quantile(p)))
        scale = scn.link_gain / (1.0 / scn.snr + q / scn.pg)

        if scn.direct_fading.kind is FadingKind.DETERMINISTIC:
            return math.log1p(scn.direct_fading.h0 * scale)

        pdf = scn.direct_fading.pdf
        return quad_value(lambda h: math.log1p(h * scale) * pdf(h), 0.0, scn.h_max(), rel_tol=1e-8)

    lower = average_rate(1.0 - scn.gamma + eps)
    upper = average_rate(1.0 - scn.gamma - eps)
    return _ordered_bounds(lower, upper, "Rate adaptation")


# ============================================================================
# Sum capacity
# ============================================================================

def sumcap_truncation(envelope: Envelope) -> float:
    """
    x_max = log(1 + E + K sigma) with the integrand tail beyond it below 1e-6.

    Beyond z = K the integrand is at most 1 - Psi(z) + A / z^3 with
    A = scale * 31.935 / sqrt(lambda), whose tail integral is about A / (3 K^3).
    """
    amplitude = envelope.scale * BE_NONUNIFORM / math.sqrt(envelope.lam)
    k = max(SUMCAP_MIN_K, (amplitude / (3.0 * SUMCAP_TAIL_BUDGET)) ** (1.0 / 3.0))
    return math.log1p(envelope.mean + k * envelope.std)


def sum_capacity_bounds(
    model: NetworkModel,
    snr: float,
    half_width: Optional[Callable] = None
) -> CapacityBounds:
    """
    Bounds on E[log(1 + I(snr))].

    lower = int_0^x_max 1 - min(1, Q+((e^x - 1 - E) / sigma)) dx
    upper = int_0^x_max 1 - max(0, Q-((e^x - 1 - E) / sigma)) dx

    Args:
        model: Network model (its power is replaced by snr)
        snr: Linear SNR
        half_width: Optional replacement for c(x)/sqrt(lambda)

    Returns:
        CapacityBounds in nats/s/Hz
    """
    if not (math.isfinite(snr) and snr > 0.0):
        raise DomainError(f"SNR must be positive, got {snr}")

    envelope = Envelope.for_model(model.with_power(snr), half_width_fn=half_width)
    x_max = sumcap_truncation(envelope)

    points = []
    for z in envelope.kinks():
        level = envelope.mean + z * envelope.std
        if 0.0 < level and math.log1p(level) < x_max:
            points.append(math.log1p(level))

    def normalized(x: float) -> float:
        return (math.expm1(x) - envelope.mean) / envelope.std

    lower = quad_value(lambda x: 1.0 - float(envelope.upper(normalized(x))), 0.0, x_max,
                       points=points, rel_tol=1e-8, abs_tol=1e-10)
    upper = quad_value(lambda x: 1.0 - float(envelope.lower(normalized(x))), 0.0, x_max,
                       points=points, rel_tol=1e-8, abs_tol=1e-10)

    lower = max(0.0, lower)
    return _ordered_bounds(lower, upper, "Sum capacity")


def sum_capacity_simulated(model: NetworkModel, snr: float, cfg: SimulationConfig) -> SimulatedValue:
    """Monte-Carlo mean of log(1 + I(snr)) with its standard error."""
    if not (math.isfinite(snr) and snr > 0.0):
        raise DomainError(f"SNR must be positive, got {snr}")

    values = np.log1p(sample_interference(model.with_power(snr), cfg))
    stderr = float(values.std(ddof=1)) / math.sqrt(values.size) if values.size > 1 else 0.0
    return SimulatedValue(value=float(values.mean()), stderr=stderr, n=int(values.size))


# ============================================================================
# Sweeps and scaling
# ============================================================================

def _parallel_map(func: Callable, items: Sequence) -> List:
    if Config.THREADS == 1 or len(items) == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(Config.THREADS, len(items))) as executor:
        return list(executor.map(func, items))


def outage_sweep(
    scn: OutageScenario,
    lambdas: Sequence[float],
    cfg: Optional[SimulationConfig] = None
) -> List[SweepRow]:
    """
    Outage capacity bounds (and simulated values when cfg is given) per lambda.

    Bounds run in parallel; simulations run one lambda at a time since each
    already spreads its chunks over the worker pool.
    """
    scenarios = [scn.with_lambda(lam) for lam in lambdas]
    bounds = _parallel_map(outage_capacity_bounds, scenarios)

    rows = []
    for lam, scenario, bound in zip(lambdas, scenarios, bounds):
        simulated = outage_capacity_simulated(scenario, cfg) if cfg is not None else None
        rows.append(create_sweep_row(
            float(lam), bound,
            simulated.value if simulated else math.nan,
            simulated.stderr if simulated else math.nan
        ))
        log_with_extra(logger, logging.INFO, "Outage sweep point", gap=bound.gap, **rows[-1])
    return rows


def sumcap_sweep(
    model: NetworkModel,
    snr: float,
    lambdas: Sequence[float],
    cfg: Optional[SimulationConfig] = None
) -> List[SweepRow]:
    """Sum capacity bounds (and simulated values when cfg is given) per lambda."""
    models = [model.with_lambda(lam) for lam in lambdas]
    bounds = _parallel_map(lambda m: sum_capacity_bounds(m, snr), models)

    rows = []
    for lam, network, bound in zip(lambdas, models, bounds):
        simulated = sum_capacity_simulated(network, snr, cfg) if cfg is not None else None
        rows.append(create_sweep_row(
            float(lam), bound,
            simulated.value if simulated else math.nan,
            simulated.stderr if simulated else math.nan
        ))
        log_with_extra(logger, logging.INFO, "Sum capacity sweep point", gap=bound.gap, **rows[-1])
    return rows


@dataclass(frozen=True)
class ScalingReport:
    """lambda * C(lambda) per bound, with max/min ratios over the top half of the range."""
    lambdas: List[float]
    lower_products: List[float]
    upper_products: List[float]
    ratio_lower: float
    ratio_upper: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambdas': self.lambdas,
            'lambda_c_lower': self.lower_products,
            'lambda_c_upper': self.upper_products,
            'ratio_lower': self.ratio_lower,
            'ratio_upper': self.ratio_upper,
        }


def _spread(products: Sequence[float]) -> float:
    lo, hi = min(products), max(products)
    if lo <= 0.0:
        return math.inf
    return hi / lo


def outage_scaling_diagnostic(
    scn: OutageScenario,
    lambdas: Sequence[float],
    capacity_fn: Optional[Callable[[float], CapacityBounds]] = None
) -> ScalingReport:
    """
    Check the 1/lambda decay of the outage capacity bounds.

    Args:
        scn: Outage scenario (its lambda is replaced per point)
        lambdas: At least three increasing lambda values
        capacity_fn: Optional lambda -> CapacityBounds replacing the bound computation

    Returns:
        ScalingReport; ratios near 1 mean lambda * C is flat
    """
    values = [float(lam) for lam in lambdas]
    if len(values) < 3 or any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"Scaling diagnostic needs at least three increasing lambdas, got {values}")

    if capacity_fn is None:
        bounds = _parallel_map(outage_capacity_bounds, [scn.with_lambda(lam) for lam in values])
    else:
        bounds = [capacity_fn(lam) for lam in values]

    lower = [lam * b.lower for lam, b in zip(values, bounds)]
    upper = [lam * b.upper for lam, b in zip(values, bounds)]
    top = len(values) // 2

    report = ScalingReport(
        lambdas=values,
        lower_products=lower,
        upper_products=upper,
        ratio_lower=_spread(lower[top:]),
        ratio_upper=_spread(upper[top:])
    )
    log_with_extra(logger, logging.INFO, "Outage scaling diagnostic", **report.to_dict())
    return report
