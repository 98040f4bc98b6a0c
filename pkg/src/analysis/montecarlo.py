"""
Monte-Carlo simulation of Poisson-field interference.

Realizations are generated in chunks. Every chunk draws its own Poisson counts,
radii (inverse CDF of the radial measure) and fading marks from a child of
SeedSequence(seed), and chunks are reduced with np.bincount. The chunk layout
depends only on the model and the config, so results are bit-identical for a
given seed whatever the number of worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from analysis.gaussian_bounds import campbell_moments, normal_cdf
from models.geometry import (
    NetworkModel, cumulative_measure, path_integral, sample_radii_batch, truncation_radius
)
from models.results import BoundCurve, ContainmentReport, EmpiricalCdf
from utils.config import Config
from utils.errors import DomainError, UnsupportedOperationError
from utils.logger import setup_logger, log_with_extra

logger = setup_logger(__name__)

TAIL_MODES = ('compensate', 'truncate')
DEFAULT_CHUNK_POINTS = 2_000_000

# Floating point noise allowed when comparing CDF values to the envelope
CONTAINMENT_EPS = 1e-12


@dataclass(frozen=True)
class SimulationConfig:
    """
    Monte-Carlo settings.

    tail_mode "compensate" simulates exactly up to the radius where the dropped
    share of the variance integral is below tail_tolerance, and adds the Campbell
    mean of the dropped tail to every draw. "truncate" simulates up to the radius
    where the dropped share of the mean is below tail_tolerance and adds nothing.
    An explicit window_max overrides both and is simulated as is.
    """
    seed: int = Config.DEFAULT_SEED
    num_samples: int = Config.DEFAULT_NUM_SAMPLES
    tail_tolerance: float = Config.DEFAULT_TAIL_TOLERANCE
    tail_mode: str = 'compensate'
    window_max: Optional[float] = None
    chunk_points: int = DEFAULT_CHUNK_POINTS

    def __post_init__(self) -> None:
        if self.num_samples < 1:
            raise DomainError(f"num_samples must be >= 1, got {self.num_samples}")
        if not 0.0 < self.tail_tolerance < 1.0:
            raise DomainError(f"tail_tolerance must lie in (0, 1), got {self.tail_tolerance}")
        if self.tail_mode not in TAIL_MODES:
            raise DomainError(f"tail_mode must be one of {TAIL_MODES}, got '{self.tail_mode}'")
        if self.chunk_points < 1:
            raise DomainError(f"chunk_points must be >= 1, got {self.chunk_points}")


@dataclass(frozen=True)
class SimulationPlan:
    """Window, tail offset and chunk layout of one simulation run."""
    window: float
    offset: float
    expected_points: float
    chunk_samples: int
    num_chunks: int


# ============================================================================
# Planning and chunked execution
# ============================================================================

def plan_simulation(model: NetworkModel, cfg: SimulationConfig) -> SimulationPlan:
    """
    Choose the simulation window and the chunk layout.

    Args:
        model: Network model
        cfg: Simulation settings

    Returns:
        SimulationPlan for sample_interference
    """
    if cfg.window_max is not None:
        window, offset = cfg.window_max, 0.0
    elif cfg.tail_mode == 'truncate':
        window, offset = truncation_radius(model, cfg.tail_tolerance, moment=1), 0.0
    else:
        window = truncation_radius(model, cfg.tail_tolerance, moment=2)
        offset = (
            model.lam * model.power * model.fading.moment(1)
            * path_integral(model.pathloss, model.intensity, 1, lower=window)
        )

    expected = cumulative_measure(model.intensity, model.lam, window)
    return _chunk_layout(window, offset, expected, cfg)


def _chunk_layout(window: float, offset: float, points_per_sample: float, cfg: SimulationConfig) -> SimulationPlan:
    chunk_samples = int(max(1, min(cfg.num_samples, cfg.chunk_points // max(1.0, points_per_sample))))
    return SimulationPlan(
        window=window,
        offset=offset,
        expected_points=points_per_sample,
        chunk_samples=chunk_samples,
        num_chunks=math.ceil(cfg.num_samples / chunk_samples)
    )


def _run_chunks(
    cfg: SimulationConfig,
    plan: SimulationPlan,
    draw_chunk: Callable[[np.random.Generator, int], np.ndarray]
) -> np.ndarray:
    """Run draw_chunk on every chunk with its own child seed; concatenate in chunk order."""
    children = np.random.SeedSequence(cfg.seed).spawn(plan.num_chunks)
    sizes = [plan.chunk_samples] * (plan.num_chunks - 1)
    sizes.append(cfg.num_samples - plan.chunk_samples * (plan.num_chunks - 1))

    def run(index: int) -> np.ndarray:
        return draw_chunk(np.random.default_rng(children[index]), sizes[index])

    if plan.num_chunks == 1 or Config.THREADS == 1:
        parts = [run(i) for i in range(plan.num_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=min(Config.THREADS, plan.num_chunks)) as executor:
            parts = list(executor.map(run, range(plan.num_chunks)))

    return np.concatenate(parts)


def _require_sampler(model: NetworkModel) -> None:
    if not model.fading.has_sampler:
        raise UnsupportedOperationError("Interference simulation needs a fading model with a sampler")


# ============================================================================
# Samplers
# ============================================================================

def sample_interference(model: NetworkModel, cfg: SimulationConfig) -> np.ndarray:
    """
    i.i.d. draws of I = sum_k P H_k G(T_k).

    Args:
        model: Network model with a samplable fading law
        cfg: Simulation settings

    Returns:
        Array of cfg.num_samples interference values, deterministic given cfg.seed

    Raises:
        UnsupportedOperationError: If the fading model has no sampler
    """
    _require_sampler(model)
    plan = plan_simulation(model, cfg)

    log_with_extra(
        logger, logging.DEBUG, "Simulation plan",
        window=plan.window, offset=plan.offset, expected_points=plan.expected_points,
        chunks=plan.num_chunks, chunk_samples=plan.chunk_samples, num_samples=cfg.num_samples
    )

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        counts, radii = sample_radii_batch(model.intensity, model.lam, plan.window, rng, size)
        marks = model.fading.sample(rng, radii.size)
        contributions = model.power * marks * model.pathloss.evaluate(radii)
        owners = np.repeat(np.arange(size), counts)
        return np.bincount(owners, weights=contributions, minlength=size) + plan.offset

    return _run_chunks(cfg, plan, draw)


def sample_interference_finite_window(model: NetworkModel, n: float, cfg: SimulationConfig) -> np.ndarray:
    """
    Draws of the deterministic-count sum I_n on [0, n].

    I_n adds ceil(Lambda_n) terms P H G(U) with U i.i.d. of density lam p / Lambda_n
    on [0, n]. It converges in distribution to the Poisson-field interference.

    Raises:
        DomainError: If n does not exceed the lower edge of the support
        UnsupportedOperationError: If the fading model has no sampler
    """
    _require_sampler(model)
    if n <= model.intensity.lower_edge:
        raise DomainError(f"Window end n={n} must exceed the support edge {model.intensity.lower_edge}")

    measure = model.intensity.cumulative(n)
    terms = math.ceil(model.lam * measure)
    plan = _chunk_layout(n, 0.0, float(terms), cfg)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        radii = np.asarray(model.intensity.inverse_cumulative(rng.uniform(0.0, measure, size=(size, terms))))
        marks = model.fading.sample(rng, (size, terms))
        return (model.power * marks * model.pathloss.evaluate(radii)).sum(axis=1)

    return _run_chunks(cfg, plan, draw)


# ============================================================================
# Statistics
# ============================================================================

def centered_normalized_cdf(samples, mean: float, std: float) -> EmpiricalCdf:
    """
    Empirical CDF of (sample - mean) / std with analytic mean and std.

    Raises:
        DomainError: If std <= 0 or the sample is empty
    """
    if not std > 0.0:
        raise DomainError(f"Normalizing std must be positive, got {std}")
    return EmpiricalCdf((np.asarray(samples, dtype=float) - mean) / std)


def ks_distance(cdf: EmpiricalCdf, reference: Callable = normal_cdf) -> float:
    """Sup distance between the empirical CDF and a continuous reference, both step sides."""
    return float(stats.kstest(cdf.values, reference).statistic)


def two_sample_ks(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float)).statistic)


def dkw_slack(n: int, delta: float = Config.DEFAULT_CONTAINMENT_DELTA) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence 1 - delta."""
    if n < 1 or not 0.0 < delta < 1.0:
        raise DomainError(f"DKW band needs n >= 1 and 0 < delta < 1, got n={n}, delta={delta}")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def envelope_containment(
    cdf: EmpiricalCdf,
    curve: BoundCurve,
    slack: Optional[float] = None,
    delta: float = Config.DEFAULT_CONTAINMENT_DELTA
) -> ContainmentReport:
    """
    Share of grid points where lower - slack <= empirical <= upper + slack.

    Args:
        cdf: Empirical CDF on the centered-normalized axis
        curve: Envelope on the grid
        slack: Explicit slack; defaults to the DKW band for cdf.n at delta
        delta: Confidence parameter of the default slack

    Returns:
        ContainmentReport
    """
    if slack is None:
        slack = dkw_slack(cdf.n, delta)

    empirical = np.asarray(cdf(curve.xs), dtype=float)
    below = (curve.lower - slack) - empirical
    above = empirical - (curve.upper + slack)
    excess = np.maximum(below, above)
    outside = excess > CONTAINMENT_EPS

    return ContainmentReport(
        fraction=float(1.0 - outside.mean()),
        slack=slack,
        delta=delta,
        n=cdf.n,
        violations=int(outside.sum()),
        max_excess=float(max(excess.max(), 0.0)),
        violating_xs=[float(x) for x in curve.xs[outside]]
    )


def sample_summary(samples) -> Dict[str, float]:
    """Mean, variance, size and standard error of the mean."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise DomainError("Cannot summarize an empty sample")

    variance = float(arr.var(ddof=1)) if arr.size > 1 else 0.0
    return {
        'mean': float(arr.mean()),
        'var': variance,
        'n': int(arr.size),
        'stderr': math.sqrt(variance / arr.size),
    }


def simulate_against_envelope(
    model: NetworkModel,
    curve: BoundCurve,
    cfg: SimulationConfig,
    delta: float = Config.DEFAULT_CONTAINMENT_DELTA
) -> Tuple[np.ndarray, Dict[str, float]]:
    """
    Simulate, normalize with the Campbell moments and compare with the envelope.

    Returns:
        (empirical CDF on curve.xs, summary with ks, containment, mean, var, n)
    """
    samples = sample_interference(model, cfg)
    constants = campbell_moments(model)
    cdf = centered_normalized_cdf(samples, constants.mean, constants.std)
    report = envelope_containment(cdf, curve, delta=delta)
    summary = sample_summary(samples)

    return np.asarray(cdf(curve.xs), dtype=float), {
        'ks': ks_distance(cdf),
        **report.to_dict(),
        'mean': summary['mean'],
        'var': summary['var'],
        'campbell_mean': constants.mean,
        'campbell_var': constants.variance,
    }
