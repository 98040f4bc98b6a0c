"""
Gaussian approximation of Poisson-field interference.

Campbell moments of I = sum_k P H_k G(T_k), the Berry-Esseen based distance
c(x) between the centered-normalized interference CDF and the standard
normal CDF, and the resulting envelope

    Q-(x) = max(0, Psi(x) - c(x)/sqrt(lambda)) <= F(x) <= min(1, Psi(x) + c(x)/sqrt(lambda)).
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import special

from models.channel import PathLossKind, PathLossModel
from models.geometry import (
    IntensityKind, NetworkModel, RadialIntensity, TWO_PI, cumulative_measure, path_integral, path_integrals
)
from models.results import ApproxConstants, BoundCurve, Table1Row, create_table1_row
from utils.errors import DomainError

# Uniform and non-uniform Berry-Esseen constants for Poisson sums
BE_UNIFORM = 0.4785
BE_NONUNIFORM = 31.935

DEFAULT_GRID = (-6.0, 6.0, 481)

# Published path-loss constants for the stationary PPP, keyed by (model, alpha)
TABLE1_PUBLISHED: Dict[Tuple[str, float], float] = {
    ('g1', 3.0): 1.564, ('g1', 4.0): 2.3838, ('g1', 5.0): 3.1688,
    ('g2', 3.0): 1.0501, ('g2', 4.0): 1.1972, ('g2', 5.0): 1.2713,
}

# Values the table check compares against. The G1 entries are the closed form
# (2a-1)^1.5 (2a-2)^1.5 / ((3a-1)(3a-2)); the published G1 entries do not satisfy it.
TABLE1_REFERENCE: Dict[Tuple[str, float], float] = {
    ('g1', 3.0): 1.5972, ('g1', 4.0): 2.4745, ('g1', 5.0): 3.3568,
    ('g2', 3.0): 1.0501, ('g2', 4.0): 1.1972, ('g2', 5.0): 1.2713,
}

# Log-radial intensity, r = 0.5, alpha = 4
APPENDIX_D_PUBLISHED = {'g1': 1.27, 'g2': 1.11}
APPENDIX_D_REFERENCE = {'g1': 1.2488, 'g2': 1.1136}


# ============================================================================
# Normal CDF and Berry-Esseen factor
# ============================================================================

def normal_cdf(x):
    """Psi(x) via erfc, accurate in both tails."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))[()]


def normal_quantile(p):
    """Psi^-1(p)"""
    return special.ndtri(p)


def berry_esseen_factor(x):
    """min(0.4785, 31.935 / (1 + |x|^3))"""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.minimum(BE_UNIFORM, BE_NONUNIFORM / (1.0 + ax ** 3))[()]


def berry_esseen_crossover() -> float:
    """|x| at which the uniform and non-uniform branches meet."""
    return (BE_NONUNIFORM / BE_UNIFORM - 1.0) ** (1.0 / 3.0)


# ============================================================================
# Constants
# ============================================================================

def geometry_factor(intensity: RadialIntensity) -> float:
    """2 pi for the built-in planar densities, 1 for custom densities."""
    if intensity.kind is IntensityKind.CUSTOM:
        return 1.0
    return TWO_PI


def campbell_moments(model: NetworkModel) -> ApproxConstants:
    """
    Campbell mean and variance of the interference, with the c(x) ingredients.

    Args:
        model: Validated network model

    Returns:
        ApproxConstants with mean = lam P m_H i1 and variance = lam P^2 m_H2 i2

    Raises:
        ModelValidationError: If one of the integrals diverges
    """
    i1, i2, i3 = model.integrals
    return ApproxConstants(
        i1=i1,
        i2=i2,
        i3=i3,
        path_constant=i3 / i2 ** 1.5,
        fading_ratio=model.fading.ratio(),
        mean=model.lam * model.power * model.fading.moment(1) * i1,
        variance=model.lam * model.power ** 2 * model.fading.moment(2) * i2,
    )


def pathloss_constant(pathloss: PathLossModel, intensity: RadialIntensity) -> float:
    """
    int G^3 p' / (int G^2 p')^(3/2) with p' = p / (2 pi).

    For the stationary disk this is int G^3 t dt / (int G^2 t dt)^(3/2).
    """
    _, i2, i3 = path_integrals(pathloss, intensity)
    return math.sqrt(geometry_factor(intensity)) * i3 / i2 ** 1.5


def c_of_x(model: NetworkModel, x):
    """
    c(x) = fading_ratio * i3 / i2^(3/2) * berry_esseen_factor(x), raw p (2 pi included).

    For the stationary disk this equals the 1/sqrt(2 pi) * pathloss_constant form.
    """
    constants = campbell_moments(model)
    return constants.fading_ratio * constants.path_constant * berry_esseen_factor(x)


def uniform_constant(model: NetworkModel) -> float:
    """x-free constant c with sup_x |F(x) - Psi(x)| <= c / sqrt(lambda)."""
    constants = campbell_moments(model)
    return constants.fading_ratio * constants.path_constant * BE_UNIFORM


# ============================================================================
# Envelope
# ============================================================================

@dataclass(frozen=True)
class Envelope:
    """
    Q-(x) and Q+(x) for one model, evaluable at arbitrary x.

    `half_width_fn` replaces c(x)/sqrt(lambda) when given (c = 0 gives the bare Gaussian).
    """
    mean: float
    std: float
    scale: float          # fading_ratio * i3 / i2^(3/2)
    lam: float
    half_width_fn: Optional[Callable] = None

    @classmethod
    def for_model(cls, model: NetworkModel, half_width_fn: Optional[Callable] = None) -> 'Envelope':
        constants = campbell_moments(model)
        return cls(
            mean=constants.mean,
            std=constants.std,
            scale=constants.fading_ratio * constants.path_constant,
            lam=model.lam,
            half_width_fn=half_width_fn
        )

    def half_width(self, x):
        if self.half_width_fn is not None:
            return self.half_width_fn(x)
        return self.scale * berry_esseen_factor(x) / math.sqrt(self.lam)

    def lower(self, x):
        return np.maximum(0.0, normal_cdf(x) - self.half_width(x))[()]

    def upper(self, x):
        return np.minimum(1.0, normal_cdf(x) + self.half_width(x))[()]

    def normalize(self, value):
        """(value - E[I]) / sqrt(Var[I])"""
        return (np.asarray(value, dtype=float) - self.mean) / self.std

    def kinks(self) -> List[float]:
        """Points on the x axis where c(x) switches branch."""
        crossover = berry_esseen_crossover()
        return [-crossover, 0.0, crossover]


def default_grid(lo: float = DEFAULT_GRID[0], hi: float = DEFAULT_GRID[1], points: int = DEFAULT_GRID[2]) -> np.ndarray:
    return np.linspace(lo, hi, points)


def cdf_bounds(model: NetworkModel, xs: Optional[Iterable[float]] = None) -> BoundCurve:
    """
    Tabulate the clipped envelope on a grid.

    Args:
        model: Validated network model
        xs: Grid on the centered-normalized axis (default 481 points on [-6, 6])

    Returns:
        BoundCurve with lower <= gaussian <= upper, all in [0, 1]
    """
    grid = default_grid() if xs is None else np.asarray(list(xs), dtype=float)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError("Bound grid must be non-empty and finite")

    envelope = Envelope.for_model(model)
    gaussian = np.asarray(normal_cdf(grid), dtype=float)
    half_width = np.asarray(envelope.half_width(grid), dtype=float)

    return BoundCurve(
        xs=grid,
        lower=np.maximum(0.0, gaussian - half_width),
        gaussian=gaussian,
        upper=np.minimum(1.0, gaussian + half_width),
        half_width=half_width
    )


# ============================================================================
# Finite-window construction
# ============================================================================

def finite_window_moments(model: NetworkModel, n: float) -> Tuple[float, float, float]:
    """
    Mean measure and moments of the deterministic-count sum on [0, n].

    I_n sums ceil(Lambda_n) i.i.d. terms P H G(U) with U of density lam p / Lambda_n
    on [0, n]; both moments converge to the Campbell moments as n grows.

    Returns:
        (Lambda_n, E[I_n], Var[I_n])

    Raises:
        DomainError: If the window carries no mass
    """
    measure = cumulative_measure(model.intensity, model.lam, n)
    if measure <= 0.0:
        raise DomainError(f"Window [0, {n}] lies below the support of the intensity")

    count = math.ceil(measure)
    g1 = path_integral(model.pathloss, model.intensity, 1, upper=n)
    g2 = path_integral(model.pathloss, model.intensity, 2, upper=n)

    term_mean = model.lam * model.power * model.fading.moment(1) * g1 / measure
    term_second = model.lam * model.power ** 2 * model.fading.moment(2) * g2 / measure

    return measure, count * term_mean, count * (term_second - term_mean ** 2)


# ============================================================================
# Reference tables
# ============================================================================

def _pathloss(kind: str, alpha: float) -> PathLossModel:
    return PathLossModel(PathLossKind(kind), float(alpha))


def table1_constants(
    alphas: Iterable[float] = (3.0, 4.0, 5.0),
    reference: Optional[Dict[Tuple[str, float], float]] = None
) -> List[Table1Row]:
    """
    Stationary path-loss constants for G1 and G2 at each alpha.

    Args:
        alphas: Path-loss exponents
        reference: Override of the embedded reference values

    Returns:
        Rows ordered by model then alpha; published/reference are NaN off the table
    """
    reference = TABLE1_REFERENCE if reference is None else reference
    intensity = RadialIntensity.stationary()

    rows = []
    for kind in ('g1', 'g2'):
        for alpha in alphas:
            key = (kind, float(alpha))
            rows.append(create_table1_row(
                model=kind,
                alpha=float(alpha),
                computed=pathloss_constant(_pathloss(kind, alpha), intensity),
                published=TABLE1_PUBLISHED.get(key, math.nan),
                reference=reference.get(key, math.nan)
            ))
    return rows


def appendix_d_constants(r: float = 0.5, alpha: float = 4.0) -> Dict[str, float]:
    """Path-loss constants of the log-radial intensity 2 pi / t on t >= r."""
    intensity = RadialIntensity.log_radial(r)
    return {kind: pathloss_constant(_pathloss(kind, alpha), intensity) for kind in ('g1', 'g2')}


def g1_closed_form_constant(alpha: float) -> float:
    """Stationary G1 constant from int_0^inf t (1+t)^-n dt = 1 / ((n-1)(n-2))."""
    i2 = 1.0 / ((2 * alpha - 1) * (2 * alpha - 2))
    i3 = 1.0 / ((3 * alpha - 1) * (3 * alpha - 2))
    return i3 / i2 ** 1.5
