"""
Result containers

Approximation constants, CDF envelopes, empirical CDFs, capacity pairs and the
row shapes written to CSV/JSON by the CLI.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, TypedDict

import numpy as np

from utils.errors import DomainError


@dataclass(frozen=True)
class ApproxConstants:
    """
    Campbell integrals and moments of one network model.

    i1..i3 are per unit lambda with the geometry factor included in p.
    """
    i1: float
    i2: float
    i3: float
    path_constant: float   # i3 / i2^(3/2)
    fading_ratio: float
    mean: float
    variance: float

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass
class BoundCurve:
    """Q-(x) <= Psi(x) <= Q+(x) on a grid of the centered-normalized axis."""
    xs: np.ndarray
    lower: np.ndarray
    gaussian: np.ndarray
    upper: np.ndarray
    # Unclipped c(x) / sqrt(lambda)
    half_width: np.ndarray

    def width_at(self, x: float) -> float:
        """Unclipped envelope width 2 c(x) / sqrt(lambda), interpolated on the grid."""
        return 2.0 * float(np.interp(x, self.xs, self.half_width))


@dataclass(frozen=True)
class CapacityBounds:
    """(lower, upper) capacity pair in nats/s/Hz"""
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower < 0.0 or self.upper < self.lower:
            raise DomainError(f"Capacity bounds must satisfy 0 <= lower <= upper, got ({self.lower}, {self.upper})")

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


@dataclass(frozen=True)
class SimulatedValue:
    """Monte-Carlo estimate with its standard error"""
    value: float
    stderr: float
    n: int


class EmpiricalCdf:
    """
    Right-continuous step CDF of a sample.

    Jumps have size k/N where k is the multiplicity of a value.
    """

    def __init__(self, values: Any):
        arr = np.sort(np.asarray(values, dtype=float).ravel())
        if arr.size == 0:
            raise DomainError("Empirical CDF needs at least one sample")
        self.values = arr

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __call__(self, x: Any) -> Any:
        return (np.searchsorted(self.values, x, side='right') / self.n)[()]


@dataclass(frozen=True)
class ContainmentReport:
    """Share of grid points where the empirical CDF sits inside the slackened envelope."""
    fraction: float
    slack: float
    delta: float
    n: int
    violations: int
    max_excess: float
    violating_xs: List[float] = field(default_factory=list)

    @property
    def contained(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'containment': self.fraction,
            'slack': self.slack,
            'delta': self.delta,
            'n': self.n,
            'violations': self.violations,
            'max_excess': self.max_excess,
        }


# ============================================================================
# Output rows
# ============================================================================

# 'lambda' is a keyword, hence the functional TypedDict form
SweepRow = TypedDict('SweepRow', {
    'lambda': float,
    'lower': float,
    'simulated': float,
    'upper': float,
    'sim_stderr': float,
})

SWEEP_COLUMNS = ['lambda', 'lower', 'simulated', 'upper', 'sim_stderr']


class Table1Row(TypedDict):
    """One path-loss constant with the values it is checked against"""
    model: str          # "g1" or "g2"
    alpha: float
    computed: float
    published: float
    reference: float    # value the check compares against
    deviation: float    # |computed - reference|


TABLE1_COLUMNS = ['model', 'alpha', 'computed', 'published', 'reference', 'deviation']


def create_sweep_row(
    lam: float,
    bounds: CapacityBounds,
    simulated: float = math.nan,
    sim_stderr: float = math.nan
) -> SweepRow:
    """
    Create a sweep row.

    Args:
        lam: Intensity parameter lambda
        bounds: Capacity bounds at lam
        simulated: Monte-Carlo reference value (NaN when not simulated)
        sim_stderr: Standard error of `simulated`

    Returns:
        SweepRow dictionary
    """
    return SweepRow(
        {
            'lambda': lam,
            'lower': bounds.lower,
            'simulated': simulated,
            'upper': bounds.upper,
            'sim_stderr': sim_stderr,
        }
    )


def create_table1_row(model: str, alpha: float, computed: float, published: float, reference: float) -> Table1Row:
    return Table1Row(
        model=model,
        alpha=alpha,
        computed=computed,
        published=published,
        reference=reference,
        deviation=abs(computed - reference)
    )


def bound_curve_to_rows(curve: BoundCurve, empirical: Any = None) -> List[Dict[str, float]]:
    """
    Convert a bound curve to CSV rows.

    Args:
        curve: Envelope on its grid
        empirical: Optional empirical CDF values on the same grid

    Returns:
        Rows with columns x, [empirical,] lower, gaussian, upper
    """
    rows = []
    for i, x in enumerate(curve.xs):
        row: Dict[str, float] = {'x': float(x)}
        if empirical is not None:
            row['empirical'] = float(empirical[i])
        row['lower'] = float(curve.lower[i])
        row['gaussian'] = float(curve.gaussian[i])
        row['upper'] = float(curve.upper[i])
        rows.append(row)
    return rows
