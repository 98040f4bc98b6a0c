"""
Adaptive quadrature on the half line.

Thin wrapper over scipy.integrate.quad. Infinite ranges are split at a pivot
(default t = 1) and the tail [pivot, inf) is mapped to (0, 1/pivot] by u = 1/t,
so polynomially decaying integrands become finite-interval integrals.
"""

import logging
import math
import warnings
from typing import Callable, Iterable, Optional, Tuple

from scipy import integrate

from utils.errors import QuadratureError
from utils.logger import setup_logger, log_with_extra

logger = setup_logger(__name__)

DEFAULT_REL_TOL = 1e-9
DEFAULT_LIMIT = 200

# A warned result is rejected when its error estimate exceeds the requested
# tolerance by ERROR_MARGIN and is also above these absolute/relative floors
ERROR_MARGIN = 100.0
ACCEPT_REL = 1e-4
ACCEPT_ABS = 1e-10


def _quad_finite(
    func: Callable[[float], float],
    a: float,
    b: float,
    points: Optional[Iterable[float]],
    rel_tol: float,
    abs_tol: float,
    limit: int
) -> Tuple[float, float]:
    """Integrate over a finite interval, forwarding interior break points."""
    if b <= a:
        return 0.0, 0.0

    inner = sorted({float(p) for p in (points or []) if a < p < b})

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        value, error = integrate.quad(
            func, a, b,
            points=inner or None,
            epsrel=rel_tol,
            epsabs=abs_tol,
            limit=limit
        )

    if not (math.isfinite(value) and math.isfinite(error)):
        raise QuadratureError(f"Quadrature over [{a}, {b}] did not converge (value={value}, error={error})")

    messages = [str(w.message) for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    if messages:
        allowed = max(ERROR_MARGIN * max(abs_tol, rel_tol * abs(value)), ACCEPT_REL * abs(value), ACCEPT_ABS)
        if error > allowed:
            raise QuadratureError(
                f"Quadrature over [{a}, {b}] is unreliable: value={value}, error={error} "
                f"exceeds {allowed:.3g} ({messages[0].splitlines()[0]})"
            )
        log_with_extra(
            logger, logging.WARNING, "Quadrature warning within tolerance",
            a=a, b=b, value=value, error=error, allowed=allowed, detail=messages[0]
        )

    return value, error


def quad(
    func: Callable[[float], float],
    a: float,
    b: float = math.inf,
    points: Optional[Iterable[float]] = None,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = 0.0,
    pivot: float = 1.0,
    limit: int = DEFAULT_LIMIT
) -> Tuple[float, float]:
    """
    Integrate func over [a, b] with b possibly infinite.

    Args:
        func: Scalar integrand
        a: Finite lower limit
        b: Upper limit (math.inf allowed)
        points: Interior break points (kinks, support edges) forwarded to QUADPACK
        rel_tol: Relative tolerance
        abs_tol: Absolute tolerance
        pivot: Split point between the direct and the u = 1/t mapped part
        limit: Maximum number of QUADPACK subintervals per piece

    Returns:
        (value, estimated absolute error)

    Raises:
        QuadratureError: If a piece returns a non-finite value, or QUADPACK warns and
            the error estimate is well above the requested tolerance
    """
    if math.isinf(a):
        raise QuadratureError("Lower integration limit must be finite")

    if not math.isinf(b):
        return _quad_finite(func, a, b, points, rel_tol, abs_tol, limit)

    split = max(a, pivot)
    head, head_err = _quad_finite(func, a, split, points, rel_tol, abs_tol, limit)

    def mapped(u: float) -> float:
        if u <= 0.0:
            return 0.0
        return func(1.0 / u) / (u * u)

    mapped_points = [1.0 / p for p in (points or []) if p > split]
    tail, tail_err = _quad_finite(mapped, 0.0, 1.0 / split, mapped_points, rel_tol, abs_tol, limit)

    return head + tail, head_err + tail_err


def quad_value(func: Callable[[float], float], a: float, b: float = math.inf, **kwargs) -> float:
    """Same as quad but returns only the value."""
    return quad(func, a, b, **kwargs)[0]
