"""
Channel models: path-loss functions and power fading distributions.

Path-loss G(t) is bounded, non-increasing and decays at least as fast as t^-alpha
(alpha > 2). Fading H is a power gain with finite first three moments; Nakagami-m
is represented directly by its power, Gamma(shape m, scale 1/m), so E[H] = 1.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from scipy import special, stats

from utils.errors import DomainError, ModelValidationError, UnsupportedOperationError

ArrayLike = Union[float, np.ndarray]

# t = 0 plus 999 log-spaced points; used to probe opaque custom path-loss functions
PATHLOSS_PROBE_GRID = np.concatenate(([0.0], np.logspace(-3.0, 6.0, 999)))

# Relative slack tolerated by the monotonicity / Jensen checks (floating point noise)
_REL_SLACK = 1e-12


def db_to_linear(db: float) -> float:
    """Convert a decibel value to a linear ratio."""
    return 10.0 ** (db / 10.0)


# ============================================================================
# Path-loss
# ============================================================================

class PathLossKind(str, Enum):
    """Supported path-loss families"""
    INVERSE_SHIFTED = 'g1'   # G1(t) = 1 / (1 + t)^alpha
    INVERSE_SUM = 'g2'       # G2(t) = 1 / (1 + t^alpha)
    CUSTOM = 'custom'


@dataclass(frozen=True)
class PathLossModel:
    """
    Bounded, monotone non-increasing attenuation function G(t), t >= 0.

    Build with PathLossModel.inverse_shifted / inverse_sum / custom; the
    constructor validates alpha > 2, non-negativity and monotonicity.
    """
    kind: PathLossKind
    alpha: float
    custom_eval: Optional[Callable[[float], float]] = None
    custom_bound: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', PathLossKind(self.kind))

        if not (math.isfinite(self.alpha) and self.alpha > 2.0):
            raise ModelValidationError(f"Path-loss exponent must satisfy alpha > 2, got {self.alpha}")

        if self.kind is PathLossKind.CUSTOM:
            self._validate_custom()
        elif self.custom_eval is not None:
            raise ModelValidationError("custom_eval is only allowed for custom path-loss models")

    @classmethod
    def inverse_shifted(cls, alpha: float) -> 'PathLossModel':
        """G1(t) = 1 / (1 + t)^alpha"""
        return cls(PathLossKind.INVERSE_SHIFTED, float(alpha))

    @classmethod
    def inverse_sum(cls, alpha: float) -> 'PathLossModel':
        """G2(t) = 1 / (1 + t^alpha)"""
        return cls(PathLossKind.INVERSE_SUM, float(alpha))

    @classmethod
    def custom(cls, func: Callable[[float], float], alpha: float, bound: float) -> 'PathLossModel':
        """
        Wrap an arbitrary attenuation function.

        Args:
            func: Scalar function t -> G(t)
            alpha: Declared decay exponent (> 2)
            bound: Declared supremum of func on [0, inf)
        """
        return cls(PathLossKind.CUSTOM, float(alpha), custom_eval=func, custom_bound=float(bound))

    def _validate_custom(self) -> None:
        if self.custom_eval is None or self.custom_bound is None:
            raise ModelValidationError("Custom path-loss models need both custom_eval and custom_bound")

        values = np.array([float(self.custom_eval(t)) for t in PATHLOSS_PROBE_GRID])

        if not np.all(np.isfinite(values)):
            raise ModelValidationError("Custom path-loss returned non-finite values on the probe grid")
        if np.any(values < 0.0):
            raise ModelValidationError("Custom path-loss must be non-negative")
        if np.any(np.diff(values) > _REL_SLACK * max(values[0], 1.0)):
            raise ModelValidationError("Custom path-loss must be non-increasing in t")
        if values[0] > self.custom_bound * (1.0 + _REL_SLACK):
            raise ModelValidationError(
                f"Custom path-loss G(0)={values[0]} exceeds its declared bound {self.custom_bound}"
            )

    @property
    def peak(self) -> float:
        """G(0), the supremum of a non-increasing path-loss."""
        return float(self.evaluate(0.0))

    def evaluate(self, t: ArrayLike) -> ArrayLike:
        """Vectorized G(t); callers guarantee t >= 0."""
        if self.kind is PathLossKind.INVERSE_SHIFTED:
            return np.power(1.0 + np.asarray(t, dtype=float), -self.alpha)[()]
        if self.kind is PathLossKind.INVERSE_SUM:
            return (1.0 / (1.0 + np.power(np.asarray(t, dtype=float), self.alpha)))[()]
        return np.vectorize(self.custom_eval, otypes=[float])(t)[()]

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return self.evaluate(t)

    def describe(self) -> Dict[str, Any]:
        """JSON-friendly summary"""
        return {'kind': self.kind.value, 'alpha': self.alpha}


def eval_pathloss(model: PathLossModel, t: ArrayLike) -> ArrayLike:
    """
    Evaluate G(t).

    Raises:
        DomainError: If any t is negative (or NaN)
    """
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr >= 0.0)):
        raise DomainError(f"Path-loss distance must be non-negative, got {t}")
    return model.evaluate(arr)


def pathloss_from_config(cfg: Mapping[str, Any]) -> PathLossModel:
    """
    Build a path-loss model from {"kind": "g1"|"g2", "alpha": real}.

    Raises:
        ModelValidationError: On unknown kinds or keys
    """
    unknown = set(cfg) - {'kind', 'alpha'}
    if unknown:
        raise ModelValidationError(f"Unknown path-loss keys: {sorted(unknown)}")

    kind = str(cfg.get('kind', '')).lower()
    if kind not in ('g1', 'g2'):
        raise ModelValidationError(f"Unknown path-loss kind '{kind}' (expected g1 or g2)")
    if 'alpha' not in cfg:
        raise ModelValidationError("Path-loss config needs 'alpha'")

    return PathLossModel(PathLossKind(kind), float(cfg['alpha']))


# ============================================================================
# Fading
# ============================================================================

class FadingKind(str, Enum):
    """Supported power fading laws"""
    DETERMINISTIC = 'deterministic'
    NAKAGAMI = 'nakagami'
    MOMENTS = 'moments'


@dataclass(frozen=True)
class FadingModel:
    """
    Power fading coefficient H.

    Deterministic (H = h0), Nakagami-m power (Gamma(m, 1/m), unit mean) or
    moments-only (m_H, m_H2, m_H3) usable for bounds but not for simulation.
    """
    kind: FadingKind
    h0: float = 1.0
    m: float = 1.0
    moments: Optional[Tuple[float, float, float]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', FadingKind(self.kind))

        if self.kind is FadingKind.DETERMINISTIC:
            if not (math.isfinite(self.h0) and self.h0 > 0.0):
                raise ModelValidationError(f"Deterministic fading needs h0 > 0, got {self.h0}")

        elif self.kind is FadingKind.NAKAGAMI:
            if not (math.isfinite(self.m) and self.m >= 0.5):
                raise ModelValidationError(f"Nakagami shape must satisfy m >= 0.5, got {self.m}")

        else:
            if self.moments is None or len(self.moments) != 3:
                raise ModelValidationError("Moments-only fading needs (m_H, m_H2, m_H3)")
            m1, m2, m3 = (float(v) for v in self.moments)
            object.__setattr__(self, 'moments', (m1, m2, m3))
            if not all(math.isfinite(v) and v > 0.0 for v in (m1, m2, m3)):
                raise ModelValidationError(f"Fading moments must be finite and positive, got {self.moments}")
            if m2 < m1 * m1 * (1.0 - _REL_SLACK) or m3 < m2 ** 1.5 * (1.0 - _REL_SLACK):
                raise ModelValidationError(
                    f"Fading moments {self.moments} violate Jensen's inequality and cannot come from a distribution"
                )

    @classmethod
    def deterministic(cls, h0: float = 1.0) -> 'FadingModel':
        return cls(FadingKind.DETERMINISTIC, h0=float(h0))

    @classmethod
    def nakagami(cls, m: float) -> 'FadingModel':
        return cls(FadingKind.NAKAGAMI, m=float(m))

    @classmethod
    def from_moments(cls, m1: float, m2: float, m3: float) -> 'FadingModel':
        return cls(FadingKind.MOMENTS, moments=(m1, m2, m3))

    @property
    def has_sampler(self) -> bool:
        return self.kind is not FadingKind.MOMENTS

    def moment(self, k: int) -> float:
        """E[H^k] for k in {1, 2, 3}."""
        if k not in (1, 2, 3):
            raise DomainError(f"Fading moment order must be 1, 2 or 3, got {k}")

        if self.kind is FadingKind.DETERMINISTIC:
            return self.h0 ** k
        if self.kind is FadingKind.NAKAGAMI:
            # Gamma(m, 1/m): E[H^k] = Gamma(m + k) / (Gamma(m) m^k)
            return float(special.poch(self.m, k) / self.m ** k)
        return self.moments[k - 1]

    def ratio(self) -> float:
        """m_H3 / m_H2^(3/2), >= 1 with equality only for deterministic fading."""
        if self.kind is FadingKind.DETERMINISTIC:
            return 1.0
        return self.moment(3) / self.moment(2) ** 1.5

    def distribution(self):
        """Frozen scipy distribution of H (Nakagami only)."""
        if self.kind is FadingKind.NAKAGAMI:
            return stats.gamma(a=self.m, scale=1.0 / self.m)
        if self.kind is FadingKind.DETERMINISTIC:
            raise UnsupportedOperationError("Deterministic fading is a point mass and has no density")
        raise UnsupportedOperationError("Moments-only fading has no density")

    def pdf(self, h: float) -> float:
        """
        Scalar Gamma(m, 1/m) density for quadrature integrands.

        Raises:
            UnsupportedOperationError: For fading laws without a density
        """
        if self.kind is not FadingKind.NAKAGAMI:
            self.distribution()
        if h <= 0.0:
            return 0.0
        m = self.m
        return math.exp(m * math.log(m) - math.lgamma(m) + (m - 1.0) * math.log(h) - m * h)

    def upper_quantile(self, tail_mass: float) -> float:
        """Smallest h with P[H > h] <= tail_mass."""
        if self.kind is FadingKind.DETERMINISTIC:
            return self.h0
        return float(self.distribution().isf(tail_mass))

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        """
        Draw fading coefficients.

        Raises:
            UnsupportedOperationError: For moments-only fading
        """
        if self.kind is FadingKind.DETERMINISTIC:
            return self.h0 if size is None else np.full(size, self.h0)
        if self.kind is FadingKind.NAKAGAMI:
            return rng.gamma(shape=self.m, scale=1.0 / self.m, size=size)
        raise UnsupportedOperationError("Moments-only fading has no sampler; use it for bounds only")

    def describe(self) -> Dict[str, Any]:
        """JSON-friendly summary"""
        if self.kind is FadingKind.DETERMINISTIC:
            return {'kind': self.kind.value, 'h0': self.h0}
        if self.kind is FadingKind.NAKAGAMI:
            return {'kind': self.kind.value, 'm': self.m}
        return {'kind': self.kind.value, 'moments': list(self.moments)}


def fading_moment(model: FadingModel, k: int) -> float:
    """E[H^k]; raises DomainError for k outside {1, 2, 3}."""
    return model.moment(k)


def fading_ratio(model: FadingModel) -> float:
    """m_H3 / (m_H2)^(3/2)"""
    return model.ratio()


def sample_fading(model: FadingModel, rng: np.random.Generator) -> float:
    """Single non-negative draw of H."""
    return float(model.sample(rng))


def fading_from_config(cfg: Mapping[str, Any]) -> FadingModel:
    """
    Build a fading model from {"kind": "deterministic"|"nakagami"|"moments", ...}.

    Raises:
        ModelValidationError: On unknown kinds or keys
    """
    kind = str(cfg.get('kind', '')).lower()
    allowed = {
        'deterministic': {'kind', 'h0'},
        'nakagami': {'kind', 'm'},
        'moments': {'kind', 'moments'},
    }
    if kind not in allowed:
        raise ModelValidationError(f"Unknown fading kind '{kind}' (expected {sorted(allowed)})")

    unknown = set(cfg) - allowed[kind]
    if unknown:
        raise ModelValidationError(f"Unknown keys for {kind} fading: {sorted(unknown)}")

    if kind == 'deterministic':
        return FadingModel.deterministic(float(cfg.get('h0', 1.0)))
    if kind == 'nakagami':
        if 'm' not in cfg:
            raise ModelValidationError("Nakagami fading config needs 'm'")
        return FadingModel.nakagami(float(cfg['m']))

    moments = cfg.get('moments')
    if not isinstance(moments, (list, tuple)) or len(moments) != 3:
        raise ModelValidationError("Moments fading config needs a 3-element 'moments' list")
    return FadingModel.from_moments(*(float(v) for v in moments))
