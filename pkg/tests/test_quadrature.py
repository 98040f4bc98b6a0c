"""
Tests for the half-line quadrature wrapper and the Campbell integrals built on it.
"""

import logging
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from models.channel import PathLossModel
from models.geometry import RadialIntensity, path_integrals
from utils.errors import QuadratureError
from utils.quadrature import quad, quad_value


def test_closed_form_integrals():
    assert quad_value(lambda t: math.exp(-t), 0.0) == pytest.approx(1.0, rel=1e-10)
    assert quad_value(lambda t: 1.0 / (1.0 + t * t), 0.0) == pytest.approx(math.pi / 2, rel=1e-10)
    assert quad_value(lambda t: t ** -3, 2.0) == pytest.approx(0.125, rel=1e-10)


def test_finite_interval_with_kink():
    value, error = quad(lambda t: abs(t - 0.3), 0.0, 1.0, points=[0.3])
    assert value == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), rel=1e-12)
    assert error < 1e-10


def test_empty_interval():
    assert quad(lambda t: 1.0, 2.0, 1.0) == (0.0, 0.0)


def test_infinite_lower_limit_is_rejected():
    with pytest.raises(QuadratureError):
        quad(lambda t: 1.0, -math.inf, 0.0)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError):
        quad(lambda t: math.nan, 0.0, 1.0)


def _simpson_half_line(func, points: int = 1_000_001) -> float:
    """Composite Simpson on [0, 1] in t plus [0, 1] in u = 1/t."""
    t = np.linspace(0.0, 1.0, points)
    head = integrate.simpson(func(t), x=t)

    u = np.linspace(0.0, 1.0, points)
    inner = u[1:]
    mapped = np.concatenate(([0.0], func(1.0 / inner) / inner ** 2))
    tail = integrate.simpson(mapped, x=u)
    return head + tail


@pytest.mark.parametrize("factory", [PathLossModel.inverse_shifted, PathLossModel.inverse_sum])
def test_campbell_integrals_match_simpson(factory):
    pathloss = factory(4.0)
    intensity = RadialIntensity.stationary()
    integrals = path_integrals(pathloss, intensity)

    for k, value in enumerate(integrals, start=1):
        oracle = _simpson_half_line(lambda t: 2 * np.pi * t * pathloss.evaluate(t) ** k)
        assert value == pytest.approx(oracle, rel=1e-6)


def _oscillating_singularity(t: float) -> float:
    d = abs(t - 0.3)
    return 0.0 if d == 0.0 else math.sin(1.0 / d) / d


def test_unconverged_integral_raises():
    # QUADPACK runs out of subintervals and reports an error larger than the value
    with pytest.raises(QuadratureError, match="unreliable"):
        quad(_oscillating_singularity, 0.0, 1.0, limit=20)


def _warning_quad(value, error):
    def fake_quad(*args, **kwargs):
        warnings.warn("The maximum number of subdivisions has been achieved.", integrate.IntegrationWarning)
        return value, error
    return fake_quad


def test_warning_with_large_error_raises(monkeypatch):
    monkeypatch.setattr(integrate, 'quad', _warning_quad(1.0, 0.5))
    with pytest.raises(QuadratureError):
        quad(lambda t: 1.0, 0.0, 1.0)


def test_warning_within_tolerance_is_logged(monkeypatch, caplog):
    monkeypatch.setattr(integrate, 'quad', _warning_quad(1.0, 1e-12))
    with caplog.at_level(logging.WARNING, logger='utils.quadrature'):
        assert quad(lambda t: 1.0, 0.0, 1.0) == (1.0, 1e-12)
    assert any("within tolerance" in r.getMessage() for r in caplog.records)
