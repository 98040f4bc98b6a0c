"""
Data models for channels, network geometry, results and run configuration.
"""

from .channel import FadingModel, PathLossModel
from .geometry import NetworkModel, RadialIntensity
from .results import BoundCurve, CapacityBounds, EmpiricalCdf, SimulatedValue

__all__ = [
    'FadingModel',
    'PathLossModel',
    'NetworkModel',
    'RadialIntensity',
    'BoundCurve',
    'CapacityBounds',
    'EmpiricalCdf',
    'SimulatedValue',
]
