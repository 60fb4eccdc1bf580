"""Disordered mean-field spin and rotator systems: simulation, macroscopic
limits, Gaussian fluctuations, and critical-fluctuation dynamics."""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    CwParams,
    DisorderLaw,
    EmpiricalMeasure,
    FluctuationSeries,
    KuramotoParams,
    NumericsError,
    QuadratureError,
    SeedSpec,
    SpaceScale,
    StepSizeError,
    StructureError,
    TimeScale,
    TruncationError,
    empirical_to_fluctuation,
    sample_disorder,
)

__all__ = [
    "ConfigError",
    "CwParams",
    "DisorderLaw",
    "EmpiricalMeasure",
    "FluctuationSeries",
    "KuramotoParams",
    "NumericsError",
    "QuadratureError",
    "SeedSpec",
    "SpaceScale",
    "StepSizeError",
    "StructureError",
    "TimeScale",
    "TruncationError",
    "empirical_to_fluctuation",
    "sample_disorder",
    "__version__",
]
