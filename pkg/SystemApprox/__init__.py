"""SystemApprox Package

This package implements approximation processes for stable LTI systems
acting on bandlimited signals, together with the diagnostics used to probe
their convergence and divergence.

Main Components:
- approximator: Engine registry and sup-error scans (sync and async)
- base_engine: Abstract base class for approximation engines
- sampling_engines: Sampling-series and oversampled engines
- functional_engines: Measurement-functional and Walsh dyadic engines
- diagnostics: Kernel norms, Lebesgue constants, extremal systems, growth fits
- reports: Experiment reports and their CSV sink
"""

from .approximator import SystemApproximator
from .base_engine import ApproxResult, BaseApproxEngine
from .reports import ExperimentReport

__version__ = "1.0.0"
__all__ = ["SystemApproximator", "BaseApproxEngine", "ApproxResult", "ExperimentReport"]
