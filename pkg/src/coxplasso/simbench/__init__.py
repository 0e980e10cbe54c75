"""Simulation benchmark: scenarios, generators, method comparison and tables."""

from .scenarios import ScenarioSpec, ScenarioNotFoundError, available_scenarios
from .generators import (
    SimDesign,
    SimulationError,
    PatternNeedsDimsError,
    UnknownCovariateLawError,
    draw_covariates,
    generate_proportional,
    generate_timevarying,
    true_model,
)
from .comparison import SimMetrics, ComparisonResult, run_comparison, default_methods
from .tables import emit_table, write_table

__all__ = [
    'ScenarioSpec',
    'ScenarioNotFoundError',
    'available_scenarios',
    'SimDesign',
    'SimulationError',
    'PatternNeedsDimsError',
    'UnknownCovariateLawError',
    'draw_covariates',
    'generate_proportional',
    'generate_timevarying',
    'true_model',
    'SimMetrics',
    'ComparisonResult',
    'run_comparison',
    'default_methods',
    'emit_table',
    'write_table',
]
