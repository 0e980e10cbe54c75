"""Survival data model, validation and risk-set indexing."""

from .dataset import (
    SurvivalDataset,
    SurvivalDataError,
    NoFailuresError,
    NonFiniteError,
    NegativeWeightError,
    NegativeTimeError,
    InvalidStatusError,
    DimensionMismatchError,
    ConstantColumnError,
    MissingColumnError,
)
from .risk_sets import RiskSetIndex, build_risk_index, validate_and_index
from .design import InteractionDesign, ScalingRecord, RawCoefficients, build_interactions, standardize

__all__ = [
    'SurvivalDataset',
    'SurvivalDataError',
    'NoFailuresError',
    'NonFiniteError',
    'NegativeWeightError',
    'NegativeTimeError',
    'InvalidStatusError',
    'DimensionMismatchError',
    'ConstantColumnError',
    'MissingColumnError',
    'RiskSetIndex',
    'build_risk_index',
    'validate_and_index',
    'InteractionDesign',
    'ScalingRecord',
    'RawCoefficients',
    'build_interactions',
    'standardize',
]
