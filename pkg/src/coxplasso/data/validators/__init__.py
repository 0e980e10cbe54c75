"""Data validators for survival datasets."""

from .survival_validator import ValidationResult, SurvivalValidator

__all__ = ['ValidationResult', 'SurvivalValidator']
