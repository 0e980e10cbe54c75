"""
Survival data validation module.

Validates right-censored survival data for:
- Finite times, covariates and modifiers
- Nonnegative times and 0/1 event indicators
- Strictly positive observation weights
- At least one failure
- Low failure counts and heavy censoring (warnings only)
"""

import numpy as np
from dataclasses import dataclass, field
from typing import List, Optional

from ...config import get_settings
from ...utils.logging import get_logger
from ..dataset import (
    SurvivalDataset,
    SurvivalDataError,
    NoFailuresError,
    NonFiniteError,
    NegativeWeightError,
    NegativeTimeError,
    InvalidStatusError,
)

logger = get_logger(__name__)


@dataclass
class ValidationResult:
    """Results from survival data validation."""

    is_valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    # First specific error, raised by validate_or_raise
    exception: Optional[SurvivalDataError] = None

    def __str__(self) -> str:
        """String representation of validation results."""
        lines = [f"Validation: {'PASSED' if self.is_valid else 'FAILED'}"]

        if self.errors:
            lines.append(f"\nErrors ({len(self.errors)}):")
            for error in self.errors:
                lines.append(f"  - {error}")

        if self.warnings:
            lines.append(f"\nWarnings ({len(self.warnings)}):")
            for warning in self.warnings:
                lines.append(f"  - {warning}")

        if self.info:
            lines.append("\nInfo:")
            for key, value in self.info.items():
                lines.append(f"  - {key}: {value}")

        return "\n".join(lines)


class SurvivalValidator:
    """Validator for right-censored survival data."""

    def __init__(self):
        """Initialize validator with configuration settings."""
        self.config = get_settings().validation

    def validate(self, data: SurvivalDataset, name: str = "dataset") -> ValidationResult:
        """
        Validate a survival dataset.

        Args:
            data: Dataset to check
            name: Label used in log messages

        Returns:
            ValidationResult with errors, warnings, and info
        """
        errors = []
        warnings = []
        info = {'observations': data.n, 'covariates': data.p, 'modifiers': data.nz}
        first: Optional[SurvivalDataError] = None

        def fail(exc: SurvivalDataError):
            nonlocal first
            errors.append(str(exc))
            if first is None:
                first = exc

        # 1. Finite values
        for label, arr in (('time', data.y), ('X', data.X), ('Z', data.Z)):
            bad = ~np.isfinite(arr)
            if bad.any():
                fail(NonFiniteError(f"{label} has {int(bad.sum())} non-finite entries"))

        # 2. Times and event indicators
        negative = int(np.sum(data.y[np.isfinite(data.y)] < 0))
        if negative:
            fail(NegativeTimeError(f"time has {negative} negative entries"))

        bad_status = ~np.isin(data.delta, (0.0, 1.0))
        if bad_status.any():
            fail(InvalidStatusError(f"status must contain only 0 and 1, found {int(bad_status.sum())} other values"))

        # 3. Weights
        if np.any(~np.isfinite(data.omega)) or np.any(data.omega <= 0):
            fail(NegativeWeightError(
                f"{int(np.sum(~(data.omega > 0)))} observation weights are not positive"
            ))

        # 4. Failures
        n_failures = data.n_failures
        info['failures'] = n_failures
        if n_failures == 0:
            fail(NoFailuresError("No failures observed; partial likelihood is vacuous"))
        elif n_failures < self.config.min_failures:
            warnings.append(
                f"Only {n_failures} failures (expected >= {self.config.min_failures})"
            )

        censoring = 1.0 - n_failures / data.n if data.n else 0.0
        info['censoring_fraction'] = f"{censoring * 100:.1f}%"
        if censoring > self.config.max_censoring_fraction:
            warnings.append(
                f"Heavy censoring: {censoring*100:.1f}% > {self.config.max_censoring_fraction*100:.0f}% threshold"
            )

        is_valid = len(errors) == 0

        if not is_valid:
            logger.error(f"Validation failed for {name}: {len(errors)} errors")
        elif warnings:
            logger.warning(f"Validation passed with warnings for {name}: {len(warnings)} warnings")
        else:
            logger.debug(f"Validation passed for {name}")

        return ValidationResult(
            is_valid=is_valid,
            errors=errors,
            warnings=warnings,
            info=info,
            exception=first,
        )

    def validate_or_raise(self, data: SurvivalDataset, name: str = "dataset") -> ValidationResult:
        """
        Validate data and raise the first specific error if validation fails.

        Args:
            data: Dataset to check
            name: Label used in log messages

        Returns:
            ValidationResult (always passing)

        Raises:
            NoFailuresError, NonFiniteError, NegativeWeightError
        """
        result = self.validate(data, name)

        if not result.is_valid:
            raise result.exception

        if result.warnings:
            logger.warning(f"Data quality warnings for {name}:\n{result}")

        return result
