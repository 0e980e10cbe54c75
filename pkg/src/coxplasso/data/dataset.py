"""Survival dataset container and CSV ingestion."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .schema import (
    TIME_COLUMN,
    STATUS_COLUMN,
    WEIGHT_COLUMN,
    REQUIRED_COLUMNS,
    covariate_columns,
    modifier_columns,
)
from ..utils.logging import get_logger

logger = get_logger(__name__)


class SurvivalDataError(Exception):
    """Base exception for survival data problems."""
    pass


class NoFailuresError(SurvivalDataError):
    """Raised when no observation has an event (partial likelihood is vacuous)."""
    pass


class NonFiniteError(SurvivalDataError):
    """Raised when times, covariates or modifiers contain NaN or infinity."""
    pass


class NegativeWeightError(SurvivalDataError):
    """Raised when an observation weight is zero or negative."""
    pass


class NegativeTimeError(SurvivalDataError):
    """Raised when an observed time is negative."""
    pass


class InvalidStatusError(SurvivalDataError):
    """Raised when an event indicator is not 0 or 1."""
    pass


class DimensionMismatchError(SurvivalDataError):
    """Raised when array lengths or row counts disagree."""
    pass


class ConstantColumnError(SurvivalDataError):
    """Raised when a column to be standardized has zero variance."""

    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


class MissingColumnError(SurvivalDataError):
    """Raised when an input table lacks a required column."""
    pass


def _frozen(values, ndim: int) -> np.ndarray:
    """Copy to a float array of the given rank, column-major for matrices, read-only."""
    arr = np.array(values, dtype=float)
    if ndim == 2:
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
        arr = np.asfortranarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SurvivalDataset:
    """
    Right-censored survival data with covariates X and modifiers Z.

    Attributes:
        y: Observed times (n,)
        delta: Event indicators, 1 = failure, 0 = censored (n,)
        omega: Observation weights (n,)
        X: Covariate matrix (n, p), column-major
        Z: Modifier matrix (n, nz), nz may be 0
        x_names: Covariate names
        z_names: Modifier names
    """

    y: np.ndarray
    delta: np.ndarray
    omega: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    x_names: List[str] = field(default_factory=list)
    z_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        y = _frozen(self.y, 1)
        n = y.shape[0]
        delta = _frozen(self.delta, 1)
        omega = _frozen(np.ones(n) if self.omega is None else self.omega, 1)
        X = _frozen(self.X, 2)
        Z = _frozen(np.zeros((n, 0)) if self.Z is None else self.Z, 2)
        if Z.size == 0:
            Z = _frozen(np.zeros((n, 0)), 2)

        lengths = {
            'y': n, 'delta': delta.shape[0], 'omega': omega.shape[0],
            'rows(X)': X.shape[0], 'rows(Z)': Z.shape[0],
        }
        if len(set(lengths.values())) != 1:
            raise DimensionMismatchError(f"Inconsistent lengths: {lengths}")

        x_names = list(self.x_names) or [f"x_{k + 1}" for k in range(X.shape[1])]
        z_names = list(self.z_names) or [f"z_{l + 1}" for l in range(Z.shape[1])]
        if len(x_names) != X.shape[1] or len(z_names) != Z.shape[1]:
            raise DimensionMismatchError("Column names do not match matrix widths")

        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'delta', delta)
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Z', Z)
        object.__setattr__(self, 'x_names', x_names)
        object.__setattr__(self, 'z_names', z_names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def nz(self) -> int:
        return self.Z.shape[1]

    @property
    def n_failures(self) -> int:
        return int(np.sum(self.delta == 1))

    def subset(self, rows: Union[Sequence[int], np.ndarray]) -> 'SurvivalDataset':
        """
        Return the dataset restricted to the given rows.

        Args:
            rows: Integer indices or boolean mask

        Returns:
            New SurvivalDataset
        """
        rows = np.asarray(rows)
        return SurvivalDataset(
            y=self.y[rows],
            delta=self.delta[rows],
            omega=self.omega[rows],
            X=self.X[rows],
            Z=self.Z[rows],
            x_names=self.x_names,
            z_names=self.z_names,
        )

    def with_design(self, X: np.ndarray, Z: Optional[np.ndarray] = None) -> 'SurvivalDataset':
        """Return a copy carrying replacement covariate and modifier matrices."""
        Z = self.Z if Z is None else Z
        return SurvivalDataset(
            y=self.y,
            delta=self.delta,
            omega=self.omega,
            X=X,
            Z=Z,
            x_names=self.x_names if X.shape[1] == self.p else [],
            z_names=self.z_names if Z.shape[1] == self.nz else [],
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> 'SurvivalDataset':
        """
        Build a dataset from a DataFrame laid out like the CSV format.

        Expected columns: `time`, `status`, optional `weight`, covariates
        prefixed `x_`, modifiers prefixed `z_`.

        Args:
            df: Input table

        Returns:
            SurvivalDataset

        Raises:
            MissingColumnError: If `time` or `status` is absent
        """
        missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
        if missing:
            raise MissingColumnError(f"Missing required columns: {missing}")

        x_cols = covariate_columns(df.columns)
        z_cols = modifier_columns(df.columns)
        if not x_cols:
            raise MissingColumnError("No covariate columns (prefix 'x_') found")

        omega = df[WEIGHT_COLUMN].to_numpy(dtype=float) if WEIGHT_COLUMN in df.columns else None

        return cls(
            y=df[TIME_COLUMN].to_numpy(dtype=float),
            delta=df[STATUS_COLUMN].to_numpy(dtype=float),
            omega=omega,
            X=df[x_cols].to_numpy(dtype=float),
            Z=df[z_cols].to_numpy(dtype=float) if z_cols else None,
            x_names=x_cols,
            z_names=z_cols,
        )

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> 'SurvivalDataset':
        """
        Load a dataset from a UTF-8 CSV file with a header row.

        Args:
            path: CSV file path

        Returns:
            SurvivalDataset
        """
        df = pd.read_csv(path, encoding='utf-8', decimal='.')
        logger.info(f"Read {len(df)} rows from {path}")
        return cls.from_frame(df)

    def to_frame(self) -> pd.DataFrame:
        """Return the dataset in the CSV layout."""
        data = {
            TIME_COLUMN: self.y,
            STATUS_COLUMN: self.delta.astype(int),
            WEIGHT_COLUMN: self.omega,
        }
        for k, name in enumerate(self.x_names):
            data[name] = self.X[:, k]
        for l, name in enumerate(self.z_names):
            data[name] = self.Z[:, l]
        return pd.DataFrame(data)
