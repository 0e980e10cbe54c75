"""
Risk-set and tie indexing for Breslow partial likelihoods.

Risk sets are nested, so they are stored as suffix ranges of the
time-sorted order: R_i = order[risk_start[i]:]. The co-index C_j (failure
times at which j is at risk) is the prefix range [0, c_end[j]).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from .dataset import SurvivalDataset
from .validators.survival_validator import SurvivalValidator
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class RiskSetIndex:
    """
    Precomputed failure-time ordering, risk sets and tie groups.

    Attributes:
        order: Permutation sorting observations by time (stable)
        failure_times: The m distinct failure times, ascending
        risk_start: Position in `order` where R_i starts (m,)
        c_end: For each observation, the number of failure times <= y_j (n,)
        D: Original indices of the observations failing at each failure time
        d: Weight sums of the tie groups (m,)
        jof: Failing index for singleton tie groups, -1 otherwise (m,)
        fail_index: Failure-time index of each observation, -1 if censored (n,)
    """

    order: np.ndarray
    failure_times: np.ndarray
    risk_start: np.ndarray
    c_end: np.ndarray
    D: List[np.ndarray]
    d: np.ndarray
    jof: np.ndarray
    fail_index: np.ndarray

    @property
    def n(self) -> int:
        return self.order.shape[0]

    @property
    def m(self) -> int:
        return self.failure_times.shape[0]

    def risk_set(self, i: int) -> np.ndarray:
        """Original indices of R_i."""
        return self.order[self.risk_start[i]:]

    def at_risk_times(self, j: int) -> np.ndarray:
        """Failure-time indices C_j for observation j."""
        return np.arange(self.c_end[j])

    def risk_sums(self, values: np.ndarray) -> np.ndarray:
        """
        Sum a per-observation vector over every risk set.

        Args:
            values: Vector (n,) or matrix (n, q) in original observation order

        Returns:
            Array (m,) or (m, q) with row i equal to Σ_{j∈R_i} values_j
        """
        sorted_vals = values[self.order]
        suffix = np.cumsum(sorted_vals[::-1], axis=0)[::-1]
        return suffix[self.risk_start]

    def log_risk_sums(self, log_values: np.ndarray) -> np.ndarray:
        """
        Stable log Σ_{j∈R_i} exp(log_values_j) for every risk set.

        Uses a reverse running log-sum-exp, so no exponent is evaluated above
        the running maximum.
        """
        sorted_vals = log_values[self.order]
        suffix = np.logaddexp.accumulate(sorted_vals[::-1])[::-1]
        return suffix[self.risk_start]

    def co_sums(self, values: np.ndarray) -> np.ndarray:
        """
        Sum a per-failure-time vector over every co-index set.

        Args:
            values: Vector (m,) or matrix (m, q)

        Returns:
            Array (n,) or (n, q) with row j equal to Σ_{i∈C_j} values_i
        """
        values = np.asarray(values, dtype=float)
        prefix = np.concatenate((np.zeros((1,) + values.shape[1:]), np.cumsum(values, axis=0)))
        return prefix[self.c_end]


def build_risk_index(y: np.ndarray, delta: np.ndarray, omega: np.ndarray) -> RiskSetIndex:
    """
    Index risk sets without validating inputs.

    A censored observation tied with a failure stays in that failure's risk
    set, since R_i = {j : y_j >= t_i}.

    Args:
        y: Observed times (n,)
        delta: Event indicators (n,)
        omega: Observation weights (n,)

    Returns:
        RiskSetIndex
    """
    y = np.asarray(y, dtype=float)
    failed = np.asarray(delta) == 1
    order = np.argsort(y, kind='stable')
    sorted_y = y[order]

    failure_times = np.unique(y[failed])
    risk_start = np.searchsorted(sorted_y, failure_times, side='left')
    c_end = np.searchsorted(failure_times, y, side='right')

    fail_index = np.full(y.shape[0], -1, dtype=int)
    fail_index[failed] = np.searchsorted(failure_times, y[failed])

    failing = np.flatnonzero(failed)
    groups = fail_index[failing]
    D = [failing[groups == i] for i in range(failure_times.shape[0])]
    d = np.bincount(groups, weights=np.asarray(omega, dtype=float)[failing],
                    minlength=failure_times.shape[0])

    sizes = np.bincount(groups, minlength=failure_times.shape[0])
    jof = np.full(failure_times.shape[0], -1, dtype=int)
    singles = sizes == 1
    jof[singles] = np.array([D[i][0] for i in np.flatnonzero(singles)], dtype=int)

    return RiskSetIndex(
        order=order,
        failure_times=failure_times,
        risk_start=risk_start,
        c_end=c_end,
        D=D,
        d=d,
        jof=jof,
        fail_index=fail_index,
    )


def validate_and_index(data: SurvivalDataset, validate: bool = True) -> RiskSetIndex:
    """
    Validate a survival dataset and build its risk-set index.

    Ties among failure times are grouped into a single D_i (Breslow).

    Args:
        data: Survival dataset
        validate: Run SurvivalValidator first

    Returns:
        RiskSetIndex

    Raises:
        NoFailuresError: If no observation failed
        NonFiniteError: If times, X or Z contain non-finite entries
        NegativeWeightError: If any weight is not positive
        NegativeTimeError: If any time is negative
        InvalidStatusError: If a status is not 0 or 1
    """
    if validate:
        SurvivalValidator().validate_or_raise(data)

    index = build_risk_index(data.y, data.delta, data.omega)
    logger.debug(f"Indexed {data.n} observations: {index.m} distinct failure times")
    return index
