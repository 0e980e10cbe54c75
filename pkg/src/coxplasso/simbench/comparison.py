"""
Method comparison on simulated data.

Each replicate draws a training set and a test set from independent
child streams of the root seed, fits every method with cross-validated
lambda on the standardized training data, and scores it by the negative
partial log-likelihood on the test set together with false positive and
false negative counts against the scenario's true support.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .generators import SimDesign, SimulationError, generate, true_model
from ..config import get_settings
from ..data.dataset import SurvivalDataError, SurvivalDataset
from ..data.design import standardize
from ..models.newton import ConvergenceError
from ..models.objective import ObjectiveError
from ..models.path import CoxNetEngine, PathConfig, PathError, make_engine, run_cv
from ..models.solver import PenaltyConfig, SolverError
from ..models.timevarying import (
    RiskSampleConfig,
    TimeBasis,
    TimeVaryingError,
    TimeVaryingModel,
    fit_time_interaction_cox,
    tv_partial_loglik,
)
from ..utils.logging import get_logger

logger = get_logger(__name__)

# |coef| above this counts as selected (standardized scale)
SELECTION_THRESHOLD = 1e-8

METHOD_PLASSO = "plasso"
METHOD_LASSO_MAIN = "lasso (main)"
METHOD_LASSO_FULL = "lasso (full)"
METHOD_COX_FULL = "cox (full)"

METRIC_COLUMNS = ("method", "test_nll", "fp_beta", "fn_beta", "fp_theta", "fn_theta", "reference_nll", "reps")

REPLICATE_ERRORS = (
    SimulationError, SurvivalDataError, PathError, SolverError, ObjectiveError,
    TimeVaryingError, ConvergenceError, np.linalg.LinAlgError,
)


@dataclass
class SimMetrics:
    """Per-method averages over successful replicates."""

    method: str
    test_nll: float
    fp_beta: float
    fn_beta: float
    fp_theta: float
    fn_theta: float
    reference_nll: float
    reps: int


@dataclass
class Selection:
    """Estimated support of one fit: beta (p,) and interaction units (p, nz + 1)."""

    beta: np.ndarray
    units: np.ndarray


@dataclass
class ComparisonResult:
    """Replicate-level records, per-method metrics and failure counts."""

    design: SimDesign
    replicates: pd.DataFrame
    metrics: List[SimMetrics]
    failures: Dict[str, int]


def default_methods(design: SimDesign) -> List[str]:
    """Methods compared for the design's scenario."""
    if design.scenario.is_timevarying:
        return [METHOD_PLASSO, METHOD_LASSO_MAIN, METHOD_COX_FULL]
    methods = [METHOD_PLASSO, METHOD_LASSO_MAIN]
    if design.nz:
        methods.append(METHOD_LASSO_FULL)
    return methods


def _selected(values: np.ndarray) -> np.ndarray:
    return np.abs(values) > SELECTION_THRESHOLD


def pliable_selection(Theta: np.ndarray, beta: np.ndarray, nz: int) -> Selection:
    """
    Support of a pliable fit.

    Time-basis columns after the first nz count as one unit per covariate,
    selected when any of them is nonzero.
    """
    p = beta.shape[0]
    units = np.zeros((p, nz + 1), dtype=bool)
    units[:, :nz] = _selected(Theta[:, :nz])
    if Theta.shape[1] > nz:
        units[:, nz] = np.any(_selected(Theta[:, nz:]), axis=1)
    return Selection(_selected(beta), units)


def count_errors(selection: Selection, true_beta: np.ndarray, true_units: np.ndarray) -> Tuple[int, int, int, int]:
    """(fp_beta, fn_beta, fp_theta, fn_theta)."""
    truth = true_beta != 0
    return (
        int(np.sum(selection.beta & ~truth)),
        int(np.sum(~selection.beta & truth)),
        int(np.sum(selection.units & ~true_units)),
        int(np.sum(~selection.units & true_units)),
    )


def _standardized_pair(train: SurvivalDataset, test: SurvivalDataset):
    train_s, record = standardize(train)
    X, Z = record.apply(test.X, test.Z)
    return train_s, test.with_design(X, Z)


def _fit_method(
    method: str,
    design: SimDesign,
    train: SurvivalDataset,
    test: SurvivalDataset,
    path_config: PathConfig,
    sample_seed: int,
):
    """Fit one method; returns (test log-likelihood, Selection, hierarchy violations)."""
    p, nz = train.p, train.nz
    penalty = PenaltyConfig(lam=0.0, alpha=design.alpha)

    if method == METHOD_PLASSO:
        basis, sample = None, None
        if design.scenario.is_timevarying:
            failure_times = train.y[train.delta == 1]
            basis = TimeBasis.from_spec(design.basis or "linear", failure_times)
            sample = RiskSampleConfig.from_spec(design.sample, seed=sample_seed)
            engine = make_engine(design.engine, train, penalty, basis, sample)
        else:
            engine = make_engine("exact", train, penalty)
        best = run_cv(engine, path_config, n_jobs=1).best_model
        if best is None:
            raise PathError("Selected lambda has no fitted model")
        coefs = engine.coefficients(best)
        if isinstance(best, TimeVaryingModel):
            ll = tv_partial_loglik(best, test)
        else:
            ll = engine.partial_loglik(best, test)
        return ll, pliable_selection(coefs.Theta, coefs.beta, nz), int(coefs.hierarchy_violations().size)

    if method in (METHOD_LASSO_MAIN, METHOD_LASSO_FULL):
        engine = CoxNetEngine(train, penalty, full=method == METHOD_LASSO_FULL)
        best = run_cv(engine, path_config, n_jobs=1).best_model
        if best is None:
            raise PathError("Selected lambda has no fitted model")
        beta, Theta = engine.split_coefficients(best)
        return engine.partial_loglik(best, test), pliable_selection(Theta, beta, nz), 0

    if method == METHOD_COX_FULL:
        sample = RiskSampleConfig.from_spec(design.sample, seed=sample_seed)
        fitted, _ = fit_time_interaction_cox(train, sample)
        Theta = np.column_stack((np.zeros((p, nz)), fitted.model.Theta))
        return tv_partial_loglik(fitted, test), pliable_selection(Theta, fitted.model.beta, nz), 0

    raise SimulationError(f"Unknown method '{method}'")


def run_replicate(
    design: SimDesign,
    rep: int,
    seed: np.random.SeedSequence,
    methods: Sequence[str],
    path_config: PathConfig,
) -> List[dict]:
    """
    One replicate: generate, fit every method, score.

    Methods that fail are logged and left out of the returned records.
    """
    train_seed, test_seed, fit_seed = seed.spawn(3)
    sample_seed = int(fit_seed.generate_state(1)[0])
    config = replace(path_config, seed=sample_seed)

    train_raw = generate(design, design.n, train_seed)
    test_raw = generate(design, design.n_test, test_seed)
    truth = true_model(design.scenario, design.p, design.nz)
    reference_nll = -tv_partial_loglik(truth, test_raw)
    true_beta = design.scenario.main_effects(design.p)
    true_units = design.scenario.interaction_support(design.p, design.nz)

    records = []
    try:
        train, test = _standardized_pair(train_raw, test_raw)
    except SurvivalDataError as e:
        logger.warning(f"Replicate {rep}: excluded ({type(e).__name__}: {e})")
        return records

    for method in methods:
        try:
            ll, selection, violations = _fit_method(method, design, train, test, config, sample_seed)
        except REPLICATE_ERRORS as e:
            logger.warning(f"Replicate {rep}, {method}: excluded ({type(e).__name__}: {e})")
            continue
        fp_b, fn_b, fp_t, fn_t = count_errors(selection, true_beta, true_units)
        records.append({
            'rep': rep, 'method': method, 'test_nll': -ll,
            'fp_beta': fp_b, 'fn_beta': fn_b, 'fp_theta': fp_t, 'fn_theta': fn_t,
            'reference_nll': reference_nll, 'hierarchy_violations': violations,
        })

    logger.info(f"Replicate {rep}: {len(records)} of {len(methods)} methods scored")
    return records


def summarize(records: pd.DataFrame, methods: Sequence[str], n_reps: int) -> Tuple[List[SimMetrics], Dict[str, int]]:
    """Average replicate records per method, in method order."""
    metrics, failures = [], {}
    for method in methods:
        rows = records[records['method'] == method] if len(records) else records
        failures[method] = n_reps - len(rows)
        if len(rows) == 0:
            continue
        metrics.append(SimMetrics(
            method=method,
            test_nll=float(rows['test_nll'].mean()),
            fp_beta=float(rows['fp_beta'].mean()),
            fn_beta=float(rows['fn_beta'].mean()),
            fp_theta=float(rows['fp_theta'].mean()),
            fn_theta=float(rows['fn_theta'].mean()),
            reference_nll=float(rows['reference_nll'].mean()),
            reps=int(len(rows)),
        ))
    return metrics, failures


def run_comparison(
    design: SimDesign,
    methods: Optional[Sequence[str]] = None,
    path_config: Optional[PathConfig] = None,
    n_jobs: Optional[int] = None,
) -> ComparisonResult:
    """
    Run all replicates of a design and average the metrics per method.

    Args:
        design: Scenario, sizes and seeds
        methods: Methods to compare (scenario default when None)
        path_config: Lambda grid and CV settings shared by all methods
        n_jobs: Replicate threads; defaults to settings.parallel.n_jobs

    Returns:
        ComparisonResult
    """
    methods = list(methods or default_methods(design))
    path_config = path_config or PathConfig()
    n_jobs = n_jobs or get_settings().parallel.n_jobs
    children = np.random.SeedSequence(design.seed).spawn(design.n_reps)

    logger.info(f"Simulating {design.scenario.name}: n={design.n}, p={design.p}, nz={design.nz}, "
                f"{design.n_reps} replicates, methods={methods}")

    per_rep = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(run_replicate)(design, rep, children[rep], methods, path_config)
        for rep in range(design.n_reps)
    )
    records = [row for rows in per_rep for row in rows]
    columns = ['rep', 'method', 'test_nll', 'fp_beta', 'fn_beta', 'fp_theta', 'fn_theta',
               'reference_nll', 'hierarchy_violations']
    frame = pd.DataFrame(records, columns=columns).sort_values(['rep', 'method'], kind='stable')
    frame = frame.reset_index(drop=True)

    metrics, failures = summarize(frame, methods, design.n_reps)
    for method, count in failures.items():
        if count:
            logger.warning(f"{method}: {count} of {design.n_reps} replicates excluded")

    return ComparisonResult(design=design, replicates=frame, metrics=metrics, failures=failures)
