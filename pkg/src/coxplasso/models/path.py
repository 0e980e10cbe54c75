"""
Regularization paths and cross-validation.

A path is a geometric lambda grid from lambda_max down to
lambda_min_ratio * lambda_max, fit with warm starts. Cross-validation
scores each lambda by the goodness-of-fit statistic
l_full(coef) - l_train(coef), with coef fit without the held-out fold;
the reported curve is its negative, so smaller is better.

Engines adapt one model family to the driver: the exact proportional
solver, the exact stacked time-varying solver, the stacked logistic
approximation and the elastic-net Cox comparator.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import StratifiedKFold

from .coxnet import CoxNetModel, coxnet_lambda_max, fit_coxnet
from .logistic import BinomialLoss, fit_logistic_plasso, intercept_only, stack_problem
from .newton import cox_newton
from .objective import CoxLoss, ObjectiveError, SmoothLoss, linear_predictor, partial_loglik
from .solver import (
    BlockDesign,
    PenaltyConfig,
    PliableModel,
    SolverError,
    fit_working,
    zero_block_gap,
)
from .timevarying import (
    RiskSampleConfig,
    TimeBasis,
    TimeVaryingError,
    TimeVaryingModel,
    TimeVaryingProblem,
    tv_partial_loglik,
)
from ..config import get_settings
from ..data.dataset import SurvivalDataset
from ..data.design import build_interactions, column_moments
from ..data.risk_sets import validate_and_index
from ..data.schema import PATH_SCHEMA_ID, PATH_SCHEMA_VERSION
from ..utils.logging import get_logger

logger = get_logger(__name__)

# Relative margin added above the refined lambda_max
LAMBDA_MAX_MARGIN = 1e-6

# Tolerance and iteration cap of the unpenalized base fit behind lambda_max
BASE_TOL = 1e-10
BASE_MAX_ITER = 500

RULE_MIN = "min"
RULE_1SE = "1se"


class PathError(Exception):
    """Base exception for path and cross-validation problems."""
    pass


class AlphaOneError(PathError):
    """Raised when lambda_max is requested at alpha = 1."""
    pass


class FoldWithoutFailuresError(PathError):
    """Raised when a cross-validation fold would contain no failures."""
    pass


def _path_default(name: str):
    return field(default_factory=lambda: getattr(get_settings().path, name))


@dataclass
class PathConfig:
    """
    Lambda grid and cross-validation settings.

    Attributes:
        nlambda: Grid size (>= 2)
        lambda_min_ratio: Smallest lambda relative to lambda_max, in (0, 1)
        nfolds: Number of folds (>= 2)
        rule: 'min' or '1se'
        seed: Fold-assignment seed
        lambdas: Explicit descending grid overriding nlambda / lambda_min_ratio
    """

    nlambda: int = _path_default('nlambda')
    lambda_min_ratio: float = _path_default('lambda_min_ratio')
    nfolds: int = _path_default('nfolds')
    rule: str = _path_default('rule')
    seed: int = 0
    lambdas: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.nlambda < 2:
            raise PathError("nlambda must be at least 2")
        if not 0.0 < self.lambda_min_ratio < 1.0:
            raise PathError("lambda_min_ratio must lie in (0, 1)")
        if self.nfolds < 2:
            raise PathError("nfolds must be at least 2")
        if self.rule not in (RULE_MIN, RULE_1SE):
            raise PathError(f"rule must be '{RULE_MIN}' or '{RULE_1SE}'")
        if self.lambdas is not None:
            grid = np.asarray(self.lambdas, dtype=float)
            if grid.size < 1 or np.any(grid < 0) or np.any(np.diff(grid) >= 0):
                raise PathError("lambdas must be nonnegative and strictly decreasing")

    def grid(self, lam_max: float) -> np.ndarray:
        if self.lambdas is not None:
            return np.asarray(self.lambdas, dtype=float)
        return lam_max * np.geomspace(1.0, self.lambda_min_ratio, self.nlambda)


def refine_lambda_max(design: BlockDesign, score: np.ndarray, alpha: float) -> float:
    """
    Smallest lambda at which every block satisfies the zero condition.

    Starts from the main-effect bound |x_k' score| / (1 - alpha) and bisects
    the exact zero-block condition per block, which also accounts for the
    interaction scores.

    Args:
        design: Row design
        score: l'(eta) / n at the unpenalized base fit
        alpha: Mixing parameter, < 1

    Returns:
        Refined lambda_max with a relative margin
    """
    if alpha >= 1.0:
        raise AlphaOneError("lambda_max is undefined at alpha = 1 (no group penalty on beta)")

    main_bound = 0.0
    refined = 0.0
    for k in range(design.p):
        b = design.block(k).T @ score
        lo = abs(b[0]) / (1.0 - alpha)
        hi = np.linalg.norm(b) / (1.0 - alpha)
        main_bound = max(main_bound, lo)
        if zero_block_gap(b[0], b[1:], lo, alpha) > 0.0:
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if zero_block_gap(b[0], b[1:], mid, alpha) > 0.0:
                    lo = mid
                else:
                    hi = mid
            lo = hi
        refined = max(refined, lo)

    if refined > main_bound:
        logger.info(f"lambda_max raised from {main_bound:.6g} to {refined:.6g} by interaction scores")
    return refined * (1.0 + LAMBDA_MAX_MARGIN)


class PathEngine(ABC):
    """
    One model family driven along a lambda path.

    Args:
        data: Standardized survival dataset
        penalty: Template penalty (alpha and solver controls); lambda is set per fit
    """

    name = "engine"

    def __init__(self, data: SurvivalDataset, penalty: PenaltyConfig):
        self.data = data
        self.penalty = penalty

    @abstractmethod
    def lambda_max(self) -> float:
        """Smallest lambda with all penalized coefficients zero."""

    @abstractmethod
    def fit(self, lam: float, init=None):
        """Fit at one lambda, warm-started from init."""

    @abstractmethod
    def partial_loglik(self, fitted, data: SurvivalDataset) -> float:
        """Cox partial log-likelihood of a fitted model on (standardized) data."""

    @abstractmethod
    def subset(self, rows: np.ndarray) -> 'PathEngine':
        """Same engine on a subset of rows, sharing scaling and settings."""

    def warm_start(self, fitted):
        return fitted.model if isinstance(fitted, TimeVaryingModel) else fitted

    def coefficients(self, fitted):
        """Coefficient record behind a fitted object."""
        return self.warm_start(fitted)


class ProportionalEngine(PathEngine):
    """Exact pliable lasso for the proportional-hazards model."""

    name = "exact"

    def __init__(self, data: SurvivalDataset, penalty: PenaltyConfig):
        super().__init__(data, penalty)
        self.idx = validate_and_index(data)
        self.design = BlockDesign.proportional(data, build_interactions(data.X, data.Z))
        self.loss = CoxLoss(self.idx, data.omega)
        self._base: Optional[np.ndarray] = None

    def base_fit(self) -> np.ndarray:
        """Unpenalized modifier-only coefficients theta0 (cached)."""
        if self._base is None:
            if self.data.nz == 0:
                self._base = np.zeros(0)
            else:
                self._base = cox_newton(self.data.Z, self.idx, self.data.omega).beta
        return self._base

    def lambda_max(self) -> float:
        if self.penalty.alpha >= 1.0:
            raise AlphaOneError("lambda_max is undefined at alpha = 1 (no group penalty on beta)")
        theta0 = self.base_fit()
        eta = self.data.Z @ theta0 if self.data.nz else np.zeros(self.data.n)
        score = self.loss.gradient(eta) / self.data.n
        return refine_lambda_max(self.design, score, self.penalty.alpha)

    def fit(self, lam: float, init: Optional[PliableModel] = None) -> PliableModel:
        """Fit at lam; cold starts begin at the modifier-only fit."""
        if init is None:
            d = self.design
            init = PliableModel.zeros(d.p, d.K, d.q, lam, self.penalty.alpha)
            init.theta0 = self.base_fit().copy()
        return fit_working(self.design, self.loss, self.penalty.at(lam), init)

    def partial_loglik(self, fitted: PliableModel, data: SurvivalDataset) -> float:
        eta = linear_predictor(fitted.theta0, fitted.beta, fitted.Theta, data.X, data.Z)
        return partial_loglik(eta, validate_and_index(data, validate=False), data.omega)

    def subset(self, rows: np.ndarray) -> 'ProportionalEngine':
        return ProportionalEngine(self.data.subset(rows), self.penalty)


class TimeVaryingEngine(PathEngine):
    """Exact pliable lasso on stacked rows with time-basis modifiers."""

    name = "exact"

    def __init__(
        self,
        data: SurvivalDataset,
        penalty: PenaltyConfig,
        basis: Optional[TimeBasis],
        sample: Optional[RiskSampleConfig] = None,
    ):
        super().__init__(data, penalty)
        self.basis = basis
        self.sample = sample or RiskSampleConfig()
        self.problem = TimeVaryingProblem(data, basis, self.sample)
        self._base: Optional[PliableModel] = None

    def _base_fit(self, design: BlockDesign, loss: SmoothLoss, init: Optional[PliableModel]) -> PliableModel:
        """Fit of the unpenalized terms with every block held at zero (cached)."""
        if self._base is None:
            tight = PenaltyConfig(
                lam=0.0, alpha=self.penalty.alpha,
                outer_max_iter=max(self.penalty.outer_max_iter, BASE_MAX_ITER),
                tol_outer=BASE_TOL, tol_inner=self.penalty.tol_inner,
            )
            self._base = fit_working(design, loss, tight, init, freeze_blocks=True)
        return self._base

    def _score(self, design: BlockDesign, loss: SmoothLoss, init: Optional[PliableModel]) -> np.ndarray:
        base = self._base_fit(design, loss, init)
        return loss.gradient(base.eta(design)) / design.n_obs

    def lambda_max(self) -> float:
        if self.penalty.alpha >= 1.0:
            raise AlphaOneError("lambda_max is undefined at alpha = 1 (no group penalty on beta)")
        score = self._score(self.problem.design, self.problem.loss, None)
        return refine_lambda_max(self.problem.design, score, self.penalty.alpha)

    def fit(self, lam: float, init: Optional[PliableModel] = None) -> TimeVaryingModel:
        """Fit at lam; cold starts begin at the cached base fit when there is one."""
        if init is None and self._base is not None:
            init = self._base
        return self.problem.fit(self.penalty.at(lam), init)

    def partial_loglik(self, fitted: TimeVaryingModel, data: SurvivalDataset) -> float:
        return tv_partial_loglik(fitted, data)

    def subset(self, rows: np.ndarray) -> 'TimeVaryingEngine':
        return TimeVaryingEngine(self.data.subset(rows), self.penalty, self.basis, self.sample)


class LogisticEngine(TimeVaryingEngine):
    """Stacked logistic approximation with per-failure-time intercepts."""

    name = "logistic"

    def __init__(
        self,
        data: SurvivalDataset,
        penalty: PenaltyConfig,
        basis: Optional[TimeBasis],
        sample: Optional[RiskSampleConfig] = None,
    ):
        PathEngine.__init__(self, data, penalty)
        self.basis = basis
        self.sample = sample or RiskSampleConfig()
        self.idx = validate_and_index(data)
        self.problem = stack_problem(data, self.idx, basis, self.sample)
        self._base: Optional[PliableModel] = None

    def lambda_max(self) -> float:
        if self.penalty.alpha >= 1.0:
            raise AlphaOneError("lambda_max is undefined at alpha = 1 (no group penalty on beta)")
        design = self.problem.block_design()
        loss = BinomialLoss(self.problem.outcome, self.problem.expanded.omega, self.problem.n_obs)
        init = PliableModel.zeros(design.p, design.K, design.q, 0.0, self.penalty.alpha, design.n_groups)
        init.intercepts = intercept_only(self.problem)
        score = self._score(design, loss, init)
        return refine_lambda_max(design, score, self.penalty.alpha)

    def fit(self, lam: float, init: Optional[PliableModel] = None):
        if init is None and self._base is not None:
            init = self._base
        return fit_logistic_plasso(self.problem, self.penalty.at(lam), init)

    def subset(self, rows: np.ndarray) -> 'LogisticEngine':
        return LogisticEngine(self.data.subset(rows), self.penalty, self.basis, self.sample)


class CoxNetEngine(PathEngine):
    """
    Elastic-net Cox on the main effects X or on the full design [X | W].

    Interaction columns are standardized with moments of the data the
    engine was built on; subsets reuse them.
    """

    name = "coxnet"

    def __init__(
        self,
        data: SurvivalDataset,
        penalty: PenaltyConfig,
        full: bool = False,
        l1_ratio: float = 1.0,
        moments=None,
    ):
        super().__init__(data, penalty)
        self.full = full
        self.l1_ratio = l1_ratio
        raw = self._raw_features(data)
        self.moments = moments if moments is not None else self._moments(raw)
        self.features = self._scale(raw)
        self.idx = validate_and_index(data)
        self.loss = CoxLoss(self.idx, data.omega)

    def _raw_features(self, data: SurvivalDataset) -> np.ndarray:
        if not self.full or data.nz == 0:
            return data.X
        return np.column_stack((data.X, build_interactions(data.X, data.Z).W))

    def _moments(self, raw: np.ndarray):
        mean, sd = column_moments(raw)
        return mean, np.where(sd > 1e-12, sd, 1.0)

    def _scale(self, raw: np.ndarray) -> np.ndarray:
        mean, sd = self.moments
        return np.asfortranarray((raw - mean) / sd)

    def lambda_max(self) -> float:
        return coxnet_lambda_max(self.features, self.loss, self.l1_ratio) * (1.0 + LAMBDA_MAX_MARGIN)

    def fit(self, lam: float, init: Optional[CoxNetModel] = None) -> CoxNetModel:
        return fit_coxnet(self.features, self.loss, lam, self.l1_ratio, init)

    def partial_loglik(self, fitted: CoxNetModel, data: SurvivalDataset) -> float:
        eta = self._scale(self._raw_features(data)) @ fitted.beta
        return partial_loglik(eta, validate_and_index(data, validate=False), data.omega)

    def subset(self, rows: np.ndarray) -> 'CoxNetEngine':
        return CoxNetEngine(self.data.subset(rows), self.penalty, self.full, self.l1_ratio, self.moments)

    def split_coefficients(self, fitted: CoxNetModel):
        """(beta, Theta) with Theta (p, nz) on the scaled interaction columns."""
        p, nz = self.data.p, self.data.nz
        beta = fitted.beta[:p]
        if self.full and nz:
            return beta, fitted.beta[p:].reshape(p, nz)
        return beta, np.zeros((p, nz))


def make_engine(
    engine: str,
    data: SurvivalDataset,
    penalty: PenaltyConfig,
    basis: Optional[TimeBasis] = None,
    sample: Optional[RiskSampleConfig] = None,
) -> PathEngine:
    """
    Build an engine by name: 'exact', 'logistic' or 'coxnet'.

    'exact' without a time basis is the proportional solver; with one, the
    stacked time-varying solver.
    """
    if engine == "exact":
        if basis is None and (sample is None or sample.sample_size is None):
            return ProportionalEngine(data, penalty)
        return TimeVaryingEngine(data, penalty, basis, sample)
    if engine == "logistic":
        return LogisticEngine(data, penalty, basis, sample)
    if engine == "coxnet":
        return CoxNetEngine(data, penalty)
    raise PathError(f"Unknown engine '{engine}'")


@dataclass(eq=False)
class PathResult:
    """
    Fitted models along a lambda grid plus cross-validation statistics.

    Attributes:
        lambdas: Descending grid
        models: One fitted object per lambda (None where the fit failed)
        errors: Failure messages keyed by grid position
        cv_mean: Mean negative goodness-of-fit per lambda (empty without CV)
        cv_se: Its standard error per lambda
        lambda_opt: Selected lambda (None without CV)
        folds: Fold of each observation (empty without CV)
    """

    engine: str
    alpha: float
    lambdas: np.ndarray
    models: List[Any]
    errors: Dict[int, str] = field(default_factory=dict)
    cv_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cv_se: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cv_folds: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    lambda_opt: Optional[float] = None
    rule: str = RULE_MIN
    folds: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    seed: int = 0

    @property
    def index_opt(self) -> Optional[int]:
        if self.lambda_opt is None:
            return None
        return int(np.flatnonzero(self.lambdas == self.lambda_opt)[0])

    @property
    def best_model(self):
        index = self.index_opt
        return None if index is None else self.models[index]

    def to_dict(self) -> Dict[str, Any]:
        """JSON document with per-lambda coefficients and CV curves."""
        return {
            'schema': PATH_SCHEMA_ID,
            'version': PATH_SCHEMA_VERSION,
            'engine': self.engine,
            'alpha': float(self.alpha),
            'lambdas': self.lambdas.tolist(),
            'models': [None if m is None else m.to_dict() for m in self.models],
            'errors': {str(k): v for k, v in sorted(self.errors.items())},
            'cv': {
                'mean': self.cv_mean.tolist(),
                'se': self.cv_se.tolist(),
                'lambda_opt': self.lambda_opt,
                'rule': self.rule,
                'folds': self.folds.tolist(),
                'seed': int(self.seed),
            },
        }


PATH_ERRORS = (SolverError, ObjectiveError, TimeVaryingError, np.linalg.LinAlgError)


def _fit_grid(engine: PathEngine, lambdas: np.ndarray, init=None):
    models: List[Any] = []
    errors: Dict[int, str] = {}
    for i, lam in enumerate(lambdas):
        try:
            fitted = engine.fit(float(lam), init)
        except PATH_ERRORS as e:
            errors[i] = f"{type(e).__name__}: {e}"
            logger.warning(f"Fit failed at lambda={lam:.4g}: {errors[i]}")
            models.append(None)
            continue
        models.append(fitted)
        init = engine.warm_start(fitted)
    return models, errors


# Attempts at raising the grid head before giving up
HEAD_RAISES = 5


def _is_zero(engine: PathEngine, fitted) -> bool:
    coef = engine.coefficients(fitted)
    Theta = getattr(coef, 'Theta', None)
    return bool(np.all(coef.beta == 0) and (Theta is None or np.all(Theta == 0)))


def _zero_head(engine: PathEngine, lam_max: float):
    """
    Fit at lambda_max, raising it by 1% until every penalized coefficient is zero.

    The zero condition is checked at the base fit; the solver's own base may
    differ within tolerance, so a head fit can leave a block marginally active.
    """
    lam = lam_max
    head = engine.fit(lam)
    for _ in range(HEAD_RAISES):
        if _is_zero(engine, head):
            break
        lam *= 1.01
        logger.info(f"Head fit not all-zero; raising lambda_max to {lam:.6g}")
        head = engine.fit(lam)
    else:
        if not _is_zero(engine, head):
            logger.warning(f"Head fit at lambda={lam:.6g} still has active blocks")
    return head


def fit_path(engine: PathEngine, config: PathConfig) -> PathResult:
    """
    Fit a warm-started path from lambda_max down the grid.

    Failures at single lambdas are recorded and the path continues.

    Args:
        engine: Model family on the full data
        config: Grid settings

    Returns:
        PathResult without CV statistics
    """
    if config.lambdas is None:
        lam_max = engine.lambda_max()
        if lam_max <= 0.0:
            raise PathError("lambda_max is zero; covariates carry no signal at the base fit")
        head = _zero_head(engine, lam_max)
        lam_max = engine.coefficients(head).lam
        lambdas = config.grid(lam_max)
        logger.info(f"Fitting {engine.name} path: {lambdas.size} lambdas from {lambdas[0]:.4g} to {lambdas[-1]:.4g}")
        models, errors = _fit_grid(engine, lambdas[1:], engine.warm_start(head))
        models.insert(0, head)
        errors = {i + 1: msg for i, msg in errors.items()}
    else:
        lambdas = config.grid(float(config.lambdas[0]))
        logger.info(f"Fitting {engine.name} path: {lambdas.size} lambdas from {lambdas[0]:.4g} to {lambdas[-1]:.4g}")
        models, errors = _fit_grid(engine, lambdas)
    if errors:
        logger.warning(f"{len(errors)} of {lambdas.size} path fits failed")

    return PathResult(
        engine=engine.name,
        alpha=engine.penalty.alpha,
        lambdas=lambdas,
        models=models,
        errors=errors,
        seed=config.seed,
    )


def assign_folds(delta: np.ndarray, nfolds: int, seed: int) -> np.ndarray:
    """
    Fold of each observation, stratified by event status.

    Raises:
        FoldWithoutFailuresError: If some fold would hold no failures
    """
    n_failures = int(np.sum(delta == 1))
    if nfolds > n_failures:
        raise FoldWithoutFailuresError(
            f"{nfolds} folds but only {n_failures} failures; lower nfolds"
        )
    folds = np.zeros(delta.shape[0], dtype=int)
    splitter = StratifiedKFold(n_splits=nfolds, shuffle=True, random_state=seed)
    for f, (_, test) in enumerate(splitter.split(np.zeros(delta.shape[0]), delta.astype(int))):
        folds[test] = f
    for f in range(nfolds):
        if not np.any(delta[folds == f] == 1):
            raise FoldWithoutFailuresError(f"Fold {f} has no failures; lower nfolds")
    return folds


def _fold_statistics(engine: PathEngine, folds: np.ndarray, f: int, lambdas: np.ndarray) -> np.ndarray:
    train_rows = np.flatnonzero(folds != f)
    train_engine = engine.subset(train_rows)
    models, _ = _fit_grid(train_engine, lambdas)

    stats = np.full(lambdas.size, np.nan)
    for i, fitted in enumerate(models):
        if fitted is None:
            continue
        l_full = engine.partial_loglik(fitted, engine.data)
        l_train = train_engine.partial_loglik(fitted, train_engine.data)
        stats[i] = -(l_full - l_train)
    logger.info(f"CV fold {f + 1}: {np.sum(np.isfinite(stats))} of {lambdas.size} lambdas scored")
    return stats


def select_lambda(lambdas: np.ndarray, cv_mean: np.ndarray, cv_se: np.ndarray, rule: str) -> float:
    """
    Pick lambda by the minimum rule or the one-standard-error rule.

    The 1se rule returns the largest lambda whose mean is within one
    standard error of the minimum.
    """
    if not np.any(np.isfinite(cv_mean)):
        raise PathError("No lambda has a finite cross-validation score")
    best = int(np.nanargmin(cv_mean))
    if rule == RULE_MIN:
        return float(lambdas[best])
    threshold = cv_mean[best] + (cv_se[best] if np.isfinite(cv_se[best]) else 0.0)
    within = np.flatnonzero(cv_mean <= threshold)
    return float(lambdas[within.min()])


def cv_goodness_of_fit(engine: PathEngine, config: PathConfig, lambdas: np.ndarray, n_jobs: Optional[int] = None):
    """
    Cross-validate a lambda grid with the goodness-of-fit statistic.

    For fold f and each lambda, coefficients are fit on the other folds
    and scored by -(l_full - l_train). Folds run on threads.

    Args:
        engine: Engine on the full (standardized) data
        config: Fold count, rule and seed
        lambdas: Grid from the full-data path
        n_jobs: Threads; defaults to settings.parallel.n_jobs

    Returns:
        (cv_mean, cv_se, lambda_opt, per-fold matrix, fold assignment)
    """
    folds = assign_folds(engine.data.delta, config.nfolds, config.seed)
    n_jobs = n_jobs or get_settings().parallel.n_jobs

    per_fold = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fold_statistics)(engine, folds, f, lambdas) for f in range(config.nfolds)
    )
    per_fold = np.vstack(per_fold)

    with np.errstate(invalid='ignore'):
        counts = np.sum(np.isfinite(per_fold), axis=0)
        cv_mean = np.nanmean(np.where(counts > 0, per_fold, 0.0), axis=0)
        cv_mean = np.where(counts > 0, cv_mean, np.nan)
        sd = np.array([np.nanstd(col, ddof=1) if c > 1 else np.nan for col, c in zip(per_fold.T, counts)])
        cv_se = sd / np.sqrt(np.maximum(counts, 1))

    lambda_opt = select_lambda(lambdas, cv_mean, cv_se, config.rule)
    logger.info(f"CV selected lambda={lambda_opt:.4g} (rule={config.rule})")
    return cv_mean, cv_se, lambda_opt, per_fold, folds


def run_cv(engine: PathEngine, config: PathConfig, n_jobs: Optional[int] = None) -> PathResult:
    """Full-data path followed by cross-validation on its grid."""
    result = fit_path(engine, config)
    cv_mean, cv_se, lambda_opt, per_fold, folds = cv_goodness_of_fit(engine, config, result.lambdas, n_jobs)
    result.cv_mean = cv_mean
    result.cv_se = cv_se
    result.cv_folds = per_fold
    result.lambda_opt = lambda_opt
    result.rule = config.rule
    result.folds = folds
    return result
