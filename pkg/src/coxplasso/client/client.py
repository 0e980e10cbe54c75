"""
PlassoClient - high-level API for fitting pliable lasso Cox models.

Loads survival CSV files, standardizes them, fits single models, paths
and cross-validated paths, and saves / loads / applies model documents.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import get_settings
from ..data.dataset import MissingColumnError, SurvivalDataset
from ..data.design import ScalingRecord, standardize
from ..data.schema import (
    MODEL_SCHEMA_ID,
    MODEL_SCHEMA_VERSION,
    TIME_COLUMN,
    json_safe,
)
from ..data.validators import SurvivalValidator
from ..models.path import PathConfig, PathResult, fit_path, make_engine, run_cv
from ..models.solver import PenaltyConfig, PliableModel
from ..models.timevarying import RiskSampleConfig, TimeBasis, TimeVaryingModel
from ..utils.logging import get_logger

logger = get_logger(__name__)

ENGINES = ("exact", "logistic")


class ClientError(Exception):
    """Base exception for client operations."""
    pass


class SchemaMismatchError(ClientError):
    """Raised when a model document has an unknown schema id or version."""
    pass


@dataclass
class FitContext:
    """Standardized data plus everything needed to map back to raw inputs."""

    data: SurvivalDataset
    scaling: ScalingRecord
    x_names: List[str]
    z_names: List[str]
    basis: Optional[TimeBasis]
    sample: Optional[RiskSampleConfig]


@dataclass(eq=False)
class FittedPlasso:
    """
    A fitted model with its scaling, column names and time basis.

    `model` is always a TimeVaryingModel; proportional fits carry no basis.
    Column names are those of the raw input, before constant columns were dropped.
    """

    engine: str
    model: TimeVaryingModel
    scaling: ScalingRecord
    x_names: List[str]
    z_names: List[str]

    @property
    def coefficients(self) -> PliableModel:
        return self.model.model

    @property
    def is_timevarying(self) -> bool:
        return self.model.basis is not None

    def raw_coefficients(self) -> Optional[Dict[str, Any]]:
        """Raw-scale (theta0, beta, Theta, offset) for proportional fits; None with a time basis."""
        if self.is_timevarying:
            return None
        m = self.coefficients
        raw = self.scaling.unscale(m.theta0, m.beta, m.Theta)
        return {
            'theta0': raw.theta0.tolist(),
            'beta': raw.beta.tolist(),
            'Theta': raw.Theta.tolist(),
            'offset': raw.offset,
        }

    def to_dict(self) -> Dict[str, Any]:
        coefficients = self.model.to_dict()
        time_basis = coefficients.pop('time_basis')
        m = self.coefficients
        return {
            'schema': MODEL_SCHEMA_ID,
            'version': MODEL_SCHEMA_VERSION,
            'engine': self.engine,
            'penalty': {'lambda': float(m.lam), 'alpha': float(m.alpha)},
            'covariates': list(self.x_names),
            'modifiers': list(self.z_names),
            'scaling': self.scaling.to_dict(),
            'coefficients': {**coefficients, 'raw': self.raw_coefficients()},
            'time_basis': time_basis,
            'diagnostics': {
                'iterations': int(m.iterations),
                'objective': float(m.objective),
                'kkt': float(m.kkt),
                'converged': bool(m.converged),
                'flags': list(m.flags),
            },
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'FittedPlasso':
        """
        Rebuild a fitted model from its document.

        Raises:
            SchemaMismatchError: If schema id or version differ from this package's
        """
        if payload.get('schema') != MODEL_SCHEMA_ID or payload.get('version') != MODEL_SCHEMA_VERSION:
            raise SchemaMismatchError(
                f"Expected {MODEL_SCHEMA_ID} v{MODEL_SCHEMA_VERSION}, "
                f"got {payload.get('schema')} v{payload.get('version')}"
            )
        coefficients = dict(payload['coefficients'])
        coefficients.pop('raw', None)
        coefficients['time_basis'] = payload.get('time_basis')
        return cls(
            engine=payload['engine'],
            model=TimeVaryingModel.from_dict(coefficients),
            scaling=ScalingRecord.from_dict(payload['scaling']),
            x_names=list(payload['covariates']),
            z_names=list(payload['modifiers']),
        )

    def save(self, path: Union[str, Path]) -> Path:
        """Write the model document as JSON (full float precision, sorted keys)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(json_safe(self.to_dict()), f, indent=2, sort_keys=True)
        logger.info(f"Saved model to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'FittedPlasso':
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Model file not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))

    def predict(
        self,
        frame: pd.DataFrame,
        times: Optional[Union[float, Sequence[float]]] = None,
    ) -> pd.DataFrame:
        """
        Linear predictor and relative risk for new raw rows.

        Args:
            frame: Table with the model's covariate and modifier columns
            times: Evaluation times for time-varying models (scalar or per row);
                   the `time` column is used when omitted

        Returns:
            DataFrame with columns eta and risk (and time for time-varying models)

        Raises:
            MissingColumnError: If a model column, or the times of a time-varying model, is missing
        """
        missing = [c for c in self.x_names + self.z_names if c not in frame.columns]
        if missing:
            raise MissingColumnError(f"Missing model columns: {missing}")

        X_raw = frame[self.x_names].to_numpy(dtype=float)
        Z_raw = frame[self.z_names].to_numpy(dtype=float) if self.z_names else np.zeros((len(frame), 0))
        X, Z = self.scaling.apply(X_raw, Z_raw)

        if self.is_timevarying:
            if times is None:
                if TIME_COLUMN not in frame.columns:
                    raise MissingColumnError("Time-varying model needs evaluation times or a 'time' column")
                times = frame[TIME_COLUMN].to_numpy(dtype=float)
            t = np.broadcast_to(np.asarray(times, dtype=float), (len(frame),)).copy()
        else:
            t = np.zeros(len(frame))

        eta = self.model.eta_at(X, Z, t)
        out = pd.DataFrame({'eta': eta, 'risk': np.exp(eta)}, index=frame.index)
        if self.is_timevarying:
            out.insert(0, 'time', t)
        return out


class PlassoClient:
    """
    Client for fitting and applying pliable lasso Cox models.

    Example:
        ```python
        from coxplasso import PlassoClient

        client = PlassoClient(alpha=0.5)
        data = client.load_data('survival.csv')

        # Cross-validated path, then the selected model
        result, fitted = client.cv(data)
        fitted.save('model.json')

        # Risk scores for new rows
        scores = PlassoClient.load_model('model.json').predict(pd.read_csv('new.csv'))
        ```

    Time-varying modifiers are requested with a basis spec ('linear' or
    'spline:<k>'); alpha then defaults to 0 instead of 0.5.
    """

    def __init__(
        self,
        alpha: Optional[float] = None,
        engine: str = "exact",
        basis: Optional[str] = None,
        sample: Optional[Union[str, int]] = None,
        seed: int = 0,
        exclude_constant: bool = False,
    ):
        """
        Initialize PlassoClient.

        Args:
            alpha: Mixing parameter; 0.5 by default, 0 with a time basis
            engine: 'exact' or 'logistic'
            basis: Time-basis spec, or None for proportional hazards
            sample: Risk-set sample size ('all' or an integer)
            seed: Seed for risk-set sampling and fold assignment
            exclude_constant: Drop constant columns instead of failing
        """
        if engine not in ENGINES:
            raise ClientError(f"Unknown engine '{engine}' (use one of {ENGINES})")
        if engine == "logistic" and basis is None and sample is None:
            logger.info("Logistic engine without a time basis fits fixed modifiers only")
        self.engine = engine
        self.basis_spec = basis
        self.sample_spec = sample
        self.seed = seed
        self.alpha = alpha if alpha is not None else (0.0 if basis else 0.5)
        self.exclude_constant = exclude_constant
        self.validator = SurvivalValidator()
        logger.debug(f"PlassoClient initialized: engine={engine}, alpha={self.alpha}, basis={basis}")

    def load_data(self, path: Union[str, Path]) -> SurvivalDataset:
        """Read and validate a survival CSV file."""
        data = SurvivalDataset.read_csv(path)
        self.validator.validate_or_raise(data, name=str(path))
        return data

    def prepare(self, data: SurvivalDataset) -> FitContext:
        """Standardize data and build the time basis from its failure times."""
        scaled, record = standardize(data, exclude_constant=self.exclude_constant)
        basis = None
        if self.basis_spec:
            basis = TimeBasis.from_spec(self.basis_spec, data.y[data.delta == 1])
        sample = None
        if self.sample_spec is not None or basis is not None:
            sample = RiskSampleConfig.from_spec(self.sample_spec, seed=self.seed)
        return FitContext(scaled, record, list(data.x_names), list(data.z_names), basis, sample)

    def _engine(self, context: FitContext):
        penalty = PenaltyConfig(lam=0.0, alpha=self.alpha)
        return make_engine(self.engine, context.data, penalty, context.basis, context.sample)

    def _wrap(self, context: FitContext, fitted) -> FittedPlasso:
        if not isinstance(fitted, TimeVaryingModel):
            fitted = TimeVaryingModel(fitted, None)
        return FittedPlasso(self.engine, fitted, context.scaling, context.x_names, context.z_names)

    def fit(self, data: SurvivalDataset, lam: float) -> FittedPlasso:
        """
        Fit at a single lambda.

        Example:
            >>> fitted = client.fit(data, lam=0.05)
            >>> fitted.coefficients.active_blocks()
        """
        context = self.prepare(data)
        fitted = self._engine(context).fit(float(lam))
        return self._wrap(context, fitted)

    def path(self, data: SurvivalDataset, config: Optional[PathConfig] = None) -> PathResult:
        """Warm-started path from lambda_max down the grid."""
        config = config or PathConfig(seed=self.seed)
        return fit_path(self._engine(self.prepare(data)), config)

    def cv(
        self,
        data: SurvivalDataset,
        config: Optional[PathConfig] = None,
        n_jobs: Optional[int] = None,
    ) -> Tuple[PathResult, Optional[FittedPlasso]]:
        """
        Path plus cross-validation; returns the result and the selected model.

        Example:
            >>> result, fitted = client.cv(data, PathConfig(nfolds=5, seed=1))
            >>> result.lambda_opt
        """
        config = config or PathConfig(seed=self.seed)
        context = self.prepare(data)
        result = run_cv(self._engine(context), config, n_jobs or get_settings().parallel.n_jobs)
        best = result.best_model
        return result, (None if best is None else self._wrap(context, best))

    @staticmethod
    def load_model(path: Union[str, Path]) -> FittedPlasso:
        return FittedPlasso.load(path)

    def predict(
        self,
        model: Union[FittedPlasso, str, Path],
        data: Union[pd.DataFrame, str, Path],
        times: Optional[Union[float, Sequence[float]]] = None,
    ) -> pd.DataFrame:
        """Risk scores of a model (object or file) on a DataFrame or CSV file."""
        if not isinstance(model, FittedPlasso):
            model = FittedPlasso.load(model)
        frame = data if isinstance(data, pd.DataFrame) else pd.read_csv(data, encoding='utf-8')
        return model.predict(frame, times)
