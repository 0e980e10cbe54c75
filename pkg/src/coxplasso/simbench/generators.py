"""
Synthetic survival data for the simulation benchmark.

Covariates follow the scenario's covariate law: N(0, 1) or Unif(0, 1)
entries, normal for proportional scenarios and uniform for time-varying ones
unless the definition or the design says otherwise. Modifiers are
Bernoulli(prob). Proportional scenarios draw y = E * exp(-eta) with
E ~ Exp(1), so the hazard is exp(eta). Time-varying scenarios invert the
survival function of the hazard exp(x' beta + t x' slope):
y = log(1 + E exp(-x' beta) k) / k with k = x' slope. Censoring times are
Exp(1) in both cases.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .scenarios import ScenarioSpec
from ..data.dataset import SurvivalDataset
from ..data.design import build_interactions
from ..models.solver import PliableModel
from ..models.timevarying import BASIS_LINEAR, TimeBasis, TimeVaryingModel
from ..utils.logging import get_logger

logger = get_logger(__name__)

# |k| below this uses the k -> 0 limit y = E exp(-x' beta)
SLOPE_EPS = 1e-10

LAW_NORMAL = "normal"
LAW_UNIFORM = "uniform"
COVARIATE_LAWS = (LAW_NORMAL, LAW_UNIFORM)


class SimulationError(Exception):
    """Base exception for the simulation benchmark."""
    pass


class PatternNeedsDimsError(SimulationError):
    """Raised when p or nz is too small for the scenario's coefficient pattern."""
    pass


class UnknownCovariateLawError(SimulationError):
    """Raised for a covariate law other than 'normal' or 'uniform'."""
    pass


@dataclass
class SimDesign:
    """
    Sizes, scenario and replication settings of one benchmark run.

    Attributes:
        scenario: Scenario definition
        n: Training sample size
        p: Number of covariates
        nz: Number of fixed modifiers
        seed: Root seed; replicates use spawned child streams
        n_test: Test sample size
        n_reps: Number of replicates
        alpha: Pliable-lasso mixing parameter (scenario default when None)
        basis: Time-basis spec for time-varying scenarios
        sample: Risk-set sample size for time-varying scenarios
        engine: Pliable engine, 'exact' or 'logistic'
        covariate_law: 'normal' or 'uniform' (scenario default when None)
    """

    scenario: ScenarioSpec
    n: int = 100
    p: int = 10
    nz: int = 4
    seed: int = 0
    n_test: int = 1000
    n_reps: int = 20
    alpha: Optional[float] = None
    basis: Optional[str] = None
    sample: Optional[int] = None
    engine: str = "exact"
    covariate_law: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.scenario, str):
            self.scenario = ScenarioSpec.named(self.scenario)
        for name in ('n', 'p', 'n_test', 'n_reps'):
            if getattr(self, name) < 1:
                raise SimulationError(f"{name} must be positive")
        if self.nz < 0:
            raise SimulationError("nz must be nonnegative")
        defaults = self.scenario.defaults()
        if self.alpha is None:
            self.alpha = float(defaults.get('alpha', 0.5))
        if self.basis is None:
            self.basis = defaults.get('basis')
        if self.sample is None:
            self.sample = defaults.get('sample')
        if self.covariate_law is None:
            self.covariate_law = self.scenario.covariate_law
        check_law(self.covariate_law)
        check_dims(self.scenario, self.p, self.nz)

    @classmethod
    def from_scenario(cls, name: str, **overrides) -> 'SimDesign':
        """Design with the scenario's default sizes, overridden by keyword."""
        scenario = ScenarioSpec.named(name)
        defaults = scenario.defaults()
        params = {key: defaults[key] for key in ('n', 'p', 'nz') if key in defaults}
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(scenario=scenario, **params)

    def to_dict(self) -> dict:
        return {
            'scenario': self.scenario.name,
            'n': self.n, 'p': self.p, 'nz': self.nz,
            'seed': self.seed, 'n_test': self.n_test, 'n_reps': self.n_reps,
            'alpha': self.alpha, 'basis': self.basis, 'sample': self.sample,
            'engine': self.engine,
            'covariate_law': self.covariate_law,
        }


def check_dims(scenario: ScenarioSpec, p: int, nz: int) -> None:
    if p < scenario.min_p or nz < scenario.min_nz:
        raise PatternNeedsDimsError(
            f"Scenario '{scenario.name}' needs p >= {scenario.min_p} and nz >= {scenario.min_nz}, "
            f"got p={p}, nz={nz}"
        )


def check_law(law: str) -> None:
    if law not in COVARIATE_LAWS:
        raise UnknownCovariateLawError(f"Covariate law must be one of {COVARIATE_LAWS}, got '{law}'")


def draw_covariates(rng: np.random.Generator, law: str, n: int, p: int) -> np.ndarray:
    """n x p covariates with independent N(0, 1) or Unif(0, 1) entries."""
    check_law(law)
    if law == LAW_UNIFORM:
        return rng.random((n, p))
    return rng.standard_normal((n, p))


def _rng(seed: Union[int, np.random.SeedSequence, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _censor(rng: np.random.Generator, y: np.ndarray, X: np.ndarray, Z: np.ndarray) -> SurvivalDataset:
    c = rng.exponential(1.0, size=y.shape[0])
    return SurvivalDataset(
        y=np.minimum(y, c),
        delta=(y <= c).astype(float),
        omega=None,
        X=X,
        Z=Z,
    )


def proportional_eta(scenario: ScenarioSpec, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """True log relative risk of the proportional scenario."""
    p, nz = X.shape[1], Z.shape[1]
    eta = X @ scenario.main_effects(p)
    if nz:
        eta = eta + build_interactions(X, Z).W @ scenario.interactions(p, nz).ravel()
    return eta


def generate_proportional(
    scenario: ScenarioSpec,
    n: int,
    p: int,
    nz: int,
    seed: Union[int, np.random.SeedSequence, np.random.Generator] = 0,
    covariate_law: Optional[str] = None,
) -> SurvivalDataset:
    """
    Draw a proportional-hazards dataset with constant baseline hazard.

    Args:
        scenario: Proportional scenario
        n, p, nz: Sizes
        seed: Seed, SeedSequence or Generator
        covariate_law: Overrides the scenario's covariate law

    Returns:
        SurvivalDataset with observed time min(y, c)

    Raises:
        PatternNeedsDimsError: If p or nz is below the scenario's minimum
    """
    check_dims(scenario, p, nz)
    rng = _rng(seed)
    X = draw_covariates(rng, covariate_law or scenario.covariate_law, n, p)
    Z = (rng.random((n, nz)) < scenario.modifier_prob).astype(float)
    eta = proportional_eta(scenario, X, Z)
    y = rng.exponential(1.0, size=n) * np.exp(-eta)
    return _censor(rng, y, X, Z)


def timevarying_times(
    E: np.ndarray,
    main: np.ndarray,
    k: np.ndarray,
) -> np.ndarray:
    """
    Inverse transform y = log(1 + E exp(-main) k) / k for the hazard exp(main + k t).

    Rows with |k| < SLOPE_EPS use the limit E exp(-main); rows whose
    argument is not positive (k < 0 and a large draw) never fail.
    """
    scaled = E * np.exp(-main)
    y = np.full(E.shape[0], np.inf)
    small = np.abs(k) < SLOPE_EPS
    y[small] = scaled[small]
    arg = scaled * k
    ok = ~small & (arg > -1.0)
    y[ok] = np.log1p(arg[ok]) / k[ok]
    return y


def generate_timevarying(
    scenario: ScenarioSpec,
    n: int,
    p: int,
    nz: int = 0,
    seed: Union[int, np.random.SeedSequence, np.random.Generator] = 0,
    covariate_law: Optional[str] = None,
) -> SurvivalDataset:
    """
    Draw a dataset whose covariate effects change linearly in time.

    Modifiers, when nz > 0, are Bernoulli noise without effect.

    Args:
        scenario: Time-varying scenario
        n, p, nz: Sizes
        seed: Seed, SeedSequence or Generator
        covariate_law: Overrides the scenario's covariate law

    Returns:
        SurvivalDataset with observed time min(y, c)
    """
    check_dims(scenario, p, nz)
    rng = _rng(seed)
    X = draw_covariates(rng, covariate_law or scenario.covariate_law, n, p)
    Z = (rng.random((n, nz)) < scenario.modifier_prob).astype(float)
    main = X @ scenario.main_effects(p)
    k = X @ scenario.time_effects(p)
    y = timevarying_times(rng.exponential(1.0, size=n), main, k)
    return _censor(rng, y, X, Z)


def generate(design: SimDesign, n: int, seed) -> SurvivalDataset:
    """Dataset of size n for the design's scenario."""
    scenario = design.scenario
    if scenario.is_timevarying:
        return generate_timevarying(scenario, n, design.p, design.nz, seed, design.covariate_law)
    return generate_proportional(scenario, n, design.p, design.nz, seed, design.covariate_law)


def true_model(scenario: ScenarioSpec, p: int, nz: int) -> TimeVaryingModel:
    """
    The generating model on the raw data scale.

    Time effects use an unstandardized linear basis, so
    `tv_partial_loglik(true_model(...), raw_data)` is the exact reference
    log-likelihood for both scenario kinds.
    """
    Theta = scenario.interactions(p, nz)
    slope = scenario.time_effects(p)
    basis = None
    if scenario.is_timevarying:
        Theta = np.column_stack((Theta, slope))
        basis = TimeBasis(BASIS_LINEAR)
    model = PliableModel(
        theta0=np.zeros(nz), beta=scenario.main_effects(p), Theta=Theta,
        lam=0.0, alpha=0.0, converged=True,
    )
    if basis is None:
        return TimeVaryingModel(model, None)
    return TimeVaryingModel(model, basis, np.zeros(1), np.ones(1))
