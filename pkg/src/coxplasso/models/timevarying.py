"""
Time-varying modifiers for the pliable Cox model.

Covariate effects may change with time through a basis G(t): the hazard of
observation j at failure time t_i uses eta_ji = z_j' theta0 + sum_k x_jk
(beta_k + [z_j, G(t_i)]' theta_k). The partial likelihood then depends on
one row per (failure time, risk-set member) pair, stacked block by block
in failure-time order. Risk sets may be subsampled once at setup.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .newton import NewtonResult, newton_raphson
from .objective import QuadraticApprox, SmoothLoss
from .solver import BlockDesign, PenaltyConfig, PliableModel, fit_working
from ..data.dataset import SurvivalDataset
from ..data.risk_sets import RiskSetIndex, validate_and_index
from ..utils.logging import get_logger

logger = get_logger(__name__)

BASIS_LINEAR = "linear"
BASIS_SPLINE = "linear_spline"


class TimeVaryingError(Exception):
    """Base exception for time-varying model problems."""
    pass


class BasisSpecError(TimeVaryingError):
    """Raised when a time-basis or risk-sample option string cannot be parsed."""
    pass


class EmptyRiskSetError(TimeVaryingError):
    """Raised when a failure time ends up with no rows."""
    pass


@dataclass(frozen=True)
class TimeBasis:
    """
    Piecewise-linear basis G(t).

    Attributes:
        kind: 'linear' (G(t) = t) or 'linear_spline' (hinges max(t - knot, 0))
        knots: Ascending knots for the spline basis
    """

    kind: str = BASIS_LINEAR
    knots: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in (BASIS_LINEAR, BASIS_SPLINE):
            raise BasisSpecError(f"Unknown basis kind: {self.kind}")
        if self.kind == BASIS_SPLINE:
            if not self.knots:
                raise BasisSpecError("Spline basis needs at least one knot")
            if np.any(np.diff(self.knots) < 0):
                raise BasisSpecError("Knots must be ascending")

    @property
    def dim(self) -> int:
        return 1 if self.kind == BASIS_LINEAR else len(self.knots)

    @property
    def names(self):
        if self.kind == BASIS_LINEAR:
            return ["t"]
        return [f"t_hinge{q + 1}" for q in range(self.dim)]

    def evaluate(self, t) -> np.ndarray:
        """Basis values, shape (len(t), dim)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.kind == BASIS_LINEAR:
            return t[:, None].copy()
        return np.maximum(t[:, None] - np.asarray(self.knots)[None, :], 0.0)

    @classmethod
    def from_spec(cls, spec: str, failure_times: np.ndarray) -> 'TimeBasis':
        """
        Parse 'linear' or 'spline:<k>'.

        Spline knots sit at the quantiles q / (k + 1), q = 1..k, of the
        observed failure times.
        """
        spec = spec.strip().lower()
        if spec == BASIS_LINEAR:
            return cls(BASIS_LINEAR)
        if spec.startswith("spline:"):
            try:
                k = int(spec.split(":", 1)[1])
            except ValueError:
                raise BasisSpecError(f"Invalid spline size in '{spec}'")
            if k < 1:
                raise BasisSpecError("Spline basis needs k >= 1")
            probs = np.arange(1, k + 1) / (k + 1)
            knots = np.quantile(np.asarray(failure_times, dtype=float), probs)
            return cls(BASIS_SPLINE, tuple(float(x) for x in knots))
        raise BasisSpecError(f"Unknown time basis '{spec}' (use 'linear' or 'spline:<k>')")

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'knots': list(self.knots)}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'TimeBasis':
        return cls(payload['kind'], tuple(payload.get('knots', ())))


@dataclass(frozen=True)
class RiskSampleConfig:
    """
    Risk-set subsampling: keep all failing rows plus up to sample_size controls.

    sample_size None keeps full risk sets.
    """

    sample_size: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.sample_size is not None and self.sample_size < 1:
            raise BasisSpecError("Risk-set sample size must be >= 1")

    @classmethod
    def from_spec(cls, spec: Union[str, int, None], seed: int = 0) -> 'RiskSampleConfig':
        """Parse '<size>' or 'all'."""
        if spec is None or str(spec).strip().lower() == "all":
            return cls(None, seed)
        try:
            return cls(int(spec), seed)
        except ValueError:
            raise BasisSpecError(f"Invalid risk-sample size '{spec}'")


@dataclass(frozen=True, eq=False)
class ExpandedDesign:
    """
    Stacked (failure time, risk-set member) rows.

    Rows are grouped by failure time in ascending order; inside a block the
    failing (eta0) rows come first, then the at-risk (eta1) rows.

    Attributes:
        obs: Observation index of each row (provenance)
        time_id: Failure-time index of each row (provenance)
        event: 1 for failing rows, 0 otherwise
        starts: First row of each failure-time block (m,)
        failure_times: Failure times (m,)
        G: Basis at the row's failure time, unstandardized (N, dim)
        omega: Observation weight of each row
        d: Weight sum of the failing rows per block (m,)
    """

    obs: np.ndarray
    time_id: np.ndarray
    event: np.ndarray
    starts: np.ndarray
    failure_times: np.ndarray
    G: np.ndarray
    omega: np.ndarray
    d: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.obs.shape[0]

    @property
    def m(self) -> int:
        return self.starts.shape[0]

    @property
    def block_sizes(self) -> np.ndarray:
        return np.diff(np.append(self.starts, self.n_rows))


def expand_design(
    data: SurvivalDataset,
    idx: RiskSetIndex,
    basis: Optional[TimeBasis],
    sample: Optional[RiskSampleConfig] = None,
) -> ExpandedDesign:
    """
    Stack one row per (failure time, at-risk observation).

    With sampling, controls are drawn without replacement from R_i minus
    the failing set, once, from a generator seeded by sample.seed and
    consumed in failure-time order.

    Args:
        data: Survival dataset
        idx: Its risk-set index
        basis: Time basis, or None for no time modifiers
        sample: Risk-set sampling; full risk sets when None

    Returns:
        ExpandedDesign

    Raises:
        EmptyRiskSetError: If a failure time produces no rows
    """
    sample = sample or RiskSampleConfig()
    rng = np.random.default_rng(sample.seed)

    obs_blocks, time_blocks, event_blocks = [], [], []
    starts = np.zeros(idx.m, dtype=int)
    total = 0
    for i in range(idx.m):
        failing = np.sort(idx.D[i])
        members = idx.risk_set(i)
        controls = np.sort(np.setdiff1d(members, failing))
        if sample.sample_size is not None and controls.size > sample.sample_size:
            controls = np.sort(rng.choice(controls, size=sample.sample_size, replace=False))
        rows = np.concatenate((failing, controls))
        if rows.size == 0:
            raise EmptyRiskSetError(f"Failure time {i} has an empty risk set")
        starts[i] = total
        total += rows.size
        obs_blocks.append(rows)
        time_blocks.append(np.full(rows.size, i))
        event_blocks.append(np.concatenate((np.ones(failing.size), np.zeros(controls.size))))

    obs = np.concatenate(obs_blocks).astype(int)
    time_id = np.concatenate(time_blocks).astype(int)
    times = idx.failure_times[time_id]
    G = basis.evaluate(times) if basis is not None else np.zeros((obs.size, 0))

    logger.debug(f"Expanded {data.n} observations into {obs.size} rows over {idx.m} failure times")
    return ExpandedDesign(
        obs=obs,
        time_id=time_id,
        event=np.concatenate(event_blocks),
        starts=starts,
        failure_times=idx.failure_times,
        G=G,
        omega=data.omega[obs],
        d=idx.d,
    )


def _block_probabilities(eta: np.ndarray, expanded: ExpandedDesign) -> Tuple[np.ndarray, np.ndarray]:
    """Within-block softmax of eta + log omega, and the per-block log normalizers."""
    logits = eta + np.log(expanded.omega)
    log_norm = np.logaddexp.reduceat(logits, expanded.starts)
    return np.exp(logits - log_norm[expanded.time_id]), log_norm


def stacked_loglik(eta: np.ndarray, expanded: ExpandedDesign) -> float:
    """sum_i [ sum_{failing rows} w eta - d_i log sum_{block rows} w exp(eta) ]."""
    _, log_norm = _block_probabilities(eta, expanded)
    failing = expanded.event == 1
    return float(np.sum(expanded.omega[failing] * eta[failing]) - np.sum(expanded.d * log_norm))


def tv_derivatives(eta: np.ndarray, expanded: ExpandedDesign) -> QuadraticApprox:
    """
    Gradient and diagonal Hessian of the stacked likelihood per row.

    For a row of block i with within-block probability p:
    l' = w * event - d_i p and l'' = -d_i (p - p^2). With full risk sets
    and no time basis, summing rows per observation gives the
    proportional-hazards derivatives.

    Args:
        eta: Row linear predictors (eta0 rows and eta1 rows stacked)
        expanded: Row layout

    Returns:
        QuadraticApprox over the stacked rows
    """
    prob, _ = _block_probabilities(eta, expanded)
    d = expanded.d[expanded.time_id]
    grad = expanded.omega * expanded.event - d * prob
    hess = -d * (prob - prob * prob)
    return QuadraticApprox.from_derivatives(eta, grad, hess)


class StackedCoxLoss(SmoothLoss):
    """Partial likelihood over stacked rows, scaled by the observation count."""

    def __init__(self, expanded: ExpandedDesign, n_obs: int):
        self.expanded = expanded
        self.n_obs = n_obs

    def loglik(self, eta: np.ndarray) -> float:
        return stacked_loglik(eta, self.expanded)

    def quadratic(self, eta: np.ndarray) -> QuadraticApprox:
        return tv_derivatives(eta, self.expanded)


def basis_moments(G: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row means and population sds of the basis columns; constant columns get scale 1."""
    if G.shape[1] == 0:
        return np.zeros(0), np.ones(0)
    mean = G.mean(axis=0)
    sd = G.std(axis=0)
    flat = sd <= 1e-12
    if flat.any():
        logger.warning(f"Time basis columns {np.flatnonzero(flat).tolist()} are constant over the rows")
    return mean, np.where(flat, 1.0, sd)


@dataclass(eq=False)
class TimeVaryingModel:
    """
    Pliable model whose modifiers are [Z, standardized G(t)].

    Theta columns 0..nz-1 are the fixed-modifier interactions, the rest the
    time-basis interactions.
    """

    model: PliableModel
    basis: Optional[TimeBasis]
    g_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g_scale: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def nz(self) -> int:
        return self.model.theta0.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        payload = self.model.to_dict()
        payload['time_basis'] = None if self.basis is None else {
            **self.basis.to_dict(),
            'mean': self.g_mean.tolist(),
            'scale': self.g_scale.tolist(),
        }
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'TimeVaryingModel':
        basis = payload.get('time_basis')
        if basis is None:
            return cls(PliableModel.from_dict(payload), None)
        return cls(
            PliableModel.from_dict(payload),
            TimeBasis.from_dict(basis),
            np.asarray(basis['mean'], dtype=float),
            np.asarray(basis['scale'], dtype=float),
        )

    def eta_at(self, X: np.ndarray, Z: np.ndarray, times: np.ndarray) -> np.ndarray:
        """
        eta_j(t_j) for rows (x_j, z_j) evaluated at per-row times.

        Args:
            X: Standardized covariates (N, p)
            Z: Standardized fixed modifiers (N, nz)
            times: Evaluation time per row (N,)

        Returns:
            eta (N,)
        """
        m = self.model
        nz = self.nz
        eta = X @ m.beta
        if nz:
            eta = eta + Z @ m.theta0 + np.sum(X * (Z @ m.Theta[:, :nz].T), axis=1)
        if self.basis is not None:
            Gs = (self.basis.evaluate(times) - self.g_mean) / self.g_scale
            eta = eta + np.sum(Gs * (X @ m.Theta[:, nz:]), axis=1)
        return eta


class TimeVaryingProblem:
    """
    Stacked pliable problem built once and reused across penalty levels.

    Args:
        data: Standardized survival dataset
        basis: Time basis, or None for fixed modifiers only
        sample: Risk-set sampling
    """

    def __init__(self, data: SurvivalDataset, basis: Optional[TimeBasis], sample: Optional[RiskSampleConfig] = None):
        self.data = data
        self.basis = basis
        self.sample = sample or RiskSampleConfig()
        self.idx = validate_and_index(data)
        self.expanded = expand_design(data, self.idx, basis, self.sample)
        self.g_mean, self.g_scale = basis_moments(self.expanded.G)

        rows = self.expanded.obs
        Gs = (self.expanded.G - self.g_mean) / self.g_scale
        Z = data.Z[rows]
        self.design = BlockDesign(
            X=np.asfortranarray(data.X[rows]),
            M=np.asfortranarray(np.column_stack((Z, Gs))),
            U=Z,
            n_obs=data.n,
        )
        self.loss = StackedCoxLoss(self.expanded, data.n)

    def fit(self, config: PenaltyConfig, init: Optional[PliableModel] = None) -> TimeVaryingModel:
        model = fit_working(self.design, self.loss, config, init)
        return self.wrap(model)

    def wrap(self, model: PliableModel) -> TimeVaryingModel:
        return TimeVaryingModel(model, self.basis, self.g_mean, self.g_scale)


def fit_timevarying(
    data: SurvivalDataset,
    basis: Optional[TimeBasis],
    sample: Optional[RiskSampleConfig],
    config: PenaltyConfig,
    init: Optional[PliableModel] = None,
) -> TimeVaryingModel:
    """
    Fit the pliable Cox model with time-basis modifiers on stacked rows.

    Args:
        data: Standardized survival dataset
        basis: Time basis (None reproduces the proportional model)
        sample: Risk-set sampling
        config: Penalty and solver controls
        init: Warm start

    Returns:
        TimeVaryingModel
    """
    problem = TimeVaryingProblem(data, basis, sample)
    fitted = problem.fit(config, init)
    logger.info(
        f"Time-varying fit on {problem.expanded.n_rows} rows: "
        f"{len(fitted.model.active_blocks())} active blocks at lambda={config.lam:.4g}"
    )
    return fitted


def risk_set_rows(idx: RiskSetIndex) -> Tuple[np.ndarray, np.ndarray]:
    """(observation, failure-time index) for every member of every full risk set."""
    sizes = idx.n - idx.risk_start
    time_id = np.repeat(np.arange(idx.m), sizes)
    offsets = np.arange(sizes.sum()) - np.repeat(np.cumsum(sizes) - sizes, sizes)
    obs = idx.order[idx.risk_start[time_id] + offsets]
    return obs, time_id


def tv_partial_loglik(fitted: TimeVaryingModel, data: SurvivalDataset) -> float:
    """
    Exact time-dependent partial log-likelihood on full risk sets.

    Args:
        fitted: Time-varying model
        data: Dataset standardized with the training scaling

    Returns:
        Partial log-likelihood
    """
    idx = validate_and_index(data, validate=False)
    obs, time_id = risk_set_rows(idx)
    eta = fitted.eta_at(data.X[obs], data.Z[obs], idx.failure_times[time_id])

    logits = eta + np.log(data.omega[obs])
    log_norm = np.logaddexp.reduceat(logits, np.searchsorted(time_id, np.arange(idx.m)))
    failing = np.flatnonzero(idx.fail_index >= 0)
    eta_fail = fitted.eta_at(data.X[failing], data.Z[failing], data.y[failing])
    return float(data.omega[failing] @ eta_fail - idx.d @ log_norm)


def fit_time_interaction_cox(
    data: SurvivalDataset,
    sample: Optional[RiskSampleConfig] = None,
    max_iter: int = 50,
) -> Tuple[TimeVaryingModel, NewtonResult]:
    """
    Unpenalized Cox fit with main effects and a linear time interaction per covariate.

    eta_ji = x_j' beta + t_i x_j' beta_t, fit by Newton-Raphson on stacked rows.

    Args:
        data: Standardized survival dataset
        sample: Risk-set sampling
        max_iter: Newton iteration cap

    Returns:
        (TimeVaryingModel with an unstandardized linear basis, NewtonResult)
    """
    idx = validate_and_index(data)
    basis = TimeBasis(BASIS_LINEAR)
    expanded = expand_design(data, idx, basis, sample)
    X = data.X[expanded.obs]
    D = np.column_stack((X, X * expanded.G))
    starts = expanded.starts
    failing = expanded.event == 1

    def loglik_grad_hess(coef):
        eta = D @ coef
        prob, log_norm = _block_probabilities(eta, expanded)
        ll = float(np.sum(expanded.omega[failing] * eta[failing]) - np.sum(expanded.d * log_norm))
        mean = np.add.reduceat(prob[:, None] * D, starts)
        second = np.add.reduceat(prob[:, None, None] * D[:, :, None] * D[:, None, :], starts)
        grad = expanded.omega[failing] @ D[failing] - expanded.d @ mean
        hess = -np.einsum('i,ijk->jk', expanded.d, second - mean[:, :, None] * mean[:, None, :])
        return ll, grad, hess

    result = newton_raphson(loglik_grad_hess, np.zeros(D.shape[1]), max_iter=max_iter)
    p = data.p
    model = PliableModel(
        theta0=np.zeros(0), beta=result.beta[:p], Theta=result.beta[p:, None].copy(),
        lam=0.0, alpha=0.0, converged=result.converged, iterations=result.iterations,
    )
    fitted = TimeVaryingModel(model, basis, np.zeros(1), np.ones(1))
    return fitted, result
