"""
Pliable lasso solver.

Minimizes loss(eta) + penalty over (theta0, beta, Theta) where

    penalty = (1 - alpha) * lam * sum_k (||(beta_k, theta_k)|| + ||theta_k||)
              + alpha * lam * sum_k ||theta_k||_1

An outer loop refreshes the diagonal quadratic approximation of the loss;
an inner loop runs blockwise coordinate descent on the weighted
least-squares surrogate (1/2n) sum_j w_j (z_j - eta_j)^2 + penalty. The
outer step toward the surrogate's solution is halved until the objective
does not increase, or lengthened on the solution's support while it keeps
falling. Each block is first checked against the closed-form zero and beta-only
conditions and falls back to proximal gradient iterations otherwise.

The design is generic: rows may be observations (proportional model) or
stacked risk-set rows (time-varying and logistic engines), with optional
per-group unpenalized intercepts.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .objective import CoxLoss, ObjectiveError, QuadraticApprox, SmoothLoss, working_problem
from ..config import get_settings
from ..data.dataset import SurvivalDataset
from ..data.design import InteractionDesign, build_interactions
from ..data.risk_sets import RiskSetIndex
from ..utils.logging import get_logger

logger = get_logger(__name__)

# Smallest backtracking step before a block update is abandoned
MIN_STEP = 1e-14

# Ridge added to a singular theta0 Gram, relative to trace / q
RIDGE = 1e-8

# Coefficients at or below this magnitude count as zero
ZERO_TOL = 1e-8

FLAG_MAX_ITERATIONS = "max_iterations"
FLAG_DIVERGING_ETA = "diverging_eta"
FLAG_STEP_UNDERFLOW = "step_underflow"
FLAG_SEPARATION = "separation"

# Longest outer step, as a multiple of the step to the surrogate's solution
MAX_EXTRAPOLATION = 16.0


class SolverError(Exception):
    """Base exception for solver problems."""
    pass


class PenaltyConfigError(SolverError):
    """Raised when penalty or tolerance settings are out of range."""
    pass


class DegenerateColumnError(SolverError):
    """Raised when a covariate has zero weighted norm in the working problem."""
    pass


def _solver_default(name: str):
    return field(default_factory=lambda: getattr(get_settings().solver, name))


@dataclass
class PenaltyConfig:
    """
    Penalty level and solver controls.

    Attributes:
        lam: Penalty level lambda >= 0
        alpha: Mix between the group terms and the l1 term on Theta, in [0, 1]
        prox_step: Initial proximal step; None uses 1 / largest eigenvalue of the block Gram
    """

    lam: float
    alpha: float = 0.5
    outer_max_iter: int = _solver_default('outer_max_iter')
    inner_max_iter: int = _solver_default('inner_max_iter')
    tol_outer: float = _solver_default('tol_outer')
    tol_inner: float = _solver_default('tol_inner')
    tol_kkt: float = _solver_default('tol_kkt')
    prox_max_iter: int = _solver_default('prox_max_iter')
    eta_limit: float = _solver_default('eta_limit')
    prox_step: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise PenaltyConfigError(f"lambda must be finite and >= 0, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise PenaltyConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ('tol_outer', 'tol_inner', 'tol_kkt'):
            if getattr(self, name) <= 0:
                raise PenaltyConfigError(f"{name} must be positive")
        for name in ('outer_max_iter', 'inner_max_iter', 'prox_max_iter'):
            if getattr(self, name) < 1:
                raise PenaltyConfigError(f"{name} must be a positive integer")
        if self.prox_step is not None and self.prox_step <= 0:
            raise PenaltyConfigError("prox_step must be positive")

    @property
    def group_weight(self) -> float:
        """(1 - alpha) * lambda."""
        return (1.0 - self.alpha) * self.lam

    @property
    def l1_weight(self) -> float:
        """alpha * lambda."""
        return self.alpha * self.lam

    def at(self, lam: float) -> 'PenaltyConfig':
        """Copy with a different lambda."""
        params = dict(self.__dict__)
        params['lam'] = lam
        return PenaltyConfig(**params)


def soft_threshold(v, t: float):
    """S(v, t) = sign(v) * max(|v| - t, 0), elementwise."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _group_shrink(v: np.ndarray, t: float) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm <= t:
        return np.zeros_like(v)
    return v * (1.0 - t / norm)


def prox_pliable(v: np.ndarray, t: float, lam: float, alpha: float) -> np.ndarray:
    """
    Proximal operator of t * penalty for one block v = (beta_k, theta_k).

    l1 on theta first, then the theta group, then the whole block. The
    groups are nested, so the composition is exact.
    """
    c = (1.0 - alpha) * lam * t
    theta = soft_threshold(v[1:], alpha * lam * t)
    theta = _group_shrink(theta, c)
    return _group_shrink(np.concatenate(([v[0]], theta)), c)


def block_penalty(gamma: np.ndarray, lam: float, alpha: float) -> float:
    """Penalty of one block gamma = (beta_k, theta_k)."""
    theta = gamma[1:]
    return float((1.0 - alpha) * lam * (np.linalg.norm(gamma) + np.linalg.norm(theta))
                 + alpha * lam * np.sum(np.abs(theta)))


def penalty_value(beta: np.ndarray, Theta: np.ndarray, lam: float, alpha: float) -> float:
    """Total pliable lasso penalty."""
    gamma_norms = np.sqrt(beta ** 2 + np.sum(Theta ** 2, axis=1))
    theta_norms = np.sqrt(np.sum(Theta ** 2, axis=1))
    return float((1.0 - alpha) * lam * np.sum(gamma_norms + theta_norms)
                 + alpha * lam * np.sum(np.abs(Theta)))


def zero_block_gap(a: float, g: np.ndarray, lam: float, alpha: float) -> float:
    """
    Distance by which a zero block violates its optimality condition.

    With c = (1 - alpha) lam, block zero is optimal iff
    sqrt(a^2 + max(||S(g, alpha lam)|| - c, 0)^2) <= c, where a and g are
    the main-effect and interaction scores of the partial residual.

    Returns:
        max(lhs - c, 0)
    """
    c = (1.0 - alpha) * lam
    s = np.linalg.norm(soft_threshold(g, alpha * lam))
    return max(float(np.hypot(a, max(s - c, 0.0))) - c, 0.0)


def _block_scores(x_k, W_k, r_minus_k, n) -> Tuple[float, np.ndarray]:
    return float(x_k @ r_minus_k) / n, W_k.T @ r_minus_k / n


def screen_block_zero(
    x_k: np.ndarray,
    W_k: np.ndarray,
    r_minus_k: np.ndarray,
    lam: float,
    alpha: float,
    n: Optional[int] = None,
) -> bool:
    """
    Closed-form check that block k is zero at the block optimum.

    Requires |x_k' r / n| <= (1 - alpha) lam and
    ||S(W_k' r / n, alpha lam)|| <= 2 (1 - alpha) lam, together with the
    exact subgradient condition of `zero_block_gap`, which implies both.

    Args:
        x_k: Covariate column (N,)
        W_k: Interaction block (N, K)
        r_minus_k: Partial residual w * (z - eta_{-k})
        lam: Penalty level
        alpha: Mixing parameter
        n: Loss scaling, defaults to N

    Returns:
        True when the zero block is stationary
    """
    n = x_k.shape[0] if n is None else n
    a, g = _block_scores(x_k, W_k, r_minus_k, n)
    return _screens_zero(a, g, lam, alpha)


def _screens_zero(a: float, g: np.ndarray, lam: float, alpha: float) -> bool:
    c = (1.0 - alpha) * lam
    main = abs(a) <= c
    inter = np.linalg.norm(soft_threshold(g, alpha * lam)) <= 2.0 * c
    return bool(main and inter and zero_block_gap(a, g, lam, alpha) <= 0.0)


def solve_beta_only(
    x_k: np.ndarray,
    W_k: np.ndarray,
    r_minus_k: np.ndarray,
    weights: np.ndarray,
    lam: float,
    alpha: float,
    n: Optional[int] = None,
) -> Tuple[float, bool]:
    """
    Main-effect-only candidate for block k and its theta = 0 check.

    beta_hat = S(x_k' r / n, (1 - alpha) lam) / (sum_j w_j x_jk^2 / n), accepted
    when ||S(W_k' (r - w * x_k beta_hat) / n, alpha lam)|| <= (1 - alpha) lam.

    Args:
        x_k: Covariate column (N,)
        W_k: Interaction block (N, K)
        r_minus_k: Partial residual
        weights: Working weights (N,)
        lam: Penalty level
        alpha: Mixing parameter
        n: Loss scaling, defaults to N

    Returns:
        (beta_hat, theta_zero) where theta_zero is True when (beta_hat, 0) solves the block

    Raises:
        DegenerateColumnError: If sum_j w_j x_jk^2 is zero
    """
    n = x_k.shape[0] if n is None else n
    a, g = _block_scores(x_k, W_k, r_minus_k, n)
    wx = weights * x_k
    return _beta_only(a, g, W_k.T @ wx / n, float(wx @ x_k) / n, lam, alpha)


def _beta_only(a, g, cross, x_sq, lam, alpha) -> Tuple[float, bool]:
    if x_sq <= 0.0:
        raise DegenerateColumnError("Covariate has zero weighted norm")
    c = (1.0 - alpha) * lam
    beta_hat = float(soft_threshold(a, c)) / x_sq
    residual_score = g - cross * beta_hat
    ok = np.linalg.norm(soft_threshold(residual_score, alpha * lam)) <= c
    return beta_hat, bool(ok)


def prox_block_update(
    gamma0: np.ndarray,
    H: np.ndarray,
    b: np.ndarray,
    t: float,
    lam: float,
    alpha: float,
) -> Tuple[np.ndarray, float, bool]:
    """
    One backtracked proximal-gradient step on 1/2 g'Hg - b'g + penalty(g).

    Args:
        gamma0: Current block (beta_k, theta_k)
        H: Block Gram (1/n) A_k' diag(w) A_k
        b: Block score (1/n) A_k' r_{-k}
        t: Initial step
        lam: Penalty level
        alpha: Mixing parameter

    Returns:
        (gamma, accepted step, underflow) with gamma0 returned unchanged on underflow
    """
    grad = H @ gamma0 - b
    f0 = 0.5 * gamma0 @ H @ gamma0 - b @ gamma0
    slack = 1e-15 * max(1.0, abs(f0))

    while t >= MIN_STEP:
        cand = prox_pliable(gamma0 - t * grad, t, lam, alpha)
        d = cand - gamma0
        f1 = 0.5 * cand @ H @ cand - b @ cand
        if f1 <= f0 + grad @ d + (d @ d) / (2.0 * t) + slack:
            return cand, t, False
        t *= 0.5

    return gamma0, t, True


@dataclass(frozen=True, eq=False)
class BlockDesign:
    """
    Rows of a pliable lasso working problem.

    Attributes:
        X: Penalized covariates (N, p)
        M: Modifiers interacting with every covariate (N, K)
        U: Unpenalized main effects (N, q)
        n_obs: Loss scaling n
        groups: Group id per row for unpenalized per-group intercepts, or None
        W: Interactions X_k * M (N, p * K)
    """

    X: np.ndarray
    M: np.ndarray
    U: np.ndarray
    n_obs: int
    groups: Optional[np.ndarray] = None
    W: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.W is None:
            object.__setattr__(self, 'W', build_interactions(self.X, self.M).W)
        object.__setattr__(self, '_blocks', [
            np.column_stack((self.X[:, k], self.W[:, k * self.K:(k + 1) * self.K]))
            for k in range(self.p)
        ])

    @classmethod
    def proportional(cls, data: SurvivalDataset, design: Optional[InteractionDesign] = None) -> 'BlockDesign':
        """One row per observation; modifiers enter both as main effects and interactions."""
        W = design.W if design is not None else None
        return cls(X=data.X, M=data.Z, U=data.Z, n_obs=data.n, W=W)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def K(self) -> int:
        return self.M.shape[1]

    @property
    def q(self) -> int:
        return self.U.shape[1]

    @property
    def n_groups(self) -> int:
        return 0 if self.groups is None else int(self.groups.max()) + 1

    def block(self, k: int) -> np.ndarray:
        """[x_k, W_k], shape (N, 1 + K)."""
        return self._blocks[k]

    def eta(self, theta0, beta, Theta, intercepts=None) -> np.ndarray:
        eta = self.X @ beta
        if self.K:
            eta = eta + self.W @ np.asarray(Theta).ravel()
        if self.q:
            eta = eta + self.U @ theta0
        if self.groups is not None and intercepts is not None and len(intercepts):
            eta = eta + intercepts[self.groups]
        return eta


@dataclass(eq=False)
class PliableModel:
    """
    Fitted pliable lasso coefficients and diagnostics (standardized scale).

    Attributes:
        theta0: Unpenalized modifier main effects (q,)
        beta: Covariate main effects (p,)
        Theta: Interactions (p, K), row k = theta_k
        lam: Penalty level
        alpha: Mixing parameter
        intercepts: Per-group intercepts (empty unless the design is grouped)
        iterations: Outer iterations run
        objective: Final value of loss + penalty
        kkt: Final KKT residual
        converged: Both outer tolerance and KKT bound met
        flags: Diagnostic flags (max_iterations, diverging_eta, step_underflow, separation)
        history: Objective after each outer iteration, starting value first
    """

    theta0: np.ndarray
    beta: np.ndarray
    Theta: np.ndarray
    lam: float
    alpha: float
    intercepts: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    objective: float = float('nan')
    kkt: float = float('nan')
    converged: bool = False
    flags: List[str] = field(default_factory=list)
    history: List[float] = field(default_factory=list)

    @classmethod
    def zeros(cls, p: int, K: int, q: int, lam: float, alpha: float, n_groups: int = 0) -> 'PliableModel':
        return cls(
            theta0=np.zeros(q), beta=np.zeros(p), Theta=np.zeros((p, K)),
            lam=lam, alpha=alpha, intercepts=np.zeros(n_groups),
        )

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    def active_blocks(self, threshold: float = ZERO_TOL) -> np.ndarray:
        """Indices k with a nonzero main effect or interaction."""
        nonzero = (np.abs(self.beta) > threshold) | np.any(np.abs(self.Theta) > threshold, axis=1)
        return np.flatnonzero(nonzero)

    def hierarchy_violations(self) -> np.ndarray:
        """Indices k with theta_k != 0 but beta_k == 0."""
        return np.flatnonzero(np.any(self.Theta != 0, axis=1) & (self.beta == 0))

    def penalty(self) -> float:
        return penalty_value(self.beta, self.Theta, self.lam, self.alpha)

    def eta(self, design: BlockDesign) -> np.ndarray:
        return design.eta(self.theta0, self.beta, self.Theta, self.intercepts)

    def copy(self) -> 'PliableModel':
        return PliableModel(
            theta0=self.theta0.copy(), beta=self.beta.copy(), Theta=self.Theta.copy(),
            lam=self.lam, alpha=self.alpha, intercepts=self.intercepts.copy(),
            iterations=self.iterations, objective=self.objective, kkt=self.kkt,
            converged=self.converged, flags=list(self.flags), history=list(self.history),
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready coefficients; Theta as sparse (row, col, value) triplets."""
        rows, cols = np.nonzero(self.Theta)
        return {
            'lambda': float(self.lam),
            'alpha': float(self.alpha),
            'theta0': self.theta0.tolist(),
            'beta': self.beta.tolist(),
            'theta_shape': list(self.Theta.shape),
            'theta': [[int(r), int(c), float(self.Theta[r, c])] for r, c in zip(rows, cols)],
            'intercepts': self.intercepts.tolist(),
            'iterations': int(self.iterations),
            'objective': float(self.objective),
            'kkt': float(self.kkt),
            'converged': bool(self.converged),
            'flags': list(self.flags),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'PliableModel':
        Theta = np.zeros(tuple(payload['theta_shape']))
        for r, c, v in payload['theta']:
            Theta[int(r), int(c)] = float(v)
        return cls(
            theta0=np.asarray(payload['theta0'], dtype=float),
            beta=np.asarray(payload['beta'], dtype=float),
            Theta=Theta,
            lam=float(payload['lambda']),
            alpha=float(payload['alpha']),
            intercepts=np.asarray(payload.get('intercepts', []), dtype=float),
            iterations=int(payload.get('iterations', 0)),
            objective=_float_or_nan(payload.get('objective')),
            kkt=_float_or_nan(payload.get('kkt')),
            converged=bool(payload.get('converged', False)),
            flags=list(payload.get('flags', [])),
        )


def _float_or_nan(value) -> float:
    return float('nan') if value is None else float(value)


def _block_kkt(gamma: np.ndarray, b: np.ndarray, lam: float, alpha: float) -> float:
    """Stationarity residual of one block given its negative smooth gradient b."""
    c = (1.0 - alpha) * lam
    l1 = alpha * lam
    norm = np.linalg.norm(gamma)
    if norm == 0.0:
        return zero_block_gap(b[0], b[1:], lam, alpha)

    u = gamma / norm
    theta = gamma[1:]
    res_beta = b[0] - c * u[0]
    theta_norm = np.linalg.norm(theta)
    if theta_norm == 0.0:
        excess = max(np.linalg.norm(soft_threshold(b[1:], l1)) - c, 0.0)
        return float(np.hypot(res_beta, excess))

    u3 = theta / theta_norm
    nonzero = theta != 0
    res_theta = np.where(
        nonzero,
        b[1:] - c * u[1:] - c * u3 - l1 * np.sign(theta),
        soft_threshold(b[1:], l1),
    )
    return float(np.sqrt(res_beta ** 2 + res_theta @ res_theta))


def kkt_residual(design: BlockDesign, loss: SmoothLoss, model: PliableModel) -> float:
    """
    Largest stationarity violation of the penalized objective at model.

    Uses the exact loss gradient, so it certifies the full problem rather
    than the working surrogate.
    """
    score = loss.gradient(model.eta(design)) / design.n_obs
    worst = 0.0
    if design.q:
        worst = max(worst, float(np.max(np.abs(design.U.T @ score))))
    if design.groups is not None:
        worst = max(worst, float(np.max(np.abs(np.bincount(design.groups, weights=score)))))
    for k in range(design.p):
        gamma = np.concatenate(([model.beta[k]], model.Theta[k]))
        b = design.block(k).T @ score
        worst = max(worst, _block_kkt(gamma, b, model.lam, model.alpha))
    return worst


class BlockCoordinateDescent:
    """
    Inner solver for the quadratic surrogate of one expansion.

    Keeps the weighted residual r = w * (z - eta) current and caches block
    Grams for the lifetime of one working problem.
    """

    def __init__(self, design: BlockDesign, penalty: PenaltyConfig, freeze_blocks: bool = False):
        self.design = design
        self.penalty = penalty
        self.freeze_blocks = freeze_blocks
        self.step_underflows = 0

    def reset(self, approx: QuadraticApprox, eta: np.ndarray, model: PliableModel) -> None:
        """Start a working problem expanded at eta from model."""
        self.w, responses = working_problem(approx, eta)
        self.model = model
        self.r = self.w * (responses - model.eta(self.design))
        self._grams: Dict[int, Tuple[np.ndarray, float]] = {}
        self._u_factor = None

    def _gram(self, k: int) -> Tuple[np.ndarray, float]:
        if k not in self._grams:
            A = self.design.block(k)
            H = A.T @ (self.w[:, None] * A) / self.design.n_obs
            top = float(np.linalg.eigvalsh(H)[-1])
            step = self.penalty.prox_step or (1.0 / top if top > 0 else 1.0)
            self._grams[k] = (H, step)
        return self._grams[k]

    def update_theta0(self) -> float:
        """Weighted least squares of the partial residual on U."""
        d = self.design
        if d.q == 0:
            return 0.0
        if self._u_factor is None:
            G = d.U.T @ (self.w[:, None] * d.U) / d.n_obs
            try:
                self._u_factor = linalg.cho_factor(G)
            except linalg.LinAlgError:
                ridge = RIDGE * max(np.trace(G), 1.0) / d.q
                logger.warning(f"Singular modifier Gram; adding ridge {ridge:.2e}")
                self._u_factor = linalg.cho_factor(G + ridge * np.eye(d.q))
            self._u_gram = G

        old = self.model.theta0
        rhs = d.U.T @ self.r / d.n_obs + self._u_gram @ old
        new = linalg.cho_solve(self._u_factor, rhs)
        delta = new - old
        self.r -= self.w * (d.U @ delta)
        self.model.theta0 = new
        return float(np.max(np.abs(delta)))

    def update_intercepts(self) -> float:
        """Closed-form weighted mean update of each group's intercept."""
        d = self.design
        if d.groups is None:
            return 0.0
        w = self.w
        wsum = np.bincount(d.groups, weights=w, minlength=d.n_groups)
        rsum = np.bincount(d.groups, weights=self.r, minlength=d.n_groups)
        delta = np.divide(rsum, wsum, out=np.zeros_like(rsum), where=wsum > 0)
        self.r -= w * delta[d.groups]
        self.model.intercepts = self.model.intercepts + delta
        return float(np.max(np.abs(delta))) if delta.size else 0.0

    def update_block(self, k: int) -> float:
        """Screen, then beta-only check, then proximal iterations for block k."""
        pen = self.penalty
        lam, alpha = pen.lam, pen.alpha
        A = self.design.block(k)
        H, step = self._gram(k)
        gamma = np.concatenate(([self.model.beta[k]], self.model.Theta[k]))
        b = A.T @ self.r / self.design.n_obs + H @ gamma

        if _screens_zero(b[0], b[1:], lam, alpha):
            new = np.zeros_like(gamma)
        else:
            try:
                beta_hat, theta_zero = _beta_only(b[0], b[1:], H[1:, 0], H[0, 0], lam, alpha)
            except DegenerateColumnError:
                logger.debug(f"Block {k} has zero weighted norm; set to zero")
                beta_hat, theta_zero = 0.0, True
            if theta_zero:
                new = np.zeros_like(gamma)
                new[0] = beta_hat
            else:
                start = gamma if np.any(gamma) else np.concatenate(([beta_hat], np.zeros(len(gamma) - 1)))
                new = self._solve_block(start, H, b, step)

        delta = new - gamma
        if np.any(delta):
            self.r -= self.w * (A @ delta)
            self.model.beta[k] = new[0]
            self.model.Theta[k] = new[1:]
        return float(np.max(np.abs(delta)))

    def _solve_block(self, gamma: np.ndarray, H: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
        """Accelerated proximal gradient on one block, restarted whenever the objective rises."""
        pen = self.penalty

        def value(g: np.ndarray) -> float:
            return 0.5 * g @ H @ g - b @ g + block_penalty(g, pen.lam, pen.alpha)

        current = value(gamma)
        point, momentum = gamma, 1.0
        for _ in range(pen.prox_max_iter):
            new, step, underflow = prox_block_update(point, H, b, step, pen.lam, pen.alpha)
            if underflow:
                self.step_underflows += 1
                logger.warning("Proximal step underflow; block left unchanged")
                return gamma
            f_new = value(new)
            if f_new > current and momentum > 1.0:
                point, momentum = gamma, 1.0
                continue

            change = np.max(np.abs(new - gamma))
            following = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum ** 2))
            point = new + ((momentum - 1.0) / following) * (new - gamma)
            gamma, current, momentum = new, f_new, following
            if change < 0.1 * pen.tol_inner:
                break
        return gamma

    def sweep(self, blocks: Sequence[int]) -> float:
        change = self.update_theta0()
        change = max(change, self.update_intercepts())
        if not self.freeze_blocks:
            for k in blocks:
                change = max(change, self.update_block(k))
        return change

    def solve(self) -> int:
        """
        Cycle until the largest coefficient change drops below tol_inner.

        Full sweeps alternate with sweeps restricted to the active set.

        Returns:
            Number of sweeps run
        """
        pen = self.penalty
        all_blocks = range(self.design.p)
        sweeps = 0
        while sweeps < pen.inner_max_iter:
            change = self.sweep(all_blocks)
            sweeps += 1
            if change < pen.tol_inner:
                break
            active = self.model.active_blocks(0.0)
            while sweeps < pen.inner_max_iter:
                change = self.sweep(active)
                sweeps += 1
                if change < pen.tol_inner:
                    break
        return sweeps


def _objective(loss: SmoothLoss, design: BlockDesign, model: PliableModel) -> Tuple[float, np.ndarray]:
    eta = model.eta(design)
    return loss.value(eta) + model.penalty(), eta


def _blend(old: PliableModel, new: PliableModel, s: float) -> PliableModel:
    out = old.copy()
    out.theta0 = old.theta0 + s * (new.theta0 - old.theta0)
    out.beta = old.beta + s * (new.beta - old.beta)
    out.Theta = old.Theta + s * (new.Theta - old.Theta)
    out.intercepts = old.intercepts + s * (new.intercepts - old.intercepts)
    return out


def _extrapolate(old: PliableModel, new: PliableModel, s: float) -> PliableModel:
    """Step s >= 1 along new - old, holding entries that are zero in new at zero."""
    out = _blend(old, new, s)
    out.beta[new.beta == 0] = 0.0
    out.Theta[new.Theta == 0] = 0.0
    return out


def _lengthen(
    loss: SmoothLoss, design: BlockDesign, old: PliableModel, new: PliableModel, f_new: float, eta_new: np.ndarray
) -> Tuple[PliableModel, float, np.ndarray, float]:
    """Double the step past the working solution while the objective keeps falling."""
    best, f_best, eta_best, step = new, f_new, eta_new, 1.0
    s = 2.0
    while s <= MAX_EXTRAPOLATION:
        trial = _extrapolate(old, new, s)
        if trial.hierarchy_violations().size:
            break
        try:
            f_trial, eta_trial = _objective(loss, design, trial)
        except ObjectiveError:
            break
        if not np.isfinite(f_trial) or f_trial >= f_best:
            break
        best, f_best, eta_best, step = trial, f_trial, eta_trial, s
        s *= 2.0
    return best, f_best, eta_best, step


def fit_working(
    design: BlockDesign,
    loss: SmoothLoss,
    penalty: PenaltyConfig,
    init: Optional[PliableModel] = None,
    freeze_blocks: bool = False,
) -> PliableModel:
    """
    Minimize loss + penalty by repeated quadratic approximation.

    Each outer iteration solves the working problem with block coordinate
    descent. When the full step lowers the true objective the step is
    lengthened along the support of the working solution, otherwise it is
    halved until the objective does not increase.

    Args:
        design: Row design
        loss: Smooth loss over the design rows
        penalty: Penalty level and solver controls
        init: Warm start; zeros when None
        freeze_blocks: Fit only theta0 and intercepts, keeping beta and Theta fixed

    Returns:
        PliableModel with diagnostics and flags
    """
    if init is None:
        model = PliableModel.zeros(design.p, design.K, design.q, penalty.lam, penalty.alpha, design.n_groups)
    else:
        model = init.copy()
        model.lam, model.alpha = penalty.lam, penalty.alpha
        model.flags, model.history = [], []
        if len(model.intercepts) != design.n_groups:
            model.intercepts = np.zeros(design.n_groups)

    f, eta = _objective(loss, design, model)
    model.history.append(f)
    inner = BlockCoordinateDescent(design, penalty, freeze_blocks=freeze_blocks)
    converged = False

    for iteration in range(1, penalty.outer_max_iter + 1):
        approx = loss.quadratic(eta)
        inner.reset(approx, eta, model.copy())
        sweeps = inner.solve()

        candidate = inner.model
        f_new, eta_new = _objective(loss, design, candidate)
        s = 1.0
        if f_new <= f:
            candidate, f_new, eta_new, s = _lengthen(loss, design, model, candidate, f_new, eta_new)
        while f_new > f and s > 1e-10:
            s *= 0.5
            candidate = _blend(model, inner.model, s)
            f_new, eta_new = _objective(loss, design, candidate)
        if f_new > f:
            candidate, f_new, eta_new = model, f, eta

        rel_change = abs(f - f_new) / max(abs(f_new), 1e-12)
        model, f, eta = candidate, f_new, eta_new
        model.history.append(f)
        model.iterations = iteration

        n_active = len(model.active_blocks())
        logger.debug(
            f"outer {iteration}: objective={f:.10g} rel_change={rel_change:.2e} "
            f"active={n_active} sweeps={sweeps} step={s:g}"
        )

        if np.max(np.abs(eta)) > penalty.eta_limit:
            logger.warning(f"max |eta| exceeds {penalty.eta_limit} at lambda={penalty.lam:.4g}; stopping")
            model.flags.append(FLAG_DIVERGING_ETA)
            break

        if rel_change < penalty.tol_outer:
            if freeze_blocks:
                converged = True
                break
            model.kkt = kkt_residual(design, loss, model)
            if model.kkt <= penalty.tol_kkt:
                converged = True
                break
            logger.debug(f"KKT residual {model.kkt:.2e} above {penalty.tol_kkt:.0e}; continuing")

    if not converged and FLAG_DIVERGING_ETA not in model.flags:
        logger.warning(f"Reached {penalty.outer_max_iter} outer iterations at lambda={penalty.lam:.4g}")
        model.flags.append(FLAG_MAX_ITERATIONS)
    if inner.step_underflows:
        model.flags.append(FLAG_STEP_UNDERFLOW)

    if not freeze_blocks:
        model.kkt = kkt_residual(design, loss, model)
    model.objective = f
    model.converged = converged
    return model


def fit(
    data: SurvivalDataset,
    design: Optional[InteractionDesign],
    idx: RiskSetIndex,
    config: PenaltyConfig,
    init: Optional[PliableModel] = None,
) -> PliableModel:
    """
    Fit the pliable lasso Cox model at one penalty level.

    Args:
        data: Standardized survival dataset
        design: Interactions of data.X and data.Z (built when None)
        idx: Risk-set index of data
        config: Penalty and solver controls
        init: Warm start

    Returns:
        PliableModel on the standardized scale
    """
    blocks = BlockDesign.proportional(data, design)
    loss = CoxLoss(idx, data.omega)
    model = fit_working(blocks, loss, config, init)
    logger.debug(
        f"fit lambda={config.lam:.4g} alpha={config.alpha}: {len(model.active_blocks())} active blocks, "
        f"{model.iterations} outer iterations, kkt={model.kkt:.2e}"
    )
    return model
