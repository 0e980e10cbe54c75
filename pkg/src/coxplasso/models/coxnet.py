"""
Elastic-net Cox regression by coordinate descent.

Minimizes -(1/n) l(X beta) + lam * (l1_ratio ||beta||_1 + (1 - l1_ratio) / 2 ||beta||^2)
with the same quadratic-approximation outer loop as the pliable solver.
l1_ratio = 1 is the lasso. Serves as the "lasso (main)" and "lasso (full)"
comparators in the simulation benchmark.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .objective import SmoothLoss, working_problem
from .solver import PenaltyConfigError, soft_threshold
from ..config import get_settings
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(eq=False)
class CoxNetModel:
    """Elastic-net Cox coefficients and diagnostics."""

    beta: np.ndarray
    lam: float
    l1_ratio: float = 1.0
    iterations: int = 0
    objective: float = float('nan')
    converged: bool = False
    flags: List[str] = field(default_factory=list)

    def penalty(self) -> float:
        return float(self.lam * (self.l1_ratio * np.sum(np.abs(self.beta))
                                 + 0.5 * (1.0 - self.l1_ratio) * self.beta @ self.beta))

    def eta(self, X: np.ndarray) -> np.ndarray:
        return X @ self.beta

    def copy(self) -> 'CoxNetModel':
        return CoxNetModel(self.beta.copy(), self.lam, self.l1_ratio, self.iterations,
                           self.objective, self.converged, list(self.flags))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda': float(self.lam),
            'l1_ratio': float(self.l1_ratio),
            'beta': self.beta.tolist(),
            'iterations': int(self.iterations),
            'objective': float(self.objective),
            'converged': bool(self.converged),
            'flags': list(self.flags),
        }


def coxnet_lambda_max(X: np.ndarray, loss: SmoothLoss, l1_ratio: float = 1.0) -> float:
    """Smallest lam with beta = 0: max_k |X_k' l'(0)| / (n * l1_ratio)."""
    if not 0.0 < l1_ratio <= 1.0:
        raise PenaltyConfigError("l1_ratio must lie in (0, 1]")
    score = loss.gradient(np.zeros(X.shape[0]))
    return float(np.max(np.abs(X.T @ score))) / (loss.n_obs * l1_ratio)


def fit_coxnet(
    X: np.ndarray,
    loss: SmoothLoss,
    lam: float,
    l1_ratio: float = 1.0,
    init: Optional[CoxNetModel] = None,
) -> CoxNetModel:
    """
    Fit the elastic-net Cox model at one penalty level.

    Args:
        X: Standardized design (n, d)
        loss: Cox loss over the rows of X
        lam: Penalty level
        l1_ratio: Share of the l1 term, in (0, 1]
        init: Warm start

    Returns:
        CoxNetModel
    """
    if lam < 0:
        raise PenaltyConfigError("lambda must be >= 0")
    if not 0.0 < l1_ratio <= 1.0:
        raise PenaltyConfigError("l1_ratio must lie in (0, 1]")

    cfg = get_settings().solver
    n = loss.n_obs
    model = CoxNetModel(beta=np.zeros(X.shape[1]) if init is None else init.beta.copy(),
                        lam=lam, l1_ratio=l1_ratio)
    l1, l2 = lam * l1_ratio, lam * (1.0 - l1_ratio)

    eta = model.eta(X)
    f = loss.value(eta) + model.penalty()

    for iteration in range(1, cfg.outer_max_iter + 1):
        w, z = working_problem(loss.quadratic(eta), eta)
        h = (w @ (X * X)) / n
        beta = model.beta.copy()
        r = w * (z - X @ beta)

        for _ in range(cfg.inner_max_iter):
            change = 0.0
            for k in range(X.shape[1]):
                if h[k] <= 0.0:
                    continue
                old = beta[k]
                new = float(soft_threshold(X[:, k] @ r / n + h[k] * old, l1)) / (h[k] + l2)
                if new != old:
                    r -= w * X[:, k] * (new - old)
                    beta[k] = new
                    change = max(change, abs(new - old))
            if change < cfg.tol_inner:
                break

        candidate = CoxNetModel(beta=beta, lam=lam, l1_ratio=l1_ratio)
        f_new = loss.value(candidate.eta(X)) + candidate.penalty()
        s = 1.0
        while f_new > f and s > 1e-10:
            s *= 0.5
            candidate.beta = model.beta + s * (beta - model.beta)
            f_new = loss.value(candidate.eta(X)) + candidate.penalty()
        if f_new > f:
            candidate, f_new = model, f

        rel_change = abs(f - f_new) / max(abs(f_new), 1e-12)
        model, f = candidate, f_new
        model.iterations = iteration
        eta = model.eta(X)

        if np.max(np.abs(eta)) > cfg.eta_limit:
            model.flags.append("diverging_eta")
            logger.warning(f"CoxNet: max |eta| exceeds {cfg.eta_limit} at lambda={lam:.4g}")
            break
        if rel_change < cfg.tol_outer:
            model.converged = True
            break
    else:
        model.flags.append("max_iterations")

    model.objective = f
    return model
