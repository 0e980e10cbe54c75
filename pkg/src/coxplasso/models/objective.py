"""
Breslow-weighted Cox partial log-likelihood and its working approximation.

The library minimizes f = -(1/n) * partial_loglik + penalty. Expansions keep
only the diagonal of the Hessian, computed with running sums over risk sets.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..data.risk_sets import RiskSetIndex
from ..utils.logging import get_logger

logger = get_logger(__name__)

# Rows with curvature at or below this are dropped from the working problem
ZERO_CURVATURE = 1e-12


class ObjectiveError(Exception):
    """Raised when a likelihood cannot be evaluated (e.g. non-finite eta)."""
    pass


@dataclass(frozen=True)
class QuadraticApprox:
    """
    Second-order expansion of a log-likelihood at eta.

    Attributes:
        grad: l'(eta)
        hess_diag: diagonal of l''(eta), nonpositive
        working_weight: -hess_diag, zeroed where curvature vanishes
        working_response: eta + grad / working_weight (eta where the weight is 0)
    """

    grad: np.ndarray
    hess_diag: np.ndarray
    working_weight: np.ndarray
    working_response: np.ndarray

    @classmethod
    def from_derivatives(
        cls,
        eta: np.ndarray,
        grad: np.ndarray,
        hess_diag: np.ndarray,
    ) -> 'QuadraticApprox':
        hess_diag = np.minimum(hess_diag, 0.0)
        weight = -hess_diag
        flat = weight <= ZERO_CURVATURE
        if flat.any():
            logger.debug(f"Dropping {int(flat.sum())} zero-curvature rows from working problem")
        weight = np.where(flat, 0.0, weight)
        safe = np.where(flat, 1.0, weight)
        response = np.where(flat, eta, eta + grad / safe)
        return cls(grad=grad, hess_diag=hess_diag, working_weight=weight,
                   working_response=response)


def linear_predictor(
    theta0: np.ndarray,
    beta: np.ndarray,
    Theta: np.ndarray,
    X: np.ndarray,
    Z: np.ndarray,
) -> np.ndarray:
    """
    eta_j = z_j' theta0 + sum_k x_jk (beta_k + z_j' theta_k).

    Args:
        theta0: Modifier main effects (nz,)
        beta: Covariate main effects (p,)
        Theta: Interactions (p, nz)
        X: Covariates (n, p)
        Z: Modifiers (n, nz)

    Returns:
        eta (n,)
    """
    eta = X @ beta
    if Z.shape[1]:
        eta = eta + Z @ theta0 + np.sum(X * (Z @ Theta.T), axis=1)
    return eta


def _check_eta(eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise ObjectiveError("Linear predictor contains non-finite values")
    return eta


def partial_loglik(eta: np.ndarray, idx: RiskSetIndex, omega: np.ndarray) -> float:
    """
    Breslow-weighted Cox partial log-likelihood.

    l = sum_i [ sum_{j in D_i} w_j eta_j - d_i log sum_{j in R_i} w_j exp(eta_j) ]

    Args:
        eta: Linear predictor (n,)
        idx: Risk-set index of the same observations
        omega: Observation weights (n,)

    Returns:
        Partial log-likelihood
    """
    eta = _check_eta(eta)
    failed = idx.fail_index >= 0
    log_s = idx.log_risk_sums(eta + np.log(omega))
    return float(np.sum(omega[failed] * eta[failed]) - np.sum(idx.d * log_s))


def derivatives(eta: np.ndarray, idx: RiskSetIndex, omega: np.ndarray) -> QuadraticApprox:
    """
    Gradient and diagonal Hessian of the partial log-likelihood in eta.

    l'_j = w_j delta_j - a_j sum_{i in C_j} d_i / S_i
    l''_jj = -(a_j sum_{i in C_j} d_i / S_i - a_j^2 sum_{i in C_j} d_i / S_i^2)
    with a_j = w_j exp(eta_j) and S_i = sum_{k in R_i} a_k.

    Args:
        eta: Linear predictor (n,)
        idx: Risk-set index
        omega: Observation weights (n,)

    Returns:
        QuadraticApprox at eta
    """
    eta = _check_eta(eta)
    shift = eta.max()
    a = omega * np.exp(eta - shift)
    log_s = idx.log_risk_sums(eta - shift + np.log(omega))

    first = idx.co_sums(np.exp(np.log(idx.d) - log_s))
    second = idx.co_sums(np.exp(np.log(idx.d) - 2.0 * log_s))

    delta = (idx.fail_index >= 0).astype(float)
    grad = omega * delta - a * first
    hess = -(a * first - a * a * second)
    return QuadraticApprox.from_derivatives(eta, grad, hess)


def working_problem(approx: QuadraticApprox, eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weights and responses of the weighted least-squares surrogate.

    The solver minimizes (1/2n) sum_j weight_j (response_j - eta_j)^2 + penalty.

    Args:
        approx: Expansion computed at eta
        eta: Expansion point

    Returns:
        (weights, responses)
    """
    if approx.working_response.shape != np.shape(eta):
        raise ObjectiveError("Approximation and eta have different lengths")
    return approx.working_weight, approx.working_response


class SmoothLoss(ABC):
    """
    Negative scaled log-likelihood -(1/n) l(eta) over the rows of a design.

    Subclasses supply the likelihood; the solver only sees eta.
    """

    n_obs: int

    @abstractmethod
    def loglik(self, eta: np.ndarray) -> float:
        """Log-likelihood l(eta)."""

    @abstractmethod
    def quadratic(self, eta: np.ndarray) -> QuadraticApprox:
        """Expansion of l at eta."""

    def value(self, eta: np.ndarray) -> float:
        return -self.loglik(eta) / self.n_obs

    def gradient(self, eta: np.ndarray) -> np.ndarray:
        return self.quadratic(eta).grad


class CoxLoss(SmoothLoss):
    """Proportional-hazards partial likelihood over one row per observation."""

    def __init__(self, idx: RiskSetIndex, omega: np.ndarray):
        self.idx = idx
        self.omega = np.asarray(omega, dtype=float)
        self.n_obs = idx.n

    def loglik(self, eta: np.ndarray) -> float:
        return partial_loglik(eta, self.idx, self.omega)

    def quadratic(self, eta: np.ndarray) -> QuadraticApprox:
        return derivatives(eta, self.idx, self.omega)
