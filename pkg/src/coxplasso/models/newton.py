"""
Dense Newton-Raphson for unpenalized Cox models.

Used for the modifier-only fit behind lambda_max, as the unpenalized
oracle in tests, and for the unpenalized "cox (full)" comparator.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from ..data.risk_sets import RiskSetIndex
from ..utils.logging import get_logger

logger = get_logger(__name__)

LogLikFn = Callable[[np.ndarray], Tuple[float, np.ndarray, np.ndarray]]


class ConvergenceError(Exception):
    """Raised when the Newton system cannot be solved even with a ridge."""
    pass


@dataclass
class NewtonResult:
    """Coefficients, log-likelihood and Hessian at the last iterate."""

    beta: np.ndarray
    loglik: float
    hessian: np.ndarray
    iterations: int
    converged: bool


def newton_raphson(
    loglik_fn: LogLikFn,
    init: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> NewtonResult:
    """
    Maximize a concave log-likelihood with step-halving Newton iterations.

    Args:
        loglik_fn: beta -> (loglik, gradient, Hessian)
        init: Starting coefficients
        tol: Stop when the Newton decrement or step norm drops below tol
        max_iter: Iteration cap

    Returns:
        NewtonResult
    """
    beta = np.array(init, dtype=float)
    ll, g, h = loglik_fn(beta)
    if beta.size == 0:
        return NewtonResult(beta, ll, h, 0, True)

    for i in range(1, max_iter + 1):
        try:
            delta = linalg.solve(-h, g, assume_a='pos', check_finite=False)
        except (ValueError, linalg.LinAlgError):
            ridge = 1e-8 * max(np.trace(-h), 1.0) / beta.size
            logger.debug(f"Newton Hessian not positive definite; ridge {ridge:.1e}")
            try:
                delta = linalg.solve(-h + ridge * np.eye(beta.size), g, check_finite=False)
            except (ValueError, linalg.LinAlgError) as e:
                raise ConvergenceError(f"Newton system is singular: {e}") from e

        decrement = float(g @ delta) / 2.0
        step = 1.0
        while True:
            cand = beta + step * delta
            ll_c, g_c, h_c = loglik_fn(cand)
            if np.isfinite(ll_c) and ll_c >= ll - 1e-12 * max(1.0, abs(ll)):
                break
            step *= 0.5
            if step < 1e-10:
                logger.warning("Newton step halving failed to increase the log-likelihood")
                return NewtonResult(beta, ll, h, i, False)

        beta, ll, g, h = cand, ll_c, g_c, h_c
        if decrement < tol or np.linalg.norm(step * delta) < tol:
            return NewtonResult(beta, ll, h, i, True)

    logger.warning(f"Newton-Raphson did not converge in {max_iter} iterations")
    return NewtonResult(beta, ll, h, max_iter, False)


def cox_loglik_grad_hess(
    X: np.ndarray,
    idx: RiskSetIndex,
    omega: np.ndarray,
    beta: np.ndarray,
    offset: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Breslow partial log-likelihood with full gradient and Hessian in beta.

    Args:
        X: Design (n, d)
        idx: Risk-set index
        omega: Observation weights
        beta: Coefficients (d,)
        offset: Fixed part of eta

    Returns:
        (loglik, gradient, Hessian)
    """
    eta = X @ beta
    if offset is not None:
        eta = eta + offset
    shift = eta.max()
    a = omega * np.exp(eta - shift)

    s0 = idx.risk_sums(a)
    s1 = idx.risk_sums(a[:, None] * X)
    s2 = idx.risk_sums(a[:, None, None] * X[:, :, None] * X[:, None, :])

    failed = idx.fail_index >= 0
    loglik = float(np.sum(omega[failed] * eta[failed]) - np.sum(idx.d * (np.log(s0) + shift)))
    mean = s1 / s0[:, None]
    grad = omega[failed] @ X[failed] - idx.d @ mean
    hess = -np.einsum('i,ijk->jk', idx.d, s2 / s0[:, None, None] - mean[:, :, None] * mean[:, None, :])
    return loglik, grad, hess


def cox_newton(
    X: np.ndarray,
    idx: RiskSetIndex,
    omega: np.ndarray,
    offset: Optional[np.ndarray] = None,
    init: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> NewtonResult:
    """
    Unpenalized Breslow Cox fit by Newton-Raphson.

    Args:
        X: Design (n, d); d may be 0
        idx: Risk-set index of the same rows
        omega: Observation weights
        offset: Fixed part of eta
        init: Starting coefficients (zeros by default)
        tol: Convergence tolerance
        max_iter: Iteration cap

    Returns:
        NewtonResult
    """
    X = np.asarray(X, dtype=float)
    init = np.zeros(X.shape[1]) if init is None else init
    result = newton_raphson(
        lambda b: cox_loglik_grad_hess(X, idx, omega, b, offset), init, tol=tol, max_iter=max_iter
    )
    logger.debug(f"Cox Newton: {result.iterations} iterations, loglik={result.loglik:.6f}")
    return result
