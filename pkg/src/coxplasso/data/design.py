"""Interaction design construction, standardization and raw-scale mapping."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .dataset import SurvivalDataset, DimensionMismatchError, ConstantColumnError
from ..config import get_settings
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class InteractionDesign:
    """
    Interaction matrix W with block k equal to Z scaled rowwise by X_k.

    Attributes:
        W: Matrix (n, p * nz), column k * nz + l equals X_k * Z_l
        p: Number of covariates
        nz: Number of modifiers
    """

    W: np.ndarray
    p: int
    nz: int

    def block(self, k: int) -> np.ndarray:
        """Columns of W belonging to covariate k, shape (n, nz)."""
        return self.W[:, k * self.nz:(k + 1) * self.nz]


def build_interactions(X: np.ndarray, Z: np.ndarray) -> InteractionDesign:
    """
    Build the interaction design w_jk = x_jk * z_j.

    Args:
        X: Covariates (n, p)
        Z: Modifiers (n, nz)

    Returns:
        InteractionDesign

    Raises:
        DimensionMismatchError: If X and Z have different row counts
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[0] != Z.shape[0]:
        raise DimensionMismatchError(
            f"X {X.shape} and Z {Z.shape} must be matrices with equal row counts"
        )

    n, p = X.shape
    nz = Z.shape[1]
    W = np.asfortranarray((X[:, :, None] * Z[:, None, :]).reshape(n, p * nz))
    return InteractionDesign(W=W, p=p, nz=nz)


@dataclass(frozen=True)
class RawCoefficients:
    """Coefficients on the original data scale; eta = Z theta0 + X beta + W vec(Theta) + offset."""

    theta0: np.ndarray
    beta: np.ndarray
    Theta: np.ndarray
    offset: float


@dataclass(frozen=True)
class ScalingRecord:
    """
    Column centers and scales used by `standardize`.

    Modifier centers are 0 and scales 1 when modifiers were left unscaled.
    Columns dropped as constant are listed in `x_dropped` / `z_dropped`.
    """

    x_mean: np.ndarray
    x_scale: np.ndarray
    z_mean: np.ndarray
    z_scale: np.ndarray
    x_dropped: Tuple[int, ...] = field(default_factory=tuple)
    z_dropped: Tuple[int, ...] = field(default_factory=tuple)

    def _keep(self, width: int, dropped: Tuple[int, ...]) -> np.ndarray:
        return np.setdiff1d(np.arange(width), np.asarray(dropped, dtype=int))

    def apply(self, X: np.ndarray, Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Standardize new raw data with the stored centers and scales.

        Args:
            X: Raw covariates, original width
            Z: Raw modifiers, original width

        Returns:
            (X, Z) standardized and with dropped columns removed
        """
        X = np.asarray(X, dtype=float)
        Z = np.asarray(Z, dtype=float)
        X = X[:, self._keep(X.shape[1], self.x_dropped)]
        Z = Z[:, self._keep(Z.shape[1], self.z_dropped)]
        if X.shape[1] != self.x_mean.shape[0] or Z.shape[1] != self.z_mean.shape[0]:
            raise DimensionMismatchError("Data width does not match scaling record")
        return (
            np.asfortranarray((X - self.x_mean) / self.x_scale),
            np.asfortranarray((Z - self.z_mean) / self.z_scale),
        )

    def unscale(self, theta0: np.ndarray, beta: np.ndarray, Theta: np.ndarray) -> RawCoefficients:
        """
        Map standardized coefficients to the raw scale.

        The returned coefficients, applied to the retained raw columns,
        reproduce the standardized linear predictor exactly (up to rounding).

        Args:
            theta0: Modifier main effects (nz,)
            beta: Covariate main effects (p,)
            Theta: Interaction coefficients (p, nz)

        Returns:
            RawCoefficients
        """
        theta0 = np.asarray(theta0, dtype=float)
        beta = np.asarray(beta, dtype=float)
        Theta = np.asarray(Theta, dtype=float).reshape(beta.shape[0], theta0.shape[0])

        mx, sx = self.x_mean, self.x_scale
        mz, sz = self.z_mean, self.z_scale

        Theta_raw = Theta / np.outer(sx, sz)
        beta_raw = beta / sx - Theta_raw @ mz
        theta0_raw = theta0 / sz - Theta_raw.T @ mx
        offset = float(-(theta0 @ (mz / sz)) - beta @ (mx / sx) + mx @ Theta_raw @ mz)

        return RawCoefficients(theta0=theta0_raw, beta=beta_raw, Theta=Theta_raw, offset=offset)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x_mean': self.x_mean.tolist(),
            'x_scale': self.x_scale.tolist(),
            'z_mean': self.z_mean.tolist(),
            'z_scale': self.z_scale.tolist(),
            'x_dropped': list(self.x_dropped),
            'z_dropped': list(self.z_dropped),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'ScalingRecord':
        return cls(
            x_mean=np.asarray(payload['x_mean'], dtype=float),
            x_scale=np.asarray(payload['x_scale'], dtype=float),
            z_mean=np.asarray(payload['z_mean'], dtype=float),
            z_scale=np.asarray(payload['z_scale'], dtype=float),
            x_dropped=tuple(payload.get('x_dropped', ())),
            z_dropped=tuple(payload.get('z_dropped', ())),
        )

    @classmethod
    def identity(cls, p: int, nz: int) -> 'ScalingRecord':
        """Record for data used as-is."""
        return cls(np.zeros(p), np.ones(p), np.zeros(nz), np.ones(nz))


def column_moments(M: np.ndarray, weights: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Column means and population standard deviations (divisor n)."""
    mean = np.average(M, axis=0, weights=weights)
    sd = np.sqrt(np.average((M - mean) ** 2, axis=0, weights=weights))
    return mean, sd


def _scale_block(M: np.ndarray, label: str, exclude_constant: bool, tol: float):
    if M.shape[1] == 0:
        return M, np.zeros(0), np.ones(0), ()

    mean, sd = column_moments(M)
    constant = np.flatnonzero(sd <= tol * np.maximum(1.0, np.abs(mean)))

    if constant.size and not exclude_constant:
        raise ConstantColumnError(
            f"{label} column {int(constant[0])} is constant", column=int(constant[0])
        )
    if constant.size:
        logger.warning(f"Dropping constant {label} columns: {constant.tolist()}")

    keep = np.setdiff1d(np.arange(M.shape[1]), constant)
    scaled = (M[:, keep] - mean[keep]) / sd[keep]
    return np.asfortranarray(scaled), mean[keep], sd[keep], tuple(int(c) for c in constant)


def standardize(
    data: SurvivalDataset,
    include_splines: bool = True,
    exclude_constant: bool = False,
) -> Tuple[SurvivalDataset, ScalingRecord]:
    """
    Center and scale covariates (and modifiers) to mean 0 and unit population sd.

    Args:
        data: Survival dataset, n >= 2
        include_splines: Also standardize the modifier columns (spline bases included)
        exclude_constant: Drop constant columns instead of raising

    Returns:
        (standardized dataset, ScalingRecord)

    Raises:
        ConstantColumnError: If a column has zero variance and exclude_constant is False
        DimensionMismatchError: If n < 2
    """
    if data.n < 2:
        raise DimensionMismatchError("standardize needs at least two observations")

    tol = get_settings().validation.constant_tol
    X, x_mean, x_scale, x_dropped = _scale_block(data.X, 'X', exclude_constant, tol)

    if include_splines:
        Z, z_mean, z_scale, z_dropped = _scale_block(data.Z, 'Z', exclude_constant, tol)
    else:
        Z, z_mean, z_scale, z_dropped = data.Z, np.zeros(data.nz), np.ones(data.nz), ()

    record = ScalingRecord(
        x_mean=x_mean, x_scale=x_scale, z_mean=z_mean, z_scale=z_scale,
        x_dropped=x_dropped, z_dropped=z_dropped,
    )

    x_names = [nm for k, nm in enumerate(data.x_names) if k not in x_dropped]
    z_names = [nm for l, nm in enumerate(data.z_names) if l not in z_dropped]
    scaled = SurvivalDataset(
        y=data.y, delta=data.delta, omega=data.omega, X=X, Z=Z,
        x_names=x_names, z_names=z_names,
    )
    return scaled, record
