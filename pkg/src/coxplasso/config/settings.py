"""
Runtime settings for coxplasso.

Settings are grouped by concern: solver tolerances, path and cross-validation
defaults, thread parallelism, logging and data validation thresholds.

Priority (highest first):
1. Explicit arguments (CLI options, PathConfig/PenaltyConfig fields)
2. ``COXPLASSO_*`` environment variables
3. ``~/.coxplassorc``
4. The defaults below
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple
import os


def _from_rc(key: str, fallback: Any):
    """
    Dataclass field whose default is read from the user config when created.

    A value that cannot be cast to the type of ``fallback`` is ignored.
    """
    def factory() -> Any:
        from coxplasso.config.user_config import UserConfig

        try:
            value = UserConfig().get(key)
        except Exception:
            return fallback
        if value is None:
            return fallback
        try:
            return type(fallback)(value)
        except (TypeError, ValueError):
            return fallback

    return field(default_factory=factory)


@dataclass
class SolverConfig:
    """Block coordinate descent controls."""

    outer_max_iter: int = _from_rc('solver.outer_max_iter', 100)
    inner_max_iter: int = _from_rc('solver.inner_max_iter', 1000)
    tol_outer: float = _from_rc('solver.tol_outer', 1e-5)
    tol_inner: float = _from_rc('solver.tol_inner', 1e-7)
    tol_kkt: float = _from_rc('solver.tol_kkt', 1e-4)
    prox_max_iter: int = _from_rc('solver.prox_max_iter', 500)

    # |eta| above this flags the fit as diverging
    eta_limit: float = 30.0


@dataclass
class PathDefaults:
    """Lambda grid and cross-validation defaults."""

    nlambda: int = _from_rc('path.nlambda', 50)
    lambda_min_ratio: float = _from_rc('path.lambda_min_ratio', 0.01)
    nfolds: int = _from_rc('path.nfolds', 5)
    rule: str = _from_rc('path.rule', 'min')


@dataclass
class ParallelConfig:
    """Threads for CV folds and benchmark replicates."""

    n_jobs: int = _from_rc('parallel.n_jobs', 1)


@dataclass
class LoggingConfig:
    log_dir: str = "logs"
    log_level: str = "INFO"
    console_output: bool = True
    file_output: bool = False
    max_log_size_mb: int = 10
    backup_count: int = 5

    @property
    def max_bytes(self) -> int:
        return self.max_log_size_mb * 1_000_000


@dataclass
class ValidationConfig:
    """Thresholds used by SurvivalValidator and standardization."""

    # fewer failures only warns
    min_failures: int = 5
    max_censoring_fraction: float = 0.9
    # sd below this means constant
    constant_tol: float = 1e-12


# variable -> (settings section, attribute, parser)
ENV_OVERRIDES: Dict[str, Tuple[str, str, Callable[[str], Any]]] = {
    'COXPLASSO_LOG_LEVEL': ('logging', 'log_level', str.upper),
    'COXPLASSO_LOG_DIR': ('logging', 'log_dir', str),
    'COXPLASSO_N_JOBS': ('parallel', 'n_jobs', int),
    'COXPLASSO_TOL_OUTER': ('solver', 'tol_outer', float),
    'COXPLASSO_TOL_INNER': ('solver', 'tol_inner', float),
    'COXPLASSO_MAX_OUTER': ('solver', 'outer_max_iter', int),
}


@dataclass
class Settings:
    """All settings groups plus the environment name."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    path: PathDefaults = field(default_factory=PathDefaults)
    parallel: ParallelConfig = field(default_factory=ParallelConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)

    environment: str = field(default_factory=lambda: os.getenv('COXPLASSO_ENV', 'development'))

    @classmethod
    def load_from_env(cls) -> 'Settings':
        """
        Build settings from defaults, the user config and the environment.

        Recognized variables are the keys of ENV_OVERRIDES plus COXPLASSO_ENV.

        Raises:
            ValueError: A numeric variable does not parse
        """
        settings = cls()
        for variable, (section, attribute, parse) in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if raw:
                setattr(getattr(settings, section), attribute, parse(raw))
        return settings

    @classmethod
    def for_testing(cls) -> 'Settings':
        """Serial, silent settings for the test suite."""
        settings = cls(
            parallel=ParallelConfig(n_jobs=1),
            logging=LoggingConfig(console_output=False, file_output=False),
            environment='test',
        )
        return settings


_settings: Optional[Settings] = None


def get_settings(reload: bool = False) -> Settings:
    """
    Process-wide settings, built on first use.

    Args:
        reload: Rebuild from the environment and user config
    """
    global _settings

    if _settings is None or reload:
        _settings = Settings.load_from_env()
    return _settings
