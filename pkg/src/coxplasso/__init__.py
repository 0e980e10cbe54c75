"""
coxplasso - pliable lasso for the Cox proportional hazards model.

Main exports:
- PlassoClient: High-level API for fitting, cross-validating and applying models
- SurvivalDataset: Right-censored survival data with covariates and modifiers
- PathConfig: Lambda grid and cross-validation settings
"""

from .client import PlassoClient, FittedPlasso
from .data.dataset import SurvivalDataset
from .models.path import PathConfig
from .config import get_settings

__version__ = '0.1.0'

__all__ = ['PlassoClient', 'FittedPlasso', 'SurvivalDataset', 'PathConfig', 'get_settings']
