"""
Client API for fitting and applying pliable lasso Cox models.

Wraps data loading, standardization, path fitting and cross-validation
behind one object, plus the versioned model document.
"""

from .client import PlassoClient, FittedPlasso, FitContext, ClientError, SchemaMismatchError

__all__ = ['PlassoClient', 'FittedPlasso', 'FitContext', 'ClientError', 'SchemaMismatchError']
