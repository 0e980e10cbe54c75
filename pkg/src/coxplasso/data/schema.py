"""File-format conventions for survival CSV input and fitted-model documents."""

import math

# CSV ingestion columns
TIME_COLUMN = "time"
STATUS_COLUMN = "status"
WEIGHT_COLUMN = "weight"
COVARIATE_PREFIX = "x_"
MODIFIER_PREFIX = "z_"

REQUIRED_COLUMNS = (TIME_COLUMN, STATUS_COLUMN)

# Fitted-model JSON document
MODEL_SCHEMA_ID = "coxplasso.model"
MODEL_SCHEMA_VERSION = 1

# Path / CV JSON document
PATH_SCHEMA_ID = "coxplasso.path"
PATH_SCHEMA_VERSION = 1

# Top-level keys every model document carries
MODEL_DOCUMENT_KEYS = (
    "schema",
    "version",
    "engine",
    "penalty",
    "covariates",
    "modifiers",
    "scaling",
    "coefficients",
    "time_basis",
    "diagnostics",
)

# Stacked logistic problem export
STACKED_COLUMNS = ("time_id", "failure_time", "observation", "outcome")


def covariate_columns(columns) -> list:
    """Return the covariate column names (x_ prefix) in file order."""
    return [c for c in columns if c.startswith(COVARIATE_PREFIX)]


def modifier_columns(columns) -> list:
    """Return the modifier column names (z_ prefix) in file order."""
    return [c for c in columns if c.startswith(MODIFIER_PREFIX)]


def json_safe(value):
    """Replace NaN and infinities with None, recursively, for strict JSON output."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
