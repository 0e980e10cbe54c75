"""Plain-text and CSV renderings of simulation metrics."""

from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import pandas as pd

from .comparison import METRIC_COLUMNS, SimMetrics
from ..utils.logging import get_logger

logger = get_logger(__name__)

FORMAT_TEXT = "txt"
FORMAT_CSV = "csv"

DECIMALS = 3


class TableFormatError(ValueError):
    """Raised for an unknown table format."""
    pass


def metrics_frame(metrics: Sequence[SimMetrics]) -> pd.DataFrame:
    """Metrics as a DataFrame with exactly the metric columns, floats rounded."""
    frame = pd.DataFrame([vars(m) for m in metrics], columns=list(METRIC_COLUMNS))
    floats = [c for c in METRIC_COLUMNS if c not in ("method", "reps")]
    frame[floats] = frame[floats].astype(float).round(DECIMALS)
    frame["reps"] = frame["reps"].astype(int)
    return frame


def emit_table(
    metrics: Sequence[SimMetrics],
    fmt: str = FORMAT_TEXT,
    failures: Optional[Dict[str, int]] = None,
) -> str:
    """
    Render metrics as an aligned text table or as CSV.

    Args:
        metrics: One SimMetrics per method
        fmt: 'txt' or 'csv'
        failures: Excluded replicate counts per method, appended as a note (text only)

    Returns:
        Rendered table; header only when metrics is empty
    """
    frame = metrics_frame(metrics)

    if fmt == FORMAT_CSV:
        return frame.to_csv(index=False, float_format=f"%.{DECIMALS}f", lineterminator="\n")

    if fmt != FORMAT_TEXT:
        raise TableFormatError(f"Unknown table format '{fmt}' (use '{FORMAT_TEXT}' or '{FORMAT_CSV}')")

    if frame.empty:
        text = "  ".join(METRIC_COLUMNS) + "\n"
    else:
        text = frame.to_string(index=False, float_format=lambda v: f"{v:.{DECIMALS}f}") + "\n"

    excluded = {m: c for m, c in (failures or {}).items() if c}
    if excluded:
        text += "excluded replicates: " + ", ".join(f"{m}={c}" for m, c in excluded.items()) + "\n"
    return text


def write_table(
    metrics: Sequence[SimMetrics],
    path: Union[str, Path],
    failures: Optional[Dict[str, int]] = None,
) -> Path:
    """Write the table; the format follows the file suffix (.csv or .txt)."""
    path = Path(path)
    fmt = FORMAT_CSV if path.suffix.lower() == ".csv" else FORMAT_TEXT
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_table(metrics, fmt, failures), encoding='utf-8')
    logger.info(f"Wrote {fmt} table for {len(metrics)} methods to {path}")
    return path
