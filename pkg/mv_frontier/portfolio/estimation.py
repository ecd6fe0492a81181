"""
Moment estimation from historical returns.

Rows are periods, columns are assets. No imputation: a missing or
non-numeric cell is an ingestion error.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np
import pandas as pd

from mv_frontier.exceptions import (
    DimensionMismatch,
    EmptyInput,
    InsufficientObservations,
    InvalidParameter,
    NonNumericCell,
    RaggedRows,
    throw,
)
from mv_frontier.portfolio.market_model import MarketModel, default_labels
from mv_frontier.utils import as_matrix, logger


@dataclass(frozen=True)
class ReturnSeries:
    observations: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        obs = as_matrix(self.observations)
        if obs.ndim != 2:
            throw("Observations must be a T x n matrix", DimensionMismatch)
        object.__setattr__(self, "observations", obs)
        labels = self.labels if self.labels is not None else default_labels(obs.shape[1])
        if len(labels) != obs.shape[1]:
            throw(f"{len(labels)} labels given for {obs.shape[1]} columns", DimensionMismatch)
        object.__setattr__(self, "labels", tuple(str(label) for label in labels))
        if obs.shape[0] < 2:
            throw(f"Need at least 2 observations, got {obs.shape[0]}", InsufficientObservations)
        if not np.all(np.isfinite(obs)):
            throw("Observations contain non-finite values", InvalidParameter)

    @property
    def T(self) -> int:
        return self.observations.shape[0]

    @property
    def n(self) -> int:
        return self.observations.shape[1]


# ========= INGESTION =========
def ingest_csv(source: str | Path | TextIO, has_header: bool = False) -> ReturnSeries:
    """Read a rectangular CSV of simple returns into a ReturnSeries.

    Without a header, labels default to A1..An. The header row takes part in
    the width check like any other row. U+2212 minus signs are read as "-".
    """
    try:
        frame = pd.read_csv(
            source,
            header=None,
            index_col=False,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        throw(f"No data in {_describe(source)}", EmptyInput)
    except pd.errors.ParserError as e:
        throw(f"Rows of unequal length in {_describe(source)}: {e}", RaggedRows)
    except OSError as e:
        throw(f"Cannot read {_describe(source)}: {e}", InvalidParameter)

    labels = None
    if has_header and not frame.empty:
        labels = [str(c).strip() for c in frame.iloc[0]]
        frame = frame.iloc[1:].reset_index(drop=True)
    if frame.empty or frame.shape[1] == 0:
        throw(f"No data rows in {_describe(source)}", EmptyInput)

    # file line of the first data row (1-based)
    first_line = 2 if has_header else 1
    missing = frame.isna()
    if missing.to_numpy().any():
        row = int(np.nonzero(missing.any(axis=1).to_numpy())[0][0])
        throw(f"Row {row + first_line} has fewer than {frame.shape[1]} cells", RaggedRows, row=row + first_line)

    values = np.empty(frame.shape, dtype=np.float64)
    for j, column in enumerate(frame.columns):
        cells = frame[column].str.strip().str.replace("−", "-", regex=False)
        parsed = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        bad = np.nonzero(~np.isfinite(parsed))[0]
        if len(bad):
            i = int(bad[0])
            throw(
                f"Non-numeric cell {frame.iat[i, j]!r} at row {i + first_line}, column {j + 1}",
                NonNumericCell,
                row=i + first_line,
                col=j + 1,
            )
        values[:, j] = parsed

    series = ReturnSeries(observations=values, labels=labels)
    logger("estimation").debug(f"[ingest_csv] {_describe(source)}: T={series.T} n={series.n}")
    return series


def _describe(source) -> str:
    return str(source) if isinstance(source, str | Path) else "<stream>"


# ========= MOMENTS =========
def estimate_moments(series: ReturnSeries, ddof: int = 1, rf: float | None = None) -> MarketModel:
    """Sample mean and two-pass sample covariance (unvalidated model)."""
    if ddof not in (0, 1):
        throw(f"ddof must be 0 or 1, got {ddof!r}", InvalidParameter)
    if series.T < ddof + 1:
        throw(f"{series.T} observations cannot support ddof={ddof}", InsufficientObservations)

    obs = series.observations
    mu = obs.mean(axis=0)
    centered = obs - mu
    products = centered.T @ centered / (series.T - ddof)
    # mirror the upper triangle so Σ is bitwise symmetric
    sigma = np.triu(products) + np.triu(products, 1).T

    logger("estimation").debug(f"[estimate_moments] T={series.T} n={series.n} ddof={ddof}")
    return MarketModel(labels=series.labels, mu=mu, sigma=sigma, rf=rf)
