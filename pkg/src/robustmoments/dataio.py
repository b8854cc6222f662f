"""CSV ingestion for return/sales series and price panels, plus result JSON.

Formats (comma-separated, UTF-8, '.' decimals):

* series file: one numeric column, optional single header row;
* price panel: header ``date,TICKER,...``; one row per date with positive
  prices (tickers become columns, dates stay strings and are only assumed
  ordered);
* result JSON: ``{"problem": {...}, "delta": .., "bound": .., "classical": ..,
  "method": .., "runtime_ms": ..}``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import EmpiricalSample
from .errors import DomainError


@dataclass(frozen=True)
class PricePanel:
    tickers: tuple
    dates: tuple
    prices: np.ndarray  # shape (n_tickers, n_dates)

    def __post_init__(self):
        if self.prices.shape != (len(self.tickers), len(self.dates)):
            raise DomainError("price matrix shape does not match tickers/dates")
        if not (self.prices > 0.0).all():
            raise DomainError("prices must be positive")


def _parse_cell(text: str, path, row_number: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"{path}: non-numeric value {text!r} at row {row_number}") from None


def load_series_csv(path) -> EmpiricalSample:
    """Load a one-column numeric series (optional header) as a sorted sample."""
    path = Path(path)
    if not path.exists():
        raise DomainError(f"no such file: {path}")
    values = []
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row and row[0].strip()]
    if rows:
        first_num, first_row = rows[0]
        try:
            float(first_row[0])
        except ValueError:
            rows = rows[1:]  # header row
    for num, row in rows:
        values.append(_parse_cell(row[0].strip(), path, num))
    if not values:
        raise DomainError(f"{path}: no numeric values")
    return EmpiricalSample(values)


def save_series_csv(sample: EmpiricalSample, path, header: str | None = None) -> None:
    """Write a sample one value per line with 17 significant digits
    (round-trips bit-exactly through load_series_csv)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        for v in sample.points:
            fh.write(f"{v:.17g}\n")


def load_price_panel_csv(path) -> PricePanel:
    """Load a date-by-ticker price panel (see module docstring for layout)."""
    path = Path(path)
    if not path.exists():
        raise DomainError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise DomainError(f"{path}: a panel needs a header and at least one data row")
    header = [cell.strip() for cell in rows[0]]
    tickers = tuple(header[1:])
    if not tickers:
        raise DomainError(f"{path}: no ticker columns")
    dates = []
    prices = []
    for num, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DomainError(f"{path}: row {num} has {len(row)} cells, expected {len(header)}")
        dates.append(row[0].strip())
        prices.append([_parse_cell(cell.strip(), path, num) for cell in row[1:]])
    matrix = np.asarray(prices, dtype=float).T  # (ticker, date)
    if not (matrix > 0.0).all():
        t_idx, d_idx = np.argwhere(matrix <= 0.0)[0]
        raise DomainError(f"{path}: nonpositive price for {tickers[t_idx]} "
                          f"on {dates[d_idx]}")
    return PricePanel(tickers=tickers, dates=tuple(dates), prices=matrix)


def prices_to_portfolio_returns(panel: PricePanel, scale: float = 100.0,
                                rebalance: bool = True) -> EmpiricalSample:
    """Equal-dollar-weight portfolio returns between consecutive dates.

    With `rebalance` (the default, and the convention that reproduces the
    shipped fixtures) the portfolio is reweighted to equal dollars every
    period, so each return is the mean of the per-ticker simple returns.
    Without it the basket is bought once and held, with weights drifting.
    """
    if len(panel.dates) < 2:
        raise DomainError("need at least two dates to form returns")
    p = panel.prices
    if rebalance:
        rets = scale * np.mean(p[:, 1:] / p[:, :-1] - 1.0, axis=0)
    else:
        value = np.mean(p / p[:, :1], axis=0)  # unit wealth split equally at date 0
        rets = scale * (value[1:] / value[:-1] - 1.0)
    return EmpiricalSample(rets)


def result_to_json(problem_fields: dict, delta: float, bound: float,
                   classical: float, method: str, runtime_ms: float) -> str:
    """Serialize one bound computation in the documented schema."""
    payload = {
        "problem": problem_fields,
        "delta": delta,
        "bound": bound,
        "classical": classical,
        "method": method,
        "runtime_ms": runtime_ms,
    }
    return json.dumps(payload, sort_keys=True)
