"""Asset-return data: CSV ingestion and a synthetic factor-model fallback."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from privopt.errors import DimensionError, ParseError
from privopt.rng import substream


@dataclass(frozen=True)
class ReturnsData:
    mean: np.ndarray
    covariance: np.ndarray
    n_weeks: int
    tickers: tuple[str, ...] = ()

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"covariance {cov.shape} does not match {mean.size} assets")
        if not np.allclose(cov, cov.T, atol=1e-8):
            raise DimensionError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", 0.5 * (cov + cov.T))

    @property
    def n_assets(self) -> int:
        return self.mean.size


def from_samples(R, tickers=()) -> ReturnsData:
    """Sample mean and (n-1)-normalized covariance of a weeks x assets array."""
    R = np.asarray(R, dtype=float)
    if R.ndim != 2:
        raise DimensionError("returns must be a weeks x assets table")
    if R.shape[0] < 2:
        raise DimensionError(f"need at least 2 weeks of returns, got {R.shape[0]}")
    cov = np.cov(R, rowvar=False, ddof=1).reshape(R.shape[1], R.shape[1])
    return ReturnsData(R.mean(axis=0), cov, R.shape[0], tuple(tickers))


def load_returns_csv(path) -> ReturnsData:
    """Read a weeks x tickers CSV with a header row of ticker names."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i} has {len(row)} cells, header has {len(header)}", row=i)
        vals = []
        for j, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {cell!r} at row {i}, column {j}",
                                 row=i, column=j) from None
            if not np.isfinite(v):
                raise ParseError(f"{path}: non-finite cell at row {i}, column {j}", row=i, column=j)
            vals.append(v)
        data.append(vals)
    return from_samples(np.array(data, dtype=float).reshape(len(data), len(header)), header)


def synthesize_returns(n_assets: int = 28, n_weeks: int = 1363, seed: int = 7, *,
                       n_factors: int = 3, factor_vol: float = 0.02, idio_vol: float = 0.03,
                       mean_low: float = 0.001, mean_high: float = 0.0058) -> ReturnsData:
    """Weekly returns from a linear factor model, roughly the scale of large-cap equities.

    With both volatilities zero every week equals the drift, so the sample
    covariance is exactly zero.
    """
    if n_assets < 1:
        raise ValueError("need at least one asset")
    if n_weeks < n_assets + 1:
        raise ValueError("need more weeks than assets")
    rng = substream(seed, 0)
    drift = rng.uniform(mean_low, mean_high, n_assets)
    loadings = rng.normal(1.0, 0.3, (n_assets, n_factors)) / np.sqrt(n_factors)
    f = rng.standard_normal((n_weeks, n_factors)) * factor_vol
    e = rng.standard_normal((n_weeks, n_assets)) * idio_vol
    R = drift + f @ loadings.T + e
    return from_samples(R, tuple(f"A{i:02d}" for i in range(n_assets)))
