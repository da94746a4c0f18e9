"""Location/scale estimation and the standardized influence matrix.

Every statistic downstream of this module is a function of the matrix
Z with entries Z[t, j] = yhat[t] * xhat[t, j], where yhat and xhat are
the response and predictors standardized by location/scale estimates
computed once on the full sample. Two estimator modes are supported:
plain moments and median/MAD.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Normal-consistency factor for the MAD: 1/Phi^{-1}(3/4).
MAD_SCALE_FACTOR = 1.4826


class DegenerateColumnError(ValueError):
    """A column (or the response) has zero scale under the chosen estimator.

    ``column`` is the zero-based predictor column index, or None when the
    response itself is degenerate.
    """

    def __init__(self, column: int | None):
        self.column = column
        what = "response" if column is None else f"predictor column {column}"
        super().__init__(f"zero scale estimate for {what}; cannot standardize")


class EstimatorMode(Enum):
    SAMPLE = "sample"
    ROBUST = "robust"


@dataclass(frozen=True)
class Dataset:
    """A response vector and a dense predictor matrix, one row per observation."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be a vector with one entry per row of X")
        if X.shape[0] < 4:
            raise ValueError("need at least 4 observations")
        if X.shape[1] < 1:
            raise ValueError("need at least one predictor")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("data contains NaN or Inf")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class InfluenceMatrix:
    """Standardized influence matrix and the estimates that produced it.

    Z[t, j] = yhat[t] * (X[t, j] - mu_x[j]) / sigma_x[j], with
    yhat[t] = (y[t] - mu_y) / sigma_y. The mean of Z rows over an index
    set S equals the marginal-correlation estimate based on S (under the
    fixed full-sample standardization).
    """

    Z: np.ndarray
    yhat: np.ndarray
    mu_y: float
    sigma_y: float
    mu_x: np.ndarray
    sigma_x: np.ndarray
    mode: EstimatorMode

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def p(self) -> int:
        return self.Z.shape[1]


# ---------------------------------------------------------------------------
# location / scale
# ---------------------------------------------------------------------------


def median(v: np.ndarray) -> float:
    """Sample median; midpoint of the two central order statistics for even length."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("median of an empty vector")
    if not np.isfinite(v).all():
        raise ValueError("median requires finite values")
    return float(np.median(v))


def mad_scale(v: np.ndarray) -> float:
    """Median absolute deviation times 1.4826.

    The factor makes the estimate consistent for the standard deviation
    under normality. A constant vector yields 0; callers that need a
    positive scale must reject that themselves.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("mad_scale of an empty vector")
    if not np.isfinite(v).all():
        raise ValueError("mad_scale requires finite values")
    center = np.median(v)
    return MAD_SCALE_FACTOR * float(np.median(np.abs(v - center)))


def _location_scale(v: np.ndarray, mode: EstimatorMode) -> tuple[float, float]:
    if mode is EstimatorMode.ROBUST:
        return median(v), mad_scale(v)
    return float(np.mean(v)), float(np.std(v, ddof=1))


# ---------------------------------------------------------------------------
# standardization
# ---------------------------------------------------------------------------


def standardize(
    d: Dataset,
    mode: EstimatorMode = EstimatorMode.ROBUST,
    estimate_rows=None,
) -> InfluenceMatrix:
    """Build the influence matrix from raw data.

    Parameters
    ----------
    d : Dataset
    mode : EstimatorMode
        ROBUST uses median location and 1.4826*MAD scale; SAMPLE uses the
        mean and the (n-1)-denominator standard deviation.
    estimate_rows : index set, optional
        When given, location and scale are estimated from these rows only
        but the whole sample is standardized with them (used to re-anchor
        the checking step on an estimated clean set).

    Returns
    -------
    InfluenceMatrix

    Raises
    ------
    DegenerateColumnError
        If the response or any predictor column has zero scale.
    """
    if estimate_rows is None:
        ys, Xs = d.y, d.X
    else:
        rows = np.asarray(estimate_rows, dtype=np.intp)
        if rows.size < 2:
            raise ValueError("need at least two rows to estimate scale")
        ys, Xs = d.y[rows], d.X[rows]

    mu_y, sigma_y = _location_scale(ys, mode)
    if sigma_y <= 0.0:
        raise DegenerateColumnError(None)

    if mode is EstimatorMode.ROBUST:
        mu_x = np.median(Xs, axis=0)
        sigma_x = MAD_SCALE_FACTOR * np.median(np.abs(Xs - mu_x), axis=0)
    else:
        mu_x = np.mean(Xs, axis=0)
        sigma_x = np.std(Xs, axis=0, ddof=1)
    bad = np.flatnonzero(sigma_x <= 0.0)
    if bad.size:
        raise DegenerateColumnError(int(bad[0]))

    yhat = (d.y - mu_y) / sigma_y
    Z = yhat[:, None] * ((d.X - mu_x) / sigma_x)
    return InfluenceMatrix(
        Z=Z,
        yhat=yhat,
        mu_y=mu_y,
        sigma_y=sigma_y,
        mu_x=np.asarray(mu_x, dtype=np.float64),
        sigma_x=np.asarray(sigma_x, dtype=np.float64),
        mode=mode,
    )


def marginal_correlation(Z: InfluenceMatrix, S) -> np.ndarray:
    """Marginal-correlation estimate based on the observations in S.

    Component j is the mean of Z[t, j] over t in S. With S = all rows and
    sample-mode standardization this is the usual vector of sample
    correlations between the response and each predictor.
    """
    idx = np.asarray(S, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("marginal_correlation over an empty index set")
    if idx.min() < 0 or idx.max() >= Z.n:
        raise ValueError("index out of range")
    return Z.Z[idx].mean(axis=0)
