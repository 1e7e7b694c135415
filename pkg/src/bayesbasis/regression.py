"""Least-squares fitting and the residual statistics consumed by the evidence.

Fits go through an orthogonal decomposition of the design matrix (SVD), not
the normal equations, so ill-conditioned bases do not square their condition
number. The statistics carried on FitResult are exactly the quantities the
evidence formula needs: |y_hat|^2, |residuals|^2 and y . residuals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import DesignMatrix

__all__ = ["FitResult", "RankDeficiencyError", "fit"]


class RankDeficiencyError(ValueError):
    """Design matrix columns are linearly dependent."""

    def __init__(self, message: str, columns: list[str]):
        super().__init__(message)
        self.columns = columns


@dataclass(frozen=True, eq=False)
class FitResult:
    """Immutable least-squares fit summary.

    chi_y2 is |y_hat|^2, chi_eps2 is |residuals|^2, and y_dot_e is the
    literal inner product y . residuals. For an exact least-squares fit
    y_dot_e equals chi_eps2 up to rounding; both are kept because the
    evidence consumes y_dot_e while chi_eps2 is the conventional
    goodness-of-fit number.
    """

    a_hat: np.ndarray
    y_hat: np.ndarray
    residuals: np.ndarray
    chi_y2: float
    chi_eps2: float
    y_dot_e: float
    rank: int
    condition_estimate: float

    @property
    def n_data(self) -> int:
        return self.y_hat.shape[0]

    @property
    def n_params(self) -> int:
        return self.a_hat.shape[0]


def _offending_columns(vt_null: np.ndarray, labels: list[str]) -> list[str]:
    involved = (np.abs(vt_null) > 1e-8).any(axis=0)
    return [labels[j] for j in np.nonzero(involved)[0]]


def fit(design: DesignMatrix, y) -> FitResult:
    """Least-squares fit of the design matrix to the data vector.

    Args:
        design: N x l design matrix with N > l and full column rank.
        y: length-N data vector.

    Returns:
        FitResult with coefficients, predictions, residuals and the scalar
        statistics chi_y2, chi_eps2, y_dot_e, plus rank and condition
        diagnostics.

    Raises:
        ValueError: on shape mismatch or N <= l.
        RankDeficiencyError: when columns are linearly dependent; the message
            names the offending basis columns.
    """
    w = np.asarray(design.values, dtype=float)
    y = np.asarray(y, dtype=float)
    n, l = w.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if not np.isfinite(y).all():
        raise ValueError("y must be finite")
    if n <= l:
        raise ValueError(
            f"need more data points than basis functions: N={n}, l={l}"
        )

    u, s, vt = np.linalg.svd(w, full_matrices=False)
    tol = s[0] * n * np.finfo(float).eps if s.size else 0.0
    rank = int(np.count_nonzero(s > tol))
    if rank < l:
        cols = _offending_columns(vt[rank:], design.column_labels)
        raise RankDeficiencyError(
            f"design matrix is rank deficient (rank {rank} < {l}); "
            f"linearly dependent columns involve: {', '.join(cols)}",
            columns=cols,
        )

    a_hat = vt.T @ ((u.T @ y) / s)
    y_hat = w @ a_hat
    residuals = y - y_hat
    chi_y2 = float(y_hat @ y_hat)
    chi_eps2 = float(residuals @ residuals)
    y_dot_e = float(y @ residuals)
    y_norm2 = float(y @ y)
    if abs(y_dot_e - chi_eps2) > 1e-9 * y_norm2:
        # Orthogonality of y_hat and residuals failed beyond rounding; the
        # decomposition is unreliable for this input.
        warnings.warn(
            "projection diagnostic: y.residuals deviates from |residuals|^2 "
            f"by {abs(y_dot_e - chi_eps2):.3e} (|y|^2 = {y_norm2:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return FitResult(
        a_hat=a_hat,
        y_hat=y_hat,
        residuals=residuals,
        chi_y2=chi_y2,
        chi_eps2=chi_eps2,
        y_dot_e=y_dot_e,
        rank=rank,
        condition_estimate=float(s[0] / s[-1]),
    )
