"""Trial metrics: reconstruction NMSE, gated frequency MSE, model-order probability.

Exact-zero errors map to a -300 dB sentinel so tables stay finite.  The
frequency metric is gated: it exists only when the estimated model order is
correct and every optimally-matched wrapped error is at most pi/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .circular import wrap_angle

EXACT_DB = -300.0


def wrapped_distance(a, b):
    """|a - b| on the circle, in [0, pi]."""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


@dataclass(frozen=True)
class GatedFreqError:
    """Frequency error of one gated-in trial."""

    db: float
    sq_error: float          # sum of squared wrapped errors (linear)
    assignment: np.ndarray   # truth index k -> estimate index assignment[k]


@dataclass(frozen=True)
class TrialOutcome:
    nmse_db: float
    order_correct: bool
    freq_mse_db: float | None = None
    matched_perm: np.ndarray | None = None

    def __post_init__(self):
        if self.freq_mse_db is not None and not self.order_correct:
            raise ValueError("freq_mse_db requires a correct model order")


def nmse_ratio(Z_hat: np.ndarray, Z_true: np.ndarray) -> float:
    """Linear NMSE ||Z_hat - Z_true||_F^2 / ||Z_true||_F^2."""
    Z_hat = np.asarray(Z_hat)
    Z_true = np.asarray(Z_true)
    if Z_hat.shape != Z_true.shape:
        raise ValueError(f"shape mismatch: {Z_hat.shape} vs {Z_true.shape}")
    denom = float(np.sum(np.abs(Z_true) ** 2))
    if denom == 0.0:
        raise ValueError("true signal is identically zero; NMSE undefined")
    return float(np.sum(np.abs(Z_hat - Z_true) ** 2)) / denom


def nmse_signal(Z_hat: np.ndarray, Z_true: np.ndarray) -> float:
    """Reconstruction NMSE in dB (exact reconstruction reports the -300 dB sentinel)."""
    ratio = nmse_ratio(Z_hat, Z_true)
    return EXACT_DB if ratio == 0.0 else 10.0 * np.log10(ratio)


def gated_freq_mse(omega_hat, omega_true, N: int) -> GatedFreqError | None:
    """Optimally matched frequency MSE, or None when the trial is gated out.

    Gate: the estimate count equals the truth count and every matched wrapped
    error is <= pi/N.  The value is 10*log10 of the sum of squared wrapped
    errors under the minimum-cost (Hungarian) assignment.
    """
    hat = np.atleast_1d(np.asarray(omega_hat, dtype=float))
    true = np.atleast_1d(np.asarray(omega_true, dtype=float))
    if hat.shape != true.shape:
        return None
    if true.size == 0:
        return GatedFreqError(db=EXACT_DB, sq_error=0.0, assignment=np.array([], dtype=int))
    cost = wrapped_distance(true[:, None], hat[None, :])
    rows, cols = linear_sum_assignment(cost)
    errors = cost[rows, cols]
    if np.any(errors > np.pi / N):
        return None
    sq = float(np.sum(errors**2))
    db = EXACT_DB if sq == 0.0 else 10.0 * float(np.log10(sq))
    return GatedFreqError(db=db, sq_error=sq, assignment=cols)


def model_order_prob(outcomes) -> float:
    """Fraction of trials with the correct model order."""
    flags = [o.order_correct if isinstance(o, TrialOutcome) else bool(o) for o in outcomes]
    if not flags:
        raise ValueError("model_order_prob needs at least one trial")
    return float(np.mean(flags))
