"""Core types, baseline mappings, and the alpha-dispatching front door.

Every mapping here sends a real score vector z to a point on the probability
simplex.  For alpha > 1 the output has the thresholded form

    p_j = [(alpha - 1) z_j - tau]_+ ** (1 / (alpha - 1))

for a unique threshold tau, so solutions are reported together with tau and
the size of their support.  alpha = 1 recovers softmax (dense, no threshold)
and alpha = 2 recovers the Euclidean projection onto the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidInputError

METHODS = ("auto", "softmax", "sparsemax-sort", "exact15", "bisect")

# The thresholded form does not apply at alpha = 1; the softmax path reports
# this sentinel instead of a threshold.
SOFTMAX_TAU = math.nan


def as_scores(z) -> np.ndarray:
    """Validate a score vector: one-dimensional, finite, length >= 1."""
    try:
        arr = np.asarray(z, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"scores are not numeric: {exc}") from exc
    if arr.ndim != 1:
        raise InvalidInputError(f"scores must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError("scores must contain at least one entry")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("scores must be finite (no NaN or infinities)")
    return arr


def as_score_matrix(Z) -> np.ndarray:
    """Validate a batch of score vectors, one per row."""
    try:
        arr = np.asarray(Z, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"scores are not numeric: {exc}") from exc
    if arr.ndim != 2:
        raise InvalidInputError(f"score batch must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError("score batch must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("scores must be finite (no NaN or infinities)")
    return arr


def as_probabilities(p, sum_tol: float = 1e-6) -> np.ndarray:
    """Validate a probability vector: nonnegative, finite, summing to 1."""
    try:
        arr = np.asarray(p, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"probabilities are not numeric: {exc}") from exc
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInputError("probabilities must be a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("probabilities must be finite")
    if np.any(arr < 0.0):
        raise InvalidInputError("probabilities must be nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > sum_tol:
        raise InvalidInputError(f"probabilities must sum to 1, got {total!r}")
    return arr


def check_alpha(alpha) -> float:
    """Validate the family parameter.  Values below 1 are rejected, not extrapolated."""
    try:
        a = float(alpha)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"alpha must be a real number, got {alpha!r}") from exc
    if not math.isfinite(a) or a < 1.0:
        raise ConfigurationError(f"alpha must be a finite real >= 1, got {alpha!r}")
    return a


@dataclass(frozen=True)
class ThresholdedSolution:
    """A simplex point plus the threshold and support size that produced it.

    ``tau`` lives on the scaled-score axis: for alpha > 1 the entries satisfy
    p_j = [(alpha - 1) z_j - tau]_+ ** (1/(alpha-1)) up to solver tolerance.
    The softmax path has no threshold and reports ``tau = nan``.
    """

    p: np.ndarray
    tau: float
    support_size: int


def softmax_batch(Z) -> np.ndarray:
    Z = as_score_matrix(Z)
    shifted = Z - Z.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def softmax(z) -> np.ndarray:
    """Exponentiate-and-normalize mapping, computed with max subtraction.

    Strictly positive output; invariant under adding a constant to all scores.
    """
    return softmax_batch(as_scores(z)[None, :])[0]


def sparsemax_batch(Z):
    """Euclidean projection of each row onto the simplex.

    Returns ``(P, tau, support_size)`` arrays; ``p = [z - tau]_+`` per row.
    """
    Z = as_score_matrix(Z)
    n, d = Z.shape
    zs = -np.sort(-Z, axis=1)
    cumulative = np.cumsum(zs, axis=1)
    ks = np.arange(1, d + 1, dtype=np.float64)
    feasible = 1.0 + ks * zs > cumulative
    rho = np.count_nonzero(feasible, axis=1)
    tau = (cumulative[np.arange(n), rho - 1] - 1.0) / rho
    P = np.maximum(Z - tau[:, None], 0.0)
    return P, tau, np.count_nonzero(P > 0.0, axis=1)


def sparsemax(z) -> ThresholdedSolution:
    """Project a score vector onto the simplex (sort-based, exact)."""
    z = as_scores(z)
    P, tau, rho = sparsemax_batch(z[None, :])
    return ThresholdedSolution(P[0], float(tau[0]), int(rho[0]))


def support(p, tol: float = 0.0) -> np.ndarray:
    """Indices with probability strictly above ``tol``, in ascending order.

    Exact solvers produce true zeros, so the default tolerance is 0.
    """
    arr = as_probabilities(p)
    tol = float(tol)
    if not math.isfinite(tol) or tol < 0.0:
        raise InvalidInputError(f"tol must be a finite real >= 0, got {tol!r}")
    return np.flatnonzero(arr > tol)


def resolve_method(alpha, method: str = "auto") -> str:
    """Pick the concrete solver for ``alpha``, or reject an incompatible request."""
    a = check_alpha(alpha)
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}; choose one of {METHODS}")
    if method == "auto":
        if a == 1.0:
            return "softmax"
        if a == 2.0:
            return "sparsemax-sort"
        if a == 1.5:
            return "exact15"
        return "bisect"
    if method == "softmax" and a != 1.0:
        raise ConfigurationError("method 'softmax' applies only to alpha = 1")
    if method == "exact15" and a != 1.5:
        raise ConfigurationError("method 'exact15' applies only to alpha = 1.5")
    if method == "sparsemax-sort" and a != 2.0:
        raise ConfigurationError("method 'sparsemax-sort' applies only to alpha = 2")
    if method == "bisect" and a <= 1.0:
        raise ConfigurationError("method 'bisect' requires alpha > 1")
    return method


def entmax(z, alpha, method: str = "auto") -> ThresholdedSolution:
    """Map scores to a sparse probability vector for any alpha >= 1.

    ``method='auto'`` picks the best solver: softmax at alpha = 1, the exact
    sort-based solvers at alpha in {1.5, 2}, bisection otherwise.  A method
    incompatible with ``alpha`` raises ``ConfigurationError``.
    """
    z = as_scores(z)
    resolved = resolve_method(alpha, method)
    if resolved == "softmax":
        p = softmax_batch(z[None, :])[0]
        return ThresholdedSolution(p, SOFTMAX_TAU, int(p.size))
    if resolved == "sparsemax-sort":
        return sparsemax(z)
    # solver modules import this one, so pull them in lazily
    if resolved == "exact15":
        from .exact15 import entmax15_exact

        return entmax15_exact(z)
    from .bisect import entmax_bisect

    return entmax_bisect(z, alpha)
