"""Exact sort-based solver for alpha = 1.5, plus a partial-sort variant.

At alpha = 1.5 the solution is p = [z/2 - tau]_+ ** 2 for a unique tau.  On
the halved scores x sorted in descending order, each support size rho yields
one closed-form candidate

    tau(rho) = M(rho) - sqrt((1 - S(rho)) / rho)

where M is the mean and S the sum of squared deviations of the top rho
entries (tau(rho) = +inf when S(rho) > 1).  A candidate is the solution
exactly when it falls inside the window [x_[rho+1], x_[rho]], with
x_[d+1] = -inf; every admissible rho yields the same threshold, so the scan
returns the first hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ThresholdedSolution, as_score_matrix, as_scores
from .errors import ConfigurationError


@dataclass(frozen=True)
class TauCandidate:
    """Threshold candidate for one support size over the sorted halved scores."""

    rho: int
    mean: float
    sq_dev: float
    tau: float


def tau_candidates(z) -> list[TauCandidate]:
    """Emit the threshold candidate for every support size rho = 1..d.

    ``sq_dev`` is accumulated with Welford's running-mean recurrence, which
    keeps it accurate (and nonnegative) for large rho and nearly equal
    scores.  The finite-tau candidates form a prefix and are non-decreasing
    in rho.
    """
    halved = np.sort(as_scores(z))[::-1] / 2.0
    out: list[TauCandidate] = []
    mean = 0.0
    sq_dev = 0.0
    for rho, value in enumerate(halved.tolist(), start=1):
        delta = value - mean
        mean += delta / rho
        sq_dev += delta * (value - mean)
        if sq_dev <= 1.0:
            tau = mean - math.sqrt((1.0 - sq_dev) / rho)
        else:
            tau = math.inf
        out.append(TauCandidate(rho, mean, sq_dev, tau))
    return out


def _scan_tau(xs, boundary):
    """First admissible threshold per row of sorted halved scores.

    ``xs`` holds the k largest halved scores in descending order and
    ``boundary`` the (k+1)-th largest (or -inf when k = d), so the window
    test is exact even on a partial prefix.  Returns ``(tau, rho, found)``.
    """
    n, k = xs.shape
    rho = np.arange(1, k + 1, dtype=np.float64)
    mean = np.cumsum(xs, axis=1) / rho
    # shifting by the row maximum keeps the deviation sums free of cancellation
    shifted = xs - xs[:, :1]
    first_moment = np.cumsum(shifted, axis=1)
    second_moment = np.cumsum(shifted * shifted, axis=1)
    sq_dev = second_moment - first_moment * first_moment / rho
    disc = (1.0 - sq_dev) / rho
    feasible = disc >= 0.0
    tau = np.where(feasible, mean - np.sqrt(np.where(feasible, disc, 0.0)), np.inf)
    lower = np.concatenate([xs[:, 1:], boundary[:, None]], axis=1)
    admissible = feasible & (tau >= lower) & (tau <= xs)
    found = admissible.any(axis=1)
    first = np.argmax(admissible, axis=1)
    return tau[np.arange(n), first], first + 1, found


def _finish(X, tau):
    P = np.maximum(X - tau[:, None], 0.0)
    np.square(P, out=P)
    return P, tau, np.count_nonzero(P > 0.0, axis=1)


def entmax15_exact_batch(Z):
    """Solve every row exactly via a full descending sort.

    Returns ``(P, tau, support_size)``; rows sum to 1 within 1e-12.
    """
    Z = as_score_matrix(Z)
    X = 0.5 * Z
    xs = -np.sort(-X, axis=1)
    boundary = np.full(X.shape[0], -np.inf)
    tau, _, found = _scan_tau(xs, boundary)
    if not found.all():
        raise RuntimeError("no admissible support size found; impossible for finite scores")
    return _finish(X, tau)


def entmax15_exact(z) -> ThresholdedSolution:
    """Exact alpha = 1.5 mapping of a single score vector."""
    z = as_scores(z)
    P, tau, rho = entmax15_exact_batch(z[None, :])
    return ThresholdedSolution(P[0], float(tau[0]), int(rho[0]))


def entmax15_partial_batch(Z, initial_k: int = 32):
    """Exact solve that only selects and sorts the top-k scores per row.

    Rows whose admissible support size exceeds the current prefix double k
    and retry (capped at d).  Output matches the full-sort solver bitwise,
    up to tie resolutions among equal scores.
    """
    Z = as_score_matrix(Z)
    k0 = int(initial_k)
    if k0 < 1:
        raise ConfigurationError(f"initial_k must be >= 1, got {initial_k!r}")
    n, d = Z.shape
    X = 0.5 * Z
    tau_out = np.empty(n)
    pending = np.arange(n)
    Xp = X
    k = min(k0, d)
    while True:
        if k >= d:
            xs = -np.sort(-Xp, axis=1)
            boundary = np.full(Xp.shape[0], -np.inf)
        else:
            split = np.partition(Xp, d - k - 1, axis=1)
            boundary = split[:, d - k - 1]
            xs = -np.sort(-split[:, d - k:], axis=1)
        tau, _, found = _scan_tau(xs, boundary)
        tau_out[pending[found]] = tau[found]
        if found.all():
            break
        if k >= d:
            raise RuntimeError("no admissible support size found; impossible for finite scores")
        pending = pending[~found]
        Xp = Xp[~found]
        k = min(2 * k, d)
    return _finish(X, tau_out)


def entmax15_partial(z, initial_k: int = 32) -> ThresholdedSolution:
    """Exact alpha = 1.5 mapping via top-k selection with escalation."""
    z = as_scores(z)
    P, tau, rho = entmax15_partial_batch(z[None, :], initial_k)
    return ThresholdedSolution(P[0], float(tau[0]), int(rho[0]))
