"""Independent reference implementations used to cross-check the solvers.

These deliberately avoid the production code paths: the simplex projection
enumerates every candidate support instead of sorting, and the alpha = 1.5
threshold is recovered by plain high-precision scalar bisection on the mass
equation sum_j [z_j/2 - tau]_+ ** 2 = 1 rather than by the candidate scan.
Finite-difference helpers for derivative checks live here too.
"""

from __future__ import annotations

import math

import numpy as np

from .core import as_score_matrix, as_scores
from .errors import ResourceError

BRUTE_FORCE_DIM_CAP = 16


def _support_masks(d: int) -> np.ndarray:
    codes = np.arange(1, 2**d, dtype=np.int64)
    return ((codes[:, None] >> np.arange(d)) & 1).astype(np.float64)


def sparsemax_bruteforce_batch(Z, chunk: int = 1024) -> np.ndarray:
    """Simplex projection by trying all 2^d - 1 supports and keeping the best.

    For each candidate support S the projection is z_S - (sum z_S - 1)/|S|;
    the feasible candidate minimizing the squared distance to z is the
    projection.  Only intended for small d.
    """
    Z = as_score_matrix(Z)
    n, d = Z.shape
    if d > BRUTE_FORCE_DIM_CAP:
        raise ResourceError(f"brute-force projection supports d <= {BRUTE_FORCE_DIM_CAP}, got {d}")
    masks = _support_masks(d)
    sizes = masks.sum(axis=1)
    out = np.empty_like(Z)
    for start in range(0, n, chunk):
        block = Z[start : start + chunk]
        sums = block @ masks.T
        shift = (sums - 1.0) / sizes
        candidates = masks[None, :, :] * (block[:, None, :] - shift[:, :, None])
        feasible = (candidates >= -1e-12).all(axis=2)
        distance = ((candidates - block[:, None, :]) ** 2).sum(axis=2)
        distance[~feasible] = np.inf
        best = distance.argmin(axis=1)
        rows = np.arange(block.shape[0])
        out[start : start + chunk] = np.maximum(candidates[rows, best], 0.0)
    return out


def sparsemax_bruteforce(z) -> np.ndarray:
    return sparsemax_bruteforce_batch(as_scores(z)[None, :])[0]


def entmax15_mass_bisection_batch(Z, iters: int = 90):
    """Threshold of the alpha = 1.5 mapping by scalar bisection on the mass.

    The mass sum_j [x_j - tau]_+ ** 2 (x = z/2) is continuous and strictly
    decreasing where positive, and equals 1 exactly at the solution
    threshold; 90 halvings of the bracket [max(x) - 1, max(x) - sqrt(1/d)]
    (width < 1) land within one ulp of the root.  Returns ``(P, tau)``.
    """
    Z = as_score_matrix(Z)
    n, d = Z.shape
    X = 0.5 * Z
    top = X.max(axis=1)
    lo = top - 1.0
    hi = top - math.sqrt(1.0 / d)
    buf = np.empty_like(X)
    for _ in range(int(iters)):
        mid = 0.5 * (lo + hi)
        np.subtract(X, mid[:, None], out=buf)
        np.maximum(buf, 0.0, out=buf)
        np.square(buf, out=buf)
        mass = buf.sum(axis=1)
        overshoot = mass >= 1.0
        lo = np.where(overshoot, mid, lo)
        hi = np.where(overshoot, hi, mid)
    tau = 0.5 * (lo + hi)
    P = np.maximum(X - tau[:, None], 0.0)
    np.square(P, out=P)
    P /= P.sum(axis=1, keepdims=True)
    return P, tau


def entmax15_mass_bisection(z, iters: int = 90):
    P, tau = entmax15_mass_bisection_batch(as_scores(z)[None, :], iters)
    return P[0], float(tau[0])


def central_difference_jacobian(batch_map, z, step: float = 1e-4) -> np.ndarray:
    """J[i, j] = d map_i / d z_j by central differences.

    ``batch_map`` must map an (m, d) batch of score rows to (m, d) outputs.
    """
    z = as_scores(z)
    d = z.size
    eye = np.eye(d)
    plus = batch_map(z[None, :] + step * eye)
    minus = batch_map(z[None, :] - step * eye)
    return (plus - minus).T / (2.0 * step)


def central_difference_gradient(fn, z, step: float = 1e-4) -> np.ndarray:
    """g[j] = d fn / d z_j by central differences for scalar-valued fn."""
    z = as_scores(z)
    grad = np.empty_like(z)
    for j in range(z.size):
        bump = np.zeros_like(z)
        bump[j] = step
        grad[j] = (fn(z + bump) - fn(z - bump)) / (2.0 * step)
    return grad
