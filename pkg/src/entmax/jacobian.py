"""Backward-pass operators for the mapping family.

At a solution p the Jacobian of the mapping has the factored form

    J = diag(s) - s s^T / ||s||_1,   s_i = p_i ** (2 - alpha) on the support,

and s_i = 0 off it, so J is symmetric, has zero row sums, and vanishes on
every coordinate outside the support.  Storing s alone lets products J v run
without materializing the d x d matrix.  The same structure covers any
separable strongly convex regularizer via s_i = 1 / g''(p_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_probabilities, check_alpha
from .errors import InvalidInputError, ResourceError

DENSE_DIM_CAP = 4096


@dataclass(frozen=True)
class EntmaxJacobian:
    """Factored Jacobian diag(s) - s s^T / ||s||_1, stored through s."""

    s: np.ndarray
    s_sum: float


def jacobian_from_p(p_star, alpha) -> EntmaxJacobian:
    """Jacobian of the mapping at a solution, computed from p alone.

    s_i = p_i ** (2 - alpha) on the support: the indicator of the support at
    alpha = 2, p itself at alpha = 1.  Fractional alpha goes through
    exp((2 - alpha) * log p), safe because support entries are positive.
    """
    p = as_probabilities(p_star)
    a = check_alpha(alpha)
    positive = p > 0.0
    s = np.zeros_like(p)
    if a == 1.0:
        s[positive] = p[positive]
    elif a == 2.0:
        s[positive] = 1.0
    else:
        s[positive] = np.exp((2.0 - a) * np.log(p[positive]))
    return EntmaxJacobian(s, float(s.sum()))


def jvp(jac: EntmaxJacobian, v) -> np.ndarray:
    """Apply the factored Jacobian to a vector: s*v - s * (s.v)/||s||_1."""
    try:
        vec = np.asarray(v, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"vector is not numeric: {exc}") from exc
    if vec.ndim != 1 or vec.shape[0] != jac.s.shape[0]:
        raise InvalidInputError(
            f"vector of shape {vec.shape} does not match Jacobian dimension {jac.s.shape[0]}"
        )
    s = jac.s
    return s * vec - s * (float(s @ vec) / jac.s_sum)


def dense_jacobian(jac: EntmaxJacobian, max_dim: int = DENSE_DIM_CAP) -> np.ndarray:
    """Materialize diag(s) - s s^T / ||s||_1; symmetric by construction."""
    d = jac.s.shape[0]
    if d > max_dim:
        raise ResourceError(f"dense Jacobian of dimension {d} exceeds the cap of {max_dim}")
    s = jac.s
    return np.diag(s) - np.outer(s, s) / jac.s_sum


def generalized_jacobian(p_star, g_second) -> EntmaxJacobian:
    """Factored Jacobian for a separable regularizer with curvature g''.

    ``g_second`` is evaluated at each support probability and must be finite
    and strictly positive there; s_i = 1 / g''(p_i) on the support, 0 off it.
    With g''(t) = t ** (alpha - 2) this reproduces ``jacobian_from_p``.
    """
    p = as_probabilities(p_star)
    positive = p > 0.0
    curvature = np.asarray([float(g_second(float(t))) for t in p[positive]])
    if not np.all(np.isfinite(curvature)) or np.any(curvature <= 0.0):
        raise InvalidInputError("g'' must be finite and strictly positive on the support")
    s = np.zeros_like(p)
    s[positive] = 1.0 / curvature
    return EntmaxJacobian(s, float(s.sum()))
