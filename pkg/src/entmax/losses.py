"""Entropy family, mapping losses, their derivatives, and margin checks.

The entropy is Shannon's at alpha = 1 and (sum_j p_j - p_j**alpha) /
(alpha (alpha - 1)) above; the loss of a prediction z against target y is

    L(y, z) = (p* - e_y)^T z + H(p*),   p* = entmax(z, alpha),

zero exactly when p* = e_y, which for alpha > 1 happens once the true score
beats every other by the margin 1/(alpha - 1).  Soft targets are supported
by replacing e_y with any simplex point (the entropy of the target is then
subtracted as well).  The gradient is p* - e_y and the Hessian is the
Jacobian of the mapping itself.
"""

from __future__ import annotations

import math

import numpy as np

from .core import as_probabilities, as_scores, check_alpha, entmax
from .errors import ConfigurationError, InvalidInputError
from .jacobian import EntmaxJacobian, jacobian_from_p

# analytically the loss is nonnegative; floating-point residue down to this
# far below zero is clamped to exactly 0
NEGATIVE_LOSS_TOL = 1e-12


def tsallis_entropy(p, alpha) -> float:
    """Entropy of the family at ``alpha`` (natural-log Shannon at alpha = 1)."""
    arr = as_probabilities(p)
    a = check_alpha(alpha)
    if a == 1.0:
        positive = arr[arr > 0.0]
        return float(-(positive * np.log(positive)).sum())
    return float((arr - arr**a).sum() / (a * (a - 1.0)))


def _entropy_rows(P, alpha):
    """Row-wise entropy for alpha > 1; ``alpha`` scalar or one value per row."""
    a = np.asarray(alpha, dtype=np.float64)
    a_col = a[:, None] if a.ndim == 1 else a
    return (P - P**a_col).sum(axis=1) / (a * (a - 1.0))


def _target_vector(y, d: int):
    """Normalize a target: class index -> one-hot; otherwise a simplex point."""
    if isinstance(y, (bool, np.bool_)):
        raise InvalidInputError("target must be a class index or a probability vector")
    if isinstance(y, (int, np.integer)):
        idx = int(y)
        if not 0 <= idx < d:
            raise InvalidInputError(f"class index {idx} out of range for {d} classes")
        one_hot = np.zeros(d)
        one_hot[idx] = 1.0
        return one_hot, True
    arr = as_probabilities(y)
    if arr.size != d:
        raise InvalidInputError(f"target of length {arr.size} does not match {d} classes")
    return arr, False


def entmax_loss(z, y, alpha) -> float:
    """Loss of scores ``z`` against target ``y``; nonnegative, zero iff p* = y."""
    scores = as_scores(z)
    a = check_alpha(alpha)
    target, one_hot = _target_vector(y, scores.size)
    p_star = entmax(scores, a).p
    value = float(scores @ (p_star - target)) + tsallis_entropy(p_star, a)
    if not one_hot:
        value -= tsallis_entropy(target, a)
    if -NEGATIVE_LOSS_TOL <= value < 0.0:
        value = 0.0
    return value


def entmax_loss_grad(z, y, alpha) -> np.ndarray:
    """Gradient of the loss with respect to the scores: p* - y."""
    scores = as_scores(z)
    a = check_alpha(alpha)
    target, _ = _target_vector(y, scores.size)
    return entmax(scores, a).p - target


def loss_hessian(z, y, alpha) -> EntmaxJacobian:
    """Hessian of the loss, which equals the Jacobian of the mapping at p*."""
    scores = as_scores(z)
    a = check_alpha(alpha)
    _target_vector(y, scores.size)
    return jacobian_from_p(entmax(scores, a).p, a)


def margin_satisfied(z, y, alpha) -> bool:
    """True iff the target score beats all others by at least 1/(alpha - 1)."""
    scores = as_scores(z)
    try:
        a = float(alpha)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"alpha must be a real number, got {alpha!r}") from exc
    if not math.isfinite(a) or a <= 1.0:
        raise ConfigurationError("the separation margin 1/(alpha - 1) exists only for alpha > 1")
    idx = int(y)
    if not 0 <= idx < scores.size:
        raise InvalidInputError(f"class index {idx} out of range for {scores.size} classes")
    others = np.delete(scores, idx)
    if others.size == 0:
        return True
    return bool(scores[idx] >= float(others.max()) + 1.0 / (a - 1.0))


def _loss_with_scaled_regularizer(z, y, alpha, t: float) -> float:
    """Loss with the entropy term scaled by t > 0; the mapping becomes entmax(z/t).

    Internal hook used to exercise the temperature-scaling identity
    L_{t}(z) = t * L(z / t).
    """
    scores = as_scores(z)
    a = check_alpha(alpha)
    if not (math.isfinite(t) and t > 0.0):
        raise ConfigurationError(f"temperature must be positive, got {t!r}")
    target, one_hot = _target_vector(y, scores.size)
    p_star = entmax(scores / t, a).p
    value = float(scores @ (p_star - target)) + t * tsallis_entropy(p_star, a)
    if not one_hot:
        value -= t * tsallis_entropy(target, a)
    return value
