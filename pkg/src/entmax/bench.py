"""Deterministic timing harness for the forward solvers and the jvp.

Inputs are Gaussian batches drawn from a named seeded generator (numpy
PCG64), so every run times the same work; only the clock readings vary.
Results are reported as median and 90th-percentile wall time plus derived
rows per second.
"""

from __future__ import annotations

import time

import numpy as np

from .bisect import entmax_bisect_batch
from .core import resolve_method, softmax_batch, sparsemax_batch
from .errors import ConfigurationError
from .exact15 import entmax15_exact_batch, entmax15_partial_batch
from .jacobian import jacobian_from_p, jvp

ALGORITHMS = ("auto", "softmax", "sort2", "exact15", "exact15-partial", "bisect")

_CORE_METHOD = {
    "softmax": "softmax",
    "sort2": "sparsemax-sort",
    "exact15": "exact15",
    "exact15-partial": "exact15",
    "bisect": "bisect",
}


def _forward(algorithm: str, alpha: float, iters: int):
    """Probability-matrix callable for one algorithm, or a config error."""
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}; choose one of {ALGORITHMS}")
    resolved = resolve_method(alpha, _CORE_METHOD.get(algorithm, "auto"))
    if algorithm == "exact15-partial":
        return "exact15-partial", lambda Z: entmax15_partial_batch(Z)[0]
    if resolved == "softmax":
        return "softmax", softmax_batch
    if resolved == "sparsemax-sort":
        return "sort2", lambda Z: sparsemax_batch(Z)[0]
    if resolved == "exact15":
        return "exact15", lambda Z: entmax15_exact_batch(Z)[0]
    return "bisect", lambda Z: entmax_bisect_batch(Z, alpha, iters)[0]


def _time_repeats(fn, repeats: int):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return times


def _stats(times, rows: int) -> dict:
    median = float(np.median(times))
    return {
        "median_s": median,
        "p90_s": float(np.percentile(times, 90)),
        "rows_per_second": rows / median if median > 0 else float("inf"),
        "times_s": [float(t) for t in times],
    }


def run_bench(
    algorithm: str,
    dim: int,
    batch: int = 1,
    alpha: float = 1.5,
    repeats: int = 9,
    warmup: int = 2,
    seed: int = 42,
    scale: float = 1.0,
    include_jvp: bool = False,
) -> dict:
    """Time one solver configuration and return a self-describing document.

    ``scale`` multiplies the Gaussian scores; large values give peaked rows
    with small supports, the regime where partial selection shines.
    """
    if int(dim) < 2:
        raise ConfigurationError(f"dim must be >= 2, got {dim!r}")
    if int(batch) < 1:
        raise ConfigurationError(f"batch must be >= 1, got {batch!r}")
    if int(repeats) < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats!r}")
    if int(warmup) < 0:
        raise ConfigurationError(f"warmup must be >= 0, got {warmup!r}")
    used, forward = _forward(algorithm, alpha, 50)
    rng = np.random.default_rng(int(seed))
    Z = rng.normal(0.0, 1.0, (int(batch), int(dim))) * float(scale)
    for _ in range(int(warmup)):
        forward(Z)
    times = _time_repeats(lambda: forward(Z), int(repeats))
    doc = {
        "config": {
            "algorithm": str(algorithm),
            "algorithm_used": used,
            "dim": int(dim),
            "batch": int(batch),
            "alpha": float(alpha),
            "repeats": int(repeats),
            "warmup": int(warmup),
            "seed": int(seed),
            "scale": float(scale),
            "generator": "numpy default_rng (PCG64)",
        },
        "forward": _stats(times, int(batch)),
    }
    if include_jvp:
        P = forward(Z)
        jacobians = [jacobian_from_p(row, alpha) for row in P]
        vec = rng.normal(0.0, 1.0, int(dim))

        def apply_all():
            for jac in jacobians:
                jvp(jac, vec)

        apply_all()
        doc["jvp"] = _stats(_time_repeats(apply_all, int(repeats)), int(batch))
    return doc
