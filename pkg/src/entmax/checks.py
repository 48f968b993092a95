"""Seeded invariant suites behind the ``check`` command.

Six suites cover the library surface: simplex membership and limits,
shift/permutation equivariance, derivative agreement with central finite
differences, solver-versus-oracle agreement, the separation-margin property
of the loss, and beam-search certificate soundness.  Every suite draws from
a generator seeded off the single run seed, so results are reproducible and
a failure can be replayed from its serialized counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bisect import entmax_bisect_batch
from .core import entmax, resolve_method, softmax, sparsemax_batch, softmax_batch
from .decode import beam_search, exhaustive_enumerate, random_table_model
from .exact15 import entmax15_exact_batch, tau_candidates
from .jacobian import dense_jacobian, jacobian_from_p
from .losses import _entropy_rows, entmax_loss, margin_satisfied
from .reference import entmax15_mass_bisection_batch, sparsemax_bruteforce_batch

FD_STEP = 1e-4


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    max_error: float
    counterexample: dict | None

    @property
    def passed(self) -> bool:
        return self.failures == 0


class _Recorder:
    def __init__(self, name: str):
        self.name = name
        self.trials = 0
        self.failures = 0
        self.max_error = 0.0
        self.counterexample: dict | None = None

    def record(self, error: float, ok: bool, payload: dict, count: int = 1) -> None:
        self.trials += count
        if np.isfinite(error):
            self.max_error = max(self.max_error, float(error))
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = payload

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.trials, self.failures, self.max_error, self.counterexample)


def _entropy_rows_any(P, alpha: float):
    if alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0.0, P * np.log(np.where(P > 0.0, P, 1.0)), 0.0)
        return -terms.sum(axis=1)
    return _entropy_rows(P, alpha)


def _forward_batch(alpha: float):
    resolved = resolve_method(alpha)
    if resolved == "softmax":
        return softmax_batch
    if resolved == "sparsemax-sort":
        return lambda B: sparsemax_batch(B)[0]
    if resolved == "exact15":
        return lambda B: entmax15_exact_batch(B)[0]
    return lambda B: entmax_bisect_batch(B, alpha)[0]


def _suite_simplex(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("simplex")
    for _ in range(trials):
        d = int(rng.choice(dims))
        a = float(rng.choice(alphas))
        z = rng.normal(0.0, 3.0, d)
        sol = entmax(z, a)
        p = sol.p
        sum_tol = 1e-8 if resolve_method(a) == "bisect" else 1e-12
        negativity = max(0.0, float(-p.min()))
        sum_err = abs(float(p.sum()) - 1.0)
        order = np.argsort(-z, kind="stable")
        monotonicity = float(np.diff(p[order]).max(initial=0.0))
        limit_err = 0.0
        limit_ok = True
        if a == 1.0:
            limit_err = float(np.abs(p - softmax(z)).max())
            limit_ok = limit_err == 0.0
        elif a == 2.0 and d <= 8:
            limit_err = float(np.abs(p - sparsemax_bruteforce_batch(z[None, :])[0]).max())
            limit_ok = limit_err <= 1e-10
        ok = negativity == 0.0 and sum_err <= sum_tol and monotonicity <= 1e-12 and limit_ok
        rec.record(
            max(negativity, sum_err, monotonicity, limit_err),
            ok,
            {"suite": "simplex", "z": z.tolist(), "alpha": a},
        )
    # saturation at t >= 1/(alpha-1) in two dimensions, exact ones included
    for a in (1.5, 2.0):
        threshold = 1.0 / (a - 1.0)
        for t in np.linspace(threshold, 3.0, 9):
            top = entmax(np.array([float(t), 0.0]), a).p[0]
            rec.record(abs(top - 1.0), top == 1.0, {"suite": "saturation", "t": float(t), "alpha": a})
        below = entmax(np.array([threshold - 0.05, 0.0]), a).p[0]
        rec.record(0.0, below < 1.0, {"suite": "saturation-below", "alpha": a})
    return rec.result()


def _suite_equivariance(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("equivariance")
    for _ in range(trials):
        d = int(rng.choice(dims))
        a = float(rng.choice(alphas))
        z = rng.normal(0.0, 3.0, d)
        p = entmax(z, a).p
        c = float(rng.uniform(-10.0, 10.0))
        shift_err = float(np.abs(entmax(z + c, a).p - p).max())
        perm = rng.permutation(d)
        perm_err = float(np.abs(entmax(z[perm], a).p - p[perm]).max())
        ok = shift_err <= 1e-9 and perm_err <= 1e-12
        rec.record(
            max(shift_err, perm_err),
            ok,
            {"suite": "equivariance", "z": z.tolist(), "alpha": a, "shift": c},
        )
    return rec.result()


def _suite_gradient(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("gradient")
    usable_dims = [d for d in dims if 2 <= d <= 64] or [8]
    attempts = 0
    while rec.trials < trials and attempts < 3 * trials:
        attempts += 1
        d = int(rng.choice(usable_dims))
        a = float(rng.choice(alphas))
        z = rng.normal(0.0, 2.0, d)
        forward = _forward_batch(a)
        p0 = forward(z[None, :])[0]
        eye = np.eye(d)
        perturbed = forward(np.vstack([z + FD_STEP * eye, z - FD_STEP * eye]))
        # derivative checks only make sense where the support is locally stable
        if not ((perturbed > 0.0) == (p0 > 0.0)).all():
            continue
        dense = dense_jacobian(jacobian_from_p(p0, a))
        fd = (perturbed[:d] - perturbed[d:]).T / (2.0 * FD_STEP)
        jac_err = float(np.abs(dense - fd).max())
        sym_err = float(np.abs(dense - dense.T).max())
        rowsum_err = float(np.abs(dense.sum(axis=1)).max())
        y = int(rng.integers(d))
        target = np.zeros(d)
        target[y] = 1.0
        pert_z = np.vstack([z + FD_STEP * eye, z - FD_STEP * eye])
        losses = (pert_z * (perturbed - target)).sum(axis=1) + _entropy_rows_any(perturbed, a)
        grad_fd = (losses[:d] - losses[d:]) / (2.0 * FD_STEP)
        grad_err = float(np.abs((p0 - target) - grad_fd).max())
        ok = jac_err <= 1e-5 and sym_err == 0.0 and rowsum_err <= 1e-12 and grad_err <= 1e-5
        rec.record(
            max(jac_err, sym_err, rowsum_err, grad_err),
            ok,
            {"suite": "gradient", "z": z.tolist(), "alpha": a, "y": y},
        )
    return rec.result()


def _suite_oracle(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("oracle")
    rows = max(4, trials // max(1, len(dims)))
    for d in dims:
        d = int(d)
        Z = rng.normal(0.0, 2.0, (rows, d))
        exact, _, _ = entmax15_exact_batch(Z)
        approx, _, _ = entmax_bisect_batch(Z, 1.5, 50)
        bisect_err = float(np.abs(exact - approx).max())
        root, _ = entmax15_mass_bisection_batch(Z)
        root_err = float(np.abs(exact - root).max())
        proj, _, _ = sparsemax_batch(Z)
        brute_err = 0.0
        if d <= 8:
            brute_err = float(np.abs(proj - sparsemax_bruteforce_batch(Z)).max())
        ok = bisect_err <= 1e-6 and root_err <= 1e-10 and brute_err <= 1e-10
        worst = int(np.abs(exact - approx).max(axis=1).argmax())
        rec.record(
            max(bisect_err, root_err, brute_err),
            ok,
            {"suite": "oracle", "d": d, "z": Z[worst].tolist()},
            count=rows,
        )
    # threshold candidates: finite prefix, non-decreasing over it
    for _ in range(min(trials, 200)):
        d = int(rng.choice(dims))
        z = rng.normal(0.0, 2.0, d)
        taus = [c.tau for c in tau_candidates(z)]
        finite = [np.isfinite(t) for t in taus]
        prefix_ok = finite == sorted(finite, reverse=True) and finite[0]
        finite_taus = [t for t in taus if np.isfinite(t)]
        mono_ok = all(b >= a for a, b in zip(finite_taus, finite_taus[1:]))
        rec.record(0.0, prefix_ok and mono_ok, {"suite": "tau-candidates", "z": z.tolist()})
    return rec.result()


def _min_gap(alpha: float) -> float:
    # keep the analytically positive below-margin loss well above two f64
    # floors: entropy-term cancellation (~1e-15), and the bisection threshold
    # resolution, whose effect on the loss is ~(5e-16)**(2/(alpha-1)) for
    # alpha > 2 because the exponent 1/(alpha-1) < 1 amplifies it
    cancellation = (1e-12 * alpha) ** ((alpha - 1.0) / alpha) / (alpha - 1.0)
    resolution = (2.0 * alpha * 1e-30 / (alpha - 1.0) ** 3) ** (1.0 / (2.0 * alpha - 2.0))
    return max(1e-6, cancellation, resolution)


def _suite_margin(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("margin")
    usable_dims = [d for d in dims if d >= 2] or [4]
    per_dim = max(2, trials // max(1, len(usable_dims)))
    for d in usable_dims:
        d = int(d)
        n = per_dim
        alpha_rows = rng.uniform(1.25, 4.0, n)
        margins = 1.0 / (alpha_rows - 1.0)
        base = rng.normal(0.0, 2.0, (n, d))
        labels = rng.integers(0, d, size=n)
        rows = np.arange(n)
        base[rows, labels] = -np.inf
        rest_max = base.max(axis=1)
        base[rows, labels] = 0.0
        met = rng.random(n) < 0.5
        gaps = np.array([_min_gap(a) for a in alpha_rows])
        gaps += rng.uniform(0.0, 1.0, n) * np.minimum(margins, 2.0)
        separation = np.where(met, margins + 1e-6, margins - gaps)
        Z = base.copy()
        Z[rows, labels] = rest_max + separation
        P, _, _ = entmax_bisect_batch(Z, alpha_rows, 50)
        targets = np.zeros_like(Z)
        targets[rows, labels] = 1.0
        losses = (Z * (P - targets)).sum(axis=1) + _entropy_rows(P, alpha_rows)
        losses[(losses < 0.0) & (losses >= -1e-12)] = 0.0
        deviation = np.abs(P - targets).max(axis=1)
        for i in range(n):
            flagged = margin_satisfied(Z[i], int(labels[i]), float(alpha_rows[i]))
            if met[i]:
                ok = losses[i] <= 1e-10 and deviation[i] <= 1e-8 and flagged
                err = max(losses[i], deviation[i])
            else:
                ok = losses[i] > 0.0 and not flagged
                err = 0.0
            rec.record(
                float(err),
                ok,
                {
                    "suite": "margin",
                    "z": Z[i].tolist(),
                    "alpha": float(alpha_rows[i]),
                    "y": int(labels[i]),
                    "met": bool(met[i]),
                },
            )
    # boundary probes: exactly 1e-6 below the margin, at alphas where the
    # tiny positive loss is still representable
    for a in (2.0, 2.5, 3.0):
        z = np.array([1.0 / (a - 1.0) - 1e-6, 0.0])
        loss = entmax_loss(z, 0, a)
        rec.record(0.0, loss > 0.0, {"suite": "margin-boundary", "alpha": a})
    return rec.result()


def _suite_certificate(rng, trials, dims, alphas) -> SuiteResult:
    rec = _Recorder("certificate")
    for index in range(trials):
        vocab = int(rng.integers(3, 9))
        depth = int(rng.integers(2, 7))
        a = float(rng.choice([1.5, 2.0]))
        beam = int(rng.integers(1, 7))
        model_seed = int(rng.integers(0, 2**31))
        model = random_table_model(model_seed, vocab, depth)
        payload = {
            "suite": "certificate",
            "model_seed": model_seed,
            "vocab_size": vocab,
            "max_len": depth,
            "alpha": a,
            "beam": beam,
        }
        ranked, certificate = beam_search(model, a, beam)
        oracle = exhaustive_enumerate(model, a)
        mass = sum(h.prob for h in oracle)
        ok = mass <= 1.0 + 1e-9
        err = max(0.0, mass - 1.0)
        complete = [h for h in ranked if h.complete]
        if certificate.exact:
            ok = ok and len(ranked) == len(oracle) == len(complete)
            if ok:
                probs_err = max(
                    (abs(h.prob - o.prob) for h, o in zip(complete, oracle)), default=0.0
                )
                ok = probs_err <= 1e-12 and all(
                    h.tokens == o.tokens for h, o in zip(complete, oracle)
                )
                err = max(err, probs_err)
        else:
            oracle_probs = {h.tokens: h.prob for h in oracle}
            ok = ok and all(
                h.tokens in oracle_probs and abs(h.prob - oracle_probs[h.tokens]) <= 1e-12
                for h in complete
            )
        if index % 10 == 0:
            wider, wider_cert = beam_search(model, a, beam + 2)
            wider_tokens = {h.tokens for h in wider}
            ok = ok and all(h.tokens in wider_tokens for h in ranked)
            ok = ok and not (certificate.exact and not wider_cert.exact)
        rec.record(err, ok, payload)
    return rec.result()


_SUITES = {
    "simplex": _suite_simplex,
    "equivariance": _suite_equivariance,
    "gradient": _suite_gradient,
    "oracle": _suite_oracle,
    "margin": _suite_margin,
    "certificate": _suite_certificate,
}

SUITE_NAMES = tuple(_SUITES)


def run_suite(name, seed=42, trials=200, dims=(2, 3, 8, 32), alphas=(1.0, 1.5, 2.0)) -> SuiteResult:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), SUITE_NAMES.index(name)]))
    try:
        return _SUITES[name](rng, int(trials), tuple(dims), tuple(alphas))
    except Exception as exc:  # a crash is a failed suite, not a crashed harness
        return SuiteResult(name, 0, 1, float("inf"), {"error": f"{type(exc).__name__}: {exc}"})


def run_all(seed=42, trials=200, dims=(2, 3, 8, 32), alphas=(1.0, 1.5, 2.0)) -> list[SuiteResult]:
    """Run every suite, each on its own stream derived from the run seed."""
    return [run_suite(name, seed, trials, dims, alphas) for name in SUITE_NAMES]
