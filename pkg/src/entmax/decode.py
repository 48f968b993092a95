"""Beam decoding over table-backed autoregressive models, with a certificate.

A :class:`TableModel` assigns next-token scores to every reachable prefix;
token index 0 is the stop symbol.  Because the mappings put exact zeros on
low-scoring tokens for alpha > 1, a model induces a distribution over a
finite set of sequences, and beam search that never drops nonzero mass
enumerates that set completely.  The returned certificate says whether that
happened: ``exact`` is true iff no nonzero-probability hypothesis was pruned
for beam-width reasons and every live hypothesis stopped within ``max_len``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import as_scores, check_alpha, entmax
from .errors import ConfigurationError, InvalidInputError, ResourceError

STOP_TOKEN = 0

ENUMERATION_CAP = 1_000_000


@dataclass(frozen=True)
class Hypothesis:
    """A decoded sequence: ends in stop (complete) or was cut at max_len."""

    tokens: tuple
    prob: float
    complete: bool


@dataclass(frozen=True)
class ExactnessCertificate:
    """Outcome of a beam run.

    ``dropped_mass_bound`` upper-bounds the probability mass not represented
    in the output (pruned candidates plus unfinished hypotheses);
    ``steps_saturated`` counts the steps at which pruning occurred.
    """

    exact: bool
    dropped_mass_bound: float
    steps_saturated: int


@dataclass(frozen=True)
class TableModel:
    """Toy autoregressive model: a callable from token prefix to next-token scores.

    ``score_fn`` must return a length-``vocab_size`` score vector for every
    prefix reachable within ``max_len``; index 0 is the stop symbol.
    """

    vocab_size: int
    score_fn: Callable
    max_len: int

    def __post_init__(self):
        if int(self.vocab_size) < 2:
            raise InvalidInputError(f"vocab_size must be >= 2, got {self.vocab_size!r}")
        if int(self.max_len) < 1:
            raise InvalidInputError(f"max_len must be >= 1, got {self.max_len!r}")

    def scores(self, prefix) -> np.ndarray:
        z = as_scores(self.score_fn(tuple(prefix)))
        if z.size != self.vocab_size:
            raise InvalidInputError(
                f"score_fn returned {z.size} scores for prefix {tuple(prefix)!r}, "
                f"expected {self.vocab_size}"
            )
        return z


def next_distribution(model: TableModel, prefix, alpha) -> np.ndarray:
    """Next-token probabilities after ``prefix``: entmax of the prefix scores."""
    tokens = tuple(int(t) for t in prefix)
    if len(tokens) >= model.max_len:
        raise InvalidInputError(
            f"prefix of length {len(tokens)} cannot be extended beyond max_len={model.max_len}"
        )
    return entmax(model.scores(tokens), alpha).p


def beam_search(model: TableModel, alpha, beam: int):
    """Breadth-style beam search keeping the top-``beam`` live hypotheses.

    Zero-probability expansions are never enqueued; completed hypotheses are
    set aside and never pruned.  Returns the ranked hypothesis list (by
    probability, ties broken lexicographically) and the exactness
    certificate.
    """
    a = check_alpha(alpha)
    width = int(beam)
    if width < 1:
        raise ConfigurationError(f"beam width must be >= 1, got {beam!r}")
    live: list[tuple[tuple, float]] = [((), 1.0)]
    completed: list[Hypothesis] = []
    dropped_mass = 0.0
    steps_saturated = 0
    for _ in range(model.max_len):
        if not live:
            break
        survivors: list[tuple[tuple, float]] = []
        for tokens, prob in live:
            dist = next_distribution(model, tokens, a)
            for token in np.flatnonzero(dist > 0.0).tolist():
                child_prob = prob * float(dist[token])
                if child_prob <= 0.0:
                    continue  # underflowed to zero; treated as never enqueued
                child = tokens + (token,)
                if token == STOP_TOKEN:
                    completed.append(Hypothesis(child, child_prob, True))
                else:
                    survivors.append((child, child_prob))
        survivors.sort(key=lambda item: (-item[1], item[0]))
        if len(survivors) > width:
            steps_saturated += 1
            dropped_mass += sum(prob for _, prob in survivors[width:])
            survivors = survivors[:width]
        live = survivors
    unfinished = [Hypothesis(tokens, prob, False) for tokens, prob in live]
    truncated_mass = sum(h.prob for h in unfinished)
    certificate = ExactnessCertificate(
        exact=(dropped_mass == 0.0 and not unfinished),
        dropped_mass_bound=dropped_mass + truncated_mass,
        steps_saturated=steps_saturated,
    )
    ranked = sorted(completed + unfinished, key=lambda h: (-h.prob, h.tokens))
    return ranked, certificate


def exhaustive_enumerate(model: TableModel, alpha, max_expansions: int = ENUMERATION_CAP):
    """All nonzero-probability complete sequences, ranked like ``beam_search``.

    Serves as the oracle for the certificate: whenever the certificate says
    exact, the beam output must equal this enumeration.
    """
    a = check_alpha(alpha)
    if model.vocab_size**model.max_len > max_expansions:
        raise ResourceError(
            f"enumerating up to {model.vocab_size ** model.max_len} sequences "
            f"exceeds the cap of {max_expansions}"
        )
    found: list[Hypothesis] = []

    def expand(prefix: tuple, prob: float) -> None:
        dist = next_distribution(model, prefix, a)
        for token in np.flatnonzero(dist > 0.0).tolist():
            child_prob = prob * float(dist[token])
            if child_prob <= 0.0:
                continue
            child = prefix + (token,)
            if token == STOP_TOKEN:
                found.append(Hypothesis(child, child_prob, True))
            elif len(child) < model.max_len:
                expand(child, child_prob)

    expand((), 1.0)
    found.sort(key=lambda h: (-h.prob, h.tokens))
    return found


def _parse_prefix_key(key: str, vocab_size: int) -> tuple:
    if key == "":
        return ()
    tokens = []
    for part in key.split(","):
        try:
            token = int(part)
        except ValueError as exc:
            raise InvalidInputError(
                f"table key {key!r}: {part!r} is not an integer token"
            ) from exc
        if not 0 <= token < vocab_size:
            raise InvalidInputError(f"table key {key!r}: token {token} outside [0, {vocab_size})")
        tokens.append(token)
    return tuple(tokens)


def table_model_from_dict(doc) -> TableModel:
    """Build a model from a fixture document; errors carry field context.

    Expected shape: ``{"vocab_size": V, "max_len": L, "stop": 0, "table":
    {"": [...], "1": [...], "1,2": [...]}}`` with prefix keys given as
    comma-joined token indices and score arrays of length V.
    """
    if not isinstance(doc, dict):
        raise InvalidInputError("fixture root must be a JSON object")
    for field in ("vocab_size", "max_len", "stop", "table"):
        if field not in doc:
            raise InvalidInputError(f"fixture is missing field {field!r}")
    vocab_size = doc["vocab_size"]
    if not isinstance(vocab_size, int) or vocab_size < 2:
        raise InvalidInputError(f"field 'vocab_size' must be an integer >= 2, got {vocab_size!r}")
    max_len = doc["max_len"]
    if not isinstance(max_len, int) or max_len < 1:
        raise InvalidInputError(f"field 'max_len' must be an integer >= 1, got {max_len!r}")
    if doc["stop"] != STOP_TOKEN:
        raise InvalidInputError(f"field 'stop' must be {STOP_TOKEN}, got {doc['stop']!r}")
    raw_table = doc["table"]
    if not isinstance(raw_table, dict):
        raise InvalidInputError("field 'table' must be an object mapping prefixes to scores")
    table = {}
    for key, row in raw_table.items():
        prefix = _parse_prefix_key(key, vocab_size)
        try:
            scores = as_scores(row)
        except InvalidInputError as exc:
            raise InvalidInputError(f"table entry {key!r}: {exc}") from exc
        if scores.size != vocab_size:
            raise InvalidInputError(
                f"table entry {key!r} has {scores.size} scores, expected {vocab_size}"
            )
        table[prefix] = scores

    def score_fn(prefix: tuple) -> np.ndarray:
        try:
            return table[prefix]
        except KeyError as exc:
            raise InvalidInputError(f"model table has no scores for prefix {prefix!r}") from exc

    return TableModel(vocab_size, score_fn, max_len)


def parse_fixture(text: str) -> TableModel:
    """Parse a JSON fixture document into a model."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"fixture parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return table_model_from_dict(doc)


def load_fixture(path) -> TableModel:
    """Read and parse a model fixture file."""
    with open(path, encoding="utf-8") as handle:
        return parse_fixture(handle.read())


def random_table_model(
    seed: int, vocab_size: int, max_len: int, scale: float = 3.0, stop_gain: float = 1.0
) -> TableModel:
    """Deterministic synthetic model for harness runs.

    Scores are Gaussian draws keyed on (seed, prefix) and the stop symbol
    gains ``stop_gain`` per generated token, so trees stay short and the
    sparse mappings keep the branching factor small.
    """

    def score_fn(prefix: tuple) -> np.ndarray:
        entropy = [int(seed), len(prefix)] + [int(t) for t in prefix]
        rng = np.random.default_rng(np.random.SeedSequence(entropy))
        z = rng.normal(0.0, scale, vocab_size)
        z[STOP_TOKEN] += stop_gain * len(prefix)
        return z

    return TableModel(vocab_size, score_fn, max_len)
