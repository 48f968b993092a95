"""Command-line interface: map, curve, check, bench, decode.

Records are line-delimited JSON for mapping, a delimited table for curves,
and one self-describing JSON document for bench and decode runs.  Floats are
printed with 17 significant digits so parsed values round-trip exactly.
Exit codes: 0 success, 1 validation or suite failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bench import ALGORITHMS, run_bench
from .bisect import BisectConfig, entmax_bisect
from .checks import run_all
from .core import entmax, resolve_method
from .decode import beam_search, exhaustive_enumerate, load_fixture
from .errors import ConfigurationError, EntmaxError, InvalidInputError, ResourceError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

_MAP_ALGORITHMS = ("auto", "bisect", "exact15", "sort2")
_CORE_METHOD = {"auto": "auto", "bisect": "bisect", "exact15": "exact15", "sort2": "sparsemax-sort"}


def format_float(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def dumps(value) -> str:
    """Minimal JSON emitter so floats carry 17 significant digits (NaN -> null)."""
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "null"
        return format_float(number)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(item) for item in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _worker_count() -> int:
    raw = os.environ.get("ENTMAX_THREADS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"ENTMAX_THREADS must be an integer, got {raw!r}") from exc
    if count < 0:
        raise ConfigurationError(f"ENTMAX_THREADS must be >= 0, got {count}")
    if count == 0:
        return os.cpu_count() or 1
    return count


def _parse_floats(text: str, flag: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigurationError(f"{flag} must list at least one value")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigurationError(f"{flag} must be comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str, flag: str) -> list[int]:
    return [int(v) for v in _parse_floats(text, flag)]


def _write_lines(path: str, lines) -> None:
    if path == "-":
        for line in lines:
            sys.stdout.write(line + "\n")
        return
    with open(path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line + "\n")


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    with open(path, encoding="utf-8") as handle:
        return handle.read().splitlines()


def _map_one(index: int, line: str, alpha: float, method: str, iters: int):
    """Solve one record; returns (json_line, failed).  Pure, so rows may run in parallel."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        return dumps({"id": str(index), "error": f"invalid JSON: {exc.msg}"}), True
    ident = str(record.get("id", index)) if isinstance(record, dict) else str(index)
    try:
        if not isinstance(record, dict):
            raise InvalidInputError("each line must be a JSON object")
        if "z" not in record:
            raise InvalidInputError("record is missing the 'z' field")
        if method == "bisect":
            solution = entmax_bisect(record["z"], alpha, BisectConfig(max_iters=iters))
        else:
            solution = entmax(record["z"], alpha, method=method)
        out = {
            "id": ident,
            "p": solution.p,
            "tau": solution.tau,
            "support_size": solution.support_size,
            "algorithm_used": {"sparsemax-sort": "sort2"}.get(method, method),
        }
        return dumps(out), False
    except (EntmaxError, TypeError, ValueError) as exc:
        return dumps({"id": ident, "error": str(exc)}), True


def cmd_map(args) -> int:
    method = _CORE_METHOD[args.algorithm]
    resolved = resolve_method(args.alpha, method)
    if args.iters < 1:
        raise ConfigurationError(f"--iters must be >= 1, got {args.iters}")
    lines = [(i, line) for i, line in enumerate(_read_lines(args.input)) if line.strip()]
    workers = _worker_count()

    def solve(item):
        return _map_one(item[0], item[1], args.alpha, resolved, args.iters)

    if workers > 1 and len(lines) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, lines))
    else:
        results = [solve(item) for item in lines]
    _write_lines(args.output, [text for text, _ in results])
    return EXIT_FAILURE if any(failed for _, failed in results) else EXIT_OK


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"--range must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"--range values must be numbers, got {text!r}") from exc
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)):
        raise ConfigurationError("--range values must be finite")
    if step <= 0.0:
        raise ConfigurationError(f"--range step must be positive, got {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigurationError(f"--range {text!r} is empty")
    return start + step * np.arange(count)


def cmd_curve(args) -> int:
    alphas = _parse_floats(args.alpha, "--alpha")
    for a in alphas:
        resolve_method(a)
    ts = _parse_range(args.t_range)
    header = "t," + ",".join(f"alpha_{a:g}" for a in alphas)
    lines = [header]
    for t in ts:
        z = np.array([float(t), 0.0])
        row = [format_float(t)]
        row.extend(format_float(entmax(z, a).p[0]) for a in alphas)
        lines.append(",".join(row))
    _write_lines(args.output, lines)
    return EXIT_OK


def cmd_check(args) -> int:
    dims = _parse_ints(args.dims, "--dims")
    alphas = _parse_floats(args.alphas, "--alphas")
    if args.trials < 1:
        raise ConfigurationError(f"--trials must be >= 1, got {args.trials}")
    if any(d < 1 for d in dims):
        raise ConfigurationError("--dims must all be >= 1")
    for a in alphas:
        resolve_method(a)
    results = run_all(seed=args.seed, trials=args.trials, dims=dims, alphas=alphas)
    print(f"{'suite':<14}{'trials':>8}{'failures':>10}{'max_error':>14}  status")
    for res in results:
        status = "ok" if res.passed else "FAIL"
        print(f"{res.name:<14}{res.trials:>8}{res.failures:>10}{res.max_error:>14.3e}  {status}")
    failed = [res for res in results if not res.passed]
    for res in failed:
        print(f"counterexample[{res.name}]: {dumps(res.counterexample)}")
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_bench(args) -> int:
    doc = run_bench(
        algorithm=args.algorithm,
        dim=args.dim,
        batch=args.batch,
        alpha=args.alpha,
        repeats=args.repeats,
        warmup=args.warmup,
        seed=args.seed,
        scale=args.scale,
        include_jvp=args.jvp,
    )
    _write_lines(args.output, [dumps(doc)])
    return EXIT_OK


def _hypothesis_doc(h) -> dict:
    return {"tokens": list(h.tokens), "prob": h.prob, "complete": h.complete}


def cmd_decode(args) -> int:
    model = load_fixture(args.fixture)
    if args.beam < 1:
        raise ConfigurationError(f"--beam must be >= 1, got {args.beam}")
    ranked, certificate = beam_search(model, args.alpha, args.beam)
    doc = {
        "alpha": float(args.alpha),
        "beam": int(args.beam),
        "hypotheses": [_hypothesis_doc(h) for h in ranked],
        "certificate": {
            "exact": certificate.exact,
            "dropped_mass_bound": certificate.dropped_mass_bound,
            "steps_saturated": certificate.steps_saturated,
        },
    }
    if args.enumerate_oracle:
        oracle = exhaustive_enumerate(model, args.alpha)
        beam_complete = {h.tokens: h.prob for h in ranked if h.complete}
        oracle_probs = {h.tokens: h.prob for h in oracle}
        agreement = beam_complete.keys() == oracle_probs.keys() and all(
            abs(beam_complete[k] - oracle_probs[k]) <= 1e-12 for k in oracle_probs
        )
        doc["enumeration"] = [_hypothesis_doc(h) for h in oracle]
        doc["agreement"] = agreement
    _write_lines(args.output, [dumps(doc)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entmax", description="sparse probability mappings: solvers, checks, benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("map", help="map line-delimited score records to sparse probabilities")
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--algorithm", choices=_MAP_ALGORITHMS, default="auto")
    m.add_argument("--iters", type=int, default=50, help="bisection iterations")
    m.add_argument("--input", default="-")
    m.add_argument("--output", default="-")
    m.set_defaults(handler=cmd_map)

    c = sub.add_parser("curve", help="tabulate entmax([t, 0]) over a range of t")
    c.add_argument("--alpha", default="1,1.5,2", help="comma-separated alpha values")
    c.add_argument("--range", dest="t_range", default="-3:3:0.01", metavar="START:STOP:STEP")
    c.add_argument("--output", default="-")
    c.set_defaults(handler=cmd_curve)

    k = sub.add_parser("check", help="run the seeded invariant suites")
    k.add_argument("--seed", type=int, default=42)
    k.add_argument("--trials", type=int, default=200)
    k.add_argument("--dims", default="2,3,8,32")
    k.add_argument("--alphas", default="1,1.5,2")
    k.set_defaults(handler=cmd_check)

    b = sub.add_parser("bench", help="time a solver on deterministic Gaussian batches")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--batch", type=int, default=1)
    b.add_argument("--alpha", type=float, default=1.5)
    b.add_argument("--algorithm", choices=ALGORITHMS, default="exact15")
    b.add_argument("--repeats", type=int, default=9)
    b.add_argument("--warmup", type=int, default=2)
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--scale", type=float, default=1.0, help="score scale; large = peaked rows")
    b.add_argument("--jvp", action="store_true", help="also time Jacobian-vector products")
    b.add_argument("--output", default="-")
    b.set_defaults(handler=cmd_bench)

    d = sub.add_parser("decode", help="beam-search a model fixture and print the certificate")
    d.add_argument("fixture")
    d.add_argument("--alpha", type=float, default=1.5)
    d.add_argument("--beam", type=int, default=5)
    d.add_argument(
        "--enumerate",
        dest="enumerate_oracle",
        action="store_true",
        help="also run exhaustive enumeration and report agreement",
    )
    d.add_argument("--output", default="-")
    d.set_defaults(handler=cmd_decode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInputError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
