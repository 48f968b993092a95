"""Sparse probability mappings over the simplex.

The family interpolates from softmax (alpha = 1, dense) through smooth
sparse mappings (1 < alpha < 2) to the Euclidean projection (alpha = 2),
assigning exact zeros to low-scoring entries for every alpha > 1.  The
package ships exact and bisection solvers, factored Jacobian operators,
the matching losses with margins, a beam decoder whose certificate proves
when decoding was globally optimal, plus reference oracles, invariant
suites, and a benchmark harness behind the ``entmax`` CLI.
"""

from .bisect import BisectConfig, entmax_bisect, entmax_bisect_batch, p_of_tau
from .checks import SUITE_NAMES, SuiteResult, run_all, run_suite
from .core import (
    SOFTMAX_TAU,
    ThresholdedSolution,
    entmax,
    resolve_method,
    softmax,
    softmax_batch,
    sparsemax,
    sparsemax_batch,
    support,
)
from .decode import (
    STOP_TOKEN,
    ExactnessCertificate,
    Hypothesis,
    TableModel,
    beam_search,
    exhaustive_enumerate,
    load_fixture,
    next_distribution,
    parse_fixture,
    random_table_model,
    table_model_from_dict,
)
from .errors import ConfigurationError, EntmaxError, InvalidInputError, ResourceError
from .exact15 import (
    TauCandidate,
    entmax15_exact,
    entmax15_exact_batch,
    entmax15_partial,
    entmax15_partial_batch,
    tau_candidates,
)
from .jacobian import (
    EntmaxJacobian,
    dense_jacobian,
    generalized_jacobian,
    jacobian_from_p,
    jvp,
)
from .losses import (
    entmax_loss,
    entmax_loss_grad,
    loss_hessian,
    margin_satisfied,
    tsallis_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "BisectConfig",
    "ConfigurationError",
    "EntmaxError",
    "EntmaxJacobian",
    "ExactnessCertificate",
    "Hypothesis",
    "InvalidInputError",
    "ResourceError",
    "SOFTMAX_TAU",
    "STOP_TOKEN",
    "SUITE_NAMES",
    "SuiteResult",
    "TableModel",
    "TauCandidate",
    "ThresholdedSolution",
    "beam_search",
    "dense_jacobian",
    "entmax",
    "entmax15_exact",
    "entmax15_exact_batch",
    "entmax15_partial",
    "entmax15_partial_batch",
    "entmax_bisect",
    "entmax_bisect_batch",
    "entmax_loss",
    "entmax_loss_grad",
    "exhaustive_enumerate",
    "generalized_jacobian",
    "jacobian_from_p",
    "jvp",
    "load_fixture",
    "loss_hessian",
    "margin_satisfied",
    "next_distribution",
    "p_of_tau",
    "parse_fixture",
    "random_table_model",
    "resolve_method",
    "run_all",
    "run_suite",
    "softmax",
    "softmax_batch",
    "sparsemax",
    "sparsemax_batch",
    "support",
    "table_model_from_dict",
    "tau_candidates",
    "tsallis_entropy",
]
