"""Oracles for the numerical core.

- `brute_force` enumerates every joint state of a small snippet graph, and
  `check_inference` compares it with `crf.infer_exact` on random graphs.
- `check_uniform` checks the closed-form log-partition of zero parameters.
- `check_gradients` compares the CRF and logistic regression gradients with central
  finite differences on a toy dataset.
- `check_two_pass_consistency` checks that a full joint model with no strategy
  evidence has the marginals of the three-task model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from trollgraph.crf import (
    JOINT_TASKS,
    NUM_DISCLOSURES,
    NUM_INTENTIONS,
    NUM_INTERPRETATIONS,
    NUM_STRATEGIES,
    TWO_PASS_TASKS,
    Assignment,
    CrfDataset,
    CrfParams,
    InferenceResult,
    SnippetGraph,
    build_snippet_graph,
    crf_objective,
    infer_exact,
)
from trollgraph.features import SnippetVectors, SparseVector
from trollgraph.optim import (
    LogRegWeights,
    ObjectiveEvaluation,
    check_gradient,
    logreg_objective,
)
from trollgraph.snippets import (
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    ResponseLabels,
    SnippetLabels,
    StrategyLabel,
)

__all__ = [
    "INFERENCE_TOLERANCE",
    "GRADIENT_TOLERANCE",
    "CONSISTENCY_TOLERANCE",
    "brute_force",
    "random_graph",
    "toy_examples",
    "CheckOutcome",
    "check_inference",
    "check_uniform",
    "check_gradients",
    "check_two_pass_consistency",
    "SelfCheckResult",
    "run_selfcheck",
]

logger = logging.getLogger(__name__)

INFERENCE_TOLERANCE = 1e-8
GRADIENT_TOLERANCE = 1e-5
CONSISTENCY_TOLERANCE = 1e-9
UNIFORM_TOLERANCE = 1e-12


def _place(table: np.ndarray, axes: Sequence[int], ndim: int) -> np.ndarray:
    """Reshape `table` so its dimensions sit on `axes` of an `ndim`-dimensional
    broadcast."""
    shape = [1] * ndim
    for axis, size in zip(axes, table.shape):
        shape[axis] = size
    return table.reshape(shape)


def _keep(tensor: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    others = tuple(axis for axis in range(tensor.ndim) if axis not in axes)
    return tensor.sum(axis=others)


def brute_force(graph: SnippetGraph) -> InferenceResult:
    """Inference by enumerating all `9 * 42^R` joint states (`9 * 3^R` without
    strategies).

    Axes of the state tensor are `i`, `d`, then `r_k` (and `b_k`) per response.
    """
    size = graph.size
    u_b, t_rb = graph.u_b, graph.t_rb
    joint = u_b is not None and t_rb is not None
    per_response = 2 if joint else 1
    ndim = 2 + per_response * size

    def r_axis(k: int) -> int:
        return 2 + per_response * k

    scores = _place(graph.u_i, [0], ndim) + _place(graph.u_d, [1], ndim)
    for k in range(size):
        r = r_axis(k)
        scores = scores + _place(graph.u_r[k], [r], ndim)
        scores = scores + _place(graph.t_ir, [0, r], ndim)
        scores = scores + _place(graph.t_dr, [1, r], ndim)
        if u_b is not None and t_rb is not None:
            scores = scores + _place(u_b[k], [r + 1], ndim)
            scores = scores + _place(t_rb, [r, r + 1], ndim)

    log_z = float(logsumexp(scores))
    probabilities = np.exp(scores - log_z)
    state = np.unravel_index(int(np.argmax(scores)), scores.shape)
    best = Assignment(
        intention=int(state[0]),
        disclosure=int(state[1]),
        interpretations=tuple(int(state[r_axis(k)]) for k in range(size)),
        strategies=(
            tuple(int(state[r_axis(k) + 1]) for k in range(size)) if joint else None
        ),
    )
    return InferenceResult(
        log_z=log_z,
        p_i=_keep(probabilities, [0]),
        p_d=_keep(probabilities, [1]),
        p_r=np.stack([_keep(probabilities, [r_axis(k)]) for k in range(size)]),
        p_b=(
            np.stack([_keep(probabilities, [r_axis(k) + 1]) for k in range(size)])
            if joint
            else None
        ),
        p_ir=np.stack([_keep(probabilities, [0, r_axis(k)]) for k in range(size)]),
        p_dr=np.stack([_keep(probabilities, [1, r_axis(k)]) for k in range(size)]),
        p_rb=(
            np.stack(
                [_keep(probabilities, [r_axis(k), r_axis(k) + 1]) for k in range(size)]
            )
            if joint
            else None
        ),
        map=best,
    )


def random_graph(
    rng: np.random.Generator, size: int, *, joint: bool = True, scale: float = 1.0
) -> SnippetGraph:
    """A snippet graph with normally distributed log-potentials."""

    def draw(*shape: int) -> np.ndarray:
        return rng.normal(scale=scale, size=shape)

    return SnippetGraph(
        snippet_id="random",
        u_i=draw(NUM_INTENTIONS),
        u_d=draw(NUM_DISCLOSURES),
        u_r=draw(size, NUM_INTERPRETATIONS),
        u_b=draw(size, NUM_STRATEGIES) if joint else None,
        t_ir=draw(NUM_INTENTIONS, NUM_INTERPRETATIONS),
        t_dr=draw(NUM_DISCLOSURES, NUM_INTERPRETATIONS),
        t_rb=draw(NUM_INTERPRETATIONS, NUM_STRATEGIES) if joint else None,
    )


def _deviation(exact: InferenceResult, oracle: InferenceResult) -> float:
    pairs: List[Tuple[Optional[np.ndarray], Optional[np.ndarray]]] = [
        (exact.p_i, oracle.p_i),
        (exact.p_d, oracle.p_d),
        (exact.p_r, oracle.p_r),
        (exact.p_b, oracle.p_b),
        (exact.p_ir, oracle.p_ir),
        (exact.p_dr, oracle.p_dr),
        (exact.p_rb, oracle.p_rb),
    ]
    deviation = abs(exact.log_z - oracle.log_z)
    for ours, theirs in pairs:
        if ours is None and theirs is None:
            continue
        if ours is None or theirs is None or ours.shape != theirs.shape:
            return math.inf
        deviation = max(deviation, float(np.max(np.abs(ours - theirs))))
    return deviation


@dataclass(frozen=True)
class CheckOutcome:
    """Result of one oracle.

    Attributes:
        name (str): The oracle.
        deviation (float): Largest deviation found.
        tolerance (float): Largest deviation accepted.
        failures (int): Cases failing for a reason other than the deviation, such as
            a MAP assignment differing from the enumerated one.
    """

    name: str
    deviation: float
    tolerance: float
    failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.deviation < self.tolerance


def check_inference(
    draws: int = 200, seed: int = 0, max_responses: int = 3
) -> CheckOutcome:
    """Compare exact inference with enumeration on random graphs.

    Response counts cycle through `1..max_responses`; every other draw is a
    three-task graph.
    """
    rng = np.random.default_rng(seed)
    deviation = 0.0
    failures = 0
    for draw in range(draws):
        graph = random_graph(rng, draw % max_responses + 1, joint=draw % 2 == 0)
        exact = infer_exact(graph)
        oracle = brute_force(graph)
        deviation = max(deviation, _deviation(exact, oracle))
        if exact.map != oracle.map:
            failures += 1
            logger.warning(
                "MAP mismatch on draw %d: %s != %s", draw, exact.map, oracle.map
            )
    return CheckOutcome("inference", deviation, INFERENCE_TOLERANCE, failures)


def check_uniform(max_responses: int = 4) -> CheckOutcome:
    """Zero log-potentials give `log Z = log(9 * 42^R)`."""
    deviation = 0.0
    for size in range(1, max_responses + 1):
        graph = random_graph(np.random.default_rng(0), size, scale=0.0)
        expected = math.log(NUM_INTENTIONS * NUM_DISCLOSURES) + size * math.log(
            NUM_INTERPRETATIONS * NUM_STRATEGIES
        )
        deviation = max(deviation, abs(infer_exact(graph).log_z - expected))
    return CheckOutcome("uniform", deviation, UNIFORM_TOLERANCE)


def _sparse(rng: np.random.Generator, dimension: int, nnz: int) -> SparseVector:
    indices = np.sort(rng.choice(dimension, size=nnz, replace=False))
    return SparseVector(indices, rng.normal(size=nnz), dimension)


def toy_examples(
    rng: np.random.Generator,
    snippets: int = 5,
    context_dim: int = 6,
    response_dim: int = 5,
) -> List[Tuple[SnippetVectors, SnippetLabels]]:
    """Random sparse snippets with random (valid) labels."""
    intentions = list(IntentionLabel)
    disclosures = list(DisclosureLabel)
    interpretations = list(InterpretationLabel)
    strategies = list(StrategyLabel)
    examples = []
    for n in range(snippets):
        size = int(rng.integers(1, 4))
        intention = intentions[int(rng.integers(0, 3))]
        disclosure = (
            DisclosureLabel.NONE
            if intention is IntentionLabel.NONE
            else disclosures[int(rng.integers(1, 3))]
        )
        vectors = SnippetVectors(
            snippet_id=f"toy{n}",
            context=_sparse(rng, context_dim, 3),
            responses=tuple(_sparse(rng, response_dim, 2) for _ in range(size)),
        )
        labels = SnippetLabels(
            intention,
            disclosure,
            tuple(
                ResponseLabels(
                    interpretations[int(rng.integers(0, 3))],
                    strategies[int(rng.integers(0, NUM_STRATEGIES))],
                )
                for _ in range(size)
            ),
        )
        examples.append((vectors, labels))
    return examples


def _crf_gradient_deviation(
    rng: np.random.Generator,
    dataset: CrfDataset,
    points: int,
    l2: float,
    step: float,
) -> float:
    template = CrfParams.zeros(
        dataset.contexts.shape[1], dataset.responses.shape[1], dataset.tasks
    )

    def objective(vector: np.ndarray) -> ObjectiveEvaluation:
        return crf_objective(dataset, template.from_vector(vector), l2)

    size = len(template.to_vector())
    return max(
        check_gradient(objective, rng.normal(size=size), step) for _ in range(points)
    )


def check_gradients(
    seed: int = 0, points: int = 3, l2: float = 0.5, step: float = 1e-5
) -> List[CheckOutcome]:
    """Finite-difference checks of the CRF (full and three-task) and logistic
    regression objectives at `points` random parameter vectors each."""
    rng = np.random.default_rng(seed)
    examples = toy_examples(rng)
    outcomes = [
        CheckOutcome(
            name,
            _crf_gradient_deviation(
                rng, CrfDataset.build(examples, tasks), points, l2, step
            ),
            GRADIENT_TOLERANCE,
        )
        for tasks, name in (
            (JOINT_TASKS, "crf-gradient"),
            (TWO_PASS_TASKS, "crf3-gradient"),
        )
    ]

    instances = [vectors.context for vectors, _ in examples] * 2
    y = [int(rng.integers(0, 3)) for _ in instances]
    labels = ["a", "b", "c"]
    dimension = instances[0].dimension

    def logreg(vector: np.ndarray) -> ObjectiveEvaluation:
        return logreg_objective(
            instances, y, LogRegWeights.from_vector(vector, labels, dimension), l2
        )

    deviation = max(
        check_gradient(logreg, rng.normal(size=len(labels) * (dimension + 1)), step)
        for _ in range(points)
    )
    outcomes.append(CheckOutcome("logreg-gradient", deviation, GRADIENT_TOLERANCE))
    return outcomes


def check_two_pass_consistency(draws: int = 50, seed: int = 0) -> CheckOutcome:
    """With `W_B` and `T_RB` zeroed, the full model's intention, disclosure and
    interpretation marginals equal those of the three-task model."""
    rng = np.random.default_rng(seed)
    deviation = 0.0
    for vectors, _ in toy_examples(rng, snippets=draws):
        full = CrfParams.zeros(
            vectors.context.dimension, vectors.responses[0].dimension, JOINT_TASKS
        )
        full = full.from_vector(rng.normal(size=len(full.to_vector()))).replace(
            W_B=np.zeros_like(full["W_B"]), T_RB=np.zeros_like(full["T_RB"])
        )
        reduced = CrfParams(
            full.context_dim,
            full.response_dim,
            TWO_PASS_TASKS,
            {
                name: full[name]
                for name, _ in CrfParams.zeros(1, 1, TWO_PASS_TASKS).layout
            },
        )
        ours = infer_exact(build_snippet_graph(vectors, full), with_map=False)
        theirs = infer_exact(build_snippet_graph(vectors, reduced), with_map=False)
        for a, b in (
            (ours.p_i, theirs.p_i),
            (ours.p_d, theirs.p_d),
            (ours.p_r, theirs.p_r),
            (ours.p_ir, theirs.p_ir),
            (ours.p_dr, theirs.p_dr),
        ):
            deviation = max(deviation, float(np.max(np.abs(a - b))))
    return CheckOutcome("two-pass", deviation, CONSISTENCY_TOLERANCE)


@dataclass(frozen=True)
class SelfCheckResult:
    outcomes: Tuple[CheckOutcome, ...]

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    def lines(self) -> List[str]:
        return [
            f"{outcome.name:<16} max deviation {outcome.deviation:.3e} "
            f"(tolerance {outcome.tolerance:.0e})"
            + (f", {outcome.failures} failure(s)" if outcome.failures else "")
            + (" PASS" if outcome.passed else " FAIL")
            for outcome in self.outcomes
        ]


def run_selfcheck(
    seed: int = 0, draws: int = 200, max_responses: int = 3
) -> SelfCheckResult:
    """Run every oracle."""
    outcomes = (
        check_inference(draws, seed, max_responses),
        check_uniform(),
        *check_gradients(seed),
        check_two_pass_consistency(seed=seed),
    )
    for outcome in outcomes:
        logger.info(
            "%s: deviation %.3e (%s)",
            outcome.name,
            outcome.deviation,
            "pass" if outcome.passed else "fail",
        )
    return SelfCheckResult(outcomes)
