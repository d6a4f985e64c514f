"""The joint conditional random field over one snippet.

Each snippet is a factor graph over the intention `i`, the disclosure `d`, and for every
response `k` its interpretation `r_k` and strategy `b_k`. Unary factors score `i` and
`d` from the context vector (suspect plus parent) and `r_k`, `b_k` from the response's
own vector; pairwise label tables couple `i` with `r_k`, `d` with `r_k` and `r_k`
with `b_k`. Parameters are tied across responses and snippets.

Inference is exact: every `b_k` is summed (or maximized) into its `r_k`, every `r_k`
into the `(i, d)` pair, and the nine `(i, d)` combinations are enumerated. The two-pass
variant drops the strategy variables and their factors.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import (
    FrozenSet,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    cast,
)

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

from trollgraph import errors
from trollgraph.features import SnippetVectors, SparseVector, stack
from trollgraph.optim import ObjectiveEvaluation, OptimConfig, minimize
from trollgraph.snippets import (
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    ResponseLabels,
    SnippetLabels,
    StrategyLabel,
    Task,
)

__all__ = [
    "NUM_INTENTIONS",
    "NUM_DISCLOSURES",
    "NUM_INTERPRETATIONS",
    "NUM_STRATEGIES",
    "JOINT_TASKS",
    "TWO_PASS_TASKS",
    "Decoding",
    "CrfParams",
    "SnippetGraph",
    "Assignment",
    "InferenceResult",
    "CrfDataset",
    "build_snippet_graph",
    "infer_exact",
    "score",
    "crf_objective",
    "train_crf",
    "decode_crf",
    "predict_crf",
]

logger = logging.getLogger(__name__)

NUM_INTENTIONS = len(IntentionLabel)
NUM_DISCLOSURES = len(DisclosureLabel)
NUM_INTERPRETATIONS = len(InterpretationLabel)
NUM_STRATEGIES = len(StrategyLabel)

JOINT_TASKS: FrozenSet[Task] = frozenset(Task)
TWO_PASS_TASKS: FrozenSet[Task] = frozenset(
    {Task.INTENTION, Task.DISCLOSURE, Task.INTERPRETATION}
)

_UNARY_BIASES = frozenset({"b_I", "b_D", "b_R", "b_B"})


class Decoding(str, Enum):
    MAP = "map"
    MARGINAL = "marginal"


def _layout(
    context_dim: int, response_dim: int, tasks: FrozenSet[Task]
) -> List[Tuple[str, Tuple[int, ...]]]:
    if tasks not in (JOINT_TASKS, TWO_PASS_TASKS):
        msg = (
            "A CRF covers either all four tasks or intention, disclosure and "
            "interpretation."
        )
        raise ValueError(msg)
    layout: List[Tuple[str, Tuple[int, ...]]] = [
        ("W_I", (NUM_INTENTIONS, context_dim)),
        ("b_I", (NUM_INTENTIONS,)),
        ("W_D", (NUM_DISCLOSURES, context_dim)),
        ("b_D", (NUM_DISCLOSURES,)),
        ("W_R", (NUM_INTERPRETATIONS, response_dim)),
        ("b_R", (NUM_INTERPRETATIONS,)),
    ]
    if Task.STRATEGY in tasks:
        layout += [
            ("W_B", (NUM_STRATEGIES, response_dim)),
            ("b_B", (NUM_STRATEGIES,)),
        ]
    layout += [
        ("T_IR", (NUM_INTENTIONS, NUM_INTERPRETATIONS)),
        ("T_DR", (NUM_DISCLOSURES, NUM_INTERPRETATIONS)),
    ]
    if Task.STRATEGY in tasks:
        layout.append(("T_RB", (NUM_INTERPRETATIONS, NUM_STRATEGIES)))
    return layout


@dataclass(frozen=True, eq=False)
class CrfParams:
    """Weights of a joint model, as named blocks.

    Blocks `W_I`, `W_D` (over the context vocabulary), `W_R` and `W_B` (over the
    response vocabulary) hold unary weights, `b_*` their per-label biases, and `T_IR`,
    `T_DR`, `T_RB` the pairwise label tables. Two-pass parameters have no `W_B`, `b_B`
    or `T_RB`.
    """

    context_dim: int
    response_dim: int
    tasks: FrozenSet[Task]
    blocks: Mapping[str, np.ndarray]

    def __post_init__(self) -> None:
        for name, shape in _layout(self.context_dim, self.response_dim, self.tasks):
            block = self.blocks.get(name)
            if block is None or block.shape != shape:
                msg = f"Block {name} must have shape {shape}."
                raise ValueError(msg)
        extra = set(self.blocks) - {name for name, _ in self.layout}
        if extra:
            msg = f"Unexpected blocks: {', '.join(sorted(extra))}."
            raise ValueError(msg)

    @property
    def layout(self) -> List[Tuple[str, Tuple[int, ...]]]:
        return _layout(self.context_dim, self.response_dim, self.tasks)

    @property
    def joint(self) -> bool:
        return Task.STRATEGY in self.tasks

    def __getitem__(self, name: str) -> np.ndarray:
        return self.blocks[name]

    @classmethod
    def zeros(
        cls,
        context_dim: int,
        response_dim: int,
        tasks: Iterable[Task] = JOINT_TASKS,
    ) -> CrfParams:
        tasks = frozenset(tasks)
        return cls(
            context_dim,
            response_dim,
            tasks,
            {
                name: np.zeros(shape)
                for name, shape in _layout(context_dim, response_dim, tasks)
            },
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.blocks[name].ravel() for name, _ in self.layout])

    def from_vector(self, vector: np.ndarray) -> CrfParams:
        """Parameters with this layout and the values of `vector`."""
        expected = sum(int(np.prod(shape)) for _, shape in self.layout)
        if len(vector) != expected:
            raise errors.DimensionMismatchError(
                expected, len(vector), "parameter vector"
            )
        blocks = {}
        offset = 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            blocks[name] = np.array(vector[offset : offset + size]).reshape(shape)
            offset += size
        return CrfParams(self.context_dim, self.response_dim, self.tasks, blocks)

    def regularization_mask(self) -> np.ndarray:
        """1.0 for every penalized coordinate; unary biases are not penalized."""
        return np.concatenate(
            [
                np.full(int(np.prod(shape)), 0.0 if name in _UNARY_BIASES else 1.0)
                for name, shape in self.layout
            ]
        )

    def replace(self, **blocks: np.ndarray) -> CrfParams:
        return CrfParams(
            self.context_dim,
            self.response_dim,
            self.tasks,
            {**self.blocks, **blocks},
        )


@dataclass(frozen=True, eq=False)
class SnippetGraph:
    """Log-potential tables of one snippet under given parameters.

    Attributes:
        u_i (np.ndarray): Intention unary, shape (3,).
        u_d (np.ndarray): Disclosure unary, shape (3,).
        u_r (np.ndarray): Interpretation unaries, shape (R, 3).
        u_b (np.ndarray, optional): Strategy unaries, shape (R, 14).
        t_ir, t_dr, t_rb (np.ndarray): The pairwise label tables.
    """

    snippet_id: str
    u_i: np.ndarray
    u_d: np.ndarray
    u_r: np.ndarray
    u_b: Optional[np.ndarray]
    t_ir: np.ndarray
    t_dr: np.ndarray
    t_rb: Optional[np.ndarray]

    @property
    def size(self) -> int:
        return int(self.u_r.shape[0])

    @property
    def joint(self) -> bool:
        return self.u_b is not None


class Assignment(NamedTuple):
    """Label indices of every variable of a snippet."""

    intention: int
    disclosure: int
    interpretations: Tuple[int, ...]
    strategies: Optional[Tuple[int, ...]] = None

    @classmethod
    def from_labels(cls, labels: SnippetLabels, *, joint: bool = True) -> Assignment:
        return cls(
            labels.intention.index,
            labels.disclosure.index,
            tuple(r.interpretation.index for r in labels.per_response),
            tuple(r.strategy.index for r in labels.per_response) if joint else None,
        )

    def to_labels(self) -> SnippetLabels:
        if self.strategies is None:
            msg = "The assignment has no strategy labels."
            raise ValueError(msg)
        interpretations = list(InterpretationLabel)
        strategies = list(StrategyLabel)
        return SnippetLabels(
            intention=list(IntentionLabel)[self.intention],
            disclosure=list(DisclosureLabel)[self.disclosure],
            per_response=tuple(
                ResponseLabels(interpretations[r], strategies[b])
                for r, b in zip(self.interpretations, self.strategies)
            ),
        )


@dataclass(frozen=True, eq=False)
class InferenceResult:
    """Exact inference outputs.

    Pairwise marginals are stacked per response: `p_ir[k]` is the (3, 3) table of
    `p(i, r_k)`, `p_dr[k]` of `p(d, r_k)` and `p_rb[k]` the (3, 14) table of
    `p(r_k, b_k)`.
    """

    log_z: float
    p_i: np.ndarray
    p_d: np.ndarray
    p_r: np.ndarray
    p_b: Optional[np.ndarray]
    p_ir: np.ndarray
    p_dr: np.ndarray
    p_rb: Optional[np.ndarray]
    map: Optional[Assignment]


def _unary(weights: np.ndarray, bias: np.ndarray, vector: SparseVector) -> np.ndarray:
    return weights[:, vector.indices] @ vector.values + bias


def build_snippet_graph(vectors: SnippetVectors, params: CrfParams) -> SnippetGraph:
    """Compute the log-potential tables of a snippet.

    Raises:
        errors.DimensionMismatchError: If a vector does not match the parameters.
        errors.LabelError: If the snippet has no response.
    """
    if vectors.context.dimension != params.context_dim:
        raise errors.DimensionMismatchError(
            params.context_dim, vectors.context.dimension, "context vector"
        )
    for response in vectors.responses:
        if response.dimension != params.response_dim:
            raise errors.DimensionMismatchError(
                params.response_dim, response.dimension, "response vector"
            )
    if not vectors.responses:
        msg = f'Snippet "{vectors.snippet_id}" has no response.'
        raise errors.LabelError(msg)
    return SnippetGraph(
        snippet_id=vectors.snippet_id,
        u_i=_unary(params["W_I"], params["b_I"], vectors.context),
        u_d=_unary(params["W_D"], params["b_D"], vectors.context),
        u_r=np.stack(
            [_unary(params["W_R"], params["b_R"], r) for r in vectors.responses]
        ),
        u_b=(
            np.stack(
                [_unary(params["W_B"], params["b_B"], r) for r in vectors.responses]
            )
            if params.joint
            else None
        ),
        t_ir=params["T_IR"],
        t_dr=params["T_DR"],
        t_rb=params["T_RB"] if params.joint else None,
    )


def infer_exact(graph: SnippetGraph, *, with_map: bool = True) -> InferenceResult:
    """Exact log-partition, unary and pairwise marginals and MAP assignment.

    MAP ties are broken towards the lowest label indices in the order `i`, `d`, `r_1`,
    `b_1`, `r_2`, ...
    """
    if graph.u_b is not None and graph.t_rb is not None:
        strategy_scores = graph.t_rb[None, :, :] + graph.u_b[:, None, :]
        node_r = graph.u_r + logsumexp(strategy_scores, axis=2)
        node_r_max = graph.u_r + strategy_scores.max(axis=2)
    else:
        strategy_scores = None
        node_r = node_r_max = graph.u_r

    pair_tables = graph.t_ir[None, :, None, :] + graph.t_dr[None, None, :, :]
    scores = pair_tables + node_r[:, None, None, :]
    messages = logsumexp(scores, axis=3)
    joint = graph.u_i[:, None] + graph.u_d[None, :] + messages.sum(axis=0)
    log_z = float(logsumexp(joint))

    p_id = np.exp(joint - log_z)
    p_idr = p_id[None, :, :, None] * np.exp(scores - messages[..., None])
    p_r = p_idr.sum(axis=(1, 2))
    if strategy_scores is not None:
        conditional_b = np.exp(
            strategy_scores - logsumexp(strategy_scores, axis=2, keepdims=True)
        )
        strategy_pairs = p_r[:, :, None] * conditional_b
        p_rb: Optional[np.ndarray] = strategy_pairs
        p_b: Optional[np.ndarray] = strategy_pairs.sum(axis=1)
    else:
        p_rb = p_b = None

    best = None
    if with_map:
        max_scores = pair_tables + node_r_max[:, None, None, :]
        best_r = max_scores.argmax(axis=3)
        joint_max = (
            graph.u_i[:, None] + graph.u_d[None, :] + max_scores.max(axis=3).sum(0)
        )
        i, d = divmod(int(np.argmax(joint_max)), NUM_DISCLOSURES)
        interpretations = tuple(int(r) for r in best_r[:, i, d])
        strategies = None
        if strategy_scores is not None:
            strategies = tuple(
                int(np.argmax(strategy_scores[k, r]))
                for k, r in enumerate(interpretations)
            )
        best = Assignment(i, d, interpretations, strategies)

    return InferenceResult(
        log_z=log_z,
        p_i=p_id.sum(axis=1),
        p_d=p_id.sum(axis=0),
        p_r=p_r,
        p_b=p_b,
        p_ir=p_idr.sum(axis=2),
        p_dr=p_idr.sum(axis=1),
        p_rb=p_rb,
        map=best,
    )


def score(graph: SnippetGraph, assignment: Assignment) -> float:
    """Unnormalized log-score of one full assignment."""
    i, d = assignment.intention, assignment.disclosure
    total = graph.u_i[i] + graph.u_d[d]
    for k, r in enumerate(assignment.interpretations):
        total += graph.u_r[k, r] + graph.t_ir[i, r] + graph.t_dr[d, r]
        if graph.u_b is not None and graph.t_rb is not None:
            if assignment.strategies is None:
                msg = "A joint graph needs strategy labels."
                raise errors.LabelError(msg)
            b = assignment.strategies[k]
            total += graph.u_b[k, b] + graph.t_rb[r, b]
    return float(total)


@dataclass(frozen=True, eq=False)
class CrfDataset:
    """Labeled snippets stacked for objective evaluation.

    Context vectors are the rows of `contexts`; the response vectors of snippet `n` are
    the rows `offsets[n]:offsets[n + 1]` of `responses`.
    """

    snippet_ids: Tuple[str, ...]
    contexts: sparse.csr_matrix
    responses: sparse.csr_matrix
    offsets: np.ndarray
    gold: Tuple[Assignment, ...]
    tasks: FrozenSet[Task]

    def __len__(self) -> int:
        return len(self.snippet_ids)

    @classmethod
    def build(
        cls,
        examples: Sequence[Tuple[SnippetVectors, Optional[SnippetLabels]]],
        tasks: Iterable[Task] = JOINT_TASKS,
    ) -> CrfDataset:
        """Stack labeled snippet vectors.

        Raises:
            ValueError: If there is no example.
            errors.MissingLabelsError: If an example has no labels.
            errors.LabelError: If a snippet has no response or its labels do not cover
                exactly its responses.
        """
        tasks = frozenset(tasks)
        if not examples:
            msg = "A CRF needs at least one labeled snippet."
            raise ValueError(msg)
        missing = [vectors.snippet_id for vectors, labels in examples if labels is None]
        if missing:
            raise errors.MissingLabelsError(missing)
        gold = []
        for vectors, maybe_labels in examples:
            labels = cast(SnippetLabels, maybe_labels)
            if vectors.size == 0:
                msg = f'Snippet "{vectors.snippet_id}" has no response.'
                raise errors.LabelError(msg)
            if len(labels.per_response) != vectors.size:
                msg = (
                    f'Snippet "{vectors.snippet_id}" has {vectors.size} '
                    f"response(s) but {len(labels.per_response)} response label(s)."
                )
                raise errors.LabelError(msg)
            gold.append(Assignment.from_labels(labels, joint=Task.STRATEGY in tasks))
        context_dim = examples[0][0].context.dimension
        response_dim = examples[0][0].responses[0].dimension
        sizes = [vectors.size for vectors, _ in examples]
        return cls(
            snippet_ids=tuple(vectors.snippet_id for vectors, _ in examples),
            contexts=stack([vectors.context for vectors, _ in examples], context_dim),
            responses=stack(
                [r for vectors, _ in examples for r in vectors.responses], response_dim
            ),
            offsets=np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64),
            gold=tuple(gold),
            tasks=tasks,
        )


class _SnippetTerms(NamedTuple):
    nll: float
    r_i: np.ndarray
    r_d: np.ndarray
    r_r: np.ndarray
    r_b: Optional[np.ndarray]
    g_ir: np.ndarray
    g_dr: np.ndarray
    g_rb: Optional[np.ndarray]


def _one_hot(indices: Sequence[int], size: int) -> np.ndarray:
    table = np.zeros((len(indices), size))
    table[np.arange(len(indices)), list(indices)] = 1.0
    return table


def _snippet_terms(graph: SnippetGraph, gold: Assignment) -> _SnippetTerms:
    result = infer_exact(graph, with_map=False)
    interpretations = list(gold.interpretations)
    g_ir = result.p_ir.sum(axis=0)
    np.add.at(g_ir, (gold.intention, interpretations), -1.0)
    g_dr = result.p_dr.sum(axis=0)
    np.add.at(g_dr, (gold.disclosure, interpretations), -1.0)
    r_b = g_rb = None
    if result.p_b is not None and result.p_rb is not None:
        strategies = list(gold.strategies or ())
        r_b = result.p_b - _one_hot(strategies, NUM_STRATEGIES)
        g_rb = result.p_rb.sum(axis=0)
        np.add.at(g_rb, (interpretations, strategies), -1.0)
    return _SnippetTerms(
        nll=result.log_z - score(graph, gold),
        r_i=result.p_i - _one_hot([gold.intention], NUM_INTENTIONS)[0],
        r_d=result.p_d - _one_hot([gold.disclosure], NUM_DISCLOSURES)[0],
        r_r=result.p_r - _one_hot(interpretations, NUM_INTERPRETATIONS),
        r_b=r_b,
        g_ir=g_ir,
        g_dr=g_dr,
        g_rb=g_rb,
    )


def crf_objective(
    dataset: CrfDataset,
    params: CrfParams,
    l2: float,
    executor: Optional[ThreadPoolExecutor] = None,
) -> ObjectiveEvaluation:
    """Regularized negative conditional log-likelihood and its gradient.

    The value is `sum(log Z - score(gold)) + l2/2 * ||theta||^2` over the snippets,
    with unary biases left unpenalized. The gradient (expected minus empirical
    feature counts) is laid out like `CrfParams.to_vector`. Per-snippet terms may be
    computed by `executor`; they are always reduced in snippet order.

    Raises:
        errors.LabelError: If the dataset and the parameters cover different tasks.
    """
    if dataset.tasks != params.tasks:
        msg = "The dataset and the parameters cover different tasks."
        raise errors.LabelError(msg)
    u_i = np.asarray(dataset.contexts @ params["W_I"].T) + params["b_I"]
    u_d = np.asarray(dataset.contexts @ params["W_D"].T) + params["b_D"]
    u_r = np.asarray(dataset.responses @ params["W_R"].T) + params["b_R"]
    u_b = (
        np.asarray(dataset.responses @ params["W_B"].T) + params["b_B"]
        if params.joint
        else None
    )

    def terms(n: int) -> _SnippetTerms:
        start, end = dataset.offsets[n], dataset.offsets[n + 1]
        graph = SnippetGraph(
            snippet_id=dataset.snippet_ids[n],
            u_i=u_i[n],
            u_d=u_d[n],
            u_r=u_r[start:end],
            u_b=u_b[start:end] if u_b is not None else None,
            t_ir=params["T_IR"],
            t_dr=params["T_DR"],
            t_rb=params["T_RB"] if params.joint else None,
        )
        return _snippet_terms(graph, dataset.gold[n])

    indices = range(len(dataset))
    results = list(executor.map(terms, indices) if executor else map(terms, indices))

    value = 0.0
    g_ir = np.zeros_like(params["T_IR"])
    g_dr = np.zeros_like(params["T_DR"])
    g_rb = np.zeros_like(params["T_RB"]) if params.joint else None
    for result in results:
        value += result.nll
        g_ir += result.g_ir
        g_dr += result.g_dr
        if g_rb is not None and result.g_rb is not None:
            g_rb += result.g_rb
    r_i = np.stack([result.r_i for result in results])
    r_d = np.stack([result.r_d for result in results])
    r_r = np.concatenate([result.r_r for result in results])

    def weight_gradient(
        X: sparse.csr_matrix,  # noqa: N803
        residuals: np.ndarray,
    ) -> np.ndarray:
        return np.asarray(X.T @ residuals).T

    gradients = {
        "W_I": weight_gradient(dataset.contexts, r_i),
        "b_I": r_i.sum(axis=0),
        "W_D": weight_gradient(dataset.contexts, r_d),
        "b_D": r_d.sum(axis=0),
        "W_R": weight_gradient(dataset.responses, r_r),
        "b_R": r_r.sum(axis=0),
        "T_IR": g_ir,
        "T_DR": g_dr,
    }
    if params.joint:
        r_b = np.concatenate([result.r_b for result in results])  # type: ignore[misc]
        gradients.update(
            {
                "W_B": weight_gradient(dataset.responses, r_b),
                "b_B": r_b.sum(axis=0),
                "T_RB": g_rb,  # type: ignore[dict-item]
            }
        )

    theta = params.to_vector()
    penalized = theta * params.regularization_mask()
    gradient = params.from_vector(np.zeros_like(theta)).replace(**gradients).to_vector()
    return ObjectiveEvaluation(
        value + 0.5 * l2 * float(penalized @ penalized),
        gradient + l2 * penalized,
    )


def train_crf(
    examples: Sequence[Tuple[SnippetVectors, Optional[SnippetLabels]]],
    tasks: Iterable[Task] = JOINT_TASKS,
    l2: float = 1.0,
    config: Optional[OptimConfig] = None,
    threads: int = 1,
) -> CrfParams:
    """Maximum conditional likelihood training from zero parameters.

    Args:
        examples: Snippet vectors with their gold labels.
        tasks: `JOINT_TASKS` for the full model or `TWO_PASS_TASKS` for the model
            without strategy variables.
        l2: Regularization strength.
        config: Minimizer settings.
        threads: Number of threads evaluating per-snippet terms.

    Returns:
        CrfParams: The trained parameters.

    Raises:
        errors.OptimizationError: Propagated from the minimizer.
    """
    dataset = CrfDataset.build(examples, tasks)
    template = CrfParams.zeros(
        dataset.contexts.shape[1], dataset.responses.shape[1], dataset.tasks
    )

    def run(executor: Optional[ThreadPoolExecutor]) -> np.ndarray:
        def objective(vector: np.ndarray) -> ObjectiveEvaluation:
            return crf_objective(dataset, template.from_vector(vector), l2, executor)

        result = minimize(objective, template.to_vector(), config)
        logger.info(
            "Trained a CRF on %d snippets: value %.6g after %d iterations%s",
            len(dataset),
            result.value,
            result.iterations,
            "" if result.converged else " (not converged)",
        )
        return result.x

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return template.from_vector(run(executor))
    return template.from_vector(run(None))


def decode_crf(
    params: CrfParams,
    vectors: SnippetVectors,
    decoding: Decoding = Decoding.MAP,
) -> Assignment:
    """Joint MAP assignment, or the per-variable argmax of the marginals."""
    result = infer_exact(build_snippet_graph(vectors, params))
    if decoding is Decoding.MAP:
        return cast(Assignment, result.map)
    return Assignment(
        intention=int(np.argmax(result.p_i)),
        disclosure=int(np.argmax(result.p_d)),
        interpretations=tuple(int(k) for k in np.argmax(result.p_r, axis=1)),
        strategies=(
            tuple(int(k) for k in np.argmax(result.p_b, axis=1))
            if result.p_b is not None
            else None
        ),
    )


def predict_crf(
    params: CrfParams,
    vectors: SnippetVectors,
    decoding: Decoding = Decoding.MAP,
) -> SnippetLabels:
    """Labels of a snippet under the full joint model.

    Raises:
        ValueError: If the parameters have no strategy blocks.
        errors.DimensionMismatchError: If the vectors do not match the parameters.
    """
    if not params.joint:
        msg = "Two-pass parameters do not predict strategies; use decode_crf."
        raise ValueError(msg)
    return decode_crf(params, vectors, decoding).to_labels()
