"""Limited-memory BFGS and multinomial logistic regression.

`minimize` is the numeric engine shared by every model: the pipeline classifiers
minimize `logreg_objective` and the joint models minimize `crf.crf_objective`.
"""

from __future__ import annotations

import logging
import warnings
from collections import deque
from dataclasses import dataclass
from typing import (
    Callable,
    Deque,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
    cast,
)

import numpy as np
from scipy import sparse
from scipy.optimize import line_search
from scipy.special import logsumexp

from trollgraph import errors
from trollgraph.features import SparseVector, stack

__all__ = [
    "OptimConfig",
    "ObjectiveEvaluation",
    "Objective",
    "OptimResult",
    "LogRegWeights",
    "minimize",
    "check_gradient",
    "logreg_objective",
    "train_logreg",
    "predict_logreg",
    "predict_logreg_batch",
]

logger = logging.getLogger(__name__)

_CURVATURE_EPS = 1e-10


@dataclass(frozen=True)
class OptimConfig:
    """Settings of the L-BFGS minimizer.

    Attributes:
        memory (int): Number of correction pairs kept.
        max_iterations (int): Iteration cap.
        gradient_tolerance (float): Stop once the max-norm of the gradient is below it.
        c1 (float): Sufficient-decrease constant of the line search.
        c2 (float): Curvature constant of the line search.
    """

    memory: int = 10
    max_iterations: int = 500
    gradient_tolerance: float = 1e-5
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self) -> None:
        if self.memory < 1:
            msg = f"memory must be at least 1 (got {self.memory})."
            raise ValueError(msg)
        if self.max_iterations < 1:
            msg = f"max_iterations must be at least 1 (got {self.max_iterations})."
            raise ValueError(msg)
        if self.gradient_tolerance <= 0:
            msg = "gradient_tolerance must be positive."
            raise ValueError(msg)
        if not 0 < self.c1 < self.c2 < 1:
            msg = f"Expected 0 < c1 < c2 < 1 (got c1={self.c1}, c2={self.c2})."
            raise ValueError(msg)


class ObjectiveEvaluation(NamedTuple):
    value: float
    gradient: np.ndarray


Objective = Callable[[np.ndarray], ObjectiveEvaluation]


@dataclass(frozen=True, eq=False)
class OptimResult:
    x: np.ndarray
    value: float
    gradient: np.ndarray
    iterations: int
    converged: bool
    history: Tuple[float, ...]


class _CachedObjective:
    """Evaluate once per point; the line search asks for value and gradient apart."""

    def __init__(self, objective: Objective) -> None:
        self._objective = objective
        self._x: Optional[np.ndarray] = None
        self._evaluation: Optional[ObjectiveEvaluation] = None
        self.evaluations = 0

    def __call__(self, x: np.ndarray) -> ObjectiveEvaluation:
        if self._x is None or not np.array_equal(x, self._x):
            value, gradient = self._objective(x)
            self.evaluations += 1
            gradient = np.asarray(gradient, dtype=np.float64)
            if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
                msg = (
                    f"Non-finite objective at evaluation {self.evaluations} "
                    f"(value={value}, max |x|={np.max(np.abs(x), initial=0.0):.3g})."
                )
                raise errors.OptimizationError(msg)
            self._x = np.array(x, copy=True)
            self._evaluation = ObjectiveEvaluation(float(value), gradient)
        return cast(ObjectiveEvaluation, self._evaluation)

    def value(self, x: np.ndarray) -> float:
        return self(x).value

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self(x).gradient


def _two_loop(
    gradient: np.ndarray, pairs: Deque[Tuple[np.ndarray, np.ndarray, float]]
) -> np.ndarray:
    """Product of the implicit inverse Hessian approximation with the gradient."""
    q = gradient.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        alpha = rho * (s @ q)
        alphas.append(alpha)
        q -= alpha * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), alpha in zip(pairs, reversed(alphas)):
        beta = rho * (y @ q)
        q += (alpha - beta) * s
    return q


def _search(
    objective: _CachedObjective,
    x: np.ndarray,
    direction: np.ndarray,
    evaluation: ObjectiveEvaluation,
    previous_value: float,
    config: OptimConfig,
) -> Optional[float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        step = line_search(
            objective.value,
            objective.gradient,
            x,
            direction,
            gfk=evaluation.gradient,
            old_fval=evaluation.value,
            old_old_fval=previous_value,
            c1=config.c1,
            c2=config.c2,
        )[0]
    return None if step is None else float(step)


def minimize(
    objective: Objective, x0: np.ndarray, config: Optional[OptimConfig] = None
) -> OptimResult:
    """Minimize a smooth function with L-BFGS.

    Directions come from the two-loop recursion over the last `config.memory`
    correction pairs; steps satisfy the strong Wolfe conditions. When the line search
    fails, the memory is dropped and a steepest-descent step is tried once; if that
    fails too the run is aborted.

    Args:
        objective (Objective): Maps parameters to value and gradient.
        x0 (np.ndarray): The starting point.
        config (OptimConfig, optional): The minimizer settings.

    Returns:
        OptimResult: The final point and its value, the number of iterations, whether
            the gradient tolerance was met and the sequence of accepted values.

    Raises:
        errors.OptimizationError: If the objective or its gradient is not finite, or
            no acceptable step exists along the steepest-descent direction.
    """
    config = config or OptimConfig()
    cached = _CachedObjective(objective)
    x = np.array(x0, dtype=np.float64, copy=True)
    evaluation = cached(x)
    history: List[float] = [evaluation.value]
    pairs: Deque[Tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=config.memory)
    previous_value = evaluation.value + np.linalg.norm(evaluation.gradient) / 2
    iterations = 0

    def converged(gradient: np.ndarray) -> bool:
        return float(np.max(np.abs(gradient), initial=0.0)) < config.gradient_tolerance

    while not converged(evaluation.gradient) and iterations < config.max_iterations:
        direction = -_two_loop(evaluation.gradient, pairs)
        if direction @ evaluation.gradient >= 0:
            pairs.clear()
            direction = -evaluation.gradient
        step = _search(cached, x, direction, evaluation, previous_value, config)
        if step is None and pairs:
            logger.warning(
                "Line search failed at iteration %d, retrying with steepest descent",
                iterations,
            )
            pairs.clear()
            direction = -evaluation.gradient
            step = _search(cached, x, direction, evaluation, previous_value, config)
        if step is None:
            msg = (
                f"No acceptable step at iteration {iterations} "
                f"(value {evaluation.value:.6g}), even along steepest descent."
            )
            raise errors.OptimizationError(msg)

        x_next = x + step * direction
        next_evaluation = cached(x_next)
        s = x_next - x
        y = next_evaluation.gradient - evaluation.gradient
        curvature = float(s @ y)
        if curvature > _CURVATURE_EPS:
            pairs.append((s, y, 1.0 / curvature))
        previous_value = evaluation.value
        x, evaluation = x_next, next_evaluation
        history.append(evaluation.value)
        iterations += 1
        logger.debug("iteration %d: value %.10g", iterations, evaluation.value)

    return OptimResult(
        x=x,
        value=evaluation.value,
        gradient=evaluation.gradient,
        iterations=iterations,
        converged=converged(evaluation.gradient),
        history=tuple(history),
    )


def check_gradient(objective: Objective, x: np.ndarray, step: float = 1e-5) -> float:
    """Largest relative deviation between the analytic gradient and central
    differences, coordinate by coordinate.

    The deviation of a coordinate is `|numeric - analytic| / max(1, |numeric|,
    |analytic|)`.
    """
    x = np.asarray(x, dtype=np.float64)
    analytic = objective(x).gradient
    numeric = np.empty_like(x)
    for j in range(len(x)):
        forward = x.copy()
        backward = x.copy()
        forward[j] += step
        backward[j] -= step
        numeric[j] = (objective(forward).value - objective(backward).value) / (2 * step)
    scale = np.maximum(1.0, np.maximum(np.abs(numeric), np.abs(analytic)))
    return float(np.max(np.abs(numeric - analytic) / scale, initial=0.0))


@dataclass(frozen=True, eq=False)
class LogRegWeights:
    """Weights of a multinomial logistic regression.

    Attributes:
        weights (np.ndarray): One row of feature weights per label.
        bias (np.ndarray): One bias per label.
        labels (Tuple[str, ...]): The label names, in index order.
    """

    weights: np.ndarray
    bias: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            msg = "The label list cannot be empty."
            raise ValueError(msg)
        if self.weights.shape[0] != len(self.labels) or self.bias.shape != (
            len(self.labels),
        ):
            msg = "weights and bias must have one row per label."
            raise ValueError(msg)

    @property
    def dimension(self) -> int:
        return int(self.weights.shape[1])

    @classmethod
    def zeros(cls, labels: Sequence[str], dimension: int) -> LogRegWeights:
        return cls(
            np.zeros((len(labels), dimension)), np.zeros(len(labels)), tuple(labels)
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.weights.ravel(), self.bias])

    @classmethod
    def from_vector(
        cls, vector: np.ndarray, labels: Sequence[str], dimension: int
    ) -> LogRegWeights:
        k = len(labels)
        return cls(
            weights=vector[: k * dimension].reshape(k, dimension).copy(),
            bias=vector[k * dimension :].copy(),
            labels=tuple(labels),
        )


Features = Union[sparse.csr_matrix, Sequence[SparseVector]]


def _as_matrix(X: Features, dimension: int) -> sparse.csr_matrix:  # noqa: N803
    if sparse.issparse(X):
        if X.shape[1] != dimension:
            raise errors.DimensionMismatchError(dimension, X.shape[1])
        return sparse.csr_matrix(X)
    return stack(list(X), dimension)


def _check_labels(y: np.ndarray, num_labels: int) -> None:
    if len(y) and (y.min() < 0 or y.max() >= num_labels):
        msg = f"Label indices must lie in [0, {num_labels}) (got {y.min()}..{y.max()})."
        raise errors.LabelError(msg)


class _LogRegProblem:
    def __init__(
        self,
        X: sparse.csr_matrix,  # noqa: N803
        y: np.ndarray,
        num_labels: int,
        l2: float,
    ) -> None:
        self.X = X
        self.y = y
        self.num_labels = num_labels
        self.l2 = l2
        self.dimension = X.shape[1]

    def __call__(self, vector: np.ndarray) -> ObjectiveEvaluation:
        k, d = self.num_labels, self.dimension
        weights = vector[: k * d].reshape(k, d)
        bias = vector[k * d :]
        scores = np.asarray(self.X @ weights.T) + bias
        log_probs = scores - logsumexp(scores, axis=1, keepdims=True)
        rows = np.arange(len(self.y))
        value = -float(np.sum(log_probs[rows, self.y]))
        value += 0.5 * self.l2 * float(np.sum(weights * weights))
        residuals = np.exp(log_probs)
        residuals[rows, self.y] -= 1.0
        weight_gradient = np.asarray(self.X.T @ residuals).T + self.l2 * weights
        return ObjectiveEvaluation(
            value,
            np.concatenate([weight_gradient.ravel(), residuals.sum(axis=0)]),
        )


def logreg_objective(
    X: Features,  # noqa: N803
    y: Sequence[int],
    weights: LogRegWeights,
    l2: float,
) -> ObjectiveEvaluation:
    """Regularized negative log-likelihood of a logistic regression and its gradient.

    The value is `-sum(log p(y_n | x_n)) + l2/2 * ||W||^2`; biases are not penalized.
    The gradient is laid out like `LogRegWeights.to_vector`.

    Raises:
        errors.LabelError: If a label index is out of range.
    """
    labels = np.asarray(y, dtype=np.int64)
    _check_labels(labels, len(weights.labels))
    matrix = _as_matrix(X, weights.dimension)
    if matrix.shape[0] != len(labels):
        msg = f"Got {matrix.shape[0]} instances but {len(labels)} labels."
        raise ValueError(msg)
    return _LogRegProblem(matrix, labels, len(weights.labels), l2)(weights.to_vector())


def train_logreg(
    X: Features,  # noqa: N803
    y: Sequence[int],
    labels: Sequence[str],
    dimension: int,
    l2: float = 1.0,
    config: Optional[OptimConfig] = None,
) -> LogRegWeights:
    """Fit a logistic regression from zero weights.

    Raises:
        errors.InsufficientLabelsError: If `y` holds fewer than two distinct labels.
        errors.OptimizationError: Propagated from the minimizer.
    """
    targets = np.asarray(y, dtype=np.int64)
    _check_labels(targets, len(labels))
    if len(np.unique(targets)) < 2:  # noqa: PLR2004
        raise errors.InsufficientLabelsError
    matrix = _as_matrix(X, dimension)
    problem = _LogRegProblem(matrix, targets, len(labels), l2)
    x0 = LogRegWeights.zeros(labels, dimension).to_vector()
    result = minimize(problem, x0, config)
    logger.debug(
        "Trained a %d-label classifier on %d instances in %d iterations",
        len(labels),
        len(targets),
        result.iterations,
    )
    return LogRegWeights.from_vector(result.x, labels, dimension)


def predict_logreg_batch(
    weights: LogRegWeights, X: Features  # noqa: N803
) -> Tuple[np.ndarray, np.ndarray]:
    """Predicted label indices and distributions of many instances."""
    matrix = _as_matrix(X, weights.dimension)
    scores = np.asarray(matrix @ weights.weights.T) + weights.bias
    distributions = np.exp(scores - logsumexp(scores, axis=1, keepdims=True))
    return np.argmax(scores, axis=1), distributions


def predict_logreg(weights: LogRegWeights, x: SparseVector) -> Tuple[int, np.ndarray]:
    """Most probable label (lowest index on ties) and the distribution over labels.

    Raises:
        errors.DimensionMismatchError: If `x` does not match the weights.
    """
    if x.dimension != weights.dimension:
        raise errors.DimensionMismatchError(weights.dimension, x.dimension)
    scores = weights.weights[:, x.indices] @ x.values + weights.bias
    distribution = np.exp(scores - logsumexp(scores))
    return int(np.argmax(scores)), distribution
