from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies
from pytest_mock import MockerFixture
from scipy import sparse

from trollgraph import errors
from trollgraph.optim import (
    LogRegWeights,
    ObjectiveEvaluation,
    OptimConfig,
    check_gradient,
    logreg_objective,
    minimize,
    predict_logreg,
    predict_logreg_batch,
    train_logreg,
)
from trollgraph.features import SparseVector


def rosenbrock(x: np.ndarray) -> ObjectiveEvaluation:
    a, b = x
    value = (1 - a) ** 2 + 100 * (b - a * a) ** 2
    gradient = np.array(
        [-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)]
    )
    return ObjectiveEvaluation(float(value), gradient)


def quadratic(x: np.ndarray) -> ObjectiveEvaluation:
    scales = np.arange(1, len(x) + 1, dtype=float)
    return ObjectiveEvaluation(float(np.sum(scales * x * x)), 2 * scales * x)


@pytest.fixture()
def separable() -> sparse.csr_matrix:
    return sparse.csr_matrix(
        np.array(
            [
                [1.0, 0.0, 0.0],
                [1.0, 0.0, 0.5],
                [0.0, 1.0, 0.0],
                [0.0, 1.0, 0.5],
                [0.0, 0.0, 1.0],
                [0.2, 0.0, 1.0],
            ]
        )
    )


class DescribeMinimize:
    def it_solves_the_rosenbrock_function(self):
        result = minimize(
            rosenbrock,
            np.array([-1.2, 1.0]),
            OptimConfig(gradient_tolerance=1e-7, max_iterations=500),
        )
        assert result.iterations <= 500
        assert np.allclose(result.x, [1.0, 1.0], atol=1e-6)

    def it_never_increases_the_objective(self):
        result = minimize(quadratic, np.full(6, 3.0))
        history = result.history
        assert all(later <= earlier for earlier, later in zip(history, history[1:]))
        assert result.value < 1e-9

    def it_stops_at_once_on_a_stationary_point(self):
        result = minimize(quadratic, np.zeros(3))
        assert result.iterations == 0
        assert result.converged

    def it_honors_the_iteration_cap(self):
        result = minimize(
            rosenbrock, np.array([-1.2, 1.0]), OptimConfig(max_iterations=3)
        )
        assert result.iterations == 3
        assert not result.converged

    def it_rejects_non_finite_objectives(self):
        def broken(x: np.ndarray) -> ObjectiveEvaluation:
            return ObjectiveEvaluation(math.nan, np.ones_like(x))

        with pytest.raises(errors.OptimizationError):
            minimize(broken, np.ones(2))

    def it_aborts_on_repeated_line_search_failure(self, mocker: MockerFixture):
        search = mocker.patch("trollgraph.optim._search", return_value=None)
        with pytest.raises(errors.OptimizationError, match="iteration 0"):
            minimize(quadratic, np.full(3, 2.0))
        assert search.call_count == 1

    def it_retries_once_with_steepest_descent(self, mocker: MockerFixture):
        steps = iter([0.5, None])
        search = mocker.patch(
            "trollgraph.optim._search", side_effect=lambda *_: next(steps, None)
        )
        with pytest.raises(errors.OptimizationError, match="iteration 1"):
            minimize(quadratic, np.full(3, 2.0))
        assert search.call_count == 3

    @pytest.mark.parametrize(
        "settings",
        [
            {"memory": 0},
            {"max_iterations": 0},
            {"gradient_tolerance": 0.0},
            {"c1": 0.5, "c2": 0.4},
        ],
    )
    def it_validates_its_settings(self, settings: dict):
        with pytest.raises(ValueError):
            OptimConfig(**settings)


class DescribeCheckGradient:
    def it_is_small_for_a_correct_gradient(self):
        assert check_gradient(rosenbrock, np.array([0.3, -0.7])) < 1e-5

    def it_catches_a_wrong_gradient(self):
        def wrong(x: np.ndarray) -> ObjectiveEvaluation:
            value, gradient = quadratic(x)
            return ObjectiveEvaluation(value, gradient * 1.5)

        assert check_gradient(wrong, np.array([1.0, 2.0])) > 0.1


class DescribeLogisticRegression:
    def it_costs_n_log_k_at_zero_weights(self, separable: sparse.csr_matrix):
        weights = LogRegWeights.zeros(["a", "b", "c"], 3)
        value, _ = logreg_objective(separable, [0, 0, 1, 1, 2, 2], weights, l2=1.0)
        assert value == pytest.approx(6 * math.log(3))

    def it_has_a_correct_gradient(self, separable: sparse.csr_matrix):
        labels = ["a", "b", "c"]
        rng = np.random.default_rng(0)
        point = rng.normal(size=LogRegWeights.zeros(labels, 3).to_vector().shape)

        def objective(vector: np.ndarray) -> ObjectiveEvaluation:
            return logreg_objective(
                separable,
                [0, 0, 1, 1, 2, 2],
                LogRegWeights.from_vector(vector, labels, 3),
                l2=0.5,
            )

        assert check_gradient(objective, point) < 1e-5

    def it_learns_separable_data(self, separable: sparse.csr_matrix):
        y = [0, 0, 1, 1, 2, 2]
        weights = train_logreg(separable, y, ["a", "b", "c"], 3, l2=0.01)
        predicted, distributions = predict_logreg_batch(weights, separable)
        assert predicted.tolist() == y
        assert np.allclose(distributions.sum(axis=1), 1.0)

    def it_predicts_a_single_vector(self, separable: sparse.csr_matrix):
        weights = train_logreg(separable, [0, 0, 1, 1, 2, 2], ["a", "b", "c"], 3)
        label, distribution = predict_logreg(
            weights, SparseVector(np.array([1]), np.array([1.0]), 3)
        )
        assert label == 1
        assert distribution.shape == (3,)

    def it_breaks_ties_towards_the_lowest_label(self):
        weights = LogRegWeights.zeros(["a", "b"], 2)
        empty = SparseVector(np.array([], dtype=np.int64), np.array([]), 2)
        label, _ = predict_logreg(weights, empty)
        assert label == 0

    def it_needs_two_distinct_labels(self, separable: sparse.csr_matrix):
        with pytest.raises(errors.InsufficientLabelsError):
            train_logreg(separable, [1] * 6, ["a", "b", "c"], 3)

    def it_rejects_out_of_range_labels(self, separable: sparse.csr_matrix):
        with pytest.raises(errors.LabelError):
            train_logreg(separable, [0, 1, 2, 3, 0, 1], ["a", "b", "c"], 3)

    def it_rejects_features_of_another_dimension(self, separable: sparse.csr_matrix):
        with pytest.raises(errors.DimensionMismatchError):
            logreg_objective(
                separable, [0] * 6, LogRegWeights.zeros(["a", "b"], 4), 1.0
            )

    @given(seed=strategies.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25)
    def it_is_convex(self, seed: int):
        rng = np.random.default_rng(seed)
        X = sparse.csr_matrix(rng.normal(size=(8, 4)))  # noqa: N806
        y = rng.integers(0, 3, size=8).tolist()
        labels = ["a", "b", "c"]
        first, second = rng.normal(scale=3.0, size=(2, 3 * 4 + 3))

        def value(vector: np.ndarray) -> float:
            weights = LogRegWeights.from_vector(vector, labels, 4)
            return logreg_objective(X, y, weights, l2=0.2).value

        midpoint = value((first + second) / 2)
        assert midpoint <= (value(first) + value(second)) / 2 + 1e-9

    def it_treats_duplicated_data_like_a_doubled_penalty(
        self, separable: sparse.csr_matrix
    ):
        y = [0, 0, 1, 1, 2, 2]
        labels = ["a", "b", "c"]
        doubled = sparse.vstack([separable, separable]).tocsr()
        point = LogRegWeights.from_vector(
            np.random.default_rng(5).normal(size=12), labels, 3
        )
        once = logreg_objective(separable, y, point, l2=0.5)
        twice = logreg_objective(doubled, y + y, point, l2=1.0)
        assert twice.value == pytest.approx(2 * once.value)
        assert np.allclose(twice.gradient, 2 * once.gradient)

        config = OptimConfig(gradient_tolerance=1e-6)
        original = train_logreg(separable, y, labels, 3, l2=0.5, config=config)
        duplicated = train_logreg(doubled, y + y, labels, 3, l2=1.0, config=config)
        assert np.allclose(original.to_vector(), duplicated.to_vector(), atol=1e-4)
