"""Supervised regression from board encodings to Shapley values."""

from collections.abc import Sequence
from logging import getLogger

import numpy as np

from teamform.domain.errors import ContractError, TrainingFailureError
from teamform.domain.models import Board
from teamform.learning.networks import MLP, all_finite
from teamform.learning.optim import Adam

logger = getLogger(__name__)


def board_features(board: Board) -> np.ndarray:
    """Weights relative to the quota followed by the quota relative to the total weight."""
    weights = np.asarray(board.weights, dtype=float)
    return np.append(weights / board.quota, board.quota / weights.sum())


def feature_matrix(boards: Sequence[Board]) -> np.ndarray:
    """Stack the encodings of boards sharing one arity."""
    if len({board.n for board in boards}) > 1:
        raise ContractError("regression boards must share the number of agents")
    return np.stack([board_features(board) for board in boards])


def mean_squared_error(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean over every entry."""
    return float(np.mean((predictions - targets) ** 2))


def r_squared(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Coefficient of determination over every entry; 1.0 for a perfect fit of constant targets."""
    residual = float(((targets - predictions) ** 2).sum())
    total = float(((targets - targets.mean()) ** 2).sum())
    if total == 0:
        return 1.0 if residual == 0 else 0.0
    return 1.0 - residual / total


class ShapleyRegressor:
    """MLP mapping a board encoding to the Shapley value of every agent, trained on MSE.

    Inputs and targets are standardized per column with statistics of the first ``fit``
    call; ``predict`` works in the original units.
    """

    def __init__(
        self,
        n_agents: int,
        hidden: int,
        rng: np.random.Generator,
        learning_rate: float = 1e-3,
        final_learning_rate_fraction: float = 0.1,
    ):
        """Initialize the network.

        Args:
            n_agents: Number of agents per board
            hidden: Width of both hidden layers
            rng: Initialization and shuffling stream
            learning_rate: Initial Adam step size
            final_learning_rate_fraction: Step size of the last epoch relative to the first;
                the decay between them is linear
        """
        if not 0 < final_learning_rate_fraction <= 1:
            raise ContractError(
                f"final learning rate fraction outside (0, 1]: {final_learning_rate_fraction}"
            )
        self.rng = rng
        self.learning_rate = learning_rate
        self.final_learning_rate_fraction = final_learning_rate_fraction
        self.net = MLP([n_agents + 1, hidden, hidden, n_agents], rng)
        self.optimizer = Adam(self.net.params, learning_rate)
        self.input_shift = np.zeros(n_agents + 1)
        self.input_scale = np.ones(n_agents + 1)
        self.target_shift = np.zeros(n_agents)
        self.target_scale = np.ones(n_agents)
        self.standardized = False

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Predicted Shapley values of a batch of encodings."""
        out, _ = self.net.forward((features - self.input_shift) / self.input_scale)
        return out * self.target_scale + self.target_shift

    def _standardize(self, features: np.ndarray, targets: np.ndarray) -> None:
        self.input_shift, self.input_scale = _column_moments(features)
        self.target_shift, self.target_scale = _column_moments(targets)
        self.standardized = True

    def fit(
        self, features: np.ndarray, targets: np.ndarray, epochs: int, batch_size: int
    ) -> list[float]:
        """Mini-batch Adam on the mean squared error of standardized targets.

        Returns:
            Training loss in the original units after every epoch
        """
        if features.shape[0] != targets.shape[0]:
            raise ContractError(f"{features.shape[0]} inputs for {targets.shape[0]} targets")
        if not self.standardized:
            self._standardize(features, targets)
        x = (features - self.input_shift) / self.input_scale
        y = (targets - self.target_shift) / self.target_scale

        losses = []
        for epoch in range(epochs):
            progress = epoch / max(epochs - 1, 1)
            decay = 1.0 - progress * (1.0 - self.final_learning_rate_fraction)
            self.optimizer.learning_rate = self.learning_rate * decay
            order = self.rng.permutation(x.shape[0])
            for start in range(0, order.size, batch_size):
                batch = order[start : start + batch_size]
                out, cache = self.net.forward(x[batch])
                grad = 2.0 * (out - y[batch]) / out.size
                grads, _ = self.net.backward(cache, grad)
                self.optimizer.step(grads)
            losses.append(mean_squared_error(self.predict(features), targets))
            if not all_finite(self.net.params):
                raise TrainingFailureError(0, epoch)
            if (epoch + 1) % 100 == 0:
                logger.debug(f"Epoch {epoch + 1}: train MSE {losses[-1]:.6f}")
        return losses


def _column_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard deviations; constant columns keep unit scale."""
    std = values.std(axis=0)
    return values.mean(axis=0), np.where(std > 0, std, 1.0)
