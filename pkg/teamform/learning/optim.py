"""First-order optimizers updating parameter dicts in place."""

import numpy as np

from teamform.learning.networks import Params


class SGD:
    """Plain gradient descent."""

    def __init__(self, params: Params, learning_rate: float):
        """Initialize the optimizer.

        Args:
            params: Parameters updated in place
            learning_rate: Step size
        """
        self.params = params
        self.learning_rate = learning_rate

    def step(self, grads: Params) -> None:
        """Apply ``param -= lr * grad`` for every gradient given."""
        for name, grad in grads.items():
            self.params[name] -= self.learning_rate * grad

    def state_dict(self) -> dict[str, np.ndarray]:
        """SGD keeps no state."""
        return {}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """SGD keeps no state."""


class Adam:
    """Adaptive moment estimation with bias correction."""

    def __init__(
        self,
        params: Params,
        learning_rate: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        """Initialize zero moments.

        Args:
            params: Parameters updated in place
            learning_rate: Step size
            beta1: Decay of the first moment
            beta2: Decay of the second moment
            eps: Denominator offset
        """
        self.params = params
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in params.items()}
        self.v = {name: np.zeros_like(p) for name, p in params.items()}

    def step(self, grads: Params) -> None:
        """Take one step along the given gradients (of a loss to minimize)."""
        self.t += 1
        correction1 = 1 - self.beta1**self.t
        correction2 = 1 - self.beta2**self.t
        for name, grad in grads.items():
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1 - self.beta1) * grad
            v *= self.beta2
            v += (1 - self.beta2) * grad**2
            delta = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            self.params[name] -= self.learning_rate * delta

    def state_dict(self) -> dict[str, np.ndarray]:
        """Moments and step count, keyed for an ``npz`` archive."""
        state = {"t": np.array(self.t)}
        state.update({f"m.{name}": m for name, m in self.m.items()})
        state.update({f"v.{name}": v for name, v in self.v.items()})
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Restore moments written by ``state_dict``."""
        self.t = int(state["t"])
        for name in self.m:
            self.m[name][...] = state[f"m.{name}"]
            self.v[name][...] = state[f"v.{name}"]
