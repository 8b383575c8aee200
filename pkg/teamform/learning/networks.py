"""Numpy networks with hand-written backpropagation.

Parameters live in flat ``name -> array`` dicts that optimizers update in place, so a
network, its optimizer and a checkpoint all address the same arrays by name.
"""

from collections.abc import Sequence
from itertools import pairwise

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from teamform.domain.errors import ContractError

Params = dict[str, np.ndarray]


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Sequence[int]) -> np.ndarray:
    """Normal Glorot initialization."""
    return rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), size=tuple(shape))


def relu(x: np.ndarray) -> np.ndarray:
    """Rectified linear unit."""
    return np.maximum(x, 0.0)


def all_finite(params: Params) -> bool:
    """Return True if no parameter is NaN or infinite."""
    return all(np.isfinite(p).all() for p in params.values())


class MLP:
    """Fully connected network with ReLU hidden layers.

    ``sizes`` lists the input width, the hidden widths and the output width; with two
    entries the network is a single linear map.
    """

    def __init__(
        self,
        sizes: Sequence[int],
        rng: np.random.Generator,
        bias: bool = True,
        activate_output: bool = False,
        prefix: str = "",
    ):
        """Initialize weights (Glorot) and biases (zero).

        Args:
            sizes: Layer widths from input to output
            rng: Initialization stream
            bias: Add a bias vector to every layer
            activate_output: Apply ReLU to the last layer as well
            prefix: Prefix of the parameter names
        """
        if len(sizes) < 1:
            raise ContractError("an MLP needs at least an input width")
        self.sizes = tuple(int(s) for s in sizes)
        self.bias = bias
        self.activate_output = activate_output
        self.prefix = prefix
        self.params: Params = {}
        for k, (fan_in, fan_out) in enumerate(pairwise(self.sizes)):
            self.params[f"{prefix}w{k}"] = glorot(rng, fan_in, fan_out, (fan_in, fan_out))
            if bias:
                self.params[f"{prefix}b{k}"] = np.zeros(fan_out)

    @property
    def n_layers(self) -> int:
        """Number of linear layers."""
        return len(self.sizes) - 1

    def _activated(self, k: int) -> bool:
        return k < self.n_layers - 1 or self.activate_output

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        """Evaluate a single input of shape ``(in,)`` or a batch ``(B, in)``.

        Returns:
            Tuple of (output, cache for ``backward``)
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.sizes[0],) or x.ndim > 2:
            raise ContractError(f"expected input width {self.sizes[0]}, got shape {x.shape}")
        single = x.ndim == 1
        h = np.atleast_2d(x)
        layers = []
        for k in range(self.n_layers):
            z = h @ self.params[f"{self.prefix}w{k}"]
            if self.bias:
                z = z + self.params[f"{self.prefix}b{k}"]
            layers.append((h, z))
            h = relu(z) if self._activated(k) else z
        return (h[0] if single else h), (single, layers)

    def backward(self, cache: tuple, grad_out: np.ndarray) -> tuple[Params, np.ndarray]:
        """Gradients of ``sum(output * grad_out)`` with respect to parameters and input."""
        single, layers = cache
        g = np.atleast_2d(np.asarray(grad_out, dtype=float))
        grads: Params = {}
        for k in reversed(range(self.n_layers)):
            h, z = layers[k]
            if self._activated(k):
                g = g * (z > 0)
            grads[f"{self.prefix}w{k}"] = h.T @ g
            if self.bias:
                grads[f"{self.prefix}b{k}"] = g.sum(axis=0)
            g = g @ self.params[f"{self.prefix}w{k}"].T
        return grads, (g[0] if single else g)


def value_forward(
    net: MLP, observation: np.ndarray, action: int | None = None
) -> np.ndarray | float:
    """Action values of an observation, or the value of one action."""
    q, _ = net.forward(observation)
    if action is None:
        return q
    if not 0 <= action < q.shape[-1]:
        raise ContractError(f"action {action} outside [0, {q.shape[-1]})")
    return float(q[action])


def masked_softmax(logits: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Softmax over the last axis; masked-out actions get probability exactly zero."""
    logits = np.asarray(logits, dtype=float)
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), logits.shape)
        if not mask.any(axis=-1).all():
            raise ContractError("every row of the action mask needs a legal action")
        logits = np.where(mask, logits, -np.inf)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


class ConvActorCritic:
    """Convolution over the ego grid, an MLP trunk, and linear policy and value heads.

    The convolution is valid (no padding) with stride one; its ReLU output is flattened
    and concatenated with the feature vector before the trunk.
    """

    def __init__(
        self,
        grid_shape: Sequence[int],
        feature_size: int,
        n_actions: int,
        rng: np.random.Generator,
        channels: int = 6,
        kernel: int = 3,
        hidden: Sequence[int] = (32, 32),
    ):
        """Initialize all layers.

        Args:
            grid_shape: ``(planes, height, width)`` of one observation grid
            feature_size: Length of the feature vector
            n_actions: Number of policy logits
            rng: Initialization stream
            channels: Convolution output channels
            kernel: Convolution kernel side
            hidden: Trunk hidden widths
        """
        planes, height, width = (int(s) for s in grid_shape)
        if kernel > min(height, width):
            raise ContractError(f"kernel {kernel} larger than grid {height}x{width}")
        self.grid_shape = (planes, height, width)
        self.feature_size = feature_size
        self.n_actions = n_actions
        self.kernel = kernel
        self.conv_shape = (channels, height - kernel + 1, width - kernel + 1)
        flat = int(np.prod(self.conv_shape))

        self.trunk = MLP((flat + feature_size, *hidden), rng, activate_output=True, prefix="trunk_")
        top = self.trunk.sizes[-1]
        self.params: Params = {
            "conv_w": glorot(
                rng,
                planes * kernel * kernel,
                channels * kernel * kernel,
                (channels, planes, kernel, kernel),
            ),
            "conv_b": np.zeros(channels),
            **self.trunk.params,
            "pi_w": glorot(rng, top, n_actions, (top, n_actions)),
            "pi_b": np.zeros(n_actions),
            "v_w": glorot(rng, top, 1, (top, 1)),
            "v_b": np.zeros(1),
        }

    def forward(
        self, grid: np.ndarray, features: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, tuple]:
        """Evaluate one observation or a batch.

        Args:
            grid: ``(planes, H, W)`` or ``(B, planes, H, W)``
            features: ``(F,)`` or ``(B, F)``

        Returns:
            Tuple of (logits, state values, cache for ``backward``)
        """
        grid = np.asarray(grid, dtype=float)
        features = np.asarray(features, dtype=float)
        single = grid.ndim == 3
        if single:
            grid, features = grid[None], features[None]
        expected_features = (grid.shape[0], self.feature_size)
        if grid.shape[1:] != self.grid_shape or features.shape != expected_features:
            raise ContractError(
                f"expected grid {self.grid_shape} and {self.feature_size} features, "
                f"got {grid.shape} and {features.shape}"
            )
        k = self.kernel
        windows = sliding_window_view(grid, (k, k), axis=(2, 3))
        z = np.einsum("bchwij,ocij->bohw", windows, self.params["conv_w"])
        z = z + self.params["conv_b"][None, :, None, None]
        x = np.concatenate([relu(z).reshape(len(grid), -1), features], axis=1)
        h, trunk_cache = self.trunk.forward(x)
        logits = h @ self.params["pi_w"] + self.params["pi_b"]
        values = (h @ self.params["v_w"] + self.params["v_b"])[:, 0]
        cache = (single, windows, z, h, trunk_cache)
        if single:
            return logits[0], values[0], cache
        return logits, values, cache

    def backward(self, cache: tuple, d_logits: np.ndarray, d_values: np.ndarray) -> Params:
        """Gradients of ``sum(logits * d_logits) + sum(values * d_values)``."""
        single, windows, z, h, trunk_cache = cache
        d_logits = np.atleast_2d(np.asarray(d_logits, dtype=float))
        d_values = np.atleast_1d(np.asarray(d_values, dtype=float))
        grads: Params = {
            "pi_w": h.T @ d_logits,
            "pi_b": d_logits.sum(axis=0),
            "v_w": h.T @ d_values[:, None],
            "v_b": np.array([d_values.sum()]),
        }
        dh = d_logits @ self.params["pi_w"].T + d_values[:, None] @ self.params["v_w"].T
        trunk_grads, dx = self.trunk.backward(trunk_cache, dh)
        grads.update(trunk_grads)
        flat = int(np.prod(self.conv_shape))
        dz = dx[:, :flat].reshape(z.shape) * (z > 0)
        grads["conv_w"] = np.einsum("bchwij,bohw->ocij", windows, dz)
        grads["conv_b"] = dz.sum(axis=(0, 2, 3))
        return grads


def policy_value_forward(
    net: ConvActorCritic, grid: np.ndarray, features: np.ndarray, mask: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Action distribution and state value of one observation or a batch."""
    logits, values, _ = net.forward(grid, features)
    return masked_softmax(logits, mask), values
