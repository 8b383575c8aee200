"""Advantage actor-critic with V-trace targets over the convolutional network."""

from dataclasses import dataclass, field

import numpy as np

from teamform.domain.models import RLConfig
from teamform.learning.networks import ConvActorCritic, Params, masked_softmax
from teamform.learning.optim import Adam
from teamform.learning.vtrace import vtrace_targets


@dataclass
class Rollout:
    """Time-major unroll of one seat across the parallel environments."""

    grids: list[np.ndarray] = field(default_factory=list)
    features: list[np.ndarray] = field(default_factory=list)
    actions: list[np.ndarray] = field(default_factory=list)
    log_probs: list[np.ndarray] = field(default_factory=list)
    rewards: list[np.ndarray] = field(default_factory=list)
    dones: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        """Number of recorded steps."""
        return len(self.actions)


class ActorCriticAgent:
    """An independent actor-critic learner for one seat."""

    def __init__(
        self,
        grid_shape: tuple[int, int, int],
        feature_size: int,
        n_actions: int,
        config: RLConfig,
        rng: np.random.Generator,
    ):
        """Initialize network and optimizer.

        Args:
            grid_shape: Observation planes shape
            feature_size: Observation feature length
            n_actions: Number of actions
            config: Learner hyperparameters
            rng: Stream for initialization and action sampling
        """
        self.config = config
        self.rng = rng
        self.net = ConvActorCritic(
            grid_shape,
            feature_size,
            n_actions,
            rng,
            channels=config.conv_channels,
            kernel=config.conv_kernel,
            hidden=config.ac_hidden,
        )
        self.optimizer = Adam(
            self.net.params, config.learning_rate, config.beta1, config.beta2, config.adam_eps
        )

    @property
    def params(self) -> Params:
        """Network parameters."""
        return self.net.params

    def act(
        self, grids: np.ndarray, features: np.ndarray, greedy: bool = False
    ) -> tuple[np.ndarray, np.ndarray]:
        """Sample (or take the mode of) the policy for a batch of observations.

        Returns:
            Tuple of (actions, their log-probabilities)
        """
        logits, _, _ = self.net.forward(grids, features)
        probs = masked_softmax(logits)
        if greedy:
            actions = probs.argmax(axis=1)
        else:
            cumulative = probs.cumsum(axis=1)
            draws = self.rng.random(len(probs))[:, None]
            actions = np.minimum((cumulative < draws).sum(axis=1), probs.shape[1] - 1)
        chosen = probs[np.arange(len(probs)), actions]
        return actions, np.log(np.maximum(chosen, np.finfo(float).tiny))

    def update(
        self, rollout: Rollout, bootstrap_grids: np.ndarray, bootstrap_features: np.ndarray
    ) -> dict[str, float]:
        """One gradient step on an unroll.

        The loss is the V-trace policy gradient, plus ``baseline_cost`` times half the
        squared error to the V-trace targets, minus ``entropy_cost`` times the policy
        entropy, averaged over all steps.

        Returns:
            Loss components for logging
        """
        steps, envs = len(rollout), len(rollout.actions[0])
        grids = np.concatenate(rollout.grids)
        features = np.concatenate(rollout.features)
        actions = np.concatenate(rollout.actions)

        logits, values, cache = self.net.forward(grids, features)
        _, bootstrap, _ = self.net.forward(bootstrap_grids, bootstrap_features)
        probs = masked_softmax(logits)
        log_probs = np.log(np.maximum(probs, np.finfo(float).tiny))
        taken = log_probs[np.arange(len(actions)), actions]

        shape = (steps, envs)
        discounts = self.config.gamma * (1.0 - np.stack(rollout.dones).astype(float))
        targets = vtrace_targets(
            np.stack(rollout.log_probs),
            taken.reshape(shape),
            np.stack(rollout.rewards),
            values.reshape(shape),
            bootstrap,
            self.config.gamma,
            rho_bar=self.config.rho_bar,
            c_bar=self.config.c_bar,
            discounts=discounts,
        )
        advantages = targets.pg_advantages.reshape(-1)
        errors = targets.vs.reshape(-1) - values
        entropy = -(probs * log_probs).sum(axis=1)

        batch = len(actions)
        one_hot = np.zeros_like(probs)
        one_hot[np.arange(batch), actions] = 1.0
        d_logits = -advantages[:, None] * (one_hot - probs)
        d_logits += self.config.entropy_cost * probs * (log_probs + entropy[:, None])
        d_values = -self.config.baseline_cost * errors
        grads = self.net.backward(cache, d_logits / batch, d_values / batch)
        self.optimizer.step(grads)
        return {
            "policy_loss": float(-(advantages * taken).mean()),
            "baseline_loss": float(0.5 * (errors**2).mean()),
            "entropy": float(entropy.mean()),
        }
