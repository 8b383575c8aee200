"""SARSA(lambda) with accumulating eligibility traces over an MLP action-value network."""

from dataclasses import dataclass

import numpy as np

from teamform.domain.errors import ContractError
from teamform.domain.models import RLConfig
from teamform.learning.networks import MLP, Params, value_forward
from teamform.learning.optim import SGD, Adam


@dataclass(frozen=True, slots=True)
class Transition:
    """One on-policy step ``(o, a, r, o', a')`` of a single seat."""

    observation: np.ndarray
    action: int
    reward: float
    next_observation: np.ndarray | None = None
    next_action: int | None = None
    done: bool = False


class EligibilityTraces:
    """Accumulating traces, one array per parameter."""

    def __init__(self, params: Params):
        """Initialize zero traces shaped like ``params``."""
        self.values: Params = {name: np.zeros_like(p) for name, p in params.items()}

    def decay_and_add(self, factor: float, grads: Params) -> None:
        """``e <- factor * e + grad``."""
        for name, trace in self.values.items():
            trace *= factor
            if name in grads:
                trace += grads[name]

    def reset(self) -> None:
        """Zero all traces (episode boundary)."""
        for trace in self.values.values():
            trace.fill(0.0)


def sarsa_lambda_update(
    net: MLP,
    optimizer: Adam | SGD,
    traces: EligibilityTraces,
    transition: Transition,
    config: RLConfig,
) -> float:
    """Apply one online SARSA(lambda) update.

    The TD error is ``r + gamma * Q(o', a') * (1 - done) - Q(o, a)``. Traces decay by
    ``gamma * lambda`` and accumulate the gradient of ``Q(o, a)``; the optimizer then
    descends ``-delta * e``. A zero TD error applies no step. Traces are cleared after a
    terminal transition.

    Returns:
        The TD error
    """
    q, cache = net.forward(transition.observation)
    if transition.done:
        bootstrap = 0.0
    else:
        if transition.next_action is None or transition.next_observation is None:
            raise ContractError("a non-terminal transition needs the next observation and action")
        bootstrap = value_forward(net, transition.next_observation, transition.next_action)
    delta = transition.reward + config.gamma * bootstrap - float(q[transition.action])

    grad_out = np.zeros_like(q)
    grad_out[transition.action] = 1.0
    grads, _ = net.backward(cache, grad_out)
    traces.decay_and_add(config.gamma * config.trace_decay, grads)
    if delta != 0.0:
        optimizer.step({name: -delta * trace for name, trace in traces.values.items()})
    if transition.done:
        traces.reset()
    return delta


def epsilon_at(episode: int, config: RLConfig) -> float:
    """Linearly decayed exploration rate, constant after the decay window."""
    horizon = config.epsilon_decay_fraction * config.episodes
    if horizon <= 0 or episode >= horizon:
        return config.epsilon_end
    frac = episode / horizon
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)


class SarsaAgent:
    """An independent SARSA(lambda) learner for one seat."""

    def __init__(
        self,
        observation_size: int,
        n_actions: int,
        config: RLConfig,
        rng: np.random.Generator,
        hidden: tuple[int, ...] | None = None,
        bias: bool = True,
        initial_value: float = 0.0,
    ):
        """Initialize network, optimizer and traces.

        Args:
            observation_size: Input width
            n_actions: Number of action values
            config: Learner hyperparameters
            rng: Stream for initialization and exploration
            hidden: Hidden widths (``config.mlp_hidden`` if omitted)
            bias: Use bias vectors
            initial_value: Starting value of every action, carried by the output bias;
                an upper bound on the return makes greedy play try each action
        """
        self.config = config
        self.rng = rng
        hidden = config.mlp_hidden if hidden is None else hidden
        self.net = MLP((observation_size, *hidden, n_actions), rng, bias=bias)
        if initial_value:
            if not bias:
                raise ContractError("an initial action value needs an output bias")
            self.net.params[f"b{self.net.n_layers - 1}"] += initial_value
        self.optimizer = Adam(
            self.net.params, config.learning_rate, config.beta1, config.beta2, config.adam_eps
        )
        self.traces = EligibilityTraces(self.net.params)

    @property
    def params(self) -> Params:
        """Network parameters."""
        return self.net.params

    def act(self, observation: np.ndarray, mask: np.ndarray, epsilon: float = 0.0) -> int:
        """Epsilon-greedy over the legal actions; greedy ties go to the lowest index."""
        legal = np.flatnonzero(mask)
        if epsilon > 0 and self.rng.random() < epsilon:
            return int(legal[self.rng.integers(len(legal))])
        q = value_forward(self.net, observation)
        return int(legal[np.argmax(q[legal])])

    def update(self, transition: Transition) -> float:
        """Learn from one transition of this seat."""
        return sarsa_lambda_update(self.net, self.optimizer, self.traces, transition, self.config)
