"""V-trace off-policy corrected value targets and policy-gradient advantages."""

from typing import NamedTuple

import numpy as np

from teamform.domain.errors import ContractError


class VTraceReturns(NamedTuple):
    """Value targets ``vs`` and policy-gradient advantages, time-major."""

    vs: np.ndarray
    pg_advantages: np.ndarray


def vtrace_targets(
    behaviour_log_probs: np.ndarray,
    target_log_probs: np.ndarray,
    rewards: np.ndarray,
    values: np.ndarray,
    bootstrap_value: np.ndarray | float,
    gamma: float,
    rho_bar: float = 1.0,
    c_bar: float = 1.0,
    discounts: np.ndarray | None = None,
) -> VTraceReturns:
    """Compute V-trace targets for a time-major sequence.

    All sequences share their leading time axis; trailing axes (e.g. parallel
    environments) broadcast. ``discounts`` overrides ``gamma`` per step, which is how
    episode ends inside an unroll are cut (``gamma * (1 - done)``).

    Args:
        behaviour_log_probs: Log-probabilities of the taken actions under the actor
        target_log_probs: Log-probabilities under the current policy
        rewards: Rewards after each action
        values: State values ``V(x_t)``
        bootstrap_value: ``V(x_T)`` after the last step
        gamma: Discount when ``discounts`` is not given
        rho_bar: Truncation of the temporal-difference weights
        c_bar: Truncation of the trace coefficients
        discounts: Optional per-step discounts

    Returns:
        VTraceReturns with ``vs`` and the advantages ``rho_t (r_t + gamma vs_{t+1} - V_t)``

    Raises:
        ContractError: If the sequence shapes differ
    """
    behaviour = np.asarray(behaviour_log_probs, dtype=float)
    target = np.asarray(target_log_probs, dtype=float)
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    shapes = {behaviour.shape, target.shape, rewards.shape, values.shape}
    if discounts is not None:
        discounts = np.asarray(discounts, dtype=float)
        shapes.add(discounts.shape)
    else:
        discounts = np.full(values.shape, gamma)
    if len(shapes) != 1 or values.ndim == 0:
        raise ContractError(f"sequence shapes differ: {sorted(shapes)}")
    bootstrap = np.broadcast_to(np.asarray(bootstrap_value, dtype=float), values.shape[1:])

    ratios = np.exp(target - behaviour)
    rhos = np.minimum(rho_bar, ratios)
    cs = np.minimum(c_bar, ratios)
    next_values = np.concatenate([values[1:], bootstrap[None]], axis=0)
    deltas = rhos * (rewards + discounts * next_values - values)

    corrections = np.zeros_like(values)
    acc = np.zeros(values.shape[1:])
    for t in reversed(range(len(values))):
        acc = deltas[t] + discounts[t] * cs[t] * acc
        corrections[t] = acc
    vs = values + corrections

    next_vs = np.concatenate([vs[1:], bootstrap[None]], axis=0)
    pg_advantages = rhos * (rewards + discounts * next_vs - values)
    return VTraceReturns(vs=vs, pg_advantages=pg_advantages)
