"""Unit tests for V-trace targets."""

import numpy as np
import pytest

from teamform.domain.errors import ContractError
from teamform.learning.vtrace import vtrace_targets


def unrolled_vs(behaviour, target, rewards, values, bootstrap, gamma, rho_bar, c_bar):
    """Direct evaluation of the truncated importance-weighted sum."""
    ratios = np.exp(np.asarray(target) - np.asarray(behaviour))
    rhos = np.minimum(rho_bar, ratios)
    cs = np.minimum(c_bar, ratios)
    following = list(values[1:]) + [bootstrap]
    steps = len(values)
    vs = []
    for s in range(steps):
        total = values[s]
        for t in range(s, steps):
            weight = gamma ** (t - s) * np.prod(cs[s:t])
            total += weight * rhos[t] * (rewards[t] + gamma * following[t] - values[t])
        vs.append(total)
    return np.array(vs)


class TestVTrace:
    """Test off-policy corrected targets."""

    @pytest.mark.parametrize("length", range(1, 21))
    def test_on_policy_reduces_to_n_step_return(self, length):
        """Equal policies give the bootstrapped discounted return."""
        rng = np.random.default_rng(length)
        log_probs = np.log(rng.uniform(0.1, 1.0, size=length))
        rewards = rng.normal(size=length)
        values = rng.normal(size=length)
        bootstrap, gamma = 0.7, 0.9

        result = vtrace_targets(log_probs, log_probs, rewards, values, bootstrap, gamma)

        expected = [
            sum(gamma ** (k - s) * rewards[k] for k in range(s, length)) + gamma ** (length - s) * bootstrap
            for s in range(length)
        ]
        np.testing.assert_allclose(result.vs, expected, rtol=1e-10, atol=1e-10)

    def test_zero_discount(self):
        """Without discounting v_s = V + min(rho_bar, rho) (r - V)."""
        behaviour = np.log([0.5, 0.2, 0.4])
        target = np.log([0.25, 0.6, 0.4])
        rewards = np.array([1.0, -1.0, 2.0])
        values = np.array([0.5, 0.5, -0.5])
        result = vtrace_targets(behaviour, target, rewards, values, 3.0, gamma=0.0)
        rhos = np.minimum(1.0, np.exp(target - behaviour))
        np.testing.assert_allclose(result.vs, values + rhos * (rewards - values))

    def test_matches_unrolled_sum(self):
        """The backward recursion equals the explicit sum."""
        rng = np.random.default_rng(6)
        behaviour = np.log(rng.uniform(0.05, 1.0, size=6))
        target = np.log(rng.uniform(0.05, 1.0, size=6))
        rewards = rng.normal(size=6)
        values = rng.normal(size=6)
        result = vtrace_targets(behaviour, target, rewards, values, -0.4, 0.95, rho_bar=1.2, c_bar=0.8)
        expected = unrolled_vs(behaviour, target, rewards, values, -0.4, 0.95, 1.2, 0.8)
        np.testing.assert_allclose(result.vs, expected, rtol=1e-10, atol=1e-10)

    def test_policy_advantages(self):
        """Advantages bootstrap from the next target."""
        rng = np.random.default_rng(7)
        behaviour = np.log(rng.uniform(0.1, 1.0, size=4))
        target = np.log(rng.uniform(0.1, 1.0, size=4))
        rewards, values = rng.normal(size=4), rng.normal(size=4)
        result = vtrace_targets(behaviour, target, rewards, values, 0.2, 0.9)
        rhos = np.minimum(1.0, np.exp(target - behaviour))
        next_vs = np.append(result.vs[1:], 0.2)
        np.testing.assert_allclose(result.pg_advantages, rhos * (rewards + 0.9 * next_vs - values))

    def test_parallel_environments_broadcast(self):
        """A trailing environment axis is handled column by column."""
        rng = np.random.default_rng(8)
        shape = (5, 3)
        behaviour, target = np.log(rng.uniform(0.1, 1, size=shape)), np.log(rng.uniform(0.1, 1, size=shape))
        rewards, values = rng.normal(size=shape), rng.normal(size=shape)
        bootstrap = rng.normal(size=3)
        batch = vtrace_targets(behaviour, target, rewards, values, bootstrap, 0.9)
        for e in range(3):
            column = vtrace_targets(behaviour[:, e], target[:, e], rewards[:, e], values[:, e], bootstrap[e], 0.9)
            np.testing.assert_allclose(batch.vs[:, e], column.vs)

    def test_episode_end_cuts_bootstrap(self):
        """A zero discount at an episode end stops the return there."""
        zeros = np.zeros(3)
        result = vtrace_targets(
            zeros, zeros, np.array([1.0, 2.0, 3.0]), zeros, 10.0, 1.0, discounts=np.array([1.0, 0.0, 1.0])
        )
        np.testing.assert_allclose(result.vs, [3.0, 2.0, 13.0])

    def test_length_mismatch(self):
        """Sequences must share their shape."""
        with pytest.raises(ContractError):
            vtrace_targets(np.zeros(3), np.zeros(3), np.zeros(2), np.zeros(3), 0.0, 0.9)
