"""Unit tests for the numpy networks and optimizers."""

import numpy as np
import pytest

from teamform.domain.errors import ContractError
from teamform.learning.networks import (
    MLP,
    ConvActorCritic,
    all_finite,
    masked_softmax,
    policy_value_forward,
    value_forward,
)
from teamform.learning.optim import SGD, Adam

H = 1e-5


def numeric_gradient(params, name, loss):
    """Central differences of ``loss()`` with respect to ``params[name]``."""
    p = params[name]
    grad = np.zeros_like(p)
    for index in np.ndindex(p.shape):
        saved = p[index]
        p[index] = saved + H
        up = loss()
        p[index] = saved - H
        down = loss()
        p[index] = saved
        grad[index] = (up - down) / (2 * H)
    return grad


class TestMLP:
    """Test the fully connected network."""

    def test_gradients_match_finite_differences(self):
        """Backpropagation agrees with central differences."""
        rng = np.random.default_rng(0)
        net = MLP((4, 6, 5, 3), rng)
        for p in net.params.values():
            p += rng.normal(scale=0.1, size=p.shape)
        x = rng.normal(size=(3, 4))
        g = rng.normal(size=(3, 3))

        def loss():
            out, _ = net.forward(x)
            return float((out * g).sum())

        _, cache = net.forward(x)
        grads, _ = net.backward(cache, g)
        for name in net.params:
            np.testing.assert_allclose(grads[name], numeric_gradient(net.params, name, loss), rtol=1e-4, atol=1e-7)

    def test_input_gradient(self):
        """The returned input gradient matches central differences too."""
        rng = np.random.default_rng(1)
        net = MLP((3, 5, 2), rng)
        x = rng.normal(size=3)
        g = np.array([0.3, -1.2])
        _, cache = net.forward(x)
        _, dx = net.backward(cache, g)
        numeric = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = H
            numeric[i] = ((net.forward(x + e)[0] - net.forward(x - e)[0]) @ g) / (2 * H)
        np.testing.assert_allclose(dx, numeric, rtol=1e-4, atol=1e-7)

    def test_zero_parameters(self):
        """All-zero parameters give zero action values."""
        net = MLP((4, 8, 3), np.random.default_rng(0))
        for p in net.params.values():
            p.fill(0.0)
        assert value_forward(net, np.ones(4)).tolist() == [0.0, 0.0, 0.0]

    def test_shape_contract(self):
        """Wrong input widths and action indices are contract errors."""
        net = MLP((4, 3), np.random.default_rng(0))
        with pytest.raises(ContractError):
            net.forward(np.ones(5))
        with pytest.raises(ContractError):
            value_forward(net, np.ones(4), 3)

    def test_bias_free(self):
        """Without biases only weight matrices exist."""
        net = MLP((4, 3), np.random.default_rng(0), bias=False)
        assert list(net.params) == ["w0"]


class TestConvActorCritic:
    """Test the convolutional actor-critic network."""

    @pytest.fixture
    def net(self):
        rng = np.random.default_rng(2)
        net = ConvActorCritic((2, 5, 5), 3, 4, rng, channels=2, kernel=3, hidden=(5, 4))
        for p in net.params.values():
            p += rng.normal(scale=0.1, size=p.shape)
        return net

    def test_gradients_match_finite_differences(self, net):
        """Every parameter, including the convolution, matches central differences."""
        rng = np.random.default_rng(3)
        grid = rng.normal(size=(2, 2, 5, 5))
        features = rng.normal(size=(2, 3))
        d_logits = rng.normal(size=(2, 4))
        d_values = rng.normal(size=2)

        def loss():
            logits, values, _ = net.forward(grid, features)
            return float((logits * d_logits).sum() + (values * d_values).sum())

        _, _, cache = net.forward(grid, features)
        grads = net.backward(cache, d_logits, d_values)
        assert set(grads) == set(net.params)
        for name in net.params:
            np.testing.assert_allclose(grads[name], numeric_gradient(net.params, name, loss), rtol=1e-4, atol=1e-7)

    def test_uniform_policy_from_zero_parameters(self, net):
        """Zero parameters give a uniform policy and zero value."""
        for p in net.params.values():
            p.fill(0.0)
        probs, value = policy_value_forward(net, np.ones((2, 5, 5)), np.ones(3))
        assert probs.tolist() == pytest.approx([0.25] * 4)
        assert value == 0.0

    def test_single_and_batch_agree(self, net):
        """A batch of one gives the single-observation result."""
        rng = np.random.default_rng(4)
        grid, features = rng.normal(size=(2, 5, 5)), rng.normal(size=3)
        logits, value, _ = net.forward(grid, features)
        batch_logits, batch_values, _ = net.forward(grid[None], features[None])
        np.testing.assert_allclose(batch_logits[0], logits)
        assert batch_values[0] == pytest.approx(value)

    def test_shape_contract(self, net):
        """Mismatched grids are contract errors."""
        with pytest.raises(ContractError):
            net.forward(np.ones((2, 4, 4)), np.ones(3))
        with pytest.raises(ContractError):
            ConvActorCritic((1, 2, 2), 1, 2, np.random.default_rng(0), kernel=3)


class TestMaskedSoftmax:
    """Test masked action distributions."""

    def test_masked_actions_have_zero_probability(self):
        """Illegal actions get exactly zero."""
        probs = masked_softmax(np.array([5.0, 1.0, 2.0]), np.array([False, True, True]))
        assert probs[0] == 0.0
        assert probs.sum() == pytest.approx(1.0)

    def test_every_row_needs_a_legal_action(self):
        """An all-illegal row is a contract error."""
        with pytest.raises(ContractError):
            masked_softmax(np.zeros((2, 2)), np.array([[True, False], [False, False]]))


class TestOptimizers:
    """Test in-place optimizers."""

    def test_sgd_step(self):
        """Plain descent."""
        params = {"w": np.array([1.0, 2.0])}
        SGD(params, 0.5).step({"w": np.array([2.0, -2.0])})
        assert params["w"].tolist() == [0.0, 3.0]

    def test_adam_first_step_moves_by_learning_rate(self):
        """With bias correction the first step has magnitude ``lr`` per coordinate."""
        params = {"w": np.zeros(3)}
        Adam(params, learning_rate=0.01).step({"w": np.array([3.0, -0.5, 0.0])})
        assert params["w"] == pytest.approx([-0.01, 0.01, 0.0], abs=1e-6)

    def test_adam_state_round_trip(self):
        """Moments survive ``state_dict``."""
        params = {"w": np.ones(2)}
        adam = Adam(params)
        adam.step({"w": np.array([1.0, 2.0])})
        restored = Adam({"w": np.ones(2)})
        restored.load_state_dict(adam.state_dict())
        assert restored.t == 1
        np.testing.assert_array_equal(restored.m["w"], adam.m["w"])
        np.testing.assert_array_equal(restored.v["w"], adam.v["w"])

    def test_all_finite(self):
        """Detects NaN parameters."""
        assert all_finite({"w": np.ones(2)})
        assert not all_finite({"w": np.array([1.0, np.nan])})
