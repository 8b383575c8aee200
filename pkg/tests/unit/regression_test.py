"""Unit tests for the Shapley regression."""

import numpy as np
import pytest

from teamform.config import Settings
from teamform.domain.errors import ContractError, PreconditionError
from teamform.domain.models import Board
from teamform.learning.regression import (
    ShapleyRegressor,
    board_features,
    feature_matrix,
    mean_squared_error,
    r_squared,
)
from teamform.orchestrators.regression import Regression
from teamform.ui import Reporter


class TestFeatures:
    """Test board encodings."""

    def test_encoding(self):
        """Weights over the quota, then the quota over the total weight."""
        features = board_features(Board.parse("5 5 10 ; 10"))
        assert features.tolist() == pytest.approx([0.5, 0.5, 1.0, 0.5])

    def test_mixed_arity(self, example_board):
        """All boards of a matrix share n."""
        with pytest.raises(ContractError):
            feature_matrix([example_board, Board.parse("1 1 ; 2")])


class TestMetrics:
    """Test fit metrics."""

    def test_mean_squared_error(self):
        """Averaged over every entry."""
        predictions, targets = np.array([[1.0, 2.0]]), np.zeros((1, 2))
        assert mean_squared_error(predictions, targets) == pytest.approx(2.5)

    def test_r_squared(self):
        """Perfect fits score one, predicting the mean scores zero."""
        targets = np.array([[0.1, 0.9], [0.5, 0.5]])
        assert r_squared(targets, targets) == pytest.approx(1.0)
        assert r_squared(np.full_like(targets, 0.5), targets) == pytest.approx(0.0)

    def test_constant_targets(self):
        """Constant targets score one only when matched exactly."""
        targets = np.full((3, 2), 0.5)
        assert r_squared(targets.copy(), targets) == 1.0
        assert r_squared(targets + 0.1, targets) == 0.0


class TestRegressor:
    """Test the regression network."""

    def test_shape(self):
        """Inputs n + 1 wide, outputs n wide."""
        model = ShapleyRegressor(5, 20, np.random.default_rng(0))
        assert model.net.sizes == (6, 20, 20, 5)
        assert model.predict(np.zeros((3, 6))).shape == (3, 5)

    def test_loss_decreases(self):
        """Fitting a smooth target lowers the training error."""
        rng = np.random.default_rng(1)
        x = rng.uniform(size=(64, 4))
        y = np.stack([x[:, 0] * 0.5, 1 - x[:, 0] * 0.5, 0.2 * x[:, 1]], axis=1)
        model = ShapleyRegressor(3, 16, np.random.default_rng(2), learning_rate=1e-2)
        before = mean_squared_error(model.predict(x), y)
        losses = model.fit(x, y, epochs=60, batch_size=16)
        assert len(losses) == 60
        assert losses[-1] < before

    def test_mismatched_rows(self):
        """Inputs and targets pair up."""
        model = ShapleyRegressor(3, 4, np.random.default_rng(0))
        with pytest.raises(ContractError):
            model.fit(np.zeros((4, 4)), np.zeros((3, 3)), 1, 2)

    def test_standardizes_on_first_fit(self):
        """Column moments come from the first training set; constant columns keep unit scale."""
        x = np.array([[1.0, 5.0], [3.0, 5.0]])
        y = np.array([[0.2], [0.6]])
        model = ShapleyRegressor(1, 4, np.random.default_rng(0))
        model.fit(x, y, epochs=1, batch_size=2)
        assert model.input_shift.tolist() == [2.0, 5.0]
        assert model.input_scale.tolist() == [1.0, 1.0]
        assert model.target_shift == pytest.approx([0.4])
        assert model.target_scale == pytest.approx([0.2])
        model.fit(x + 10, y, epochs=1, batch_size=2)
        assert model.input_shift.tolist() == [2.0, 5.0]

    def test_learning_rate_decays_to_final_fraction(self):
        """The last epoch steps with the final fraction of the initial rate."""
        model = ShapleyRegressor(
            1, 4, np.random.default_rng(0), learning_rate=1e-2, final_learning_rate_fraction=0.25
        )
        model.fit(np.zeros((4, 2)), np.zeros((4, 1)), epochs=5, batch_size=4)
        assert model.optimizer.learning_rate == pytest.approx(2.5e-3)

    @pytest.mark.parametrize("fraction", [0.0, 1.5])
    def test_final_fraction_range(self, fraction):
        """The final rate is a positive fraction of the first."""
        with pytest.raises(ContractError):
            ShapleyRegressor(1, 4, np.random.default_rng(0), final_learning_rate_fraction=fraction)


class TestRegressionOrchestrator:
    """Test the regression experiment."""

    def test_dataset_sizes(self, settings):
        """Held-out fraction of the configured board count."""
        train, test = Regression(settings).dataset(np.random.SeedSequence(0))
        assert (len(train), len(test)) == (32, 8)
        assert not set(map(str, train)) & set(map(str, test))

    def test_run_writes_outputs(self, settings):
        """Predictions and summary land in the output directory."""
        report = Regression(settings).run(reporter=Reporter(silent=True))
        out = settings.output_dir / "regress"
        assert (out / "predictions.csv").exists()
        assert (out / "summary.json").exists()
        assert (out / "manifest.json").exists()
        assert (report.n_train, report.n_test) == (32, 8)
        assert np.isfinite(report.test_mse)

    def test_needs_boards(self, settings, example_board):
        """Both splits must be nonempty."""
        with pytest.raises(PreconditionError):
            Regression(settings).fit([example_board], [], np.random.SeedSequence(0))


@pytest.mark.slow
class TestRegressionAccuracy:
    """Full-size regression run."""

    def test_held_out_r_squared(self, tmp_path, monkeypatch):
        """Three thousand boards and twenty hidden units explain 90% of held-out variance."""
        monkeypatch.chdir(tmp_path)
        report = Regression(Settings(seed=0, output_dir=tmp_path)).run(
            reporter=Reporter(silent=True)
        )
        assert (report.n_train, report.n_test) == (2_400, 600)
        assert report.test_r2 >= 0.9
