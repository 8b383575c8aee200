"""Shapley regression orchestrator.

Fits a small network mapping board encodings to Shapley values and reports its fit on
held-out boards.
"""

from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

import numpy as np

from teamform.config import Settings
from teamform.domain.errors import PreconditionError
from teamform.domain.models import Board, RegressionReport
from teamform.learning.population import as_sequence
from teamform.learning.regression import (
    ShapleyRegressor,
    feature_matrix,
    mean_squared_error,
    r_squared,
)
from teamform.operations.boards import generate_split
from teamform.operations.coopgame import shapley_value
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_regression, write_report
from teamform.ui import Reporter

logger = getLogger(__name__)


class Regression:
    """Orchestrates the supervised Shapley regression."""

    def __init__(self, config: Settings | None = None):
        """Initialize the regression orchestrator.

        Args:
            config: Experiment configuration. If None, creates new Settings() from environment.
        """
        self.config = config if config is not None else Settings()

    def dataset(self, seed: np.random.SeedSequence) -> tuple[list[Board], list[Board]]:
        """Unique boards from the configured distribution, split into train and test."""
        harness = self.config.harness
        n_test = max(1, round(harness.regression_boards * harness.regression_test_fraction))
        n_train = harness.regression_boards - n_test
        train_set, test_set = generate_split(
            self.config.boards, np.random.default_rng(seed), n_train, n_test
        )
        return train_set.boards, test_set.boards

    def fit(
        self,
        train_boards: Sequence[Board],
        test_boards: Sequence[Board],
        seed: np.random.SeedSequence,
    ) -> tuple[RegressionReport, np.ndarray, np.ndarray]:
        """Train on ``train_boards`` and score on ``test_boards``.

        Returns:
            Tuple of (report, test targets, test predictions)
        """
        if not train_boards or not test_boards:
            raise PreconditionError("regression needs train and test boards")
        harness = self.config.harness
        x_train, x_test = feature_matrix(train_boards), feature_matrix(test_boards)
        y_train = np.array([shapley_value(board).values for board in train_boards])
        y_test = np.array([shapley_value(board).values for board in test_boards])

        model = ShapleyRegressor(
            train_boards[0].n,
            harness.regression_hidden,
            np.random.default_rng(seed),
            harness.regression_learning_rate,
            harness.regression_final_lr_fraction,
        )
        model.fit(x_train, y_train, harness.regression_epochs, harness.regression_batch_size)
        predictions = model.predict(x_test)

        report = RegressionReport(
            train_mse=mean_squared_error(model.predict(x_train), y_train),
            test_mse=mean_squared_error(predictions, y_test),
            test_r2=r_squared(predictions, y_test),
            hidden_units=harness.regression_hidden,
            n_boards=len(train_boards) + len(test_boards),
            n_train=len(train_boards),
            n_test=len(test_boards),
        )
        return report, y_test, predictions

    def run(
        self, output_dir: Path | None = None, reporter: Reporter | None = None
    ) -> RegressionReport:
        """Build the dataset, fit, and write ``predictions.csv`` and ``summary.json``."""
        if reporter is None:
            reporter = Reporter()
        output_dir = output_dir or self.config.output_dir / "regress"
        data_seed, model_seed = as_sequence(self.config.seed).spawn(2)

        with ManifestManager(
            output_dir / "manifest.json",
            "regress",
            self.config.seed,
            self.config.model_dump(mode="json"),
        ) as run:
            train_boards, test_boards = self.dataset(data_seed)
            logger.info(f"Fitting on {len(train_boards)} boards, scoring on {len(test_boards)}")
            report, targets, predictions = self.fit(train_boards, test_boards, model_seed)
            predictions_path = output_dir / "predictions.csv"
            run.record_output(write_regression(predictions_path, targets, predictions))
            run.record_output(write_report(output_dir / "summary.json", report))

        reporter.report_message(
            f"Held-out MSE {report.test_mse:.6f}, R² {report.test_r2:.4f} "
            f"(train MSE {report.train_mse:.6f}, {report.n_train}/{report.n_test} boards)"
        )
        return report
