"""Integration tests for CLI commands."""

import pytest
from typer.testing import CliRunner

from teamform.cli.app import app
from teamform.operations.boards import load_boards
from teamform.state.manifest import load_manifest
from teamform.state.outputs import read_csv


@pytest.fixture
def cli_runner():
    """Create a Typer CLI test runner."""
    return CliRunner()


@pytest.fixture
def tiny_env(tmp_path, monkeypatch):
    """Run inside a temporary directory with tiny budgets from the environment."""
    monkeypatch.chdir(tmp_path)
    for key, value in {
        "TEAMFORM_OUTPUT_DIR": str(tmp_path / "runs"),
        "TEAMFORM_SEED": "3",
        "TEAMFORM_BOARDS__N_TRAIN": "4",
        "TEAMFORM_BOARDS__N_TEST": "2",
        "TEAMFORM_PROPOSE_ACCEPT__TOTAL_REWARD": "4",
        "TEAMFORM_RL__EPISODES": "10",
        "TEAMFORM_RL__MLP_HIDDEN": "[8]",
        "TEAMFORM_RL__CURVE_INTERVAL": "5",
        "TEAMFORM_HARNESS__EVAL_EPISODES": "3",
        "TEAMFORM_HARNESS__REGRESSION_BOARDS": "20",
        "TEAMFORM_HARNESS__REGRESSION_EPOCHS": "3",
    }.items():
        monkeypatch.setenv(key, value)
    return tmp_path


class TestShapleyCommand:
    """Test 'teamform shapley'."""

    def test_prints_values(self, cli_runner, tiny_env):
        """The pivotal-order shares of a small board."""
        result = cli_runner.invoke(app, ["shapley", "2 1 1 ; 3"])
        assert result.exit_code == 0, result.output
        assert "0.6667" in result.output
        assert "0.1667" in result.output

    def test_writes_csv(self, cli_runner, tiny_env):
        """One row per (board, seat)."""
        out = tiny_env / "shapley.csv"
        result = cli_runner.invoke(app, ["shapley", "5 6 7 5 4 ; 15", "--method", "dp", "-o", str(out)])
        assert result.exit_code == 0, result.output
        rows = read_csv(out)
        assert [row["seat"] for row in rows] == ["0", "1", "2", "3", "4"]
        assert sum(float(row["shapley"]) for row in rows) == pytest.approx(1.0)

    def test_board_file(self, cli_runner, tiny_env):
        """Boards can come from a board file."""
        path = tiny_env / "some.boards"
        path.write_text("# seed=0\n# label=test\n# n=3\n2 1 1 ; 3\n1 1 1 ; 2\n")
        result = cli_runner.invoke(app, ["shapley", "--boards", str(path)])
        assert result.exit_code == 0, result.output
        assert "0.3333" in result.output

    def test_budget_exceeded(self, cli_runner, tiny_env):
        """Too many agents for enumeration exit with code 1."""
        board = "1.5 " + "1 " * 10 + "; 6"
        result = cli_runner.invoke(app, ["shapley", board, "--method", "permutations"])
        assert result.exit_code == 1
        assert "Error" in result.output

    def test_malformed_board(self, cli_runner, tiny_env):
        """A board without a quota is a usage error."""
        result = cli_runner.invoke(app, ["shapley", "1 2 3"])
        assert result.exit_code == 2

    def test_unknown_method(self, cli_runner, tiny_env):
        """Only the known solvers are accepted."""
        result = cli_runner.invoke(app, ["shapley", "2 1 1 ; 3", "--method", "sampling"])
        assert result.exit_code == 2


class TestSolveNashCommand:
    """Test 'teamform solve-nash'."""

    def test_equilibrium(self, cli_runner, tiny_env):
        """Normalized utilities of the two-heavy board."""
        out = tiny_env / "nash.csv"
        result = cli_runner.invoke(
            app, ["solve-nash", "0.4 0.4 0.2 0.2 0.2 ; 1", "-r", "20", "-t", "10", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "0.3145" in result.output
        rows = read_csv(out)
        assert sum(float(row["expected_utility"]) for row in rows) == pytest.approx(20.0)

    def test_reward_defaults_to_settings(self, cli_runner, tiny_env):
        """Without -r the configured Propose-Accept reward is split."""
        out = tiny_env / "nash.csv"
        result = cli_runner.invoke(app, ["solve-nash", "5 6 7 5 4 ; 15", "-t", "3", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert sum(float(row["expected_utility"]) for row in read_csv(out)) == pytest.approx(4.0)

    def test_board_file(self, cli_runner, tiny_env):
        """A one-board file replaces the inline board."""
        path = tiny_env / "nash.boards"
        path.write_text("# n=5\n0.4 0.4 0.2 0.2 0.2 ; 1\n")
        result = cli_runner.invoke(app, ["solve-nash", "--board", str(path), "-r", "20", "-t", "10"])
        assert result.exit_code == 0, result.output
        assert "0.3145" in result.output

    def test_board_file_needs_one_board(self, cli_runner, tiny_env):
        """Files with several boards are a usage error."""
        path = tiny_env / "two.boards"
        path.write_text("# n=3\n2 1 1 ; 3\n1 1 1 ; 2\n")
        result = cli_runner.invoke(app, ["solve-nash", "--board", str(path)])
        assert result.exit_code == 2

    def test_board_required(self, cli_runner, tiny_env):
        """Either an inline board or a board file."""
        result = cli_runner.invoke(app, ["solve-nash"])
        assert result.exit_code == 2


class TestGenBoardsCommand:
    """Test 'teamform gen-boards'."""

    def test_writes_splits(self, cli_runner, tiny_env):
        """Train and test board files plus a manifest."""
        out = tiny_env / "boards"
        result = cli_runner.invoke(app, ["gen-boards", "--train", "5", "--test", "3", "-o", str(out)])
        assert result.exit_code == 0, result.output

        train, test = load_boards(out / "train.boards"), load_boards(out / "test.boards")
        assert (len(train.boards), len(test.boards)) == (5, 3)
        assert train.seed == 3
        assert not set(train.boards) & set(test.boards)
        assert set(load_manifest(out / "manifest.json").outputs) == {"train.boards", "test.boards"}

    def test_same_seed_same_boards(self, cli_runner, tiny_env):
        """Generation is reproducible."""
        for name in ("a", "b"):
            result = cli_runner.invoke(app, ["gen-boards", "-o", str(tiny_env / name)])
            assert result.exit_code == 0, result.output
        assert (tiny_env / "a" / "train.boards").read_text() == (tiny_env / "b" / "train.boards").read_text()

    def test_subcommand_seed(self, cli_runner, tiny_env):
        """A seed after the subcommand overrides the configured one."""
        result = cli_runner.invoke(app, ["gen-boards", "--seed", "11", "-o", str(tiny_env / "a")])
        assert result.exit_code == 0, result.output
        assert load_boards(tiny_env / "a" / "train.boards").seed == 11
        result = cli_runner.invoke(app, ["--seed", "11", "gen-boards", "-o", str(tiny_env / "b")])
        assert result.exit_code == 0, result.output
        assert (tiny_env / "a" / "train.boards").read_text() == (tiny_env / "b" / "train.boards").read_text()


class TestExperimentCommands:
    """Test experiment commands on tiny budgets."""

    def test_train_then_evaluate(self, cli_runner, tiny_env):
        """A checkpoint written by train is evaluated with a trajectory log."""
        result = cli_runner.invoke(app, ["train", "-o", str(tiny_env / "train")])
        assert result.exit_code == 0, result.output
        checkpoint = tiny_env / "train" / "checkpoint"
        assert (checkpoint / "params.npz").exists()
        assert len(read_csv(tiny_env / "train" / "evaluation.csv")) == 2 * 5

        trajectory = tiny_env / "steps.jsonl"
        result = cli_runner.invoke(
            app,
            [
                "evaluate",
                str(checkpoint),
                "--board",
                "5 6 7 5 4 ; 15",
                "-n",
                "2",
                "--trajectory",
                str(trajectory),
                "-o",
                str(tiny_env / "eval"),
            ],
        )
        assert result.exit_code == 0, result.output
        assert trajectory.exists()
        assert len(read_csv(tiny_env / "eval" / "evaluation.csv")) == 5

    def test_regress(self, cli_runner, tiny_env):
        """The regression summary is written."""
        result = cli_runner.invoke(app, ["regress", "-o", str(tiny_env / "regress")])
        assert result.exit_code == 0, result.output
        assert (tiny_env / "regress" / "summary.json").exists()
        assert "Held-out MSE" in result.output

    def test_regress_seed(self, cli_runner, tiny_env):
        """The subcommand seed is recorded in the run manifest."""
        out = tiny_env / "regress"
        result = cli_runner.invoke(app, ["regress", "--seed", "5", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert load_manifest(out / "manifest.json").seed == 5

    def test_nash_correlation(self, cli_runner, tiny_env):
        """One pair file per horizon."""
        path = tiny_env / "some.boards"
        path.write_text("# seed=0\n# label=test\n# n=5\n5 6 7 5 4 ; 15\n16 1 1 1 1 ; 15\n7 8 5 9 9 ; 15\n")
        out = tiny_env / "nash"
        result = cli_runner.invoke(
            app, ["nash-corr", "--boards", str(path), "-t", "2", "-t", "5", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert len(read_csv(out / "pairs_T2.csv")) == 15
        assert (out / "pairs_T5.csv").exists()


class TestErrors:
    """Test error handling."""

    def test_missing_config_file(self, cli_runner, tiny_env):
        """A missing TOML file exits with code 1."""
        result = cli_runner.invoke(app, ["--config", str(tiny_env / "nope.toml"), "regress"])
        assert result.exit_code == 1

    def test_missing_checkpoint(self, cli_runner, tiny_env):
        """Evaluating nothing exits with code 1."""
        result = cli_runner.invoke(app, ["evaluate", str(tiny_env / "none"), "--board", "2 1 1 ; 3"])
        assert result.exit_code == 1

    def test_no_command_shows_help(self, cli_runner, tiny_env):
        """The bare command prints its help."""
        result = cli_runner.invoke(app, [])
        assert result.exit_code == 0
        assert "gen-boards" in result.output
