"""Typer-based CLI for the team formation experiments."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import typer
from pydantic import ValidationError
from rich.logging import RichHandler

from teamform.config import BoardSettings, Settings
from teamform.domain.errors import TeamformError
from teamform.domain.models import Board, BotMode, BotParams, EnvKind
from teamform.operations.boards import generate_split, load_boards, save_boards
from teamform.operations.coopgame import shapley_dp, shapley_permutations, shapley_value
from teamform.operations.nash import solve_backward_induction
from teamform.orchestrators import (
    BotComparison,
    Correspondence,
    NashCorrelation,
    Perturbation,
    Regression,
    Training,
)
from teamform.state.manifest import ManifestManager
from teamform.state.outputs import write_nash, write_shapley
from teamform.ui import Reporter
from teamform.ui.tables import create_evaluation_table, create_nash_table, create_shapley_table

app = typer.Typer(help="Team formation experiments on weighted voting games")


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config: Path = typer.Option(
        None, "--config", "-c", help="TOML file with one table per section"
    ),
    seed: int = typer.Option(None, "--seed", help="Root seed (overrides the config)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log debug messages"),
):
    """Load settings once and show help when no subcommand is provided."""
    if verbose:
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(message)s",
            handlers=[RichHandler(rich_tracebacks=True)],
        )
    if ctx.invoked_subcommand is None:
        typer.echo(ctx.get_help())
        raise typer.Exit()

    overrides = {} if seed is None else {"seed": seed}
    try:
        ctx.obj = Settings.from_toml(config, **overrides) if config else Settings(**overrides)
    except (TeamformError, ValidationError) as e:
        Reporter().report_error(str(e))
        raise typer.Exit(1) from e


@contextmanager
def _handle_errors(reporter: Reporter) -> Iterator[None]:
    """Report library errors and exit with code 1."""
    try:
        yield
    except (TeamformError, ValidationError) as e:
        reporter.report_error(str(e))
        raise typer.Exit(1) from e


def _parse_board(text: str) -> Board:
    try:
        return Board.parse(text)
    except ValueError as e:
        raise typer.BadParameter(f"expected 'w_1 ... w_n ; q', got {text!r}") from e


def _seed_option():
    return typer.Option(None, "--seed", help="Root seed of this run (overrides the global --seed)")


def _settings(ctx: typer.Context, seed: int | None) -> Settings:
    settings: Settings = ctx.obj
    return settings if seed is None else settings.model_copy(update={"seed": seed})


def _single_board(board: str | None, board_file: Path | None) -> Board:
    if board_file is None:
        if board is None:
            raise typer.BadParameter("pass a board or --board FILE")
        return _parse_board(board)
    boards = load_boards(board_file).boards
    if len(boards) != 1:
        raise typer.BadParameter(f"{board_file} holds {len(boards)} boards, expected one")
    return boards[0]


def _boards(board: str | None, boards_file: Path | None) -> list[Board]:
    if boards_file is not None:
        return load_boards(boards_file).boards
    if board is None:
        raise typer.BadParameter("pass a board or --boards FILE")
    return [_parse_board(board)]


@app.command("gen-boards")
def gen_boards(
    ctx: typer.Context,
    n: int = typer.Option(None, "--n", help="Agents per board"),
    quota: float = typer.Option(None, "--quota", help="Quota q"),
    mean: float = typer.Option(None, "--mean", help="Weight mean"),
    std: float = typer.Option(None, "--std", help="Weight standard deviation"),
    n_train: int = typer.Option(None, "--train", help="Training boards"),
    n_test: int = typer.Option(None, "--test", help="Test boards"),
    exclude_equal_power: bool = typer.Option(
        None,
        "--exclude-equal-power/--keep-equal-power",
        help="Reject boards where every agent has equal power",
    ),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Sample unique train and test boards and write them as board files."""
    settings = _settings(ctx, seed)
    reporter = Reporter()
    updates = {
        "n": n,
        "quota": quota,
        "weight_mean": mean,
        "weight_std": std,
        "n_train": n_train,
        "n_test": n_test,
        "exclude_equal_power": exclude_equal_power,
    }
    out = out or settings.output_dir / "boards"

    with _handle_errors(reporter):
        dist = BoardSettings.model_validate(
            settings.boards.model_dump() | {key: v for key, v in updates.items() if v is not None}
        )
        train_set, test_set = generate_split(
            dist,
            np.random.default_rng(settings.seed),
            dist.n_train,
            dist.n_test,
            seed=settings.seed,
        )
        with ManifestManager(
            out / "manifest.json", "gen-boards", settings.seed, settings.model_dump(mode="json")
        ) as run:
            paths = []
            for board_set in (train_set, test_set):
                path = out / f"{board_set.label.value}.boards"
                save_boards(board_set, path)
                run.record_output(path)
                paths.append(path)
    reporter.report_outputs(paths)


@app.command()
def shapley(
    board: str = typer.Argument(None, help="Board as 'w_1 ... w_n ; q'"),
    boards_file: Path = typer.Option(
        None, "--boards", "-b", help="Board file instead of a single board"
    ),
    method: str = typer.Option("auto", "--method", help="auto, dp or permutations"),
    out: Path = typer.Option(
        None, "--out", "-o", help="CSV file with (board, seat, weight, shapley)"
    ),
):
    """Compute exact Shapley values."""
    reporter = Reporter()
    solvers = {"auto": shapley_value, "dp": shapley_dp, "permutations": shapley_permutations}
    if method not in solvers:
        raise typer.BadParameter(f"method must be one of {', '.join(solvers)}")

    with _handle_errors(reporter):
        boards = _boards(board, boards_file)
        vectors = [solvers[method](b) for b in boards]
        for b, phi in zip(boards, vectors, strict=True):
            reporter.report_table(create_shapley_table(b, phi))
        if out is not None:
            reporter.report_outputs([write_shapley(out, boards, vectors)])


@app.command("solve-nash")
def solve_nash(
    ctx: typer.Context,
    board: str = typer.Argument(None, help="Board as 'w_1 ... w_n ; q'"),
    board_file: Path = typer.Option(
        None, "--board", help="Board file holding the single board to solve"
    ),
    reward: int = typer.Option(
        None, "--reward", "-r", help="Total reward (defaults to propose_accept.total_reward)"
    ),
    rounds: int = typer.Option(10, "--rounds", "-t", help="Horizon T"),
    integer_thresholds: bool = typer.Option(
        False, "--integer-thresholds", help="Round thresholds up to integers"
    ),
    exact: bool = typer.Option(
        True, "--exact/--float", help="Exact rational or floating point arithmetic"
    ),
    out: Path = typer.Option(
        None, "--out", "-o", help="CSV file with (player, expected_utility, normalized)"
    ),
):
    """Solve the finite-horizon Propose-Accept game by backward induction."""
    settings: Settings = ctx.obj
    reporter = Reporter()
    with _handle_errors(reporter):
        solution = solve_backward_induction(
            _single_board(board, board_file),
            reward or settings.propose_accept.total_reward,
            rounds,
            integer_thresholds=integer_thresholds,
            exact=exact,
        )
        reporter.report_table(create_nash_table(solution))
        if out is not None:
            reporter.report_outputs([write_nash(out, solution)])


@app.command()
def train(
    ctx: typer.Context,
    env: EnvKind = typer.Option(EnvKind.PROPOSE_ACCEPT, "--env", "-e", help="Environment"),
    bot_seats: list[int] = typer.Option(
        None, "--bot-seat", help="Seat played by the configured bot (repeatable)"
    ),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Train a population on the train split, evaluate it on the test split and checkpoint it."""
    settings = _settings(ctx, seed)
    reporter = Reporter()
    bot = BotParams(mode=settings.bots.mode, acceptance_scale=settings.bots.acceptance_scale)
    with _handle_errors(reporter):
        training = Training(settings)
        bots = {seat: bot for seat in bot_seats or []}
        _, results = training.run(env, output_dir=out, bots=bots, reporter=reporter)
        reporter.report_table(create_evaluation_table(results, training.total_reward(env)))


@app.command()
def evaluate(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., help="Checkpoint directory written by train"),
    board: str = typer.Option(None, "--board", help="Board as 'w_1 ... w_n ; q'"),
    boards_file: Path = typer.Option(None, "--boards", "-b", help="Board file"),
    episodes: int = typer.Option(None, "--episodes", "-n", help="Episodes per board"),
    trajectory: Path = typer.Option(None, "--trajectory", help="JSON lines file of every step"),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Evaluate a saved population without learning."""
    settings = _settings(ctx, seed)
    reporter = Reporter()
    with _handle_errors(reporter):
        training = Training(settings)
        population, results = training.run_evaluation(
            checkpoint,
            _boards(board, boards_file),
            episodes=episodes,
            output_dir=out,
            trajectory_path=trajectory,
            reporter=reporter,
        )
        total_reward = training.total_reward(population.env_kind)
        reporter.report_table(create_evaluation_table(results, total_reward))


@app.command("compare-bots")
def compare_bots(
    ctx: typer.Context,
    mode: BotMode = typer.Option(None, "--mode", "-m", help="Bot played during training"),
    eval_mode: BotMode = typer.Option(None, "--eval-mode", help="Bot swapped in for evaluation"),
    seats: list[int] = typer.Option(None, "--seat", help="Seat the bot occupies (repeatable)"),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Compare learners with a bot playing the same seat."""
    reporter = Reporter()
    with _handle_errors(reporter):
        BotComparison(_settings(ctx, seed)).run(
            mode, eval_mode, seats or None, output_dir=out, reporter=reporter
        )


@app.command()
def correspondence(
    ctx: typer.Context,
    env: EnvKind = typer.Option(EnvKind.PROPOSE_ACCEPT, "--env", "-e", help="Environment"),
    reduced_variance: bool = typer.Option(
        False, "--reduced-variance", help="Keep equal-power boards"
    ),
    shapley_aware: bool = typer.Option(
        None, "--shapley-aware/--no-shapley-aware", help="Observe Shapley values"
    ),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Pair empirical reward shares with Shapley values on test boards."""
    reporter = Reporter()
    with _handle_errors(reporter):
        Correspondence(_settings(ctx, seed)).run(
            env, reduced_variance, shapley_aware, output_dir=out, reporter=reporter
        )


@app.command()
def perturb(
    ctx: typer.Context,
    board: str = typer.Option(None, "--board", help="Board as 'w_1 ... w_n ; q'"),
    offsets: list[int] = typer.Option(
        None, "--offset", help="Spawn offset in [0, 10] (repeatable)"
    ),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Sweep the heaviest agent's spawn distance from the nearest patch."""
    reporter = Reporter()
    with _handle_errors(reporter):
        Perturbation(_settings(ctx, seed)).run(
            _parse_board(board) if board else None,
            offsets or None,
            output_dir=out,
            reporter=reporter,
        )


@app.command()
def regress(
    ctx: typer.Context,
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Fit a small network to Shapley values and score it on held-out boards."""
    reporter = Reporter()
    with _handle_errors(reporter):
        Regression(_settings(ctx, seed)).run(output_dir=out, reporter=reporter)


@app.command("nash-corr")
def nash_corr(
    ctx: typer.Context,
    boards_file: Path = typer.Option(
        None, "--boards", "-b", help="Board file (defaults to the sampled test split)"
    ),
    rounds: list[int] = typer.Option(None, "--rounds", "-t", help="Horizon T (repeatable)"),
    integer_thresholds: bool | None = typer.Option(
        None,
        "--integer-thresholds/--real-thresholds",
        help="Whole-unit thresholds (default from harness.nash_integer_thresholds)",
    ),
    seed: int = _seed_option(),
    out: Path = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Correlate equilibrium payoffs with Shapley values."""
    reporter = Reporter()
    with _handle_errors(reporter):
        boards = load_boards(boards_file).boards if boards_file else None
        NashCorrelation(_settings(ctx, seed)).run(
            boards, rounds or None, integer_thresholds, output_dir=out, reporter=reporter
        )


if __name__ == "__main__":
    app()
