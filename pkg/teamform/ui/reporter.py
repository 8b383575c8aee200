"""Reporter for experiment output and progress tracking."""

from pathlib import Path

from rich.console import Console
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table

from teamform.domain.types import ExperimentProgressHook, TrainingProgressHook


class _NoOpContext:
    def __enter__(self):
        return self

    def __exit__(self, *args):
        pass


class Reporter:
    """Reporter with rich progress bars and formatted output."""

    def __init__(self, silent: bool = False) -> None:
        """Initialize reporter.

        Args:
            silent: If True, suppress all output (for testing/automation).
        """
        self.silent = silent
        self.console = Console(quiet=silent)
        self._progress: Progress | None = None
        self._tasks: dict[str, int] = {}

    def progress_context(self):
        """Context manager for training and experiment progress display."""
        if self.silent:
            return _NoOpContext()

        class ProgressContext:
            def __init__(ctx_self, reporter):
                ctx_self.reporter = reporter

            def __enter__(ctx_self):
                ctx_self.reporter._progress = Progress(
                    TextColumn("[bold blue]{task.description}"),
                    BarColumn(),
                    MofNCompleteColumn(),
                    TimeElapsedColumn(),
                    TimeRemainingColumn(),
                    console=ctx_self.reporter.console,
                )
                ctx_self.reporter._progress.__enter__()
                return ctx_self.reporter._progress

            def __exit__(ctx_self, *args):
                if ctx_self.reporter._progress:
                    ctx_self.reporter._progress.__exit__(*args)
                    ctx_self.reporter._progress = None
                    ctx_self.reporter._tasks.clear()

        return ProgressContext(self)

    def create_training_progress_hook(self, label: str) -> TrainingProgressHook:
        """Create a hook advancing one progress bar per training run."""
        if self.silent or self._progress is None:

            def hook(completed: int, total: int) -> None:
                pass

            return hook

        task_id = self._progress.add_task(label, total=None)
        self._tasks[label] = task_id

        def hook(completed: int, total: int) -> None:
            if self._progress is None:
                return
            self._progress.update(task_id, completed=completed, total=total)

        return hook

    def create_experiment_progress_hook(self, label: str) -> ExperimentProgressHook:
        """Create a hook advancing one progress bar per experiment stage."""
        if self.silent or self._progress is None:

            def hook(stage: str, current: int, total: int) -> None:
                pass

            return hook

        task_id = self._progress.add_task(label, total=None)

        def hook(stage: str, current: int, total: int) -> None:
            if self._progress is None:
                return
            self._progress.update(
                task_id, description=f"{label}: {stage}", completed=current, total=total
            )

        return hook

    def report_table(self, table: Table) -> None:
        """Print a rendered table."""
        if not self.silent:
            self.console.print(table)

    def report_message(self, message: str) -> None:
        """Print a plain status line."""
        if not self.silent:
            self.console.print(message)

    def report_outputs(self, paths: list[Path]) -> None:
        """List the files an experiment wrote."""
        if self.silent or not paths:
            return
        self.console.print("\n[bold]Wrote[/bold]")
        for path in paths:
            self.console.print(f"  [green]✓[/green] {path}")

    def report_warning(self, message: str) -> None:
        """Report a warning message."""
        if not self.silent:
            self.console.print(f"\n[yellow]Warning:[/yellow] {message}")

    def report_error(self, message: str) -> None:
        """Report an error message."""
        if not self.silent:
            self.console.print(f"\n[red]Error:[/red] {message}")
