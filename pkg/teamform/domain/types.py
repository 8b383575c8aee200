"""Shared type definitions."""

from collections.abc import Callable

# Coalition of agent indices
Coalition = frozenset[int]

# Progress hook for training loops (completed episodes, total episodes)
TrainingProgressHook = Callable[[int, int], None]

# Progress hook for per-board experiment stages (board label, current count, total count)
ExperimentProgressHook = Callable[[str, int, int], None]
