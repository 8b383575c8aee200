"""Orchestration layer.

This module contains one orchestrator per experiment, each coordinating training,
evaluation, statistics and output files.
"""

from teamform.orchestrators.bot_comparison import BotComparison
from teamform.orchestrators.correspondence import Correspondence
from teamform.orchestrators.nash_correlation import NashCorrelation
from teamform.orchestrators.perturbation import Perturbation
from teamform.orchestrators.regression import Regression
from teamform.orchestrators.training import Training

__all__ = [
    "BotComparison",
    "Correspondence",
    "NashCorrelation",
    "Perturbation",
    "Regression",
    "Training",
]
