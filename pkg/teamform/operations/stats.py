"""Rank tests and correlations used by the experiment summaries."""

from collections.abc import Sequence
from itertools import combinations
from logging import getLogger

import numpy as np
from scipy.stats import norm, rankdata

from teamform.domain.errors import ContractError

logger = getLogger(__name__)

EXACT_LIMIT = 20


def _as_array(sample: Sequence[float], name: str) -> np.ndarray:
    values = np.asarray(sample, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ContractError(f"{name} must be a nonempty 1-d sample")
    return values


def mann_whitney_u(
    sample_a: Sequence[float], sample_b: Sequence[float], exact_limit: int = EXACT_LIMIT
) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test.

    ``U`` counts the pairs in which ``sample_a`` ranks above ``sample_b`` (ties count a
    half). For at most ``exact_limit`` pooled observations the p-value enumerates every
    assignment of the pooled ranks to the first sample; otherwise it uses the
    tie-corrected normal approximation with continuity correction.

    Args:
        sample_a: First sample
        sample_b: Second sample
        exact_limit: Largest pooled size tested by enumeration

    Returns:
        Tuple of (U for ``sample_a``, two-sided p-value)
    """
    a = _as_array(sample_a, "sample_a")
    b = _as_array(sample_b, "sample_b")
    n_a, n_b = a.size, b.size
    ranks = rankdata(np.concatenate([a, b]))
    offset = n_a * (n_a + 1) / 2
    u = float(ranks[:n_a].sum() - offset)
    mu = n_a * n_b / 2
    observed = abs(u - mu)

    if n_a + n_b <= exact_limit:
        extreme = total = 0
        for combo in combinations(range(n_a + n_b), n_a):
            total += 1
            if abs(ranks[list(combo)].sum() - offset - mu) >= observed - 1e-9:
                extreme += 1
        return u, extreme / total

    n = n_a + n_b
    _, counts = np.unique(ranks, return_counts=True)
    ties = float((counts**3 - counts).sum())
    sigma = np.sqrt(n_a * n_b / 12 * ((n + 1) - ties / (n * (n - 1))))
    if sigma == 0:
        return u, 1.0
    z = max(observed - 0.5, 0.0) / sigma
    return u, float(min(1.0, 2 * norm.sf(z)))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation; NaN when either sample is constant."""
    xs = _as_array(x, "x")
    ys = _as_array(y, "y")
    if xs.size != ys.size:
        raise ContractError(f"samples differ in length: {xs.size} != {ys.size}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    denom = np.sqrt((dx**2).sum() * (dy**2).sum())
    if denom == 0:
        logger.warning("Correlation undefined for a constant sample")
        return float("nan")
    return float((dx * dy).sum() / denom)


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation (Pearson correlation of average ranks)."""
    return pearson(rankdata(_as_array(x, "x")), rankdata(_as_array(y, "y")))


def trend_line(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)``; a flat line through the mean for constant x."""
    xs = _as_array(x, "x")
    ys = _as_array(y, "y")
    if xs.size != ys.size:
        raise ContractError(f"samples differ in length: {xs.size} != {ys.size}")
    dx = xs - xs.mean()
    var = float((dx**2).sum())
    if var == 0:
        return 0.0, float(ys.mean())
    slope = float((dx * (ys - ys.mean())).sum() / var)
    return slope, float(ys.mean() - slope * xs.mean())
