"""Result services pairing predictions with measured rewards and summarizing them."""

from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from teamform.domain.errors import ContractError
from teamform.domain.models import (
    Board,
    BoardInequality,
    ComparisonResult,
    CorrespondencePair,
    CorrespondenceReport,
    NashCorrelationReport,
    NashPair,
    NashSolution,
    PerturbationPoint,
    PerturbationReport,
    SeatComparison,
    ShapleyVector,
)
from teamform.operations.stats import mann_whitney_u, pearson, spearman, trend_line


def normalized_share(mean_reward: float, total_reward: float) -> float:
    """Mean reward as a fraction of the budget, clipped to [0, 1] against rounding."""
    return min(max(mean_reward / total_reward, 0.0), 1.0)


class CorrespondenceService:
    """Service pairing Shapley predictions with empirical reward shares."""

    @staticmethod
    def pair(
        shapley: Sequence[ShapleyVector],
        mean_rewards: Sequence[Sequence[float]],
        total_reward: float,
    ) -> list[CorrespondencePair]:
        """Build one pair per (board, seat).

        Args:
            shapley: Shapley vector of every board
            mean_rewards: Mean evaluation reward of every seat on every board
            total_reward: Budget ``r`` the shares are normalized by

        Returns:
            Pairs ordered by board, then seat
        """
        if len(shapley) != len(mean_rewards):
            raise ContractError(f"{len(shapley)} Shapley vectors for {len(mean_rewards)} boards")
        pairs = []
        for j, (phi, rewards) in enumerate(zip(shapley, mean_rewards, strict=True)):
            if len(phi) != len(rewards):
                raise ContractError(
                    f"board {j}: {len(phi)} Shapley values for {len(rewards)} seats"
                )
            pairs.extend(
                CorrespondencePair(
                    board=j,
                    seat=i,
                    shapley=phi[i],
                    share=normalized_share(reward, total_reward),
                )
                for i, reward in enumerate(rewards)
            )
        return pairs

    @staticmethod
    def summarize(pairs: list[CorrespondencePair], boards: Sequence[Board]) -> CorrespondenceReport:
        """Correlation, identity-line deviation, trend line and per-board inequality.

        Args:
            pairs: Pairs from ``pair``
            boards: Boards indexed by the pairs' ``board`` field

        Returns:
            CorrespondenceReport; ``inequality_pearson`` is None below two boards
        """
        if not pairs:
            raise ContractError("no correspondence pairs to summarize")
        phi = np.array([p.shapley for p in pairs])
        share = np.array([p.share for p in pairs])
        slope, intercept = trend_line(phi, share)

        by_board: dict[int, list[CorrespondencePair]] = defaultdict(list)
        for p in pairs:
            by_board[p.board].append(p)
        inequality = [
            BoardInequality(
                board=j,
                weight_std=float(np.std(boards[j].weights)),
                shapley_std=float(np.std([p.shapley for p in group])),
                mean_abs_deviation=float(np.mean([abs(p.share - p.shapley) for p in group])),
            )
            for j, group in sorted(by_board.items())
        ]
        inequality_pearson = None
        if len(inequality) >= 2:
            inequality_pearson = pearson(
                [b.shapley_std for b in inequality], [b.mean_abs_deviation for b in inequality]
            )

        return CorrespondenceReport(
            pairs=pairs,
            pearson=pearson(phi, share),
            mean_abs_deviation=float(np.abs(share - phi).mean()),
            slope=slope,
            intercept=intercept,
            inequality=inequality,
            inequality_pearson=inequality_pearson,
        )


class ComparisonService:
    """Service comparing a learner group's shares with a bot's."""

    @staticmethod
    def compare(
        rl_shares: Sequence[tuple[int, float]],
        bot_shares: Sequence[tuple[int, float]],
    ) -> ComparisonResult:
        """Mean shares, their difference and a two-sided Mann-Whitney test.

        Args:
            rl_shares: (seat, normalized share) samples of the learner occupying the seat
            bot_shares: (seat, normalized share) samples of the bot occupying the seat

        Returns:
            ComparisonResult with a per-seat breakdown over seats present in both groups
        """
        rl = np.array([share for _, share in rl_shares])
        bot = np.array([share for _, share in bot_shares])
        u, p = mann_whitney_u(rl, bot)

        per_seat = []
        seats = sorted({seat for seat, _ in rl_shares} & {seat for seat, _ in bot_shares})
        for seat in seats:
            per_seat.append(
                SeatComparison(
                    seat=seat,
                    rl_mean_share=float(np.mean([s for k, s in rl_shares if k == seat])),
                    bot_mean_share=float(np.mean([s for k, s in bot_shares if k == seat])),
                )
            )

        return ComparisonResult(
            rl_mean_share=float(rl.mean()),
            bot_mean_share=float(bot.mean()),
            difference=float(rl.mean() - bot.mean()),
            u_statistic=u,
            p_value=p,
            n_rl=rl.size,
            n_bot=bot.size,
            per_seat=per_seat,
        )


class NashCorrelationService:
    """Service pairing Shapley values with normalized equilibrium payoffs."""

    @staticmethod
    def pair(shapley: Sequence[ShapleyVector], solutions: Sequence[NashSolution]) -> list[NashPair]:
        """One pair per (board, seat)."""
        return [
            NashPair(board=j, seat=i, shapley=phi[i], nash_share=u)
            for j, (phi, solution) in enumerate(zip(shapley, solutions, strict=True))
            for i, u in enumerate(solution.normalized)
        ]

    @staticmethod
    def summarize(pairs_by_rounds: dict[int, list[NashPair]]) -> NashCorrelationReport:
        """Report the first horizon's pairs with the Pearson correlation of every horizon."""
        if not pairs_by_rounds:
            raise ContractError("no horizons to summarize")
        by_rounds = {
            rounds: pearson([p.shapley for p in pairs], [p.nash_share for p in pairs])
            for rounds, pairs in pairs_by_rounds.items()
        }
        first = next(iter(pairs_by_rounds))
        return NashCorrelationReport(
            rounds=first,
            pairs=pairs_by_rounds[first],
            pearson=by_rounds[first],
            pearson_by_rounds=by_rounds,
        )


class PerturbationService:
    """Service summarizing the spatial perturbation sweep."""

    @staticmethod
    def summarize(points: list[PerturbationPoint]) -> PerturbationReport:
        """Spearman correlation between spawn offset and the perturbed share."""
        return PerturbationReport(
            points=points,
            spearman=spearman([p.offset for p in points], [p.perturbed_share for p in points]),
        )
