"""Coalition manipulation of the reference price.

Under the mean rule, ``l - 1`` members bid the ceiling ``B`` and one member
bids the price ``x*`` that equals the reference price when the outsiders bid
their expected value.  Under the median rule, a majority at ``B`` pins the
median, and a member bidding ``(B + E) / 2`` matches the reference exactly.

Coalition members occupy player slots ``0 .. l-1`` (the designated bidder
last among them); outsiders follow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bidder import BidderModelParams, cdf, moments, sample_bids
from .errors import InvalidInput
from .game import AwardRule, GameConfig, batch_winners, determine_winner


@dataclass(frozen=True)
class CoalitionPlan:
    size: int
    high_bidders: int
    designated_bid: float
    rule: AwardRule
    num_players: int

    @property
    def outsiders(self) -> int:
        return self.num_players - self.size

    def coalition_bids(self, config: GameConfig) -> np.ndarray:
        """Members' bids: ``high_bidders`` at the ceiling, one at the designated price."""
        return np.append(np.full(self.high_bidders, config.upper), self.designated_bid)

    def as_dict(self) -> dict:
        return {"size": self.size, "high_bidders": self.high_bidders,
                "designated_bid": self.designated_bid, "rule": self.rule.value,
                "num_players": self.num_players}


@dataclass(frozen=True)
class StealRisk:
    size: int
    designated_bid: float
    p_single: float
    p_any_field: float
    p_any_outsiders: float
    mc_win_rate: float | None = None
    trials: int | None = None

    def as_dict(self) -> dict:
        return {"l": self.size, "x_star": self.designated_bid, "p_single": self.p_single,
                "p_any_field": self.p_any_field, "p_any_outsiders": self.p_any_outsiders,
                "mc_win_rate": self.mc_win_rate, "trials": self.trials}


def _check_size(config: GameConfig, size: int):
    if int(size) != size or not 2 <= size <= config.num_players:
        raise InvalidInput(f"coalition size must be in [2, {config.num_players}], got {size}")


def coalition_bid(config: GameConfig, params: BidderModelParams, size: int) -> float:
    """Designated member's bid when outsiders are expected to bid the model mean."""
    _check_size(config, size)
    n = config.num_players
    outsider_mean, _ = moments(params, config)
    return ((n - size) * outsider_mean + (size - 1) * config.upper
            + n * config.estimate) / (2 * n - 1)


def mean_coalition_plan(config: GameConfig, params: BidderModelParams, size: int) -> CoalitionPlan:
    return CoalitionPlan(size, size - 1, coalition_bid(config, params, size),
                         AwardRule.MEAN, config.num_players)


def steal_probabilities(config: GameConfig, params: BidderModelParams, size: int) -> StealRisk:
    """Chance an outside bid lands in ``(x*, (B + E) / 2]``.

    ``p_any_field`` compounds the single-bid chance over all ``N`` bidders;
    ``p_any_outsiders`` over the ``N - l`` outsiders only.
    """
    x_star = coalition_bid(config, params, size)
    ceiling = (config.upper + config.estimate) / 2
    p_single = max(cdf(params, config, ceiling) - cdf(params, config, x_star), 0.0)
    n = config.num_players
    return StealRisk(size, x_star, p_single, 1 - (1 - p_single) ** n,
                     1 - (1 - p_single) ** (n - size))


def _coalition_wins(config: GameConfig, profiles: np.ndarray, size: int,
                    rng: np.random.Generator) -> np.ndarray:
    winner, _ = batch_winners(config, profiles, precision=None)
    for row in np.flatnonzero(winner < 0):
        # lots are rare; settle them with the scalar rule and a fresh seed
        seed = int(rng.integers(2 ** 63))
        winner[row] = determine_winner(config, profiles[row], seed=seed, precision=None).winner
    return winner < size


def uniform_outsiders(config: GameConfig):
    def draw(rng, size):
        return rng.uniform(config.lower, config.upper, size=size)
    return draw


def simulate_coalition(config: GameConfig, params: BidderModelParams, size: int, trials: int,
                       seed=None, outsider_sampler=None) -> StealRisk:
    """Monte Carlo win rate of the mean-rule plan against model (or custom) outsiders."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    risk = steal_probabilities(config, params, size)
    mean_cfg = config.replace(rule=AwardRule.MEAN)
    plan = mean_coalition_plan(mean_cfg, params, size)
    rng = np.random.default_rng(seed)
    shape = (trials, plan.outsiders)
    if outsider_sampler is None:
        outside = sample_bids(params, mean_cfg, shape, rng)
    else:
        outside = np.asarray(outsider_sampler(rng, shape), dtype=float).reshape(shape)
    profiles = np.hstack([np.tile(plan.coalition_bids(mean_cfg), (trials, 1)), outside])
    wins = _coalition_wins(mean_cfg, profiles, size, rng)
    return StealRisk(risk.size, risk.designated_bid, risk.p_single, risk.p_any_field,
                     risk.p_any_outsiders, float(wins.mean()), trials)


def median_coalition_plan(config: GameConfig) -> CoalitionPlan:
    """Smallest majority plan that pins the median at the ceiling."""
    n = config.num_players
    if n < 3:
        raise InvalidInput("the median plan needs at least 3 bidders")
    if n % 2:
        size, high = (n + 3) // 2, (n + 1) // 2
    else:
        size, high = (n + 4) // 2, (n + 2) // 2
    size = min(size, n)
    return CoalitionPlan(size, high, (config.upper + config.estimate) / 2,
                         AwardRule.MEDIAN, n)


def custom_plan(config: GameConfig, size: int, rule=AwardRule.MEDIAN) -> CoalitionPlan:
    """``size - 1`` members at the ceiling plus one at ``(B + E) / 2``."""
    _check_size(config, size)
    return CoalitionPlan(size, size - 1, (config.upper + config.estimate) / 2,
                         AwardRule(rule), config.num_players)


def simulate_median_coalition(config: GameConfig, trials: int, seed=None,
                              outsider_sampler=None, plan: CoalitionPlan | None = None) -> float:
    """Fraction of tenders won by the coalition under the median rule."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    med_cfg = config.replace(rule=AwardRule.MEDIAN)
    plan = plan or median_coalition_plan(med_cfg)
    sampler = outsider_sampler or uniform_outsiders(med_cfg)
    rng = np.random.default_rng(seed)
    shape = (trials, plan.outsiders)
    outside = np.asarray(sampler(rng, shape), dtype=float).reshape(shape)
    profiles = np.hstack([np.tile(plan.coalition_bids(med_cfg), (trials, 1)), outside])
    return float(_coalition_wins(med_cfg, profiles, plan.size, rng).mean())
