"""Auction environment, award rules and the iterated-elimination schedules.

Players are indexed from 0 throughout.  Prices may be absolute (currency)
or relative deviations ``(x - E) / E``; the functions here do not care which,
as long as the estimate and bounds of the :class:`GameConfig` use the same
units as the bids.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInput, NoAdmissibleBids

UPPER_MARKUP = 0.20
LOWER_DISCOUNT = {"works": 0.20, "supplies_services": 0.25}
DEFAULT_PRECISION = 0.01


class AwardRule(str, enum.Enum):
    GUESSING = "guessing"
    MEAN = "mean"
    MEDIAN = "median"


class ContractKind(str, enum.Enum):
    WORKS = "works"
    SUPPLIES_SERVICES = "supplies_services"


class Unit(str, enum.Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


class Side(str, enum.Enum):
    BY_DEFAULT = "by_default"
    BY_EXCESS = "by_excess"
    # guessing-game variant: nearest to the reference price either way
    NEAREST = "nearest"


class Schedule(str, enum.Enum):
    KNOWN_N = "known_n"
    UNKNOWN_N = "unknown_n"


@dataclass(frozen=True)
class GameConfig:
    """Tender environment: estimate, admissible band, field size and award rule."""

    estimate: float
    lower: float
    upper: float
    num_players: int = 2
    rule: AwardRule = AwardRule.MEAN
    contract_kind: ContractKind = ContractKind.SUPPLIES_SERVICES

    def __post_init__(self):
        object.__setattr__(self, "rule", AwardRule(self.rule))
        object.__setattr__(self, "contract_kind", ContractKind(self.contract_kind))
        if not all(math.isfinite(v) for v in (self.estimate, self.lower, self.upper)):
            raise InvalidInput("estimate and bounds must be finite")
        if not self.lower < self.estimate < self.upper:
            raise InvalidInput(
                f"need lower < estimate < upper, got {self.lower}, {self.estimate}, {self.upper}")
        if int(self.num_players) != self.num_players or self.num_players < 2:
            raise InvalidInput(f"num_players must be an integer >= 2, got {self.num_players}")

    @classmethod
    def from_percent(cls, estimate, num_players=2, rule=AwardRule.MEAN,
                     contract_kind=ContractKind.SUPPLIES_SERVICES):
        """Bounds from the decree thresholds: +20% above, -20%/-25% below."""
        kind = ContractKind(contract_kind)
        if estimate <= 0:
            raise InvalidInput("percentage bounds need a positive estimate")
        return cls(estimate, (1 - LOWER_DISCOUNT[kind.value]) * estimate,
                   (1 + UPPER_MARKUP) * estimate, num_players, rule, kind)

    @classmethod
    def normalized(cls, num_players=2, rule=AwardRule.MEAN,
                   contract_kind=ContractKind.SUPPLIES_SERVICES):
        """The same thresholds in relative-deviation units (estimate at 0)."""
        kind = ContractKind(contract_kind)
        return cls(0.0, -LOWER_DISCOUNT[kind.value], UPPER_MARKUP, num_players, rule, kind)

    def replace(self, **changes) -> "GameConfig":
        return dataclasses.replace(self, **changes)

    @property
    def lower_width(self) -> float:
        return self.estimate - self.lower

    @property
    def upper_width(self) -> float:
        return self.upper - self.estimate


@dataclass(frozen=True)
class BidProfile:
    bids: tuple
    unit: Unit = Unit.ABSOLUTE

    def __post_init__(self):
        object.__setattr__(self, "bids", tuple(float(b) for b in self.bids))
        object.__setattr__(self, "unit", Unit(self.unit))

    def __len__(self):
        return len(self.bids)

    def to_relative(self, estimate: float) -> "BidProfile":
        if self.unit is Unit.RELATIVE:
            return self
        return BidProfile(tuple((b - estimate) / estimate for b in self.bids), Unit.RELATIVE)


@dataclass(frozen=True)
class RationalInterval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool
    step: int

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:.6g}, {self.hi:.6g}{right}"


@dataclass(frozen=True)
class AuctionOutcome:
    reference_price: float
    winner: int
    side: Side
    excluded: tuple = ()
    tie_group: tuple = ()
    tie_broken_by_lot: bool = False


@dataclass(frozen=True)
class Equilibrium:
    """Result of :func:`equilibrium_analysis`; ``price`` is None when no NE exists."""

    exists: bool
    price: float | None = None
    reason: str = field(default="", compare=False)


def _as_bids(bids) -> np.ndarray:
    if isinstance(bids, BidProfile):
        bids = bids.bids
    arr = np.asarray(bids, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidInput("empty bid list")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("bids must be finite")
    return arr


def reference_price(config: GameConfig, bids) -> float:
    """Half-way blend of the estimate with the mean (or median) of ``bids``."""
    x = _as_bids(bids)
    centre = np.median(x) if config.rule is AwardRule.MEDIAN else np.mean(x)
    return float((config.estimate + centre) / 2)


def admissible(config: GameConfig, bid: float) -> bool:
    return bool(config.lower <= bid <= config.upper)


def round_to_precision(bids, precision: float | None):
    x = np.asarray(bids, dtype=float)
    if precision is None:
        return x
    if precision <= 0:
        raise InvalidInput("precision must be positive")
    digits = -math.log10(precision)
    if abs(digits - round(digits)) < 1e-9:
        # decimal rounding keeps bound values such as 120.00 exact
        return np.round(x, int(round(digits)))
    return np.round(x / precision) * precision


def determine_winner(config: GameConfig, bids, seed=None,
                     precision: float | None = DEFAULT_PRECISION) -> AuctionOutcome:
    """Apply the award rules to one tender.

    Bids outside ``[lower, upper]`` are excluded and do not enter the
    reference price.  Under the procurement rules the winner is the highest
    admissible bid not above the reference price; if there is none, the
    lowest bid above it.  Identical winning bids are settled by lot using
    ``seed``.  Bids are first rounded to ``precision`` (pass ``None`` to
    compare raw floats, e.g. for relative-deviation units).
    """
    x = round_to_precision(_as_bids(bids), precision)
    ok = (x >= config.lower) & (x <= config.upper)
    excluded = tuple(int(i) for i in np.flatnonzero(~ok))
    if not ok.any():
        raise NoAdmissibleBids(f"all {x.size} bids fall outside [{config.lower}, {config.upper}]")
    idx = np.flatnonzero(ok)
    vals = x[idx]
    price = reference_price(config, vals)

    if config.rule is AwardRule.GUESSING:
        dist = np.abs(vals - price)
        group = idx[dist == dist.min()]
        side = Side.NEAREST
    else:
        below = vals <= price
        if below.any():
            best = vals[below].max()
            side = Side.BY_DEFAULT
        else:
            best = vals.min()
            side = Side.BY_EXCESS
        group = idx[vals == best]

    if group.size > 1:
        rng = np.random.default_rng(seed)
        winner = int(rng.choice(group))
        lot = True
    else:
        winner = int(group[0])
        lot = False
    return AuctionOutcome(price, winner, side, excluded, tuple(int(i) for i in group), lot)


def fix_map(config: GameConfig, z: float) -> float:
    """Best reply to the other ``N - 1`` players all bidding ``z``."""
    n = config.num_players
    return (n * config.estimate + (n - 1) * z) / (2 * n - 1)


def contraction_ratio(num_players: int) -> float:
    return (num_players - 1) / (2 * num_players - 1)


def fix_iter(config: GameConfig, z: float, steps: int) -> float:
    """``steps``-fold composition of :func:`fix_map`, in closed form."""
    if steps < 0:
        raise InvalidInput("steps must be nonnegative")
    if steps == 0:
        return float(z)
    # E + rho^n (Z - E) is the same expression with the (2N-1)^n cancelled
    return config.estimate + contraction_ratio(config.num_players) ** steps * (z - config.estimate)


def barrier_sequences(config: GameConfig, steps: int) -> tuple[float, float]:
    """Bounds reached after ``steps`` halvings toward the estimate (N unknown)."""
    if steps < 0:
        raise InvalidInput("steps must be nonnegative")
    shrink = 0.5 ** steps
    e = config.estimate
    return e - config.lower_width * shrink, e + config.upper_width * shrink


def eliminate(config: GameConfig, steps: int,
              schedule: Schedule = Schedule.KNOWN_N) -> list[RationalInterval]:
    """Rational intervals left after each round of weak-dominance elimination.

    With a known field size the interval after round n is
    ``[Fix^n(lower), Fix^n(upper))``; the right end is dropped because a bid
    just below it beats it by default.  With an unknown field size the
    halving barriers are used and both ends are open.
    """
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    schedule = Schedule(schedule)
    out = []
    for n in range(1, steps + 1):
        if schedule is Schedule.KNOWN_N:
            lo, hi = fix_iter(config, config.lower, n), fix_iter(config, config.upper, n)
            out.append(RationalInterval(lo, hi, True, False, n))
        else:
            lo, hi = barrier_sequences(config, n)
            out.append(RationalInterval(lo, hi, False, False, n))
    return out


def equilibrium_analysis(config: GameConfig) -> Equilibrium:
    if config.rule is AwardRule.GUESSING:
        return Equilibrium(True, config.estimate,
                           "iterated elimination shrinks the rational interval to the estimate")
    if config.rule is AwardRule.MEDIAN:
        return Equilibrium(True, config.estimate,
                           "no single bidder can move the median")
    return Equilibrium(False, None,
                       "any common bid can be undercut or overcut by epsilon to win outright")


def batch_winners(config: GameConfig, profiles, precision: float | None = None):
    """Vectorised :func:`determine_winner` over the rows of ``profiles``.

    Returns ``(winner, price)``; ``winner`` is -1 where the rows would go to a
    lot, and -2 where no bid is admissible.
    """
    x = round_to_precision(np.atleast_2d(np.asarray(profiles, dtype=float)), precision)
    ok = (x >= config.lower) & (x <= config.upper)
    masked = np.where(ok, x, np.nan)
    any_ok = ok.any(axis=1)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if config.rule is AwardRule.MEDIAN:
            centre = np.nanmedian(masked, axis=1)
        else:
            centre = np.nanmean(masked, axis=1)
    price = (config.estimate + centre) / 2
    col = price[:, None]
    if config.rule is AwardRule.GUESSING:
        dist = np.where(ok, np.abs(x - col), np.inf)
        best_dist = dist.min(axis=1, keepdims=True)
        hit = ok & (dist == best_dist)
    else:
        below = ok & (x <= col)
        has_below = below.any(axis=1)
        best_below = np.where(below, x, -np.inf).max(axis=1)
        best_above = np.where(ok, x, np.inf).min(axis=1)
        best = np.where(has_below, best_below, best_above)
        hit = ok & (x == best[:, None])
    count = hit.sum(axis=1)
    winner = np.where(count == 1, hit.argmax(axis=1), -1)
    winner = np.where(any_ok, winner, -2)
    return winner, price


def profitable_deviations(config: GameConfig, others: Sequence[float], grid,
                          precision: float | None = None) -> np.ndarray:
    """Grid bids that make a player win outright against fixed ``others``.

    The deviating player is appended last.  Used to witness the absence of a
    pure Nash equilibrium under the mean rule.
    """
    others = np.asarray(others, dtype=float)
    grid = np.asarray(grid, dtype=float)
    profiles = np.column_stack([np.tile(others, (grid.size, 1)), grid])
    winner, _ = batch_winners(config, profiles, precision)
    return grid[winner == others.size]
