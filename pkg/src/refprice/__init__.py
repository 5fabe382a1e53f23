"""Reference-price sealed-bid auctions: rules, dynamics, bidder model, estimation, coalitions."""

from .bidder import BidderModelParams, Regime, cdf, density, moments, sample_bids
from .coalition import (coalition_bid, median_coalition_plan, simulate_coalition,
                        simulate_median_coalition, steal_probabilities)
from .dynamics import NoiseSpec, cost_fixed_point, simulate_stochastic, stationary_law
from .errors import DegenerateSample, InvalidInput, NoAdmissibleBids, ParseError, UsageError
from .estimation import BidSample, EstimationResult, fit
from .game import AwardRule, ContractKind, GameConfig, determine_winner, eliminate

__version__ = "0.1.0"

__all__ = [
    "AwardRule", "BidSample", "BidderModelParams", "ContractKind", "DegenerateSample",
    "EstimationResult", "GameConfig", "InvalidInput", "NoAdmissibleBids", "NoiseSpec",
    "ParseError", "Regime", "UsageError", "cdf", "coalition_bid", "cost_fixed_point",
    "density", "determine_winner", "eliminate", "fit", "median_coalition_plan", "moments",
    "sample_bids", "simulate_coalition", "simulate_median_coalition", "simulate_stochastic",
    "stationary_law", "steal_probabilities",
]
