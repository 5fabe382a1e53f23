"""Level-k bidder: geometric depth of reasoning over shrinking uniform intervals.

A bidder first picks a side of the estimate (above with probability ``q``),
then a reasoning depth ``n >= 0`` with ``P(n) = p (1 - p)^n``, and finally a
price uniformly on the level-``n`` rational interval: ``[A_n, E]`` below or
``[E, B_n]`` above, where ``A_n = E - (E - A) / 2^n`` and
``B_n = E + (B - E) / 2^n``.

The resulting density is a step function, constant between consecutive
barriers and increasing toward ``E``.  On level ``n``'s ring

    f(y) = p / L * sum_{k=0..n} (2 (1 - p))^k,    L = E - A  (or B - E)

and the CDF has the closed form ``1 - (1-p)^(n+1) - |E - y| f(y)`` below the
estimate (mirrored above).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .game import BidProfile, GameConfig, Unit

# A bid exactly at the estimate sits at "infinite" depth; it is given the
# deepest level distinguishable in double precision relative to the band.
LEVEL_AT_ESTIMATE = 52


class Regime(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class BidderModelParams:
    q: float
    p_plus: float
    p_minus: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise InvalidInput(f"q must lie in [0, 1], got {self.q}")
        for name in ("p_plus", "p_minus"):
            p = getattr(self, name)
            if not 0.0 < p <= 1.0:
                raise InvalidInput(f"{name} must lie in (0, 1], got {p}")

    def p(self, regime) -> float:
        return self.p_plus if Regime(regime) is Regime.UPPER else self.p_minus

    def as_dict(self) -> dict:
        return {"q": self.q, "p_plus": self.p_plus, "p_minus": self.p_minus}


def _check_p(p):
    if not 0.0 < p <= 1.0:
        raise InvalidInput(f"p must lie in (0, 1], got {p}")


def _band(config: GameConfig, regime: Regime) -> float:
    return config.lower_width if regime is Regime.LOWER else config.upper_width


def _gap(config: GameConfig, y, regime: Regime):
    """Distance from the estimate, positive on the regime's side."""
    y = np.asarray(y, dtype=float)
    return config.estimate - y if regime is Regime.LOWER else y - config.estimate


def _in_support(config: GameConfig, y, regime: Regime):
    y = np.asarray(y, dtype=float)
    if regime is Regime.LOWER:
        return (y >= config.lower) & (y <= config.estimate)
    return (y >= config.estimate) & (y <= config.upper)


def _levels(config: GameConfig, y, regime: Regime) -> np.ndarray:
    """Level index without support checks (values outside give garbage)."""
    width = _band(config, regime)
    gap = _gap(config, y, regime)
    at_e = gap <= 0
    safe = np.where(at_e, width, gap)
    with np.errstate(divide="ignore"):
        n = np.floor(np.log2(width) - np.log2(safe))
    n = np.maximum(n, 0).astype(np.int64)
    # exact barrier comparisons fix the rounding of the logarithm
    n = np.where(safe > np.ldexp(width, -n), n - 1, n)
    n = np.where(safe <= np.ldexp(width, -(n + 1)), n + 1, n)
    n = np.maximum(n, 0)
    return np.where(at_e, LEVEL_AT_ESTIMATE, n)


def level_index(config: GameConfig, y, regime) -> int | np.ndarray:
    """Deepest reasoning level whose interval still contains ``y``.

    Below the estimate this is the largest ``n`` with ``y >= A_n``; above it,
    the largest ``n`` with ``y <= B_n``.
    """
    regime = Regime(regime)
    y_arr = np.asarray(y, dtype=float)
    if not np.all(_in_support(config, y_arr, regime)):
        raise InvalidInput(f"value outside the {regime.value} regime support")
    out = _levels(config, y_arr, regime)
    return int(out) if out.ndim == 0 else out


def _log_geometric_sum(levels, p: float):
    """log of sum_{k=0..levels} (2(1-p))^k, stable at and around p = 1/2."""
    k = np.asarray(levels, dtype=float) + 1.0
    if p == 1.0:
        return np.zeros_like(k)
    if p == 0.5:
        return np.log(k)
    d = 1.0 - 2.0 * p           # r - 1 with r = 2(1-p)
    log_r = np.log1p(d)
    if d > 0:
        # r > 1: r^k dominates
        return k * log_r + np.log(-np.expm1(-k * log_r)) - np.log(d)
    return np.log(-np.expm1(k * log_r)) - np.log(-d)


def regime_log_density(config: GameConfig, y, p: float, regime) -> np.ndarray:
    """Log density of one regime; ``-inf`` off its support."""
    regime = Regime(regime)
    _check_p(p)
    y = np.asarray(y, dtype=float)
    inside = _in_support(config, y, regime)
    levels = _levels(config, np.where(inside, y, config.estimate), regime)
    out = np.log(p) - np.log(_band(config, regime)) + _log_geometric_sum(levels, p)
    return np.where(inside, out, -np.inf)


def regime_density(config: GameConfig, y, p: float, regime) -> np.ndarray:
    return np.exp(regime_log_density(config, y, p, regime))


def regime_cdf(config: GameConfig, y, p: float, regime) -> np.ndarray:
    regime = Regime(regime)
    _check_p(p)
    y = np.asarray(y, dtype=float)
    inside = _in_support(config, y, regime)
    yy = np.where(inside, y, config.estimate)
    levels = _levels(config, yy, regime)
    gap = _gap(config, yy, regime)
    with np.errstate(divide="ignore"):
        gap_mass = np.exp(np.log(gap) + regime_log_density(config, yy, p, regime))
    # mass farther from the estimate than y (mirror-symmetric in the regime)
    far = 1.0 - (1.0 - p) ** (levels + 1) - gap_mass
    if regime is Regime.LOWER:
        out = np.where(y < config.lower, 0.0, np.where(y >= config.estimate, 1.0, far))
    else:
        out = np.where(y <= config.estimate, 0.0, np.where(y >= config.upper, 1.0, 1.0 - far))
    return np.clip(out, 0.0, 1.0)


def density(params: BidderModelParams, config: GameConfig, y):
    """Mixture density ``q f+(y) + (1 - q) f-(y)``; zero off ``[lower, upper]``.

    At ``y == estimate`` only the lower branch is reported.
    """
    y = np.asarray(y, dtype=float)
    lower = regime_density(config, y, params.p_minus, Regime.LOWER)
    upper = regime_density(config, y, params.p_plus, Regime.UPPER)
    upper = np.where(y == config.estimate, 0.0, upper)
    out = params.q * upper + (1.0 - params.q) * lower
    return float(out) if out.ndim == 0 else out


def cdf(params: BidderModelParams, config: GameConfig, y):
    y = np.asarray(y, dtype=float)
    out = ((1.0 - params.q) * regime_cdf(config, y, params.p_minus, Regime.LOWER)
           + params.q * regime_cdf(config, y, params.p_plus, Regime.UPPER))
    return float(out) if out.ndim == 0 else out


def regime_moments(config: GameConfig, p: float, regime) -> tuple[float, float]:
    """Closed-form mean and variance of one regime."""
    regime = Regime(regime)
    _check_p(p)
    e = config.estimate
    end = config.lower if regime is Regime.LOWER else config.upper
    mean = (e + p * end) / (1 + p)
    var = p * (4 - p * (1 - p)) * (e - end) ** 2 / (3 * (3 + p) * (1 + p) ** 2)
    return mean, var


def lower_second_moment(config: GameConfig, p: float) -> float:
    """Raw second moment below the estimate, in the expanded polynomial form."""
    a, e = config.lower, config.estimate
    num = 4 * p * (1 + p) * a * a - 2 * p * (p - 5) * a * e + (9 + p * (p - 2)) * e * e
    return num / (3 * (1 + p) * (3 + p))


def moments(params: BidderModelParams, config: GameConfig, regime=None) -> tuple[float, float]:
    """Mean and variance of a regime, or of the two-sided mixture when ``regime`` is None.

    The mixture variance is ``q E[x+^2] + (1-q) E[x-^2] - mean^2``.
    """
    if regime is not None:
        regime = Regime(regime)
        return regime_moments(config, params.p(regime), regime)
    m_up, v_up = regime_moments(config, params.p_plus, Regime.UPPER)
    m_lo, v_lo = regime_moments(config, params.p_minus, Regime.LOWER)
    q = params.q
    mean = q * m_up + (1 - q) * m_lo
    second = q * (v_up + m_up ** 2) + (1 - q) * (v_lo + m_lo ** 2)
    return mean, second - mean ** 2


def cross_term_mixture_variance(params: BidderModelParams, config: GameConfig) -> float:
    """Mixture variance with the extra ``q(1-q) E[x+] E[x-]`` term, kept for comparison."""
    m_up, v_up = regime_moments(config, params.p_plus, Regime.UPPER)
    m_lo, v_lo = regime_moments(config, params.p_minus, Regime.LOWER)
    q = params.q
    mean = q * m_up + (1 - q) * m_lo
    return (q * (v_up + m_up ** 2) + (1 - q) * (v_lo + m_lo ** 2)
            + q * (1 - q) * m_up * m_lo - mean ** 2)


def expected_reference_price(params: BidderModelParams, config: GameConfig) -> float:
    """Expected mean-rule reference price when every bidder follows the model."""
    mean, _ = moments(params, config)
    return (config.estimate + mean) / 2


def sample_regime(config: GameConfig, p: float, regime, size, rng: np.random.Generator,
                  return_levels: bool = False):
    """Draw from one regime; levels are ``geometric - 1`` (support 0, 1, ...)."""
    regime = Regime(regime)
    _check_p(p)
    levels = rng.geometric(p, size=size) - 1
    u = rng.random(size=size)
    width = _band(config, regime)
    # ldexp keeps deep levels exact instead of multiplying by 0.5**n
    offset = np.ldexp(width * (1.0 - u), -np.minimum(levels, 2000).astype(np.int64))
    y = config.estimate - offset if regime is Regime.LOWER else config.estimate + offset
    return (y, levels) if return_levels else y


def sample_bids(params: BidderModelParams, config: GameConfig, size, seed=None) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    above = rng.random(size=size) < params.q
    lo = sample_regime(config, params.p_minus, Regime.LOWER, size, rng)
    hi = sample_regime(config, params.p_plus, Regime.UPPER, size, rng)
    return np.where(above, hi, lo)


def sample_bid(params: BidderModelParams, config: GameConfig, seed=None) -> float:
    return float(sample_bids(params, config, 1, seed)[0])


def sample_profile(params: BidderModelParams, config: GameConfig, n: int, seed=None,
                   unit: Unit = Unit.ABSOLUTE) -> BidProfile:
    if n < 1:
        raise InvalidInput("profile size must be >= 1")
    return BidProfile(tuple(sample_bids(params, config, n, seed)), unit)
