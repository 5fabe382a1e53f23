"""Fitting the level-k bidder model to observed relative deviations."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .bidder import Regime, _in_support, _levels, _log_geometric_sum, regime_moments
from .errors import DegenerateSample, InvalidInput
from .game import GameConfig

P_SEARCH = (1e-4, 1.0)
MULTI_START = (0.1, 0.5, 0.9)


class Method(str, enum.Enum):
    MLE = "mle"
    MOMENTS = "moments"


@dataclass(frozen=True)
class BidSample:
    """Relative deviations ``(x - E) / E`` pooled over tenders."""

    deviations: np.ndarray
    tender_ids: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        y = np.asarray(self.deviations, dtype=float).ravel()
        if not np.all(np.isfinite(y)):
            raise InvalidInput("deviations must be finite")
        object.__setattr__(self, "deviations", y)
        if self.tender_ids is not None:
            ids = tuple(self.tender_ids)
            if len(ids) != y.size:
                raise InvalidInput("tender_ids must match the number of deviations")
            object.__setattr__(self, "tender_ids", ids)

    def __len__(self):
        return self.deviations.size

    def subset(self, mask) -> "BidSample":
        ids = None
        if self.tender_ids is not None:
            ids = tuple(t for t, keep in zip(self.tender_ids, mask) if keep)
        return BidSample(self.deviations[mask], ids)


def _values(sample) -> np.ndarray:
    if isinstance(sample, BidSample):
        return sample.deviations
    return np.asarray(sample, dtype=float).ravel()


def split_regimes(sample: BidSample) -> tuple[BidSample, BidSample]:
    """``(upper, lower)``: strictly positive deviations, then the rest."""
    if not isinstance(sample, BidSample):
        sample = BidSample(sample)
    pos = sample.deviations > 0
    return sample.subset(pos), sample.subset(~pos)


def estimate_q(sample) -> float:
    y = _values(sample)
    if y.size == 0:
        raise InvalidInput("empty sample")
    return float(np.count_nonzero(y > 0) / y.size)


def _floor_gap(y, config: GameConfig, regime: Regime, resolution):
    """Move points closer to the estimate than half a rounding step out to that distance.

    Prices recorded at a finite precision put some bids exactly on the
    estimate, whose level is otherwise unbounded.
    """
    if not resolution:
        return y
    half = resolution / 2.0
    e = config.estimate
    if regime is Regime.LOWER:
        return np.minimum(y, e - half)
    return np.maximum(y, e + half)


class _LevelCounts:
    """Sufficient statistic for the likelihood: how many points sit on each level."""

    def __init__(self, sample, config: GameConfig, regime: Regime, resolution=None):
        y = _values(sample)
        if y.size == 0:
            raise InvalidInput(f"empty {regime.value} regime sample")
        if not np.all(_in_support(config, y, regime)):
            raise InvalidInput(f"sample point outside the {regime.value} regime support")
        y = _floor_gap(y, config, regime, resolution)
        self.levels, self.counts = np.unique(_levels(config, y, regime), return_counts=True)
        self.size = y.size
        width = config.lower_width if regime is Regime.LOWER else config.upper_width
        self.log_width = math.log(width)

    def __call__(self, p: float) -> float:
        terms = math.log(p) - self.log_width + _log_geometric_sum(self.levels, p)
        return float(np.dot(self.counts, terms))


def log_likelihood(sample, p: float, config: GameConfig, regime, resolution=None) -> float:
    """Regime log-likelihood; ``resolution`` is the rounding step of the data, if any."""
    regime = Regime(regime)
    if not 0.0 < p <= 1.0:
        raise InvalidInput(f"p must lie in (0, 1], got {p}")
    return _LevelCounts(sample, config, regime, resolution)(p)


def _golden_max(f, lo, hi, tol=1e-10):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def mle_p(sample, config: GameConfig, regime, bounds=P_SEARCH,
          resolution=None) -> tuple[float, float]:
    """Maximum-likelihood ``p`` for one regime, with the log-likelihood reached.

    A coarse scan (which includes the starts 0.1, 0.5, 0.9) picks the
    bracket around the best point, then golden-section refines it.
    """
    regime = Regime(regime)
    ll = _LevelCounts(sample, config, regime, resolution)
    lo, hi = bounds
    grid = np.unique(np.concatenate([np.geomspace(lo, hi, 48), np.linspace(lo, hi, 48),
                                     MULTI_START]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    values = np.array([ll(p) for p in grid])
    best = int(np.argmax(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]
    p, val = _golden_max(ll, a, b)
    if values[best] > val:
        p, val = float(grid[best]), float(values[best])
    return float(p), float(val)


def _p_from_mean(mean: float, config: GameConfig, regime: Regime) -> float:
    e = config.estimate
    if regime is Regime.LOWER:
        return (e - mean) / (mean - config.lower)
    return (mean - e) / (config.upper - mean)


def moment_p(sample, config: GameConfig, regime) -> float:
    """Invert the regime mean ``(E + p * end) / (1 + p)``; clamped to at most 1."""
    regime = Regime(regime)
    y = _values(sample)
    if y.size == 0:
        raise InvalidInput(f"empty {regime.value} regime sample")
    mean = float(y.mean())
    lo, hi = (config.lower, config.estimate) if regime is Regime.LOWER \
        else (config.estimate, config.upper)
    if not lo < mean < hi:
        raise DegenerateSample(f"{regime.value} regime mean {mean} not inside ({lo}, {hi})")
    return min(_p_from_mean(mean, config, regime), 1.0)


def _clamped_p_from_mean(mean, config, regime):
    lo, hi = (config.lower, config.estimate) if regime is Regime.LOWER \
        else (config.estimate, config.upper)
    if regime is Regime.LOWER:
        if mean >= hi:
            return 0.0
        if mean <= lo:
            return 1.0
    else:
        if mean <= lo:
            return 0.0
        if mean >= hi:
            return 1.0
    return min(_p_from_mean(mean, config, regime), 1.0)


def confidence_interval(sample, config: GameConfig, regime, alpha: float = 0.01):
    """CLT interval for the regime mean, mapped through the moment inverse.

    The regime mean is monotone in ``p`` so the image of the mean interval is
    an interval in ``p``; it is returned as ``(low, high)``.
    """
    regime = Regime(regime)
    if not 0.0 < alpha <= 1.0:
        raise InvalidInput("alpha must lie in (0, 1]")
    y = _values(sample)
    if y.size < 2:
        raise InvalidInput("need at least two observations for an interval")
    sd = float(y.std(ddof=1))
    if sd == 0.0:
        raise DegenerateSample("zero sample variance")
    half = norm.ppf(1.0 - alpha / 2.0) * sd / math.sqrt(y.size)
    mean = float(y.mean())
    ends = sorted(_clamped_p_from_mean(m, config, regime) for m in (mean - half, mean + half))
    return float(ends[0]), float(ends[1])


@dataclass(frozen=True)
class EstimationResult:
    method: Method
    q_hat: float
    m_plus: int
    m_minus: int
    p_hat_plus: float | None
    p_hat_minus: float | None
    loglik_plus: float | None
    loglik_minus: float | None
    ci_plus: tuple | None
    ci_minus: tuple | None
    alpha: float

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "q_hat": self.q_hat,
            "m_plus": self.m_plus,
            "m_minus": self.m_minus,
            "p_hat_plus": self.p_hat_plus,
            "p_hat_minus": self.p_hat_minus,
            "loglik_plus": self.loglik_plus,
            "loglik_minus": self.loglik_minus,
            "ci_plus": list(self.ci_plus) if self.ci_plus else None,
            "ci_minus": list(self.ci_minus) if self.ci_minus else None,
            "alpha": self.alpha,
        }


def fit(sample, config: GameConfig, method=Method.MLE, alpha: float = 0.01,
        resolution=None) -> EstimationResult:
    """Estimate ``(q, p+, p-)``; a regime with no data gets ``None`` fields.

    ``resolution`` is the rounding step of the deviations (see ``_floor_gap``).
    """
    method = Method(method)
    if not isinstance(sample, BidSample):
        sample = BidSample(sample)
    upper, lower = split_regimes(sample)
    out = {}
    for tag, part, regime in (("plus", upper, Regime.UPPER), ("minus", lower, Regime.LOWER)):
        p = ll = ci = None
        if len(part):
            if method is Method.MLE:
                p, ll = mle_p(part, config, regime, resolution=resolution)
            else:
                p = moment_p(part, config, regime)
                ll = log_likelihood(part, p, config, regime, resolution) if p > 0 else None
            if len(part) >= 2 and part.deviations.std() > 0:
                ci = confidence_interval(part, config, regime, alpha)
        out[tag] = (p, ll, ci)
    return EstimationResult(method, estimate_q(sample), len(upper), len(lower),
                            out["plus"][0], out["minus"][0], out["plus"][1], out["minus"][1],
                            out["plus"][2], out["minus"][2], alpha)


def regime_mean(config: GameConfig, p: float, regime) -> float:
    return regime_moments(config, p, regime)[0]
