"""Repeated play with one-step memory.

Each round every bidder best-responds to the previous round's profile
(``G``), optionally floored at their own cost (``H``) and shaded down by a
random margin.  The linear part is a VAR(1) with companion matrix
``A / (2N - 1)`` where ``A`` has zeros on the diagonal and ones elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput
from .game import GameConfig, contraction_ratio


def off_diagonal(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def _profile(config: GameConfig, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (config.num_players,):
        raise InvalidInput(f"profile must have {config.num_players} entries, got shape {x.shape}")
    return x


def _costs(config: GameConfig, costs) -> np.ndarray | None:
    if costs is None:
        return None
    c = _profile(config, costs)
    if np.any(c < 0):
        raise InvalidInput("costs must be nonnegative")
    return c


def best_response_step(config: GameConfig, x, costs=None) -> np.ndarray:
    """One round of best responses, floored at ``costs`` when given."""
    x = _profile(config, x)
    n = config.num_players
    nxt = (x.sum() - x + n * config.estimate) / (2 * n - 1)
    c = _costs(config, costs)
    return nxt if c is None else np.maximum(c, nxt)


def closed_form_trajectory(config: GameConfig, x0, steps: int) -> np.ndarray:
    """Profile after ``steps`` cost-free rounds, via the power formula for ``A``.

    ``A^n = ((N-1)^n - (-1)^n) / N * J + (-1)^n I`` so no matrix power is
    formed.
    """
    if steps < 0:
        raise InvalidInput("steps must be nonnegative")
    x0 = _profile(config, x0)
    n = config.num_players
    a = contraction_ratio(n) ** steps          # (N-1)^n / (2N-1)^n
    b = (-1.0 / (2 * n - 1)) ** steps          # (-1)^n / (2N-1)^n
    ones = np.ones(n)
    from_start = (a - b) / n * x0.sum() * ones + b * x0
    j_coef = (1.0 - 2.0 * a + b) / n
    from_estimate = 0.5 * (j_coef * n + (1.0 - b)) * config.estimate * ones
    return from_start + from_estimate


def price_recursion(config: GameConfig, p0: float, steps: int) -> float:
    if steps < 0:
        raise InvalidInput("steps must be nonnegative")
    r = contraction_ratio(config.num_players) ** steps
    return r * p0 + (1 - r) * config.estimate


def reference_prices(config: GameConfig, trajectory) -> np.ndarray:
    """Mean-rule reference price of each row of a trajectory."""
    t = np.atleast_2d(np.asarray(trajectory, dtype=float))
    return (t.mean(axis=1) + config.estimate) / 2


def binding_costs(config: GameConfig, costs) -> np.ndarray:
    """Mask of bidders whose cost floor binds at the fixed point of ``H o G``.

    Unconstrained bidders all settle at ``v = (sum of binding costs + N E) / (N + M)``
    with ``M`` binding bidders, and a floor binds exactly when it exceeds ``v``.
    Starting from the floors above the estimate, floors at or below the
    current ``v`` are released until the set is self-consistent; ``v`` only
    grows while releasing, so this terminates in at most ``N`` passes.
    """
    c = _costs(config, costs)
    n = config.num_players
    bind = c > config.estimate
    while True:
        v = (c[bind].sum() + n * config.estimate) / (n + bind.sum())
        release = bind & (c <= v)
        if not release.any():
            return bind
        bind &= ~release


def cost_fixed_point(config: GameConfig, costs) -> np.ndarray:
    """Unique fixed point of the cost-floored best response."""
    c = _costs(config, costs)
    n = config.num_players
    bind = binding_costs(config, c)
    v = (c[bind].sum() + n * config.estimate) / (n + bind.sum())
    return np.where(bind, c, v)


def iterate_best_response(config: GameConfig, x0, costs=None, tol=1e-13,
                          max_iter=10_000) -> tuple[np.ndarray, int]:
    """Iterate :func:`best_response_step` until successive profiles agree to ``tol``."""
    x = _profile(config, x0)
    for i in range(1, max_iter + 1):
        nxt = best_response_step(config, x, costs)
        if np.max(np.abs(nxt - x)) <= tol:
            return nxt, i
        x = nxt
    return x, max_iter


@dataclass(frozen=True)
class NoiseSpec:
    """Per-bidder shading margin drawn each round.

    ``sampler(rng, size)`` replaces the normal draw when given; it must
    return an array of shape ``size``.  With ``truncate`` the shaded bids are
    clipped back into ``[lower, upper]``.
    """

    mean: np.ndarray
    std: np.ndarray
    sampler: Callable | None = field(default=None, compare=False)
    truncate: bool = False

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        std = np.broadcast_to(np.asarray(self.std, dtype=float), mean.shape).copy()
        if np.any(mean <= 0):
            raise InvalidInput("noise means must be positive")
        if np.any(std < 0):
            raise InvalidInput("noise standard deviations must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def is_normal(self) -> bool:
        return self.sampler is None

    def draw(self, rng: np.random.Generator, steps: int) -> np.ndarray:
        size = (steps, self.mean.size)
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, size), dtype=float)
        return rng.normal(self.mean, self.std, size=size)


def trajectory_seed(master_seed: int, index: int) -> int:
    """Seed of trajectory ``index`` in a batch: master seed plus index."""
    return int(master_seed) + int(index)


def simulate_stochastic(config: GameConfig, x0, noise: NoiseSpec, steps: int, seed=None,
                        costs=None) -> np.ndarray:
    """Simulate ``X_t = H(G(X_{t-1}) - eps_t)``; returns ``steps + 1`` rows, ``X_0`` first."""
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    x = _profile(config, x0)
    if noise.mean.size != config.num_players:
        raise InvalidInput("noise dimension does not match num_players")
    c = _costs(config, costs)
    rng = np.random.default_rng(seed)
    shocks = noise.draw(rng, steps)
    n = config.num_players
    path = np.empty((steps + 1, n))
    path[0] = x
    const = n * config.estimate
    for t in range(steps):
        x = (x.sum() - x + const) / (2 * n - 1) - shocks[t]
        if c is not None:
            x = np.maximum(c, x)
        if noise.truncate:
            x = np.clip(x, config.lower, config.upper)
        path[t + 1] = x
    return path


@dataclass(frozen=True)
class StationaryLaw:
    mean: np.ndarray
    covariance: np.ndarray
    price_mean: float
    price_variance: float
    # the same formulas without the 1/(2N-1) companion scaling, for comparison
    unscaled_price_variance: float
    unscaled_covariance: np.ndarray | None

    def as_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "price_mean": self.price_mean,
            "price_variance": self.price_variance,
            "unscaled_price_variance": self.unscaled_price_variance,
            "unscaled_covariance": None if self.unscaled_covariance is None
            else self.unscaled_covariance.tolist(),
        }


def _solve_vec(transition: np.ndarray, shock_cov: np.ndarray) -> np.ndarray | None:
    n = transition.shape[0]
    lhs = np.eye(n * n) - np.kron(transition, transition)
    try:
        if np.linalg.cond(lhs) > 1e12:
            return None
        vec = np.linalg.solve(lhs, shock_cov.reshape(-1, order="F"))
    except np.linalg.LinAlgError:
        return None
    return vec.reshape(n, n, order="F")


def stationary_law(config: GameConfig, noise: NoiseSpec) -> StationaryLaw:
    """Limiting Gaussian law of the shaded best-response VAR and its reference price.

    The covariance solves ``Omega = Phi Omega Phi' + Sigma`` with the scaled
    companion ``Phi = A / (2N - 1)``.  ``unscaled_covariance`` uses ``A``
    itself, which has a unit eigenvalue pair and is therefore ``None``.
    """
    if not noise.is_normal:
        raise InvalidInput("stationary law is only available for normal shading")
    n = config.num_players
    if noise.mean.size != n:
        raise InvalidInput("noise dimension does not match num_players")
    a = off_diagonal(n)
    phi = a / (2 * n - 1)
    drift = n * config.estimate / (2 * n - 1) - noise.mean
    mean = np.linalg.solve(np.eye(n) - phi, drift)
    sigma = np.diag(noise.std ** 2)
    cov = _solve_vec(phi, sigma)
    cov = (cov + cov.T) / 2
    total_var = float((noise.std ** 2).sum())
    price_mean = config.estimate - (2 * n - 1) / (2 * n * n) * float(noise.mean.sum())
    price_var = (2 * n - 1) ** 2 / (4 * n ** 3 * (3 * n - 2)) * total_var
    unscaled_var = (2 * n - 1) ** 2 / (n * (3 * n - 2)) * total_var
    return StationaryLaw(mean, cov, price_mean, price_var, unscaled_var, _solve_vec(a, sigma))
