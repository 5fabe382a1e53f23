"""Long-run reference price under noisy best responses: simulation against closed forms.

    python3 scripts/stationary_law_check.py --steps 100000
"""

import argparse

import numpy as np

from refprice.dynamics import NoiseSpec, reference_prices, simulate_stochastic, stationary_law
from refprice.game import GameConfig, contraction_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--players", default="2,3,5,10")
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--burn-in", type=int, default=1000)
    ap.add_argument("--estimate", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'N':>3} {'mean sim':>10} {'mean law':>10} {'z':>6} "
          f"{'var sim':>10} {'var law':>10} {'rel err':>8} {'unscaled':>10}")
    for n in (int(v) for v in args.players.split(",")):
        cfg = GameConfig.from_percent(args.estimate, n)
        noise = NoiseSpec(rng.uniform(0.2, 2.0, n), rng.uniform(0.5, 3.0, n))
        law = stationary_law(cfg, noise)
        path = simulate_stochastic(cfg, np.full(n, args.estimate), noise,
                                   args.steps + args.burn_in, seed=args.seed + n)
        prices = reference_prices(cfg, path)[args.burn_in + 1:]
        rho = contraction_ratio(n)
        # autocorrelation-adjusted standard error of an AR(1) sample mean
        se = np.sqrt(law.price_variance * (1 + rho) / (1 - rho) / prices.size)
        var = prices.var(ddof=1)
        print(f"{n:>3} {prices.mean():>10.4f} {law.price_mean:>10.4f} "
              f"{(prices.mean() - law.price_mean) / se:>6.2f} {var:>10.5f} "
              f"{law.price_variance:>10.5f} {var / law.price_variance - 1:>8.4f} "
              f"{law.unscaled_price_variance:>10.4f}")


if __name__ == "__main__":
    main()
