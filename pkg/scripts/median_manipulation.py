"""Median-rule coalition win rate as a function of coalition size.

    python3 scripts/median_manipulation.py --players 3,5,7,10 --trials 10000
"""

import argparse

from refprice.coalition import custom_plan, median_coalition_plan, simulate_median_coalition
from refprice.game import AwardRule, GameConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--players", default="3,5,7,10")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for n in (int(v) for v in args.players.split(",")):
        cfg = GameConfig.normalized(num_players=n, rule=AwardRule.MEDIAN)
        plan = median_coalition_plan(cfg)
        rates = []
        for size in range(2, n + 1):
            rate = simulate_median_coalition(cfg, args.trials, seed=args.seed,
                                             plan=custom_plan(cfg, size))
            rates.append(f"l={size}:{rate:.4f}")
        full = simulate_median_coalition(cfg, args.trials, seed=args.seed, plan=plan)
        print(f"N={n:<3} majority plan l={plan.size} ({plan.high_bidders} at ceiling) "
              f"wins {full:.4f} | one at midpoint, rest at ceiling: {' '.join(rates)}")


if __name__ == "__main__":
    main()
