"""Designated bid, steal probabilities and simulated win rate of mean-rule coalitions.

    python3 scripts/coalition_risk.py --players 10 --trials 10000
"""

import argparse

from refprice.bidder import BidderModelParams
from refprice.coalition import simulate_coalition
from refprice.game import GameConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--players", type=int, default=10)
    ap.add_argument("--q", type=float, default=8 / 74)
    ap.add_argument("--p-plus", type=float, default=0.236527)
    ap.add_argument("--p-minus", type=float, default=0.34617)
    ap.add_argument("--sizes", default="2-6", help="range of coalition sizes, e.g. 2-6")
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = GameConfig.normalized(num_players=args.players)
    params = BidderModelParams(args.q, args.p_plus, args.p_minus)
    lo, hi = (int(v) for v in args.sizes.split("-"))
    print(f"{'l':>3} {'x*':>10} {'p_single':>10} {'p_any(N)':>10} {'p_any(N-l)':>11} {'win rate':>9}")
    for i, size in enumerate(range(lo, min(hi, args.players) + 1)):
        r = simulate_coalition(cfg, params, size, args.trials, seed=args.seed + i)
        print(f"{size:>3} {r.designated_bid:>10.6f} {r.p_single:>10.5f} {r.p_any_field:>10.5f} "
              f"{r.p_any_outsiders:>11.5f} {r.mc_win_rate:>9.4f}")


if __name__ == "__main__":
    main()
