"""Bias, RMSE and 99% interval coverage of the MLE and moment estimators.

    python3 scripts/estimator_study.py --reps 200 --size 200
"""

import argparse

import numpy as np

from refprice.bidder import sample_regime
from refprice.estimation import confidence_interval, mle_p, moment_p
from refprice.game import GameConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", default="0.1,0.25,0.35,0.5,0.75,0.9")
    ap.add_argument("--regime", choices=["lower", "upper"], default="lower")
    ap.add_argument("--size", type=int, default=200)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = GameConfig.normalized()
    rng = np.random.default_rng(args.seed)
    print(f"{'p':>5} {'mle bias':>9} {'mle rmse':>9} {'mom bias':>9} {'mom rmse':>9} {'coverage':>9}")
    for p in (float(v) for v in args.p.split(",")):
        mle, mom, hits = [], [], 0
        for _ in range(args.reps):
            y = sample_regime(cfg, p, args.regime, args.size, rng)
            mle.append(mle_p(y, cfg, args.regime)[0])
            mom.append(moment_p(y, cfg, args.regime))
            lo, hi = confidence_interval(y, cfg, args.regime)
            hits += lo <= p <= hi
        mle, mom = np.array(mle) - p, np.array(mom) - p
        print(f"{p:>5.2f} {mle.mean():>9.4f} {np.sqrt((mle ** 2).mean()):>9.4f} "
              f"{mom.mean():>9.4f} {np.sqrt((mom ** 2).mean()):>9.4f} {hits / args.reps:>9.3f}")


if __name__ == "__main__":
    main()
