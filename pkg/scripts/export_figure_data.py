"""Write plot-ready CSVs: the level-k step density and a histogram of model draws.

    python3 scripts/export_figure_data.py --out figures/
"""

import argparse
from pathlib import Path

import numpy as np

from refprice.bidder import BidderModelParams, density, sample_bids
from refprice.game import GameConfig
from refprice.tenders import emit_histogram, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--points", type=int, default=2001)
    ap.add_argument("--bins", type=int, default=45)
    ap.add_argument("--draws", type=int, default=74)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = GameConfig.normalized()

    ys = np.linspace(cfg.lower, cfg.estimate, args.points)
    lower_only = BidderModelParams(0.0, 0.5, 1 / 3)
    write_csv(out / "density_lower_p_one_third.csv",
              [{"y": float(y), "density": float(f)} for y, f in zip(ys, density(lower_only, cfg, ys))])

    fitted = BidderModelParams(8 / 74, 0.236527, 0.34617)
    ys = np.linspace(cfg.lower, cfg.upper, args.points)
    write_csv(out / "density_services_fit.csv",
              [{"y": float(y), "density": float(f)} for y, f in zip(ys, density(fitted, cfg, ys))])
    emit_histogram(out / "histogram_services_fit.csv",
                   sample_bids(fitted, cfg, args.draws, args.seed), cfg, args.bins)
    print(f"wrote 3 CSV files to {out}/")


if __name__ == "__main__":
    main()
