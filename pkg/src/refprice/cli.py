"""Command-line front end.

Every command prints one JSON document (or writes ``<out>/<command>.json``)
and, when ``--out`` is given, CSV artifacts beside it.  Output is a pure
function of the inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bidder, coalition, dynamics, estimation, game, tenders
from .errors import InvalidInput, UsageError

COMMANDS = ("winner", "eliminate", "dynamics", "sample", "estimate", "coalition",
            "median-coalition", "density")

RULE_ALIASES = {"guessinggame": "guessing",
                "procurementmean": "mean", "procurementmedian": "median"}
KIND_ALIASES = {"suppliesservices": "supplies_services", "supplies": "supplies_services",
                "services": "supplies_services"}
RELATIVE_PRECISION = 1e-6



@dataclass
class RunConfig:
    game: game.GameConfig
    model: bidder.BidderModelParams | None
    seed: int
    out: Path | None
    precision: float
    relative: bool

    def price(self, x) -> str:
        return tenders.quantize(x, self.precision)


def _norm_rule(text):
    t = str(text).strip()
    return game.AwardRule(RULE_ALIASES.get(t.lower().replace("_", ""), t.lower()))


def _norm_kind(text):
    t = str(text).strip()
    return game.ContractKind(KIND_ALIASES.get(t.lower().replace("_", ""), t.lower()))


def _floats(text):
    if text is None:
        return None
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def load_run_config(args) -> RunConfig:
    """Merge the JSON config file (if any) with command-line overrides."""
    raw = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
    units = (args.units or raw.get("units") or "absolute").lower()
    relative = units == "relative"
    kind = _norm_kind(args.contract_kind or raw.get("contract_kind", "supplies_services"))
    rule = _norm_rule(args.rule or raw.get("rule", "mean"))
    n = int(args.num_players or raw.get("N", 2))
    estimate = 0.0 if relative else float(args.estimate if args.estimate is not None
                                          else raw.get("E", 100.0))
    bounds = raw.get("bounds", {"mode": "percent"})
    mode = bounds.get("mode", "percent")
    scale = 1.0 if relative else estimate
    if mode == "percent":
        lo_pct = bounds.get("A", -100 * game.LOWER_DISCOUNT[kind.value])
        hi_pct = bounds.get("B", 100 * game.UPPER_MARKUP)
        lower = estimate + lo_pct / 100 * scale
        upper = estimate + hi_pct / 100 * scale
    elif mode == "absolute":
        lower, upper = float(bounds["A"]), float(bounds["B"])
    else:
        raise UsageError(f"bounds.mode must be 'percent' or 'absolute', got {mode!r}")
    cfg = game.GameConfig(estimate, lower, upper, n, rule, kind)

    m = dict(raw.get("model") or {})
    for key in ("q", "p_plus", "p_minus"):
        if getattr(args, key) is not None:
            m[key] = getattr(args, key)
    model = bidder.BidderModelParams(m["q"], m["p_plus"], m["p_minus"]) if m else None
    if m and len(m) != 3:
        raise UsageError("model needs all of q, p_plus, p_minus")

    precision = args.precision or raw.get("precision") or (
        RELATIVE_PRECISION if relative else game.DEFAULT_PRECISION)
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    out = Path(args.out) if args.out else None
    return RunConfig(cfg, model, seed, out, float(precision), relative)


def _game_dict(rc: RunConfig) -> dict:
    g = rc.game
    return {"E": rc.price(g.estimate), "A": rc.price(g.lower), "B": rc.price(g.upper),
            "N": g.num_players, "rule": g.rule.value, "contract_kind": g.contract_kind.value,
            "units": "relative" if rc.relative else "absolute"}


def _need_model(rc: RunConfig, command: str) -> bidder.BidderModelParams:
    if rc.model is None:
        raise UsageError(f"{command} needs bidder model parameters "
                         "(config 'model' or --q/--p-plus/--p-minus)")
    return rc.model


def _artifact(rc: RunConfig, name: str, rows: list[dict], columns=None) -> str | None:
    if rc.out is None:
        return None
    rc.out.mkdir(parents=True, exist_ok=True)
    path = rc.out / name
    tenders.write_csv(path, rows, columns)
    return name


# ---------------------------------------------------------------- commands


def cmd_winner(rc: RunConfig, args) -> tuple[dict, list]:
    items = []
    if args.input:
        data = tenders.ingest(args.input, "tender", rc.game.contract_kind)
        for rec in data.records:
            cfg = game.GameConfig.from_percent(rec.estimate, max(len(rec.bids), 2),
                                               rc.game.rule, rec.contract_kind)
            items.append((rec.tender_id, cfg, rec.bids))
    elif args.bids:
        bids = _floats(args.bids)
        items.append(("cli", rc.game.replace(num_players=max(len(bids), 2)), bids))
    else:
        raise UsageError("winner needs --bids or --input")
    results = []
    for i, (tid, cfg, bids) in enumerate(items):
        res = game.determine_winner(cfg, bids, seed=dynamics.trajectory_seed(rc.seed, i),
                                    precision=rc.precision)
        results.append({
            "tender_id": tid,
            "bids": [rc.price(b) for b in bids],
            "reference_price": rc.price(res.reference_price),
            "winner": res.winner,
            "winning_bid": rc.price(bids[res.winner]),
            "side": res.side.value,
            "excluded": list(res.excluded),
            "tie_group": list(res.tie_group),
            "tie_broken_by_lot": res.tie_broken_by_lot,
        })
    return {"outcomes": results}, results


def cmd_eliminate(rc: RunConfig, args) -> tuple[dict, list]:
    schedules = ["known_n", "unknown_n"] if args.schedule == "both" else [args.schedule]
    rows = []
    for sched in schedules:
        for iv in game.eliminate(rc.game, args.steps, sched):
            rows.append({"schedule": sched, "step": iv.step, "lo": rc.price(iv.lo),
                         "hi": rc.price(iv.hi), "lo_closed": iv.lo_closed,
                         "hi_closed": iv.hi_closed, "width": iv.width})
    eq = game.equilibrium_analysis(rc.game)
    doc = {"intervals": rows,
           "equilibrium": {"exists": eq.exists,
                           "price": None if eq.price is None else rc.price(eq.price),
                           "reason": eq.reason}}
    return doc, rows


def cmd_dynamics(rc: RunConfig, args) -> tuple[dict, list]:
    g = rc.game
    n = g.num_players
    x0 = _floats(args.x0) or list(np.linspace(g.lower, g.upper, n))
    if len(x0) != n:
        raise UsageError(f"--x0 needs {n} values")
    costs = _floats(args.costs)
    noise_mean = _floats(args.noise_mean)
    noise_std = _floats(args.noise_std) or [0.0]
    doc = {"x0": [rc.price(v) for v in x0], "steps": args.steps}
    if noise_mean is None:
        path = [np.asarray(x0, dtype=float)]
        for _ in range(args.steps):
            path.append(dynamics.best_response_step(g, path[-1], costs))
        path = np.array(path)
        if costs is not None:
            doc["cost_fixed_point"] = [rc.price(v) for v in dynamics.cost_fixed_point(g, costs)]
    else:
        mean = np.broadcast_to(noise_mean, (n,)) if len(noise_mean) == 1 else noise_mean
        std = np.broadcast_to(noise_std, (n,)) if len(noise_std) == 1 else noise_std
        noise = dynamics.NoiseSpec(mean, std, truncate=args.truncate)
        path = dynamics.simulate_stochastic(g, x0, noise, args.steps, rc.seed, costs)
        law = dynamics.stationary_law(g, noise)
        prices = dynamics.reference_prices(g, path)[args.burn_in + 1:]
        doc["stationary_law"] = law.as_dict()
        doc["simulated_price_mean"] = float(prices.mean()) if prices.size else None
        doc["simulated_price_variance"] = float(prices.var(ddof=1)) if prices.size > 1 else None
        doc["burn_in"] = args.burn_in
    prices = dynamics.reference_prices(g, path)
    rows = [dict({"t": t}, **{f"x{i}": rc.price(v) for i, v in enumerate(row)},
                 reference_price=rc.price(p))
            for t, (row, p) in enumerate(zip(path, prices))]
    doc["final"] = rows[-1]
    name = _artifact(rc, "trajectory.csv", rows)
    doc["artifacts"] = [name] if name else []
    return doc, rows


def cmd_sample(rc: RunConfig, args) -> tuple[dict, list]:
    model = _need_model(rc, "sample")
    g = rc.game
    rng = np.random.default_rng(rc.seed)
    rows = []
    for t in range(args.tenders):
        bids = bidder.sample_bids(model, g, g.num_players, rng)
        for b in bids:
            if rc.relative:
                rows.append({"tender_id": f"T{t + 1}", "deviation": rc.price(b)})
            else:
                rows.append({"tender_id": f"T{t + 1}", "estimate": rc.price(g.estimate),
                             "bid": rc.price(b)})
    name = _artifact(rc, "sample.csv", rows)
    doc = {"model": model.as_dict(), "tenders": args.tenders, "bids": len(rows),
           "artifacts": [name] if name else []}
    return doc, rows


def _load_sample(rc: RunConfig, args):
    if not args.input:
        raise UsageError("estimate needs --input")
    band = game.GameConfig.normalized(contract_kind=rc.game.contract_kind)
    return tenders.ingest(args.input, args.input_format, rc.game.contract_kind, band), band


def _resolution(rc: RunConfig, args, data) -> float:
    """Rounding step of the relative deviations implied by the price precision."""
    if args.input_format == "deviation":
        return args.precision or RELATIVE_PRECISION
    return max(rc.precision / rec.estimate for rec in data.records)


def cmd_estimate(rc: RunConfig, args) -> tuple[dict, list]:
    data, band = _load_sample(rc, args)
    resolution = _resolution(rc, args, data)
    if len(data.sample) == 0:
        raise InvalidInput("no admissible observations")
    fits = {m.value: estimation.fit(data.sample, band, m, args.alpha, resolution).as_dict()
            for m in estimation.Method}
    doc = {"observations": len(data.sample), "dropped": data.dropped, "resolution": resolution,
           "bounds": {"A": band.lower, "B": band.upper}, **fits}
    rows = []
    for d in fits.values():
        row = {f: v for f, v in d.items() if not isinstance(v, list)}
        for tag in ("plus", "minus"):
            ci = d[f"ci_{tag}"] or [None, None]
            row[f"ci_{tag}_lo"], row[f"ci_{tag}_hi"] = ci
        rows.append(row)
    return doc, rows


def cmd_coalition(rc: RunConfig, args) -> tuple[dict, list]:
    model = _need_model(rc, "coalition")
    g = rc.game
    hi = min(args.l_max, g.num_players)
    rows = []
    for i, size in enumerate(range(args.l_min, hi + 1)):
        if args.trials:
            risk = coalition.simulate_coalition(g, model, size, args.trials,
                                                dynamics.trajectory_seed(rc.seed, i))
        else:
            risk = coalition.steal_probabilities(g, model, size)
        row = risk.as_dict()
        row["x_star"] = rc.price(row["x_star"])
        rows.append(row)
    return {"model": model.as_dict(), "rows": rows}, rows


def cmd_median_coalition(rc: RunConfig, args) -> tuple[dict, list]:
    g = rc.game.replace(rule=game.AwardRule.MEDIAN)
    plan = (coalition.custom_plan(g, args.coalition_size) if args.coalition_size
            else coalition.median_coalition_plan(g))
    rate = coalition.simulate_median_coalition(g, args.trials, rc.seed, plan=plan)
    d = plan.as_dict()
    d["designated_bid"] = rc.price(d["designated_bid"])
    doc = {"plan": d, "trials": args.trials, "win_rate": rate,
           "reference_price": rc.price((g.upper + g.estimate) / 2)}
    return doc, [dict(d, win_rate=rate)]


def cmd_density(rc: RunConfig, args) -> tuple[dict, list]:
    model = _need_model(rc, "density")
    g = rc.game
    ys = np.linspace(g.lower, g.upper, args.points)
    dens = bidder.density(model, g, ys)
    rows = [{"y": rc.price(y), "density": float(f)} for y, f in zip(ys, dens)]
    artifacts = []
    name = _artifact(rc, "density.csv", rows, ["y", "density"])
    if name:
        artifacts.append(name)
    if args.input:
        data, band = _load_sample(rc, args)
        sample, hist_cfg = data.sample, band
    else:
        sample = bidder.sample_bids(model, g, args.draws, rc.seed)
        hist_cfg = g
    hist = tenders.histogram_rows(sample, hist_cfg, args.bins)
    name = _artifact(rc, "histogram.csv", hist)
    if name:
        artifacts.append(name)
    mean, var = bidder.moments(model, g)
    doc = {"model": model.as_dict(), "points": args.points, "bins": args.bins,
           "mean": mean, "variance": var,
           "cross_term_variance": bidder.cross_term_mixture_variance(model, g),
           "expected_reference_price": bidder.expected_reference_price(model, g),
           "artifacts": artifacts}
    return doc, rows


HANDLERS = {
    "winner": cmd_winner, "eliminate": cmd_eliminate, "dynamics": cmd_dynamics,
    "sample": cmd_sample, "estimate": cmd_estimate, "coalition": cmd_coalition,
    "median-coalition": cmd_median_coalition, "density": cmd_density,
}


def run_command(command: str, rc: RunConfig, args) -> tuple[dict, list]:
    """Dispatch to a command; returns the JSON document and its table rows."""
    if command not in HANDLERS:
        raise UsageError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    doc, rows = HANDLERS[command](rc, args)
    full = {"command": command, "seed": rc.seed, "game": _game_dict(rc)}
    full.update(doc)
    return full, rows


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _add_common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Subcommands repeat the global flags with suppressed defaults so a flag
    # given before the command name is not reset by the subparser.
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    g = parser.add_argument_group("run configuration")
    g.add_argument("--config", metavar="PATH", help="JSON run configuration", **kw)
    g.add_argument("--seed", type=int, help="RNG seed (default: 0)", **kw)
    g.add_argument("--out", metavar="DIR", help="write <command>.json and CSV artifacts here",
                   **kw)
    g.add_argument("--format", choices=["json", "csv"], help="stdout format (default: json)",
                   **kw)
    g.add_argument("--estimate", type=float, help="contracting authority estimate E", **kw)
    g.add_argument("--num-players", "-N", type=int, help="number of bidders", **kw)
    g.add_argument("--rule", help="guessing | mean | median", **kw)
    g.add_argument("--contract-kind", help="works | supplies_services", **kw)
    g.add_argument("--units", choices=["absolute", "relative"],
                   help="relative puts E at 0 and bounds at the decree percentages", **kw)
    g.add_argument("--precision", type=float, help="price rounding step", **kw)
    g.add_argument("--q", type=float, help="probability of bidding above E", **kw)
    g.add_argument("--p-plus", type=float, help="geometric parameter above E", **kw)
    g.add_argument("--p-minus", type=float, help="geometric parameter below E", **kw)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)

    parser = argparse.ArgumentParser(
        prog="refprice", description="Reference-price sealed-bid auction toolkit.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="command")
    parser.subcommands = sub.choices

    p = sub.add_parser("winner", parents=[common], help="apply the award rules")
    p.add_argument("--bids", help="comma-separated bids")
    p.add_argument("--input", help="tender CSV (tender_id,estimate,bid)")

    p = sub.add_parser("eliminate", parents=[common], help="iterated elimination intervals")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--schedule", choices=["known_n", "unknown_n", "both"], default="both")

    p = sub.add_parser("dynamics", parents=[common], help="repeated best-response play")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--x0", help="initial profile (default: spread over [A, B])")
    p.add_argument("--costs", help="per-bidder cost floors")
    p.add_argument("--noise-mean", help="shading means (one value or N)")
    p.add_argument("--noise-std", help="shading standard deviations (one value or N)")
    p.add_argument("--truncate", action="store_true", help="clip shaded bids into [A, B]")
    p.add_argument("--burn-in", type=int, default=1000)

    p = sub.add_parser("sample", parents=[common], help="synthetic tenders from the bidder model")
    p.add_argument("--tenders", type=int, default=12)

    p = sub.add_parser("estimate", parents=[common], help="fit (q, p+, p-) to bids")
    p.add_argument("--input", help="tender or deviation CSV")
    p.add_argument("--input-format", choices=["tender", "deviation"], default="tender")
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("coalition", parents=[common], help="mean-rule coalition table")
    p.add_argument("--l-min", type=int, default=2)
    p.add_argument("--l-max", type=int, default=6)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0: closed form)")

    p = sub.add_parser("median-coalition", parents=[common], help="median-rule coalition plan")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--coalition-size", type=int, help="override the majority plan")

    p = sub.add_parser("density", parents=[common], help="model density and histogram data")
    p.add_argument("--points", type=int, default=901)
    p.add_argument("--bins", type=int, default=45)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--input", help="observed bids for the histogram instead of model draws")
    p.add_argument("--input-format", choices=["tender", "deviation"], default="tender")
    return parser


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v)
                        for k, v in r.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        rc = load_run_config(args)
        doc, rows = run_command(args.command, rc, args)
    except UsageError as exc:
        parser.subcommands[args.command].print_help(sys.stderr)
        print(f"refprice {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"refprice {args.command}: error: {exc}", file=sys.stderr)
        return 1
    text = dumps(doc)
    if rc.out is not None:
        rc.out.mkdir(parents=True, exist_ok=True)
        (rc.out / f"{args.command}.json").write_text(text)
    if (args.format or "json") == "csv":
        sys.stdout.write(_rows_csv(rows))
    elif rc.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
