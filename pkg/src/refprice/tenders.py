"""Tender CSV ingestion, decimal serialisation and histogram export."""

from __future__ import annotations

import csv
from collections import OrderedDict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import numpy as np

from .errors import InvalidInput, ParseError
from .estimation import BidSample
from .game import ContractKind, GameConfig

TENDER_HEADER = ("tender_id", "estimate", "bid")
DEVIATION_HEADER = ("deviation",)


@dataclass(frozen=True)
class TenderRecord:
    tender_id: str
    estimate: float
    bids: tuple
    contract_kind: ContractKind = ContractKind.SUPPLIES_SERVICES

    def __post_init__(self):
        if not self.estimate > 0:
            raise InvalidInput(f"tender {self.tender_id}: estimate must be positive")
        if not self.bids:
            raise InvalidInput(f"tender {self.tender_id}: no bids")
        object.__setattr__(self, "contract_kind", ContractKind(self.contract_kind))

    def deviations(self) -> np.ndarray:
        return (np.asarray(self.bids, dtype=float) - self.estimate) / self.estimate

    def game(self, rule="mean") -> GameConfig:
        return GameConfig.from_percent(self.estimate, max(len(self.bids), 2), rule,
                                       self.contract_kind)


@dataclass
class Ingested:
    sample: BidSample
    records: list = field(default_factory=list)
    dropped: int = 0


def quantize(value: float, precision: float) -> str:
    """Decimal string of ``value`` rounded half-even to ``precision``."""
    step = Decimal(repr(precision)).normalize()
    return str(Decimal(repr(float(value))).quantize(step, rounding=ROUND_HALF_EVEN))


def _parse_float(text, line, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None
    if not np.isfinite(value):
        raise ParseError(f"column {column!r}: non-finite value {text!r}", line)
    return value


def _rows(path: Path, header: tuple):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise InvalidInput(f"{path}: empty file") from None
        head = [h.strip() for h in head]
        missing = [h for h in header if h not in head]
        if missing:
            raise ParseError(f"missing column(s) {missing}; header is {head}", 1)
        pos = {h: head.index(h) for h in head}
        count = 0
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(head):
                raise ParseError(f"expected {len(head)} fields, got {len(row)}", line)
            count += 1
            yield line, {h: row[i].strip() for h, i in pos.items()}
        if count == 0:
            raise InvalidInput(f"{path}: no data rows")


def ingest(path, fmt: str = "tender", contract_kind=ContractKind.SUPPLIES_SERVICES,
           config: GameConfig | None = None) -> Ingested:
    """Load a tender CSV (``tender_id,estimate,bid``) or a deviation CSV (``deviation``).

    Tender rows are grouped by tender and normalised to ``(x - E) / E``.
    Deviations outside the admissible band are dropped from the sample and
    counted; tender records keep every bid so the award rule can exclude them.
    An optional ``contract_kind`` column overrides the default per row.
    """
    path = Path(path)
    if fmt in ("tender", "TenderCSV"):
        return _ingest_tenders(path, ContractKind(contract_kind))
    if fmt in ("deviation", "DeviationCSV"):
        cfg = config or GameConfig.normalized(contract_kind=contract_kind)
        values = [_parse_float(r["deviation"], line, "deviation")
                  for line, r in _rows(path, DEVIATION_HEADER)]
        y = np.asarray(values)
        keep = (y >= cfg.lower) & (y <= cfg.upper)
        return Ingested(BidSample(y[keep]), [], int((~keep).sum()))
    raise InvalidInput(f"unknown input format {fmt!r}")


def _ingest_tenders(path: Path, default_kind: ContractKind) -> Ingested:
    groups: OrderedDict = OrderedDict()
    for line, row in _rows(path, TENDER_HEADER):
        tid = row["tender_id"]
        if not tid:
            raise ParseError("empty tender_id", line)
        estimate = _parse_float(row["estimate"], line, "estimate")
        if estimate <= 0:
            raise ParseError(f"estimate must be positive, got {estimate}", line)
        bid = _parse_float(row["bid"], line, "bid")
        kind = default_kind
        if row.get("contract_kind"):
            try:
                kind = ContractKind(row["contract_kind"])
            except ValueError:
                raise ParseError(f"unknown contract_kind {row['contract_kind']!r}", line) from None
        g = groups.setdefault(tid, {"estimate": estimate, "kind": kind, "bids": []})
        if g["estimate"] != estimate:
            raise ParseError(f"tender {tid}: estimate changes from {g['estimate']} to {estimate}",
                             line)
        g["bids"].append(bid)

    records, devs, ids, dropped = [], [], [], 0
    for tid, g in groups.items():
        rec = TenderRecord(tid, g["estimate"], tuple(g["bids"]), g["kind"])
        records.append(rec)
        band = GameConfig.normalized(contract_kind=rec.contract_kind)
        y = rec.deviations()
        keep = (y >= band.lower - 1e-12) & (y <= band.upper + 1e-12)
        dropped += int((~keep).sum())
        devs.extend(y[keep])
        ids.extend([tid] * int(keep.sum()))
    return Ingested(BidSample(np.asarray(devs), tuple(ids)), records, dropped)


def write_tenders(path, records, precision: float = 0.01) -> None:
    """Write tender records in the ingestion format, prices at ``precision``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TENDER_HEADER)
        for rec in records:
            est = quantize(rec.estimate, precision)
            for bid in rec.bids:
                w.writerow([rec.tender_id, est, quantize(bid, precision)])


def write_deviations(path, values, precision: float = 1e-6) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DEVIATION_HEADER)
        for v in values:
            w.writerow([quantize(v, precision)])


def histogram_rows(sample, config: GameConfig, bins: int) -> list[dict]:
    """Equal-width histogram over ``[lower, upper]`` with empirical density."""
    if bins < 1:
        raise InvalidInput("bins must be >= 1")
    y = sample.deviations if isinstance(sample, BidSample) else np.asarray(sample, dtype=float)
    if y.size == 0:
        raise InvalidInput("empty sample")
    edges = np.linspace(config.lower, config.upper, bins + 1)
    counts, _ = np.histogram(y, bins=edges)
    widths = np.diff(edges)
    return [{"bin_lo": float(lo), "bin_hi": float(hi), "count": int(c),
             "empirical_density": float(c / (y.size * w))}
            for lo, hi, c, w in zip(edges[:-1], edges[1:], counts, widths)]


def write_csv(path, rows: list[dict], columns=None) -> None:
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        w.writerows(rows)


def emit_histogram(path, sample, config: GameConfig, bins: int) -> list[dict]:
    rows = histogram_rows(sample, config, bins)
    write_csv(path, rows, ["bin_lo", "bin_hi", "count", "empirical_density"])
    return rows
