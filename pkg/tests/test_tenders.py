import numpy as np
import pytest

from conftest import SERVICES_FIT
from refprice.bidder import cdf, sample_bids
from refprice.errors import InvalidInput, ParseError
from refprice.estimation import estimate_q
from refprice.game import ContractKind, GameConfig
from refprice.tenders import (TenderRecord, emit_histogram, histogram_rows, ingest, quantize,
                              write_deviations, write_tenders)

REL = GameConfig.normalized()


def write(tmp_path, text, name="in.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_three_bid_tender(tmp_path):
    data = ingest(write(tmp_path, "tender_id,estimate,bid\nT1,100,80\nT1,100,95\nT1,100,110\n"))
    assert len(data.records) == 1
    assert data.records[0].bids == (80.0, 95.0, 110.0)
    assert data.sample.deviations == pytest.approx([-0.2, -0.05, 0.1])
    assert data.sample.tender_ids == ("T1",) * 3 and data.dropped == 0


def test_reconstructed_services_sample(tmp_path):
    rows = ["deviation"] + ["0.05"] * 8 + ["-0.05"] * 66
    data = ingest(write(tmp_path, "\n".join(rows) + "\n"), "deviation")
    assert len(data.sample) == 74
    assert estimate_q(data.sample) == pytest.approx(8 / 74)


def test_bad_number_reports_line(tmp_path):
    path = write(tmp_path, "tender_id,estimate,bid\nT1,100,80\nT1,100,abc\n")
    with pytest.raises(ParseError) as err:
        ingest(path)
    assert err.value.line == 3 and "line 3" in str(err.value)


@pytest.mark.parametrize("text, exc", [
    ("", InvalidInput),
    ("tender_id,estimate,bid\n", InvalidInput),
    ("tender_id,bid\nT1,3\n", ParseError),
    ("tender_id,estimate,bid\nT1,100\n", ParseError),
    ("tender_id,estimate,bid\nT1,-5,3\n", ParseError),
    ("tender_id,estimate,bid\nT1,100,90\nT1,101,90\n", ParseError),
    ("tender_id,estimate,bid\n,100,90\n", ParseError),
    ("tender_id,estimate,bid\nT1,100,inf\n", ParseError),
])
def test_malformed_inputs(tmp_path, text, exc):
    with pytest.raises(exc):
        ingest(write(tmp_path, text))


def test_unknown_format(tmp_path):
    with pytest.raises(InvalidInput):
        ingest(write(tmp_path, "deviation\n0.1\n"), "xml")


def test_out_of_band_dropped(tmp_path):
    text = "tender_id,estimate,bid\nA,100,74\nA,100,75\nA,100,120\nA,100,121\nB,200,100\n"
    data = ingest(write(tmp_path, text))
    assert data.dropped == 3
    assert data.sample.deviations == pytest.approx([-0.25, 0.2])
    assert data.records[0].bids == (74.0, 75.0, 120.0, 121.0)   # the award rule sees all bids


def test_contract_kind_column(tmp_path):
    text = "tender_id,estimate,bid,contract_kind\nW,100,78,works\nS,100,78,supplies_services\n"
    data = ingest(write(tmp_path, text))
    assert data.dropped == 1      # -22% is abnormally low for works only
    assert data.records[0].contract_kind is ContractKind.WORKS
    with pytest.raises(ParseError):
        ingest(write(tmp_path, "tender_id,estimate,bid,contract_kind\nW,100,78,roads\n"))


def test_deviation_band_filter(tmp_path):
    data = ingest(write(tmp_path, "deviation\n-0.3\n-0.1\n0.25\n"), "DeviationCSV")
    assert data.dropped == 2 and data.sample.deviations.tolist() == [-0.1]


def test_record_validation():
    with pytest.raises(InvalidInput):
        TenderRecord("x", 0.0, (1.0,))
    with pytest.raises(InvalidInput):
        TenderRecord("x", 10.0, ())
    assert TenderRecord("x", 100.0, (90.0,)).game().lower == 75.0


@pytest.mark.parametrize("value, precision, text", [
    (97.5, 0.01, "97.50"), (0.125, 0.01, "0.12"), (-0.0125, 1e-6, "-0.012500"), (120, 0.01, "120.00"),
])
def test_quantize(value, precision, text):
    assert quantize(value, precision) == text


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(9)
    records = []
    for t in range(40):
        e = float(rng.choice([1234.56, 80_000.0, 999.99]))
        cfg = GameConfig.from_percent(e, 5)
        bids = sample_bids(SERVICES_FIT, cfg, 5, rng)
        records.append(TenderRecord(f"T{t}", e, tuple(bids)))
    first = tmp_path / "a.csv"
    write_tenders(first, records)
    data = ingest(first)
    expected = np.concatenate([
        (np.array([float(quantize(b, 0.01)) for b in r.bids]) - r.estimate) / r.estimate
        for r in records])
    kept = (expected >= -0.25 - 1e-12) & (expected <= 0.2 + 1e-12)
    assert np.array_equal(data.sample.deviations, expected[kept])
    second = tmp_path / "b.csv"
    write_tenders(second, data.records)
    assert first.read_bytes() == second.read_bytes()
    assert np.array_equal(ingest(second).sample.deviations, data.sample.deviations)


def test_deviation_round_trip(tmp_path):
    y = sample_bids(SERVICES_FIT, REL, 500, seed=1)
    path = tmp_path / "d.csv"
    write_deviations(path, y)
    back = ingest(path, "deviation").sample.deviations
    assert np.array_equal(back, [float(quantize(v, 1e-6)) for v in y])


# -- histogram -------------------------------------------------------------------

def test_histogram_single_observation():
    rows = histogram_rows([-0.1], REL, 9)
    assert sum(r["count"] > 0 for r in rows) == 1


def test_histogram_edges_cover_band(tmp_path):
    rows = emit_histogram(tmp_path / "h.csv", [-0.1, 0.1], REL, 45)
    assert rows[0]["bin_lo"] == -0.25 and rows[-1]["bin_hi"] == 0.2
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == \
        "bin_lo,bin_hi,count,empirical_density"


def test_histogram_errors():
    with pytest.raises(InvalidInput):
        histogram_rows([], REL, 3)
    with pytest.raises(InvalidInput):
        histogram_rows([0.1], REL, 0)


def test_histogram_matches_model():
    n = 100_000
    y = sample_bids(SERVICES_FIT, REL, n, seed=21)
    for row in histogram_rows(y, REL, 45):
        prob = cdf(SERVICES_FIT, REL, row["bin_hi"]) - cdf(SERVICES_FIT, REL, row["bin_lo"])
        width = row["bin_hi"] - row["bin_lo"]
        se = np.sqrt(prob * (1 - prob) / n) / width
        assert abs(row["empirical_density"] - prob / width) <= 3 * se + 1e-12
