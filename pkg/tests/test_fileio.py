import pytest

from dca.aggregation import classify, compute_mcav
from dca.engine import NothingToClassify, run
from dca.fileio import (
    DatasetFormatError,
    dumps_dataset,
    dumps_log,
    dumps_run_report,
    dumps_summary,
    load_dataset,
    parse_dataset,
    parse_log,
    read_csv,
    write_dataset,
)
from dca.experiments import SummaryRow
from dca.fusion import default_weights
from dca.model import Params

HEADER = "#dca-dataset 1\nscenario=attack\ntruth.7=1\n"


def test_round_trip_byte_identical(tmp_path, attack):
    path = tmp_path / "a.txt"
    write_dataset(attack, path)
    loaded = load_dataset(path)
    assert dumps_dataset(loaded) == path.read_text()
    assert loaded == attack
    assert loaded.metadata == attack.metadata and loaded.truth == attack.truth


def test_signal_out_of_range_reports_line():
    text = HEADER + "S 0.000 10 40 6\nS 3.000 150 40 6\n"
    with pytest.raises(DatasetFormatError, match=r"pamp out of range \[0,100\] at line 5") as exc:
        parse_dataset(text)
    assert exc.value.line == 5


def test_safe_out_of_range():
    with pytest.raises(DatasetFormatError, match="safe out of range"):
        parse_dataset(HEADER + "S 0.000 0 0 11\n")


@pytest.mark.parametrize("body,msg", [
    ("S 1.000 0 0 1\nS 0.500 0 0 1\n", "decreasing timestamp"),
    ("A 1.000 7\nA 0.999 7\n", "decreasing timestamp"),
    ("S 1.000 0 0\n", "signal record"),
    ("A 1.000\n", "antigen record"),
    ("S x 0 0 1\n", "not a number"),
    ("garbage\n", "malformed"),
    ("A 1.000 7\nkey=value\n", "header entry after records"),
    ("A -1.000 7\n", "negative timestamp"),
])
def test_malformed_inputs(body, msg):
    with pytest.raises(DatasetFormatError, match=msg):
        parse_dataset(HEADER + body)


def test_kinds_interleave_independently():
    ds = parse_dataset(HEADER + "A 2.000 7\nS 1.000 0 0 10\nS 2.000 0 0 10\n")
    assert len(ds.signal_records) == 2 and len(ds.antigen_events) == 1


def test_empty_antigen_loads_but_detection_fails():
    ds = parse_dataset(HEADER + "S 0.000 0 0 10\nS 1.000 0 0 10\n")
    assert ds.antigen_events == ()
    with pytest.raises(NothingToClassify, match="nothing to classify"):
        run(ds, Params(), default_weights())


def test_log_round_trip(attack):
    log = run(attack, Params(rng_seed=4), default_weights())
    text = dumps_log(log.records)
    assert parse_log(text) == log.records
    assert dumps_log(parse_log(text)) == text


def test_run_report_csv(attack, tmp_path):
    log = run(attack, Params(rng_seed=4), default_weights())
    report = compute_mcav(log)
    path = tmp_path / "r.csv"
    path.write_text(dumps_run_report(report, classify(report, 0.5)))
    rows = read_csv(path)
    assert list(rows[0]) == ["antigen_type", "mature", "total", "mcav", "label"]
    for row in rows:
        assert len(row["mcav"].split(".")[1]) == 4
        assert float(row["mcav"]) == pytest.approx(int(row["mature"]) / int(row["total"]), abs=5e-5)


def test_summary_csv(tmp_path):
    text = dumps_summary([SummaryRow("W1=1;W2=2", "nmap", 0.81234, 0.1, 3)])
    path = tmp_path / "s.csv"
    path.write_text(text)
    assert read_csv(path) == [{"condition": "W1=1;W2=2", "antigen_type": "nmap",
                               "mean_mcav": "0.8123", "stdev_mcav": "0.1000", "n_runs": "3"}]
