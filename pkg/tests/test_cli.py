import json

import pytest

from dca.cli import main
from dca.fileio import load_dataset, parse_log, read_csv
from dca.aggregation import compute_mcav


@pytest.fixture
def attack_file(tmp_path):
    path = tmp_path / "attack.txt"
    assert main(["gen", "--scenario", "attack", "--seed", "12", "--out", str(path)]) == 0
    return path


def test_gen_is_deterministic(tmp_path, attack_file):
    again = tmp_path / "again.txt"
    assert main(["gen", "--scenario", "attack", "--seed", "12", "--out", str(again)]) == 0
    assert again.read_bytes() == attack_file.read_bytes()


def test_gen_options(tmp_path):
    path = tmp_path / "n.txt"
    assert main(["gen", "--scenario", "normal", "--seed", "1", "--out", str(path),
                 "--duration", "90", "--targets", "500"]) == 0
    ds = load_dataset(path)
    assert ds.scenario == "normal" and len(ds.signal_records) == 90


def test_detect_flags_scan_process(tmp_path, attack_file):
    out = tmp_path / "report.csv"
    log = tmp_path / "log.jsonl"
    rc = main(["detect", "--dataset", str(attack_file), "--seed", "5", "--out", str(out),
               "--log", str(log)])
    assert rc == 0
    ds = load_dataset(attack_file)
    rows = {r["antigen_type"]: r for r in read_csv(out)}
    assert rows[ds.metadata["process.nmap"]]["label"] == "anomalous"
    assert rows[ds.metadata["process.bash"]]["label"] == "normal"

    config = json.loads(out.with_name(out.name + ".json").read_text())
    assert config["params"]["population_size"] == 100
    assert config["params"]["tissue_antigen_capacity"] == 500
    assert config["weights"]["w1"] == 2.0 and config["mapping"] == "M1"
    assert config["threshold"] == 0.5
    assert config["rates"]["tpr"] == 1.0 and config["rates"]["fpr"] == 0.0

    report = compute_mcav(parse_log(log.read_text()))
    for t, row in rows.items():
        assert int(row["mature"]) == report.entries[t].mature_presentations


def test_detect_is_reproducible(tmp_path, attack_file):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        main(["detect", "--dataset", str(attack_file), "--seed", "5", "--out", str(out),
              "--mapping", "M2", "--cells", "50"])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_detect_conflicting_flags(tmp_path, attack_file, capsys):
    rc = main(["detect", "--dataset", str(attack_file), "--seed", "1", "--out",
               str(tmp_path / "r.csv"), "--preset-weights", "--w1", "3"])
    assert rc != 0
    assert "conflicts" in capsys.readouterr().err


def test_detect_invalid_params(tmp_path, attack_file, capsys):
    rc = main(["detect", "--dataset", str(attack_file), "--seed", "1", "--out",
               str(tmp_path / "r.csv"), "--receptors", "10", "--dc-capacity", "5"])
    assert rc != 0
    assert "receptors exceed DC capacity" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert main(["gen", "--scenario", "attack", "--seed", "1", "--out", "x", "--bogus"]) != 0
    assert "unrecognized" in capsys.readouterr().err


def test_unwritable_output(tmp_path, attack_file, capsys):
    rc = main(["detect", "--dataset", str(attack_file), "--seed", "1",
               "--out", str(tmp_path / "missing" / "r.csv")])
    assert rc != 0
    assert "cannot write" in capsys.readouterr().err


def test_detect_bad_dataset(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("scenario=attack\nS 3.0 150 40 6\n")
    rc = main(["detect", "--dataset", str(bad), "--seed", "1", "--out", str(tmp_path / "r.csv")])
    assert rc != 0
    assert "pamp out of range [0,100] at line 2" in capsys.readouterr().err


def test_detect_without_antigen(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("scenario=normal\nS 0.000 0 0 10\n")
    rc = main(["detect", "--dataset", str(empty), "--seed", "1", "--out", str(tmp_path / "r.csv")])
    assert rc != 0
    assert "nothing to classify" in capsys.readouterr().err


def test_experiment_series3(tmp_path):
    rc = main(["experiment", "--series", "3", "--base-seed", "9", "--out-dir", str(tmp_path),
               "--repeats", "1", "--datasets", "2"])
    assert rc == 0
    rows = read_csv(tmp_path / "series3.csv")
    assert len({r["condition"] for r in rows}) == 36
    surface = read_csv(tmp_path / "series3_surface.csv")
    assert {(r["w1"], r["w2"]) for r in surface} >= {("0.5", "16"), ("16", "0.5")}
    assert json.loads((tmp_path / "series3.json").read_text())["series"] == "3"
