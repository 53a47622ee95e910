import json
import subprocess
import sys

import pytest

from memewatch import cli
from memewatch.config import configured_suite, read_config
from memewatch.detectors import DetectorSuite, WashTradingDetector, make_suite
from memewatch.exceptions import InputError
from memewatch.io import load_dataset, read_events


# estimator API

def test_suite_nested_params():
    suite = make_suite()
    params = suite.get_params(deep=True)
    assert params["wash__volume_surge_pct"] == 500.0
    assert params["pnd__rsi_period"] == 14
    suite.set_params(wash__volume_surge_pct=400.0, rug__following_days=5)
    assert suite.wash.volume_surge_pct == 400.0 and suite.rug.following_days == 5


def test_suite_unknown_kind():
    with pytest.raises(InputError):
        make_suite()._detectors(["spoofing"])


def test_suite_missing_detector():
    with pytest.raises(InputError):
        DetectorSuite(wash=WashTradingDetector())._detectors(["lpi"])


def test_unknown_nested_param():
    with pytest.raises(ValueError):
        make_suite().set_params(wash__nope=1)


# config files

def test_config_round_trip(tmp_path):
    path = tmp_path / "thresholds.cfg"
    path.write_text("# looser\nwash__volume_surge_pct = 400\n\nclassify__cutoff=12\n")
    config = read_config(path)
    assert config == {"wash__volume_surge_pct": 400, "classify__cutoff": 12}
    assert configured_suite(config).wash.volume_surge_pct == 400


@pytest.mark.parametrize("text", ["wash__bogus = 1\n", "no equals sign\n",
                                  "wash__volume_surge_pct = lots\n",
                                  "lpi__max_makers = 3\nlpi__max_makers = 4\n"])
def test_bad_config(tmp_path, text):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    with pytest.raises(InputError):
        read_config(path)


def test_config_values_are_validated():
    with pytest.raises(InputError):
        configured_suite({"lpi__max_makers": 0})


# command line

@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    raw = root / "raw"
    assert cli.main(["simulate", "--kind", "pump_dump", "--seed", "3", "--tokens", "3",
                     "--days", "40", "--out", str(raw)]) == 0
    clean = root / "clean"
    assert cli.main(["ingest", "--tokens", str(raw / "tokens.csv"),
                     "--ohlcv", str(raw / "ohlcv.csv"), "--trades", str(raw / "trades.csv"),
                     "--holders", str(raw / "holders.csv"), "--out", str(clean)]) == 0
    return root, raw, clean


def test_pipeline_end_to_end(pipeline):
    root, raw, clean = pipeline
    assert len(load_dataset(clean).tokens) == 3
    t0 = 1_704_067_200
    assert cli.main(["returns", "--data", str(clean), "--t0", str(t0), "--window-days", "30",
                     "--out", str(root / "returns.csv")]) == 0
    assert cli.main(["detect", "--data", str(clean), "--out", str(root / "events.jsonl"),
                     "--notes", str(root / "notes.jsonl"), "--jobs", "2"]) == 0
    events = read_events(root / "events.jsonl")
    assert sum(e.kind.value == "PumpAndDump" for e in events) == 3
    for line in (root / "notes.jsonl").read_text().splitlines():
        assert {"token_id", "kind", "status"} <= set(json.loads(line))
    assert cli.main(["report", "--events", str(root / "events.jsonl"),
                     "--returns", str(root / "returns.csv"), "--tokens", str(raw / "tokens.csv"),
                     "--out", str(root / "report")]) == 0
    report = json.loads((root / "report" / "report.json").read_text())
    assert report["universe"] == 3


def test_detect_single_kind(pipeline, tmp_path):
    _, _, clean = pipeline
    out = tmp_path / "rug.jsonl"
    assert cli.main(["detect", "--data", str(clean), "--kind", "rug", "--out", str(out)]) == 0
    assert all(e.kind.value == "RugPull" for e in read_events(out))


def test_detect_with_config(pipeline, tmp_path):
    _, _, clean = pipeline
    cfg = tmp_path / "c.cfg"
    cfg.write_text("pnd__pump_pct = 500\n")
    out = tmp_path / "e.jsonl"
    assert cli.main(["--config", str(cfg), "detect", "--data", str(clean), "--kind", "pnd",
                     "--out", str(out)]) == 0
    assert read_events(out) == []


def test_classify(tmp_path):
    corpus = tmp_path / "memes.txt"
    corpus.write_text("Doge Moon\nPepe Cat\nCat Inu\nBaby Doge\nShiba Inu\n")
    out = tmp_path / "keywords.csv"
    assert cli.main(["classify", "--corpus", str(corpus), "--cutoff", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "rank,word,score" and len(lines) == 4


def test_classify_csv_corpus_and_stoplist(tmp_path):
    corpus = tmp_path / "memes.csv"
    corpus.write_text("name,symbol\nDoge Moon,DM\nPepe Cat,PC\nCat Inu,CI\nBaby Doge,BD\n")
    stop = tmp_path / "stop.txt"
    stop.write_text("cat\n")
    out = tmp_path / "keywords.csv"
    assert cli.main(["classify", "--corpus", str(corpus), "--stoplist", str(stop),
                     "--cutoff", "3", "--out", str(out)]) == 0
    assert "cat" not in out.read_text()


@pytest.mark.parametrize("argv", [
    [], ["nonsense"], ["simulate", "--kind", "organic"],
    ["simulate", "--kind", "organic", "--seed", "1", "--days", "5", "--out", "x"],
    ["simulate", "--kind", "lpi", "--seed", "1", "--param", "multiplier", "--out", "x"],
    ["classify", "--corpus", "/nonexistent/names.txt", "--out", "x"],
    ["detect", "--data", "/nonexistent", "--out", "x"],
])
def test_bad_input_exits_1(argv, capsys):
    assert cli.main(argv) == 1
    assert capsys.readouterr().err


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out


def test_unexpected_failure_exits_2(monkeypatch, tmp_path, capsys):
    def boom(args, config):
        raise RuntimeError("kaput")
    monkeypatch.setattr(cli, "cmd_simulate", boom)
    argv = ["simulate", "--kind", "organic", "--seed", "1", "--out", str(tmp_path)]
    assert cli.main(argv) == 2
    assert "internal error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "memewatch.cli", "simulate", "--kind", "spoof",
                           "--seed", "1", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 1
