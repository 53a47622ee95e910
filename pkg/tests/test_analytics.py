import csv
import hashlib
import json
import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from memewatch.analytics import (categorize_return, compute_returns, match_labels, prevalence,
                                 read_returns, render_report, return_summary, summary_rows,
                                 windows_hit, write_returns)
from memewatch.fixtures import _identity, build_composition, composition_dir, write_composition
from memewatch.io import Dataset
from memewatch.model import (DAY, HOUR, REQUIRED_METRICS, DetectionEvent, EventKind,
                             ReturnCategory, TokenEconomics, TokenRecord)

from helpers import T0, make_bars


def ev(token, kind, day=0):
    kind = EventKind(kind)
    start = T0 + day * DAY
    return DetectionEvent(token, kind, start, start + DAY - 1,
                          dict.fromkeys(REQUIRED_METRICS[kind], 1.0))


# return categories

def test_high_return_example():
    r = categorize_return("t", 1e-6, 2.5e-6)
    assert r.return_pct == pytest.approx(150.0)
    assert r.high_return and r.category == ReturnCategory.POSITIVE


@pytest.mark.parametrize("p_start, p_end, volume, category", [
    (1.0, 1.0, 0.0, "Inactive"),
    (1.0, 1.0, 500.0, "StableActive"),
    (1.0, 0.5, 10.0, "Negative"),
    (1.0, 1.5, 10.0, "Positive"),
    (1.0, None, 10.0, "Missing"),
    (None, 1.0, 10.0, "Missing"),
    (0.0, 1.0, 10.0, "Missing"),
    (1.0, float("nan"), 10.0, "Missing"),
])
def test_decision_table(p_start, p_end, volume, category):
    assert categorize_return("t", p_start, p_end, volume).category.value == category


def test_exactly_double_is_not_high_return():
    assert not categorize_return("t", 1.0, 2.0).high_return


prices = st.one_of(st.none(), st.floats(0, 1e6, allow_nan=False))


@given(st.lists(st.tuples(prices, prices, st.floats(0, 1e6)), max_size=40))
def test_categories_partition_the_universe(rows):
    records = [categorize_return(f"t{i}", *row) for i, row in enumerate(rows)]
    summary = return_summary(records)
    parts = ("Missing", "Negative", "Inactive", "StableActive", "Positive")
    assert sum(summary[p] for p in parts) == summary["universe"] == len(rows)
    assert summary["high_return"] <= summary["Positive"]


def _dataset():
    rows = [_identity(i) for i in range(3)]
    tokens = {r[0]: TokenRecord(*r[:6]) for r in rows}
    ids = sorted(tokens)
    closes = np.r_[np.full(24, 1.0), np.linspace(1.0, 3.0, 24 * 10)]
    bars = make_bars(closes, np.full(len(closes), 10.0), start=T0 - 24 * HOUR)
    econ = [TokenEconomics(ids[1], T0 - HOUR, 2.0), TokenEconomics(ids[1], T0 + 5 * DAY, 1.0)]
    return Dataset(tokens=tokens, ohlcv={ids[0]: bars}, economics={ids[1]: econ}), ids


def test_compute_returns_from_bars_and_economics():
    dataset, ids = _dataset()
    records = {r.token_id: r for r in compute_returns(dataset, T0, window_days=90)}
    bars_rec = records[ids[0]]
    assert bars_rec.p_start == 1.0 and bars_rec.p_end == pytest.approx(3.0)
    assert bars_rec.high_return
    assert bars_rec.window_volume_usd == pytest.approx(10.0 * 240)
    assert records[ids[1]].category == ReturnCategory.NEGATIVE
    assert records[ids[2]].category == ReturnCategory.MISSING


def test_compute_returns_rejects_bad_window():
    from memewatch.exceptions import InputError
    dataset, _ = _dataset()
    with pytest.raises(InputError):
        compute_returns(dataset, T0, window_days=0)


def test_returns_round_trip(tmp_path):
    records = [categorize_return("a", 1.0, 3.0, 5.0), categorize_return("b", None, None)]
    write_returns(tmp_path / "r.csv", records)
    back = read_returns(tmp_path / "r.csv")
    assert back[0] == records[0]
    assert back[1].category == ReturnCategory.MISSING and back[1].return_pct is None


# prevalence

def twenty_tokens():
    returns = [categorize_return(f"t{i:02d}", 1.0, 3.0, 100.0) for i in range(20)]
    events = [ev(f"t{i:02d}", "WashZeroRisk") for i in range(5)]
    events += [ev(f"t{i:02d}", "LPI") for i in range(5, 8)]
    events += [ev(f"t{i:02d}", k) for i in (8, 9) for k in ("WashCircular", "LPI")]
    events += [ev(f"t{i:02d}", "AnomalyTopHolders") for i in range(10, 14)]
    return returns, events


def test_union_over_twenty_tokens():
    report = prevalence(*twenty_tokens())
    assert report.high_return == 20
    assert report.union == 14 and report.union_pct == 70.0
    assert report.counts["wash"] == 7 and report.counts["lpi"] == 5


def test_no_events_no_union():
    returns, _ = twenty_tokens()
    report = prevalence(returns, [])
    assert report.union == 0 and report.union_pct == 0.0


def test_events_on_low_return_tokens_are_ignored():
    returns = [categorize_return("a", 1.0, 3.0), categorize_return("b", 1.0, 1.1)]
    report = prevalence(returns, [ev("b", "WashZeroRisk")])
    assert report.union == 0 and report.counts["WashZeroRisk"] == 0


kinds = st.sampled_from([k.value for k in EventKind])


@settings(max_examples=60)
@given(st.lists(st.booleans(), min_size=1, max_size=25),
       st.lists(st.tuples(st.integers(0, 24), kinds), max_size=60))
def test_union_matches_brute_force(high, raw_events):
    returns = [categorize_return(f"t{i:02d}", 1.0, 3.0 if h else 1.5) for i, h in enumerate(high)]
    events = [ev(f"t{i:02d}", k) for i, k in raw_events]
    report = prevalence(returns, events)
    high_ids = {f"t{i:02d}" for i, h in enumerate(high) if h}
    per_kind = {}
    for e in events:
        if e.token_id in high_ids:
            per_kind.setdefault(e.kind.value, set()).add(e.token_id)
    brute = set().union(*per_kind.values()) if per_kind else set()
    assert report.union == len(brute)
    assert report.union <= sum(len(s) for s in per_kind.values())
    if report.high_return:
        assert report.union_pct == pytest.approx(100 * report.union / report.high_return)


def test_composition_fixture_statistics():
    _, returns, events = build_composition()
    report = prevalence(returns, events)
    assert (report.universe, report.high_return) == (1000, 707)
    assert (report.counts["wash"], report.counts["lpi"], report.counts["anomaly"]) == (282, 40, 412)
    assert report.union == 584 and round(report.union_pct, 1) == 82.6
    assert report.linkage["extraction_token_count"] == 60
    assert report.linkage["prior_growth_count"] == 37


def test_extra_rug_pulls_extend_linkage():
    _, returns, events = build_composition()
    wash_only = sorted({e.token_id for e in events if e.kind == EventKind.WASH_ZERO_RISK}
                       - {e.token_id for e in events if e.kind != EventKind.WASH_ZERO_RISK}
                       & {r.token_id for r in returns if r.high_return})
    events += [ev(t, "RugPull", 45) for t in wash_only[:2]]
    link = prevalence(returns, events).linkage
    assert (link["prior_growth_count"], link["extraction_token_count"]) == (39, 62)
    assert round(link["ratio"], 2) == 62.90


def test_bundled_fixture_matches_builder(tmp_path):
    write_composition(tmp_path)
    for name in ("tokens.csv", "returns.csv", "events.jsonl"):
        assert (tmp_path / name).read_bytes() == (composition_dir() / name).read_bytes()


def test_per_chain_breakdown():
    _, returns, events = build_composition()
    per_chain = prevalence(returns, events).per_chain
    assert sorted(per_chain) == ["base", "bsc", "ethereum", "solana"]
    assert sum(c["listed"] for c in per_chain.values()) == 1000
    assert sum(c["union"] for c in per_chain.values()) == 584


# label matching

def test_windows_hit_by_day():
    assert windows_hit(T0, T0 + 10, T0 + DAY - 1, T0 + DAY - 1)
    assert not windows_hit(T0, T0 + DAY - 1, T0 + DAY, T0 + 2 * DAY)


def test_match_labels_recall_and_unmatched():
    labels = pd.DataFrame({"token_id": ["a", "a"], "kind": ["LPI", "LPI"],
                           "window_start": [T0, T0 + 5 * DAY],
                           "window_end": [T0 + DAY - 1, T0 + 6 * DAY - 1]})
    result = match_labels(labels, [ev("a", "LPI", 0), ev("a", "LPI", 9), ev("b", "LPI", 0)])
    assert result["LPI"] == {"labels": 2, "hits": 1, "recall": 50.0}
    assert result["unmatched_events"] == {"LPI": 2}


# rendering

def test_render_is_byte_stable(tmp_path):
    _, returns, events = build_composition()
    report = prevalence(returns, events)
    digests = []
    for name in ("a", "b"):
        paths = render_report(tmp_path / name, report, events)
        digests.append({k: hashlib.sha256(p.read_bytes()).hexdigest() for k, p in paths.items()})
    assert digests[0] == digests[1]


def test_summary_matches_prevalence(tmp_path):
    _, returns, events = build_composition()
    report = prevalence(returns, events)
    render_report(tmp_path, report, events)
    with open(tmp_path / "summary.csv", newline="") as fh:
        rows = {(r["section"], r["statistic"]): r["value"] for r in csv.DictReader(fh)}
    assert rows[("wash_trading", "wash_trading_tokens")] == str(report.counts["wash"]) == "282"
    assert rows[("growth", "union_pct")] == "82.6025"
    floats = [v for v in rows.values() if "." in v]
    assert all(len(v.split(".")[1]) == 4 for v in floats)


def test_empty_report(tmp_path):
    report = prevalence([], [])
    paths = render_report(tmp_path, report, [])
    data = json.loads(paths["report.json"].read_text())
    assert data["union"] == 0 and data["high_return"] == 0
    assert all(v == 0 for v in data["counts"].values())
    assert paths["events.jsonl"].read_text() == ""
    assert len(summary_rows(report)) > 0


def test_unwritable_output(tmp_path):
    from memewatch.exceptions import InputError
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(InputError):
        render_report(blocker / "sub", prevalence([], []), [])
