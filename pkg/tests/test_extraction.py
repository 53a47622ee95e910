import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memewatch.detectors import PumpDumpDetector, RugPullDetector
from memewatch.detectors._base import TokenData
from memewatch.detectors.extraction import (detect_pump_dump, detect_rug_pull, linkage,
                                            local_maxima, rsi)
from memewatch.exceptions import InputError
from memewatch.model import DAY, HOUR, REQUIRED_METRICS, DetectionEvent, EventKind

from helpers import T0, make_bars, make_daily, wilder_rsi_loop


# RSI

def test_rsi_monotone_up_and_down():
    assert rsi(np.arange(1.0, 31.0))[-1] == 100.0
    assert rsi(np.arange(30.0, 0.0, -1.0))[-1] == 0.0


def test_rsi_leading_nans():
    out = rsi(np.arange(1.0, 21.0), 14)
    assert np.isnan(out[:14]).all() and not np.isnan(out[14:]).any()


def test_rsi_too_short():
    with pytest.raises(InputError):
        rsi(np.ones(14), 14)


@given(st.lists(st.floats(0.01, 100.0), min_size=6, max_size=60), st.integers(1, 5))
def test_rsi_matches_loop_and_stays_in_range(closes, period):
    ours = rsi(closes, period)
    expected = wilder_rsi_loop(closes, period)
    assert np.allclose(ours[period:], expected[period:], atol=1e-7)
    assert ((ours[period:] >= 0) & (ours[period:] <= 100)).all()


def test_local_maxima_plateau_reports_first_bar():
    assert local_maxima([1, 2, 3, 3, 2, 5, 1]).tolist() == [2, 5]
    assert local_maxima([1, 2]).tolist() == []


# pump and dump

def pump_bars(pump_to=2.5, pump_volume=200.0):
    rise = np.linspace(1.0, pump_to, 11)[1:]
    fall = np.linspace(pump_to, 1.0, 7)[1:]
    closes = np.r_[np.ones(60), rise, fall, np.ones(60)]
    volumes = np.r_[np.full(60, 10.0), np.full(10, pump_volume), np.full(6, 100.0),
                    np.full(60, 5.0)]
    return make_bars(closes, volumes)


def test_pump_and_dump_detected():
    found = detect_pump_dump(pump_bars(), "solana:x")
    assert len(found.events) == 1
    e = found.events[0]
    assert e.kind == EventKind.PUMP_AND_DUMP
    assert e.window_start == T0 + 59 * HOUR
    assert e.metrics["peak_ts"] == T0 + 69 * HOUR
    assert e.metrics["pump_pct"] == pytest.approx(150.0)
    assert e.metrics["dump_pct"] == pytest.approx(60.0)
    assert e.metrics["pump_volume_surge_pct"] == pytest.approx(1900.0)
    assert e.window_end == T0 + 76 * HOUR - 1


def test_small_pump_is_ignored():
    # +45% on ten times the volume
    assert detect_pump_dump(pump_bars(1.45, 100.0)).events == []


def test_pump_without_volume_surge_is_ignored():
    assert detect_pump_dump(pump_bars(2.5, 15.0)).events == []


def test_pump_dump_insufficient_history():
    found = detect_pump_dump(make_bars(np.linspace(1, 3, 30)), "solana:x")
    assert found.events == []
    assert [n.status for n in found.notes] == ["skipped"]


def test_pump_dump_detector_uses_params():
    token = TokenData("solana:x", pump_bars())
    assert len(PumpDumpDetector().detect_token(token).events) == 1
    assert PumpDumpDetector(pump_pct=200.0).detect_token(token).events == []


# rug pull

def rug_daily(drop_to, following=10.0, tail=7):
    closes = [0.01] * 8 + [drop_to] + [drop_to] * tail
    volumes = [5000.0] * 8 + [3000.0] + [following] * tail
    return make_daily(closes, volumes)


def test_rug_pull_detected():
    found = detect_rug_pull(rug_daily(0.00005), "ethereum:0x1")
    assert len(found.events) == 1
    e = found.events[0]
    assert e.metrics["volume_collapse_ratio"] == pytest.approx(0.002)
    assert e.metrics["price_drop_pct"] == pytest.approx(-99.5)
    assert (e.window_start, e.window_end) == (T0 + 8 * DAY, T0 + 16 * DAY - 1)


def test_rug_drop_of_exactly_99_percent_is_ignored():
    daily = make_daily([1.0] * 8 + [0.01] * 8, [5000.0] * 8 + [1.0] * 8)
    assert detect_rug_pull(daily).events == []


def test_rug_without_volume_collapse():
    assert detect_rug_pull(rug_daily(0.00001, following=2500.0)).events == []


def test_rug_short_tail_is_provisional():
    found = detect_rug_pull(rug_daily(0.00005, tail=3))
    assert found.events == [] and found.notes[0].status == "provisional"


def test_rug_detector_estimator():
    bars = make_bars(np.repeat([0.01] * 8 + [0.00005] * 8, 24),
                     np.repeat([5000 / 24] * 8 + [10 / 24] * 8, 24))
    found = RugPullDetector().detect_token(TokenData("ethereum:0x1", bars))
    assert len(found.events) == 1


# linkage

def ev(token, kind, day):
    start = T0 + day * DAY
    return DetectionEvent(token, kind, start, start + DAY - 1,
                          dict.fromkeys(REQUIRED_METRICS[kind], 1.0))


def test_growth_before_extraction_counts():
    events = [ev("a", EventKind.WASH_ZERO_RISK, d) for d in (10, 11, 12)]
    events.append(ev("a", EventKind.PUMP_AND_DUMP, 40))
    report = linkage(events)
    assert report["extraction_token_count"] == 1
    assert report["prior_growth_count"] == 1 and report["ratio"] == 100.0
    assert report["prior_wash_count"] == 1 and report["prior_lpi_count"] == 0


def test_growth_after_extraction_does_not_count():
    events = [ev("a", EventKind.PUMP_AND_DUMP, 40), ev("a", EventKind.WASH_CIRCULAR, 50)]
    report = linkage(events)
    assert report["prior_growth_count"] == 0 and report["ratio"] == 0.0


def test_linkage_restricted_population_and_by_kind():
    events = [ev("a", EventKind.LPI, 1), ev("a", EventKind.RUG_PULL, 5),
              ev("b", EventKind.PUMP_AND_DUMP, 3), ev("c", EventKind.PUMP_AND_DUMP, 3)]
    report = linkage(events, token_ids=["a", "b"])
    assert report["extraction_token_count"] == 2 and report["prior_growth_count"] == 1
    assert report["by_kind"]["RugPull"]["prior_lpi_count"] == 1
    assert report["by_kind"]["PumpAndDump"]["extraction_token_count"] == 1


def test_linkage_empty():
    assert linkage([])["ratio"] == 0.0
