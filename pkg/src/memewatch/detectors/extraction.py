"""Profit-extraction detectors (pump-and-dump, rug pull) and growth linkage."""
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from ..exceptions import InputError
from ..model import (DAY, EXTRACTION_KINDS, GROWTH_KINDS, HOUR, DetectionEvent, EventKind,
                     pct_change)
from ..validation import check_bars, check_daily, check_scalar
from ._base import BaseDetector, DetectionNote, Detections, TokenData

logger = logging.getLogger(__name__)


def rsi(closes, period: int = 14) -> np.ndarray:
    """Wilder's relative strength index.

    The first ``period`` entries are NaN. Windows with no losses give 100,
    windows with no gains give 0, and perfectly flat windows give 50.
    """
    closes = np.asarray(closes, dtype=float)
    if period < 1:
        raise InputError("RSI period must be positive")
    if len(closes) <= period:
        raise InputError(f"RSI({period}) needs more than {period} closes, got {len(closes)}")
    delta = np.diff(closes)
    gain = np.clip(delta, 0.0, None)
    loss = np.clip(-delta, 0.0, None)
    decay = (period - 1) / period
    avgs = []
    for series in (gain, loss):
        seed = series[:period].mean()
        rest = lfilter([1.0 / period], [1.0, -decay], series[period:], zi=[decay * seed])[0]
        avgs.append(np.r_[seed, rest])
    avg_gain, avg_loss = avgs
    with np.errstate(divide="ignore", invalid="ignore"):
        value = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    value = np.where(avg_loss == 0, np.where(avg_gain > 0, 100.0, 50.0), value)
    return np.r_[np.full(period, np.nan), value]


def local_maxima(values) -> np.ndarray:
    """Indices of strict local maxima; a raised plateau reports its first bar."""
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return np.array([], dtype=int)
    starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    run_vals = v[starts]
    idx = np.arange(1, len(starts) - 1)
    peak = (run_vals[idx] > run_vals[idx - 1]) & (run_vals[idx] > run_vals[idx + 1])
    return starts[idx[peak]]


def detect_pump_dump(bars: pd.DataFrame, token_id: str = "", *, rsi_period: int = 14,
                     rsi_threshold: float = 80.0, lookback_hours: int = 24,
                     pump_pct: float = 50.0, volume_surge_pct: float = 500.0,
                     max_pump_hours: int = 24, dump_horizon_hours: int = 72,
                     dump_pct: float = 30.0, post_dump_hours: int = 48,
                     post_dump_volume_ratio: float = 0.5, min_history_hours: int = 48
                     ) -> Detections:
    """Find pump-and-dump episodes in hourly bars.

    Peaks are local close maxima with RSI above ``rsi_threshold``. The pump
    starts at the lowest close of the preceding ``lookback_hours`` (latest on
    ties) and must gain more than ``pump_pct`` within ``max_pump_hours`` on
    volume that beats the equal-length window before it by more than
    ``volume_surge_pct``. The dump needs a close more than ``dump_pct`` under
    the peak within ``dump_horizon_hours``, after which mean hourly volume
    over ``post_dump_hours`` must fall below ``post_dump_volume_ratio`` of
    the pump's mean hourly volume. Overlapping episodes keep the earliest peak.
    """
    check_bars(bars)
    notes: list[DetectionNote] = []
    ts = bars["ts"].to_numpy(dtype=np.int64)
    if len(ts) == 0 or ts[-1] - ts[0] + HOUR < min_history_hours * HOUR:
        if len(ts):
            notes.append(DetectionNote(token_id, "pnd", int(ts[0]), "skipped",
                                       "insufficient hourly history"))
        return Detections([], notes)
    close = bars["close"].to_numpy(dtype=float)
    vol = bars["volume_usd"].to_numpy(dtype=float)
    cumvol = np.r_[0.0, np.cumsum(vol)]

    def vol_between(lo, hi):
        # bars with lo < ts <= hi
        a = np.searchsorted(ts, lo, side="right")
        b = np.searchsorted(ts, hi, side="right")
        return cumvol[b] - cumvol[a], b - a

    strength = rsi(close, rsi_period)
    candidates = []
    for p in local_maxima(close):
        if not strength[p] > rsi_threshold:
            continue
        lo = np.searchsorted(ts, ts[p] - lookback_hours * HOUR, side="left")
        if lo >= p:
            continue
        window = close[lo:p]
        s = lo + len(window) - 1 - int(np.argmin(window[::-1]))
        rise = pct_change(close[s], close[p])
        span = int(ts[p] - ts[s])
        if rise is None or not rise > pump_pct or span > max_pump_hours * HOUR:
            continue
        if ts[s] - span + HOUR < ts[0]:
            notes.append(DetectionNote(token_id, "pnd", int(ts[p]), "skipped",
                                       "insufficient history before pump start"))
            continue
        pump_vol, pump_bars = vol_between(ts[s], ts[p])
        base_vol, _ = vol_between(ts[s] - span, ts[s])
        surge = pct_change(base_vol, pump_vol)
        if surge is None or not surge > volume_surge_pct:
            continue
        a = np.searchsorted(ts, ts[p], side="right")
        b = np.searchsorted(ts, ts[p] + dump_horizon_hours * HOUR, side="right")
        if a >= b:
            notes.append(DetectionNote(token_id, "pnd", int(ts[p]), "skipped",
                                       "no bars after peak"))
            continue
        t = a + int(np.argmin(close[a:b]))
        fall = pct_change(close[p], close[t])
        if fall is None or not fall < -dump_pct:
            continue
        post_vol, post_bars = vol_between(ts[t], ts[t] + post_dump_hours * HOUR)
        if post_bars == 0:
            notes.append(DetectionNote(token_id, "pnd", int(ts[p]), "skipped",
                                       "no bars after dump trough"))
            continue
        if not post_vol / post_bars < post_dump_volume_ratio * (pump_vol / pump_bars):
            continue
        candidates.append(DetectionEvent(
            token_id, EventKind.PUMP_AND_DUMP, int(ts[s]), int(ts[t]) + HOUR - 1,
            {"pump_pct": rise, "dump_pct": -fall, "pump_volume_surge_pct": surge,
             "peak_ts": int(ts[p])}))
    merged: list[DetectionEvent] = []
    for event in sorted(candidates, key=lambda e: e.metrics["peak_ts"]):
        if merged and event.window_start <= merged[-1].window_end:
            continue
        merged.append(event)
    return Detections(merged, notes)


def detect_rug_pull(daily: pd.DataFrame, token_id: str = "", *, drop_pct: float = 99.0,
                    following_days: int = 7, baseline_days: int = 7,
                    collapse_ratio: float = 0.01) -> Detections:
    """Single-day close collapse followed by a lasting volume collapse."""
    check_daily(daily)
    events, notes = [], []
    close = daily["close"].to_numpy(dtype=float)
    vol = daily["volume_usd"].to_numpy(dtype=float)
    dates = daily["date"].to_numpy(dtype=np.int64)
    for d in range(1, len(daily)):
        change = pct_change(close[d - 1], close[d])
        if change is None or not change < -drop_pct:
            continue
        if d < baseline_days:
            notes.append(DetectionNote(token_id, "rug", int(dates[d]), "skipped",
                                       "insufficient baseline history"))
            continue
        prior = vol[d - baseline_days:d].mean()
        if not prior > 0:
            notes.append(DetectionNote(token_id, "rug", int(dates[d]), "skipped",
                                       "zero baseline volume"))
            continue
        if d + following_days >= len(daily):
            notes.append(DetectionNote(token_id, "rug", int(dates[d]), "provisional",
                                       "history ends before the follow-up window"))
            continue
        ratio = vol[d + 1:d + following_days + 1].mean() / prior
        if ratio < collapse_ratio:
            events.append(DetectionEvent(
                token_id, EventKind.RUG_PULL, int(dates[d]),
                int(dates[d + following_days]) + DAY - 1,
                {"price_drop_pct": change, "volume_collapse_ratio": float(ratio)}))
    if len(events) > 1:
        logger.warning("token %s has %d confirmed rug pulls; expected at most one",
                       token_id, len(events))
        notes.append(DetectionNote(token_id, "rug", events[1].window_start, "invariant-violation",
                                   f"{len(events)} confirmed rug pulls"))
    return Detections(events, notes)


class PumpDumpDetector(BaseDetector):
    kinds = frozenset({EventKind.PUMP_AND_DUMP})

    def __init__(self, rsi_period: int = 14, rsi_threshold: float = 80.0,
                 lookback_hours: int = 24, pump_pct: float = 50.0,
                 volume_surge_pct: float = 500.0, max_pump_hours: int = 24,
                 dump_horizon_hours: int = 72, dump_pct: float = 30.0,
                 post_dump_hours: int = 48, post_dump_volume_ratio: float = 0.5,
                 min_history_hours: int = 48):
        self.rsi_period = rsi_period
        self.rsi_threshold = rsi_threshold
        self.lookback_hours = lookback_hours
        self.pump_pct = pump_pct
        self.volume_surge_pct = volume_surge_pct
        self.max_pump_hours = max_pump_hours
        self.dump_horizon_hours = dump_horizon_hours
        self.dump_pct = dump_pct
        self.post_dump_hours = post_dump_hours
        self.post_dump_volume_ratio = post_dump_volume_ratio
        self.min_history_hours = min_history_hours

    def _check_params(self):
        for name in ("rsi_period", "lookback_hours", "max_pump_hours", "dump_horizon_hours",
                     "post_dump_hours", "min_history_hours"):
            check_scalar(getattr(self, name), name, low=1, integer=True)
        check_scalar(self.rsi_threshold, "rsi_threshold", low=0, high=100)
        check_scalar(self.pump_pct, "pump_pct", low=0)
        check_scalar(self.volume_surge_pct, "volume_surge_pct", low=0)
        check_scalar(self.dump_pct, "dump_pct", low=0, high=100)
        check_scalar(self.post_dump_volume_ratio, "post_dump_volume_ratio", low=0)

    def detect_token(self, token: TokenData) -> Detections:
        return detect_pump_dump(token.bars, token.token_id, **self.get_params())


class RugPullDetector(BaseDetector):
    kinds = frozenset({EventKind.RUG_PULL})

    def __init__(self, drop_pct: float = 99.0, following_days: int = 7,
                 baseline_days: int = 7, collapse_ratio: float = 0.01):
        self.drop_pct = drop_pct
        self.following_days = following_days
        self.baseline_days = baseline_days
        self.collapse_ratio = collapse_ratio

    def _check_params(self):
        check_scalar(self.drop_pct, "drop_pct", low=0, high=100)
        check_scalar(self.following_days, "following_days", low=1, integer=True)
        check_scalar(self.baseline_days, "baseline_days", low=1, integer=True)
        check_scalar(self.collapse_ratio, "collapse_ratio", low=0, high=1)

    def detect_token(self, token: TokenData) -> Detections:
        return detect_rug_pull(token.daily, token.token_id, **self.get_params())


def linkage(events: Iterable[DetectionEvent], token_ids: Optional[Iterable[str]] = None) -> dict:
    """How many extraction tokens had a growth manipulation that ended beforehand.

    A token with a pump-and-dump or rug pull counts as "prior growth" when
    one of its wash or LPI events ends before its earliest extraction event
    starts. ``token_ids`` restricts the population. The ratio is a percent.
    """
    allowed = None if token_ids is None else set(token_ids)
    growth_ends = defaultdict(list)
    growth_kind_ends = defaultdict(list)
    extraction = defaultdict(list)
    for e in events:
        if allowed is not None and e.token_id not in allowed:
            continue
        if e.kind in GROWTH_KINDS:
            growth_ends[e.token_id].append(e.window_end)
            growth_kind_ends[(e.token_id, e.kind.family)].append(e.window_end)
        elif e.kind in EXTRACTION_KINDS:
            extraction[e.token_id].append(e)

    def summarise(starts: dict[str, int]) -> dict:
        prior = sorted(t for t, s in starts.items() if any(w < s for w in growth_ends[t]))
        by_family = {fam: sum(1 for t, s in starts.items()
                              if any(w < s for w in growth_kind_ends[(t, fam)]))
                     for fam in ("wash", "lpi")}
        n = len(starts)
        return {"extraction_token_count": n, "prior_growth_count": len(prior),
                "ratio": 100.0 * len(prior) / n if n else 0.0,
                "prior_wash_count": by_family["wash"], "prior_lpi_count": by_family["lpi"]}

    overall = {t: min(e.window_start for e in evs) for t, evs in extraction.items()}
    report = summarise(overall)
    report["by_kind"] = {}
    for kind in sorted(EXTRACTION_KINDS, key=lambda k: k.value):
        starts = {t: min(e.window_start for e in evs if e.kind == kind)
                  for t, evs in extraction.items() if any(e.kind == kind for e in evs)}
        report["by_kind"][kind.value] = summarise(starts)
    return report
