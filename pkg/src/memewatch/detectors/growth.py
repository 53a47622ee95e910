"""Artificial-growth detectors: holder anomalies, wash trading, and LPI.

Day-over-day comparisons use UTC-day aggregates, close to close.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
import pandas as pd

from ..model import DAY, DetectionEvent, EventKind, HolderSnapshot, pct_change_array
from ..validation import check_daily, check_scalar
from ._base import BaseDetector, DetectionNote, Detections, TokenData, day_window

_SHARE_RULES = (
    ("top10_share", EventKind.ANOMALY_TOP_HOLDERS),
    ("bundle_buy_share", EventKind.ANOMALY_BUNDLE),
    ("fresh_address_share", EventKind.ANOMALY_FRESH),
    ("airdrop_share", EventKind.ANOMALY_AIRDROP),
)


def detect_anomalies(snapshot: HolderSnapshot, share_threshold: float = 30.0
                     ) -> list[DetectionEvent]:
    """One event per ownership share strictly above the threshold, plus honeypots."""
    events = []
    for attr, kind in _SHARE_RULES:
        value = getattr(snapshot, attr)
        if value > share_threshold:
            events.append(DetectionEvent(snapshot.token_id, kind, snapshot.ts, snapshot.ts,
                                         {attr: value}))
    if snapshot.honeypot:
        events.append(DetectionEvent(snapshot.token_id, EventKind.ANOMALY_HONEYPOT,
                                     snapshot.ts, snapshot.ts, {"honeypot": 1}))
    return events


def screen_wash_days(daily: pd.DataFrame, volume_surge_pct: float = 500.0,
                     price_stability_pct: float = 5.0) -> pd.DataFrame:
    """Days whose volume jumps past ``volume_surge_pct`` while the close barely moves.

    Returns the candidate rows of ``daily`` with ``volume_surge_pct`` and
    ``price_change_pct`` columns added. A zero-volume previous day counts as
    an infinite surge.
    """
    check_daily(daily)
    vol = daily["volume_usd"].to_numpy(dtype=float)
    close = daily["close"].to_numpy(dtype=float)
    surge = np.r_[np.nan, pct_change_array(vol[:-1], vol[1:])] if len(daily) else vol
    move = np.r_[np.nan, pct_change_array(close[:-1], close[1:])] if len(daily) else close
    with np.errstate(invalid="ignore"):
        hit = (surge > volume_surge_pct) & (np.abs(move) < price_stability_pct)
    out = daily.assign(volume_surge_pct=surge, price_change_pct=move)
    return out[hit].reset_index(drop=True)


def maker_flows(trades: pd.DataFrame) -> pd.DataFrame:
    """Per-maker buy and sell USD totals, indexed by maker_id."""
    flows = trades.pivot_table(index="maker_id", columns="side", values="amount_usd",
                               aggfunc="sum", fill_value=0.0)
    return flows.reindex(columns=["buy", "sell"], fill_value=0.0)


def zero_risk_imbalances(trades: pd.DataFrame, tolerance: float = 0.02) -> dict[str, float]:
    """Makers who bought and sold within ``tolerance`` of each other, with their imbalance."""
    if trades is None or len(trades) == 0:
        return {}
    flows = maker_flows(trades)
    buy = flows["buy"].to_numpy()
    sell = flows["sell"].to_numpy()
    both = (buy > 0) & (sell > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        imbalance = np.abs(buy - sell) / np.maximum(buy, sell)
    ok = both & (imbalance <= tolerance)
    return {m: float(i) for m, i in zip(flows.index[ok], imbalance[ok])}


def detect_zero_risk(trades: pd.DataFrame, tolerance: float = 0.02) -> frozenset[str]:
    return frozenset(zero_risk_imbalances(trades, tolerance))


def detect_circular_volume(trades: pd.DataFrame, min_ratio: float = 0.99
                           ) -> tuple[bool, Optional[dict]]:
    """Share of the day's volume traded by makers active on both sides.

    Returns ``(flagged, metrics)``; metrics is None for a day without volume.
    Numerator and denominator both count every trade row.
    """
    if trades is None or len(trades) == 0:
        return False, None
    total = float(trades["amount_usd"].sum())
    if not total > 0:
        return False, None
    flows = maker_flows(trades)
    circular = (flows["buy"] > 0) & (flows["sell"] > 0)
    ratio = float(flows.loc[circular, ["buy", "sell"]].to_numpy().sum()) / total
    metrics = {"circular_ratio": ratio, "unique_makers": int(len(flows))}
    return ratio >= min_ratio, metrics


def detect_persistent_makers(day_trades: list[Optional[pd.DataFrame]]) -> frozenset[str]:
    """Makers who traded on every one of the given screened days (needs two or more)."""
    if len(day_trades) < 2:
        return frozenset()
    common: Optional[set] = None
    for trades in day_trades:
        makers = set() if trades is None else set(trades["maker_id"])
        common = makers if common is None else common & makers
        if not common:
            return frozenset()
    return frozenset(common)


class AnomalyDetector(BaseDetector):
    """Ownership-concentration and honeypot indicators from holder snapshots."""

    kinds = frozenset(k for k in EventKind if k.family == "anomaly")

    def __init__(self, share_threshold: float = 30.0):
        self.share_threshold = share_threshold

    def _check_params(self):
        check_scalar(self.share_threshold, "share_threshold", low=0, high=100)

    def detect_token(self, token: TokenData) -> Detections:
        events = []
        for snap in token.holders:
            events.extend(detect_anomalies(snap, self.share_threshold))
        return Detections(events, [])


class WashTradingDetector(BaseDetector):
    """Volume-surge screen confirmed by zero-risk, circular and persistent-maker checks."""

    kinds = frozenset({EventKind.WASH_ZERO_RISK, EventKind.WASH_CIRCULAR,
                       EventKind.WASH_PERSISTENT})

    def __init__(self, volume_surge_pct: float = 500.0, price_stability_pct: float = 5.0,
                 zero_risk_tolerance: float = 0.02, circular_min_ratio: float = 0.99):
        self.volume_surge_pct = volume_surge_pct
        self.price_stability_pct = price_stability_pct
        self.zero_risk_tolerance = zero_risk_tolerance
        self.circular_min_ratio = circular_min_ratio

    def _check_params(self):
        check_scalar(self.volume_surge_pct, "volume_surge_pct", low=0)
        check_scalar(self.price_stability_pct, "price_stability_pct", low=0)
        check_scalar(self.zero_risk_tolerance, "zero_risk_tolerance", low=0, high=1)
        check_scalar(self.circular_min_ratio, "circular_min_ratio", low=0, high=1)

    def screen(self, daily: pd.DataFrame) -> pd.DataFrame:
        return screen_wash_days(daily, self.volume_surge_pct, self.price_stability_pct)

    def detect_token(self, token: TokenData) -> Detections:
        events, notes = [], []
        candidates = self.screen(token.daily)
        screened = []
        for row in candidates.itertuples(index=False):
            day = int(row.date)
            start, end = day_window(day)
            base = {"volume_surge_pct": float(row.volume_surge_pct),
                    "price_change_pct": float(row.price_change_pct)}
            trades = token.day_trades(day)
            screened.append(trades)
            if trades is None or len(trades) == 0:
                notes.append(DetectionNote(token.token_id, "wash", day, "screened-only",
                                           "no trades for screened day"))
                continue
            makers = zero_risk_imbalances(trades, self.zero_risk_tolerance)
            if makers:
                events.append(DetectionEvent(
                    token.token_id, EventKind.WASH_ZERO_RISK, start, end,
                    {**base, "unique_makers": int(trades["maker_id"].nunique()),
                     "max_imbalance": max(makers.values())},
                    frozenset(makers)))
            flagged, metrics = detect_circular_volume(trades, self.circular_min_ratio)
            if flagged:
                circular = maker_flows(trades)
                actors = frozenset(circular.index[(circular["buy"] > 0) & (circular["sell"] > 0)])
                events.append(DetectionEvent(token.token_id, EventKind.WASH_CIRCULAR, start, end,
                                             {**base, **metrics}, actors))
            if not makers and not flagged:
                notes.append(DetectionNote(token.token_id, "wash", day, "unconfirmed"))
        if len(screened) >= 2:
            persistent = detect_persistent_makers(screened)
            if persistent:
                first = int(candidates["date"].iloc[0])
                last = int(candidates["date"].iloc[-1])
                events.append(DetectionEvent(
                    token.token_id, EventKind.WASH_PERSISTENT, first, last + DAY - 1,
                    {"screened_days": len(screened), "persistent_makers": len(persistent)},
                    persistent))
        return Detections(events, notes)


def lpi_phase_one(daily: pd.DataFrame, price_increase_pct: float = 100.0,
                  max_volume_growth_pct: float = 20.0, low_volume_usd: float = 1000.0
                  ) -> pd.DataFrame:
    """Days with a >100% close-to-close jump and flat or tiny volume."""
    check_daily(daily)
    vol = daily["volume_usd"].to_numpy(dtype=float)
    close = daily["close"].to_numpy(dtype=float)
    if len(daily) == 0:
        return daily.assign(price_change_pct=close, volume_growth_pct=vol)
    jump = np.r_[np.nan, pct_change_array(close[:-1], close[1:])]
    growth = np.r_[np.nan, pct_change_array(vol[:-1], vol[1:])]
    with np.errstate(invalid="ignore"):
        first = np.r_[False, np.ones(len(daily) - 1, dtype=bool)]
        hit = first & (jump > price_increase_pct) & (
            (growth <= max_volume_growth_pct) | (vol < low_volume_usd))
    out = daily.assign(price_change_pct=jump, volume_growth_pct=growth)
    return out[hit].reset_index(drop=True)


def lpi_phase_two(trades: pd.DataFrame, min_buy_ratio: float = 0.90,
                  max_makers: int = 10) -> tuple[bool, dict]:
    total = float(trades["amount_usd"].sum())
    buys = float(trades.loc[trades["side"] == "buy", "amount_usd"].sum())
    ratio = buys / total if total > 0 else 0.0
    makers = int(trades["maker_id"].nunique())
    return ratio >= min_buy_ratio and makers <= max_makers, {
        "buy_ratio": ratio, "unique_makers": makers}


class LPIDetector(BaseDetector):
    """Liquidity-pool price inflation: a price jump without matching volume,
    confirmed by buy-dominated flow from a handful of makers."""

    kinds = frozenset({EventKind.LPI})

    def __init__(self, price_increase_pct: float = 100.0, max_volume_growth_pct: float = 20.0,
                 low_volume_usd: float = 1000.0, min_buy_ratio: float = 0.90,
                 max_makers: int = 10):
        self.price_increase_pct = price_increase_pct
        self.max_volume_growth_pct = max_volume_growth_pct
        self.low_volume_usd = low_volume_usd
        self.min_buy_ratio = min_buy_ratio
        self.max_makers = max_makers

    def _check_params(self):
        check_scalar(self.price_increase_pct, "price_increase_pct", low=0)
        check_scalar(self.max_volume_growth_pct, "max_volume_growth_pct")
        check_scalar(self.low_volume_usd, "low_volume_usd", low=0)
        check_scalar(self.min_buy_ratio, "min_buy_ratio", low=0, high=1)
        check_scalar(self.max_makers, "max_makers", low=1, integer=True)

    def detect_token(self, token: TokenData) -> Detections:
        events, notes = [], []
        flagged = lpi_phase_one(token.daily, self.price_increase_pct,
                                self.max_volume_growth_pct, self.low_volume_usd)
        for row in flagged.itertuples(index=False):
            day = int(row.date)
            trades = token.day_trades(day)
            if trades is None or len(trades) == 0:
                notes.append(DetectionNote(token.token_id, "lpi", day, "unconfirmed",
                                           "no trades for flagged day"))
                continue
            ok, metrics = lpi_phase_two(trades, self.min_buy_ratio, self.max_makers)
            if not ok:
                notes.append(DetectionNote(token.token_id, "lpi", day, "unconfirmed",
                                           f"buy_ratio={metrics['buy_ratio']:.4f} "
                                           f"makers={metrics['unique_makers']}"))
                continue
            start, end = day_window(day)
            buyers = frozenset(trades.loc[trades["side"] == "buy", "maker_id"])
            events.append(DetectionEvent(
                token.token_id, EventKind.LPI, start, end,
                {"price_change_pct": float(row.price_change_pct),
                 "volume_usd": float(row.volume_usd), **metrics},
                buyers))
        return Detections(events, notes)
