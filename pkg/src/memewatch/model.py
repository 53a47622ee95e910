"""Shared domain types for token market data and detection results.

Everything here is immutable and free of I/O. Prices and volumes are USD
floats; timestamps are unix seconds, UTC.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np
import pandas as pd

HOUR = 3600
DAY = 86400


class Chain(str, Enum):
    ETHEREUM = "ethereum"
    BSC = "bsc"
    SOLANA = "solana"
    BASE = "base"

    @property
    def is_evm(self) -> bool:
        return self is not Chain.SOLANA


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"


class EventKind(str, Enum):
    WASH_ZERO_RISK = "WashZeroRisk"
    WASH_CIRCULAR = "WashCircular"
    WASH_PERSISTENT = "WashPersistent"
    LPI = "LPI"
    PUMP_AND_DUMP = "PumpAndDump"
    RUG_PULL = "RugPull"
    ANOMALY_TOP_HOLDERS = "AnomalyTopHolders"
    ANOMALY_BUNDLE = "AnomalyBundle"
    ANOMALY_FRESH = "AnomalyFresh"
    ANOMALY_AIRDROP = "AnomalyAirdrop"
    ANOMALY_HONEYPOT = "AnomalyHoneypot"

    @property
    def family(self) -> str:
        if self.value.startswith("Wash"):
            return "wash"
        if self.value.startswith("Anomaly"):
            return "anomaly"
        return {"LPI": "lpi", "PumpAndDump": "pump_and_dump", "RugPull": "rug_pull"}[self.value]


WASH_KINDS = frozenset(k for k in EventKind if k.family == "wash")
ANOMALY_KINDS = frozenset(k for k in EventKind if k.family == "anomaly")
GROWTH_KINDS = WASH_KINDS | {EventKind.LPI}
EXTRACTION_KINDS = frozenset({EventKind.PUMP_AND_DUMP, EventKind.RUG_PULL})

# metric keys each event kind must carry
REQUIRED_METRICS: dict[EventKind, frozenset[str]] = {
    EventKind.WASH_ZERO_RISK: frozenset(
        {"volume_surge_pct", "price_change_pct", "unique_makers", "max_imbalance"}),
    EventKind.WASH_CIRCULAR: frozenset(
        {"volume_surge_pct", "price_change_pct", "circular_ratio", "unique_makers"}),
    EventKind.WASH_PERSISTENT: frozenset({"screened_days", "persistent_makers"}),
    EventKind.LPI: frozenset({"price_change_pct", "volume_usd", "buy_ratio", "unique_makers"}),
    EventKind.PUMP_AND_DUMP: frozenset(
        {"pump_pct", "dump_pct", "pump_volume_surge_pct", "peak_ts"}),
    EventKind.RUG_PULL: frozenset({"price_drop_pct", "volume_collapse_ratio"}),
    EventKind.ANOMALY_TOP_HOLDERS: frozenset({"top10_share"}),
    EventKind.ANOMALY_BUNDLE: frozenset({"bundle_buy_share"}),
    EventKind.ANOMALY_FRESH: frozenset({"fresh_address_share"}),
    EventKind.ANOMALY_AIRDROP: frozenset({"airdrop_share"}),
    EventKind.ANOMALY_HONEYPOT: frozenset({"honeypot"}),
}


class ReturnCategory(str, Enum):
    MISSING = "Missing"
    NEGATIVE = "Negative"
    INACTIVE = "Inactive"
    STABLE_ACTIVE = "StableActive"
    POSITIVE = "Positive"
    HIGH_RETURN = "HighReturn"


def _check_share(name, value):
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} must lie in [0, 100], got {value!r}")


@dataclass(frozen=True)
class TokenRecord:
    token_id: str
    chain: Chain
    address: str
    name: str
    symbol: str
    created_at: int
    sources: frozenset[str] = frozenset()

    def __post_init__(self):
        from .validation import validate_address

        object.__setattr__(self, "chain", Chain(self.chain))
        object.__setattr__(self, "sources", frozenset(self.sources))
        validate_address(self.chain, self.address)
        if self.created_at <= 0:
            raise ValueError(f"created_at must be positive, got {self.created_at}")


@dataclass(frozen=True)
class OhlcvBar:
    token_id: str
    ts: int
    open: float
    high: float
    low: float
    close: float
    volume_usd: float

    def __post_init__(self):
        if self.ts % HOUR:
            raise ValueError(f"bar timestamp {self.ts} is not hour aligned")
        if min(self.open, self.high, self.low, self.close, self.volume_usd) < 0:
            raise ValueError("bar prices and volume must be non-negative")
        if not self.low <= min(self.open, self.close) or not max(self.open, self.close) <= self.high:
            raise ValueError("bar violates low <= open/close <= high")


@dataclass(frozen=True)
class DailyAggregate:
    token_id: str
    date: int  # unix seconds of the UTC day start
    open: float
    close: float
    volume_usd: float
    bar_count: int

    def __post_init__(self):
        if self.date % DAY:
            raise ValueError("date must be a UTC day boundary")
        if self.bar_count < 0:
            raise ValueError("bar_count must be >= 0")
        if self.bar_count == 0 and self.volume_usd != 0:
            raise ValueError("a day without bars cannot carry volume")


@dataclass(frozen=True)
class Trade:
    token_id: str
    ts: int
    maker_id: str
    side: Side
    amount_usd: float

    def __post_init__(self):
        object.__setattr__(self, "side", Side(self.side))
        if not self.amount_usd > 0:
            raise ValueError(f"amount_usd must be positive, got {self.amount_usd!r}")


@dataclass(frozen=True)
class HolderSnapshot:
    token_id: str
    ts: int
    top10_share: float
    bundle_buy_share: float
    fresh_address_share: float
    airdrop_share: float
    honeypot: bool

    def __post_init__(self):
        for name in ("top10_share", "bundle_buy_share", "fresh_address_share", "airdrop_share"):
            _check_share(name, getattr(self, name))


@dataclass(frozen=True)
class TokenEconomics:
    token_id: str
    ts: int
    price_usd: float
    circulating_supply: float = math.nan
    market_cap_usd: float = math.nan
    liquidity_usd: float = math.nan

    def __post_init__(self):
        for name in ("price_usd", "circulating_supply", "market_cap_usd", "liquidity_usd"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be non-negative")
        if not any(math.isnan(v) for v in (self.price_usd, self.circulating_supply,
                                           self.market_cap_usd)):
            expected = market_cap(self.price_usd, self.circulating_supply)
            if not math.isclose(self.market_cap_usd, expected, rel_tol=1e-6, abs_tol=1e-12):
                raise ValueError(
                    f"market cap {self.market_cap_usd} != price x supply {expected}")


@dataclass(frozen=True)
class DetectionEvent:
    """One flagged manipulation for one token over ``[window_start, window_end]``."""

    token_id: str
    kind: EventKind
    window_start: int
    window_end: int
    metrics: Mapping[str, float] = field(default_factory=dict)
    actors: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "actors", frozenset(self.actors))
        object.__setattr__(self, "metrics", dict(self.metrics))
        if self.window_start > self.window_end:
            raise ValueError("window_start must not exceed window_end")
        missing = REQUIRED_METRICS[self.kind] - set(self.metrics)
        if missing:
            raise ValueError(f"{self.kind.value} event lacks metrics {sorted(missing)}")

    def sort_key(self):
        return (self.token_id, self.window_start, self.window_end, self.kind.value,
                tuple(sorted(self.actors)))


@dataclass(frozen=True)
class ReturnRecord:
    token_id: str
    p_start: float
    p_end: float
    return_pct: Optional[float]
    category: ReturnCategory
    window_volume_usd: float = 0.0
    high_return: bool = False

    def __post_init__(self):
        object.__setattr__(self, "category", ReturnCategory(self.category))
        if self.high_return and not (self.return_pct is not None and self.return_pct > 100):
            raise ValueError("high-return tokens need a return above 100%")


def market_cap(price_usd: float, supply: float) -> float:
    if price_usd < 0 or supply < 0:
        raise ValueError("price and supply must be non-negative")
    return price_usd * supply


def pct_change(prev: float, cur: float) -> Optional[float]:
    """Percent change from ``prev`` to ``cur``.

    A zero base yields ``math.inf`` when ``cur`` is positive and ``None``
    (undefined) otherwise. Negative bases are undefined as well.
    """
    if prev > 0:
        return 100.0 * (cur - prev) / prev
    if prev == 0 and cur > 0:
        return math.inf
    return None


def pct_change_array(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Vectorised :func:`pct_change`; undefined entries come back as NaN."""
    prev = np.asarray(prev, dtype=float)
    cur = np.asarray(cur, dtype=float)
    out = np.full(np.broadcast(prev, cur).shape, np.nan)
    pos = prev > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(pos, 100.0 * (cur - prev) / np.where(pos, prev, 1.0), out)
    out = np.where((prev == 0) & (cur > 0), np.inf, out)
    return out


DAILY_COLUMNS = ["date", "open", "close", "volume_usd", "bar_count"]


def daily_aggregates(bars: pd.DataFrame) -> pd.DataFrame:
    """Collapse hourly bars into UTC-day aggregates.

    Days between the first and last bar that hold no bars are materialised
    with zero volume and the previous day's close as open and close.
    """
    if len(bars) == 0:
        return pd.DataFrame({c: pd.Series(dtype=float) for c in DAILY_COLUMNS})
    ts = bars["ts"].to_numpy(dtype=np.int64)
    day = ts // DAY
    grouped = pd.DataFrame({
        "day": day,
        "open": bars["open"].to_numpy(dtype=float),
        "close": bars["close"].to_numpy(dtype=float),
        "volume_usd": bars["volume_usd"].to_numpy(dtype=float),
    }).groupby("day", sort=True).agg(
        open=("open", "first"), close=("close", "last"),
        volume_usd=("volume_usd", "sum"), bar_count=("open", "size"))
    full = np.arange(day[0], day[-1] + 1, dtype=np.int64)
    grouped = grouped.reindex(full)
    gap = grouped["bar_count"].isna().to_numpy()
    if gap.any():
        close = grouped["close"].ffill()
        grouped["close"] = close
        grouped.loc[gap, "open"] = close[gap]
        grouped.loc[gap, "volume_usd"] = 0.0
        grouped.loc[gap, "bar_count"] = 0
    out = pd.DataFrame({
        "date": full * DAY,
        "open": grouped["open"].to_numpy(dtype=float),
        "close": grouped["close"].to_numpy(dtype=float),
        "volume_usd": grouped["volume_usd"].to_numpy(dtype=float),
        "bar_count": grouped["bar_count"].to_numpy(dtype=np.int64),
    })
    return out


def day_start(ts: int) -> int:
    return ts - ts % DAY
