"""Labeled synthetic markets built on the constant-product pool.

Every token trades against its own pool. Noise traders submit lognormal
tickets each hour; scripted actors layer one manipulation pattern on top.
Hourly bars come from the pool: open and close are the spot price at the
hour boundaries, high and low also cover every intra-hour trade print.

Randomness comes from numpy's counter-based Philox generator keyed by
``SeedSequence([seed, kind_code, token_index])``, so a spec always produces
the same bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .amm import (PoolState, cost_to_multiply_price, swap_quote_in, swap_token_in,
                  tokens_to_divide_price)
from .exceptions import ScenarioError
from .io import SCHEMAS, write_rows
from .model import DAY, HOUR, EventKind
from .validation import b58encode

EPOCH = 1_704_067_200  # 2024-01-01T00:00:00Z
KINDS = ("organic", "wash", "lpi", "pump_dump", "rug_pull")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}
_CHAINS = ("ethereum", "bsc", "solana", "base")
_WORDS = ("doge", "pepe", "cat", "inu", "moon", "frog", "shiba", "wojak", "bonk", "elon",
          "baby", "floki", "chad", "meme", "trump", "ai", "rocket", "hamster")

ORGANIC_DEFAULTS = {
    "pool_quote": 50_000.0,
    "start_price": 1e-4,
    "fee": 0.003,
    "trades_per_hour": 2.0,
    "ticket_usd": 20.0,
    "ticket_sigma": 0.5,
    "traders": 150,
    "activity_sigma": 0.15,
    "reversion": 2.0,
    "max_volume_change_pct": 400.0,
    "max_price_change_pct": 20.0,
}

DEFAULTS: dict[str, dict[str, float]] = {
    "organic": dict(ORGANIC_DEFAULTS),
    "wash": {**ORGANIC_DEFAULTS, "events": 3, "circular": 0, "volume_multiple": 10.0,
             "circular_volume_multiple": 300.0, "ring_max": 3, "pair_fraction": 0.005},
    "lpi": {**ORGANIC_DEFAULTS, "pool_quote": 300.0, "fee": 0.0, "trades_per_hour": 0.05,
            "ticket_usd": 1.5, "traders": 5, "multiplier": 9.0, "events": 1},
    "pump_dump": {**ORGANIC_DEFAULTS, "episodes": 1, "pump_hours": 10, "pump_multiplier": 2.0,
                  "dump_hours": 6, "dump_fraction": 0.5, "ring_size": 3},
    "rug_pull": {**ORGANIC_DEFAULTS, "rug_divisor": 2000.0},
}


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    seed: int
    duration_days: int = 60
    n_tokens: int = 1
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        if self.duration_days < 30:
            raise ScenarioError("scenarios span at least 30 days")
        if self.n_tokens < 1:
            raise ScenarioError("n_tokens must be positive")
        unknown = set(self.params) - set(DEFAULTS[self.kind])
        if unknown:
            raise ScenarioError(f"unknown {self.kind} parameters {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))
        _check_guarantees(self.kind, self.resolved(), self.duration_days)

    def resolved(self) -> dict[str, float]:
        return {**DEFAULTS[self.kind], **self.params}


def _check_guarantees(kind: str, p: Mapping[str, float], days: int) -> None:
    """Reject parameter sets whose scripted bounds would not hold."""
    def need(cond, msg):
        if not cond:
            raise ScenarioError(f"{kind}: {msg}")

    need(p["max_volume_change_pct"] < 500, "organic volume-change cap must stay below 500%")
    need(0 < p["max_price_change_pct"] < 50, "organic price-change cap must lie in (0, 50)%")
    need(p["pool_quote"] > 0 and p["start_price"] > 0, "pool depth and price must be positive")
    need(0 <= p["fee"] <= 0.005, "fee must lie in [0, 0.5%] to keep wash legs balanced")
    need(p["trades_per_hour"] >= 0 and p["ticket_usd"] > 0 and p["traders"] >= 1,
         "bad noise-trader parameters")
    need(0 <= p["activity_sigma"] <= 0.3, "activity_sigma must lie in [0, 0.3]")
    if kind == "wash":
        need(1 <= p["events"] <= (days - 10) // 3, "too many wash days for the duration")
        need(p["volume_multiple"] >= 6 and p["circular_volume_multiple"] >= 150,
             "wash volume multiples leave no margin over the 5x screen")
        need(1 <= p["ring_max"] <= 10, "ring_max must lie in 1..10")
        need(0 < p["pair_fraction"] <= 0.01, "pair_fraction must lie in (0, 1%]")
    elif kind == "lpi":
        need(p["multiplier"] >= 2.5, "LPI multiplier must be at least 2.5")
        cost = p["pool_quote"] * (math.sqrt(p["multiplier"]) - 1) / (1 - p["fee"])
        need(cost < 900, f"LPI buy of {cost:.2f} would not stay under the $1,000 volume bound")
        need(1 <= p["events"] <= (days - 15) // 5, "too many LPI days for the duration")
    elif kind == "pump_dump":
        need(p["pump_multiplier"] >= 1.6, "pump must exceed +60%")
        need(2 <= p["pump_hours"] <= 20, "pump_hours must lie in 2..20")
        need(0.35 <= p["dump_fraction"] < 0.95, "dump_fraction must lie in [0.35, 0.95)")
        need(1 <= p["dump_hours"] <= 24, "dump_hours must lie in 1..24")
        need(1 <= p["episodes"] <= (days - 16) // 6, "too many episodes for the duration")
        need(p["ring_size"] >= 1, "ring_size must be positive")
    elif kind == "rug_pull":
        need(p["rug_divisor"] >= 200, "rug divisor must push the close below -99.5%")
        need(days >= 30, "rug pulls need room for baseline and follow-up weeks")


@dataclass
class Scenario:
    spec: ScenarioSpec
    tokens: list = field(default_factory=list)
    ohlcv: list = field(default_factory=list)
    trades: list = field(default_factory=list)
    holders: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows(out / "tokens.csv", SCHEMAS["tokens"], self.tokens)
        write_rows(out / "ohlcv.csv", SCHEMAS["ohlcv"], self.ohlcv)
        write_rows(out / "trades.csv", SCHEMAS["trades"], self.trades)
        write_rows(out / "holders.csv", SCHEMAS["holders"], self.holders)
        write_rows(out / "labels.csv", SCHEMAS["labels"], self.labels)

    def extend(self, other: "Scenario") -> "Scenario":
        for name in ("tokens", "ohlcv", "trades", "holders", "labels"):
            getattr(self, name).extend(getattr(other, name))
        return self


class _Market:
    """One pool plus the bar and trade tape it produces."""

    def __init__(self, token_id: str, pool: PoolState):
        self.token_id = token_id
        self.pool = pool
        self.ref_price = pool.price
        self.bars: list[tuple] = []
        self.trades: list[tuple] = []
        self.day_volumes: list[float] = []
        self._day_vol = 0.0

    def begin_hour(self, ts: int) -> None:
        self.ts = ts
        self.open = self.high = self.low = self.pool.price
        self.volume = 0.0

    def _print(self, offset: int, maker: str, side: str, amount: float) -> None:
        price = self.pool.price
        self.high = max(self.high, price)
        self.low = min(self.low, price)
        self.volume += amount
        self.trades.append((self.token_id, self.ts + offset, maker, side, amount))

    def buy(self, maker: str, quote: float, offset: int) -> float:
        tokens_out, self.pool = swap_quote_in(self.pool, quote)
        self._print(offset, maker, "buy", quote)
        return tokens_out

    def sell(self, maker: str, tokens: float, offset: int) -> float:
        quote_out, self.pool = swap_token_in(self.pool, tokens)
        self._print(offset, maker, "sell", quote_out)
        return quote_out

    def end_hour(self) -> None:
        close = self.pool.price
        self.bars.append((self.token_id, self.ts, self.open, max(self.high, close),
                          min(self.low, close), close, self.volume))
        self._day_vol += self.volume
        if (self.ts + HOUR) % DAY == 0:
            self.day_volumes.append(self._day_vol)
            self._day_vol = 0.0


class _NoiseTraders:
    def __init__(self, rng: np.random.Generator, p: Mapping[str, float]):
        self.rng = rng
        self.p = p
        self.makers = [f"trader-{i:04d}" for i in range(int(p["traders"]))]

    def day_plan(self, scale: float = 1.0):
        """Per-hour trade counts and the day's tickets, sides and intra-hour offsets."""
        p, rng = self.p, self.rng
        activity = math.exp(float(np.clip(rng.normal(0.0, p["activity_sigma"]), -0.4, 0.4)))
        counts = rng.poisson(p["trades_per_hour"] * activity * scale, 24)
        total = int(counts.sum())
        tickets = p["ticket_usd"] * np.exp(rng.normal(0.0, p["ticket_sigma"], total))
        coins = rng.random(total)
        makers = rng.integers(0, len(self.makers), total)
        offsets = rng.integers(0, 3000, total)
        return counts, tickets, coins, makers, offsets

    def trade_hour(self, market: _Market, plan, hour: int, cursor: int) -> int:
        counts, tickets, coins, makers, offsets = plan
        n = int(counts[hour])
        if not n:
            return cursor
        sl = slice(cursor, cursor + n)
        order = np.argsort(offsets[sl], kind="stable")
        rev = self.p["reversion"]
        for j in order:
            k = cursor + int(j)
            price = market.pool.price
            p_buy = min(0.8, max(0.2, 0.5 - rev * math.log(price / market.ref_price)))
            maker = self.makers[int(makers[k])]
            if coins[k] < p_buy:
                market.buy(maker, float(tickets[k]), int(offsets[k]))
            else:
                market.sell(maker, float(tickets[k]) / price, int(offsets[k]))
        return cursor + n


def _token_identity(rng: np.random.Generator, kind: str, seed: int, index: int):
    chain = _CHAINS[int(rng.integers(0, len(_CHAINS)))]
    raw = rng.bytes(32)
    address = b58encode(raw) if chain == "solana" else "0x" + raw[:20].hex()
    words = rng.choice(len(_WORDS), 2, replace=False)
    name = f"{_WORDS[words[0]].title()} {_WORDS[words[1]].title()} {index}"
    symbol = (_WORDS[words[0]][:3] + _WORDS[words[1]][:2]).upper()
    created = EPOCH - int(rng.integers(30, 400)) * DAY - int(rng.integers(0, DAY))
    token_id = f"{chain}:{address}"
    return (token_id, chain, address, name, symbol, created, f"sim-{kind}|seed-{seed}")


def _spread_days(rng, n: int, lo: int, hi: int, gap: int) -> list[int]:
    """``n`` sorted days in [lo, hi) at least ``gap`` apart."""
    width = (hi - lo) // n
    if width < gap:
        raise ScenarioError("not enough room to place scripted days")
    return [lo + i * width + int(rng.integers(0, width - gap + 1)) for i in range(n)]


def _check(cond: bool, what: str, token_id: str) -> None:
    if not cond:
        raise ScenarioError(f"self-check failed for {token_id}: {what}")


def _daily_closes(bars: list[tuple]) -> np.ndarray:
    return np.array([b[5] for b in bars[23::24]])


def _simulate_token(spec: ScenarioSpec, index: int) -> Scenario:
    p = spec.resolved()
    kind = spec.kind
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([int(spec.seed), _KIND_CODE[kind], index])))
    identity = _token_identity(rng, kind, spec.seed, index)
    token_id = identity[0]
    out = Scenario(spec, tokens=[identity])
    shares = rng.uniform(0.0, 25.0, 4)
    out.holders.append((token_id, EPOCH, *map(float, shares), 0))

    x0 = p["pool_quote"] / p["start_price"]
    market = _Market(token_id, PoolState(x0, p["pool_quote"], p["fee"]))
    noise = _NoiseTraders(rng, p)
    days = spec.duration_days

    hooks: dict[int, list] = {}      # hour index -> scripted actions
    quiet_days: set[int] = set()     # days without noise trading
    stop_after: Optional[int] = None  # hour index after which noise trading ends
    checks = []

    if kind == "wash":
        ring = [f"ring-{i}" for i in range(int(rng.integers(1, int(p["ring_max"]) + 1)))]
        circular = bool(p["circular"])
        multiple = p["circular_volume_multiple"] if circular else p["volume_multiple"]
        wash_days = _spread_days(rng, int(p["events"]), 7, days - 2, 3)
        for d in wash_days:
            hooks.setdefault(d * 24 + 6, []).append(("wash", d, multiple, ring))
            start = EPOCH + d * DAY
            out.labels.append((token_id, EventKind.WASH_ZERO_RISK.value, start, start + DAY - 1))
            if circular:
                out.labels.append((token_id, EventKind.WASH_CIRCULAR.value, start,
                                   start + DAY - 1))
        if len(wash_days) >= 2:
            out.labels.append((token_id, EventKind.WASH_PERSISTENT.value,
                               EPOCH + wash_days[0] * DAY, EPOCH + wash_days[-1] * DAY + DAY - 1))
        checks.append(("wash", wash_days, ring, circular))
    elif kind == "lpi":
        lpi_days = _spread_days(rng, int(p["events"]), 10, days - 4, 5)
        for d in lpi_days:
            quiet_days.add(d)
            hooks.setdefault(d * 24 + int(rng.integers(6, 19)), []).append(("lpi",))
            start = EPOCH + d * DAY
            out.labels.append((token_id, EventKind.LPI.value, start, start + DAY - 1))
        checks.append(("lpi", lpi_days))
    elif kind == "pump_dump":
        ring = [f"pump-{i}" for i in range(int(p["ring_size"]))]
        up, down = int(p["pump_hours"]), int(p["dump_hours"])
        episode_days = _spread_days(rng, int(p["episodes"]), 10, days - 5, 6)
        episodes = []
        for d in episode_days:
            h0 = d * 24 + int(rng.integers(0, 12))
            hooks.setdefault(h0, []).append(("pump_start",))
            for i in range(up):
                hooks.setdefault(h0 + i, []).append(("pump", (i + 1) / up, ring[i % len(ring)]))
            for j in range(down):
                hooks.setdefault(h0 + up + j, []).append(
                    ("dump", (j + 1) / down, ring[j % len(ring)]))
            hooks[h0 + up + down - 1].append(("settle",))
            out.labels.append((token_id, EventKind.PUMP_AND_DUMP.value, EPOCH + h0 * HOUR,
                               EPOCH + (h0 + up + down) * HOUR - 1))
            episodes.append((h0, up, down))
        checks.append(("pump_dump", episodes))
    elif kind == "rug_pull":
        d = int(rng.integers(10, days - 9))
        h = d * 24 + int(rng.integers(8, 17))
        hooks[h] = [("rug",)]
        stop_after = h
        start = EPOCH + d * DAY
        out.labels.append((token_id, EventKind.RUG_PULL.value, start, start + 8 * DAY - 1))
        checks.append(("rug_pull", d))

    pump_anchor = None
    for d in range(days):
        plan = noise.day_plan(0.0 if d in quiet_days else 1.0)
        cursor = 0
        for hour in range(24):
            idx = d * 24 + hour
            market.begin_hour(EPOCH + idx * HOUR)
            if stop_after is None or idx <= stop_after:
                cursor = noise.trade_hour(market, plan, hour, cursor)
            offset = 3000
            for action in hooks.get(idx, ()):
                tag = action[0]
                if tag == "wash":
                    _, day, multiple, ring = action
                    target = multiple * market.day_volumes[day - 1]
                    pair = p["pair_fraction"] * market.pool.reserve_quote
                    n_pairs = max(len(ring), math.ceil(target / (2 * pair * (1 - p["fee"]))))
                    # spread the pairs over hours 6..21 of the day
                    for i in range(n_pairs):
                        hooks.setdefault(day * 24 + 6 + i % 16, []).append(
                            ("pair", ring[i % len(ring)], pair))
                elif tag == "pair":
                    _, maker, quote = action
                    got = market.buy(maker, quote, offset)
                    market.sell(maker, got, min(offset + 1, 3599))
                elif tag == "lpi":
                    cost = cost_to_multiply_price(market.pool, p["multiplier"])
                    market.buy("whale", cost, offset)
                    market.ref_price = market.pool.price
                elif tag == "pump_start":
                    pump_anchor = market.open
                elif tag == "pump":
                    _, frac, maker = action
                    ratio = pump_anchor * p["pump_multiplier"] ** frac / market.pool.price
                    if ratio > 1:
                        market.buy(maker, cost_to_multiply_price(market.pool, ratio), offset)
                    if frac == 1.0:
                        peak = market.pool.price
                elif tag == "dump":
                    _, frac, maker = action
                    target = peak * (1 - p["dump_fraction"]) ** frac
                    ratio = market.pool.price / target
                    if ratio > 1:
                        market.sell(maker, tokens_to_divide_price(market.pool, ratio), offset)
                elif tag == "settle":
                    market.ref_price = market.pool.price
                elif tag == "rug":
                    market.sell("deployer", tokens_to_divide_price(market.pool, p["rug_divisor"]),
                                offset)
                offset = min(offset + 2, 3598)
            market.end_hour()

    _self_check(market, p, checks, token_id)
    out.ohlcv = market.bars
    out.trades = market.trades
    return out


def _self_check(market: _Market, p, checks, token_id: str) -> None:
    """Re-derive every guarantee from the produced tape."""
    vols = np.array(market.day_volumes)
    closes = _daily_closes(market.bars)
    trades_by_day: dict[int, list] = {}
    for t in market.trades:
        trades_by_day.setdefault((t[1] - EPOCH) // DAY, []).append(t)

    def change(a, b):
        return 100.0 * (b - a) / a

    if not checks:
        with np.errstate(divide="ignore", invalid="ignore"):
            vol_change = np.where(vols[:-1] > 0, 100 * (vols[1:] - vols[:-1]) / vols[:-1],
                                  np.where(vols[1:] > 0, np.inf, 0.0))
        _check(vol_change.max() < p["max_volume_change_pct"], "organic volume surge bound", token_id)
        price_change = np.abs(100 * np.diff(closes) / closes[:-1])
        _check(price_change.max() < p["max_price_change_pct"], "organic price bound", token_id)
        hourly = np.array([b[5] for b in market.bars])
        for lag in range(1, 25):
            _check((hourly[lag:] / hourly[:-lag]).max() < 1.4, "organic 24h rise bound", token_id)
        return

    for check in checks:
        tag = check[0]
        if tag == "wash":
            _, wash_days, ring, circular = check
            for d in wash_days:
                _check(vols[d] > 6 * vols[d - 1], f"wash day {d} volume surge", token_id)
                _check(abs(change(closes[d - 1], closes[d])) < 5, f"wash day {d} price", token_id)
                flows: dict[str, list[float]] = {}
                for t in trades_by_day[d]:
                    f = flows.setdefault(t[2], [0.0, 0.0])
                    f[0 if t[3] == "buy" else 1] += t[4]
                for maker in ring:
                    buy, sell = flows[maker]
                    _check(abs(buy - sell) / max(buy, sell) < 0.02, "ring imbalance", token_id)
                if circular:
                    both = sum(b + s for b, s in flows.values() if b > 0 and s > 0)
                    _check(both / vols[d] > 0.99, f"wash day {d} circular share", token_id)
        elif tag == "lpi":
            for d in check[1]:
                day = trades_by_day.get(d, [])
                total = sum(t[4] for t in day)
                _check(change(closes[d - 1], closes[d]) >= 100 * (math.sqrt(p["multiplier"]) ** 2
                                                                   - 1) * 0.999,
                       f"LPI day {d} price jump", token_id)
                _check(total < 1000, f"LPI day {d} volume", token_id)
                _check(all(t[3] == "buy" for t in day) and len({t[2] for t in day}) <= 10,
                       f"LPI day {d} flow", token_id)
        elif tag == "pump_dump":
            hourly = np.array([b[5] for b in market.bars])
            hvol = np.array([b[6] for b in market.bars])
            for h0, up, down in check[1]:
                start, peak, end = h0 - 1, h0 + up - 1, h0 + up + down - 1
                _check(change(hourly[start], hourly[peak]) > 60, "pump size", token_id)
                _check(hvol[h0:peak + 1].sum() > 6 * hvol[start - up + 1:start + 1].sum(),
                       "pump volume", token_id)
                _check(change(hourly[peak], hourly[end]) < -35, "dump size", token_id)
                _check(hvol[end + 1:end + 49].mean() < 0.5 * hvol[h0:peak + 1].mean(),
                       "post-dump volume", token_id)
        elif tag == "rug_pull":
            d = check[1]
            _check(change(closes[d - 1], closes[d]) < -99.5, "rug price drop", token_id)
            _check(vols[d + 1:d + 8].mean() < 0.01 * vols[d - 7:d].mean(), "rug volume",
                   token_id)


def generate(spec: ScenarioSpec) -> Scenario:
    """Simulate every token of ``spec``; raises ScenarioError if a guarantee breaks."""
    out = Scenario(spec)
    for index in range(spec.n_tokens):
        out.extend(_simulate_token(spec, index))
    return out


def simulate_suite(kind: str, seed: int, n_tokens: int, days: int,
                   params: Optional[Mapping[str, float]] = None) -> Scenario:
    return generate(ScenarioSpec(kind, seed, days, n_tokens, params or {}))
