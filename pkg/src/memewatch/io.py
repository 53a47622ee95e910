"""Fixture loading and writing.

Six UTF-8 CSV files make up a dataset directory::

    tokens.csv     token_id,chain,address,name,symbol,created_at,sources
    ohlcv.csv      token_id,ts,open,high,low,close,volume_usd
    trades.csv     token_id,ts,maker_id,side,amount_usd
    holders.csv    token_id,ts,top10_share,bundle_buy_share,fresh_address_share,airdrop_share,honeypot
    economics.csv  token_id,ts,price_usd,circulating_supply,market_cap_usd,liquidity_usd
    labels.csv     token_id,kind,window_start,window_end

Rows that break a type invariant are dropped and counted under
``"<file>:<reason>"`` in :attr:`Dataset.rejections`. Out-of-order rows are
sorted, not rejected.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Union

import numpy as np
import pandas as pd

from .exceptions import InputError
from .model import (DetectionEvent, EventKind, HolderSnapshot, HOUR, TokenEconomics,
                    TokenRecord)
from .validation import address_problem

logger = logging.getLogger(__name__)

SCHEMAS = {
    "tokens": ["token_id", "chain", "address", "name", "symbol", "created_at", "sources"],
    "ohlcv": ["token_id", "ts", "open", "high", "low", "close", "volume_usd"],
    "trades": ["token_id", "ts", "maker_id", "side", "amount_usd"],
    "holders": ["token_id", "ts", "top10_share", "bundle_buy_share", "fresh_address_share",
                "airdrop_share", "honeypot"],
    "economics": ["token_id", "ts", "price_usd", "circulating_supply", "market_cap_usd",
                  "liquidity_usd"],
    "labels": ["token_id", "kind", "window_start", "window_end"],
}
FILES = ("tokens", "ohlcv", "trades", "holders", "economics")

PathLike = Union[str, os.PathLike]


@dataclass
class Dataset:
    tokens: dict[str, TokenRecord] = field(default_factory=dict)
    ohlcv: dict[str, pd.DataFrame] = field(default_factory=dict)
    trades: dict[str, pd.DataFrame] = field(default_factory=dict)
    holders: dict[str, list[HolderSnapshot]] = field(default_factory=dict)
    economics: dict[str, list[TokenEconomics]] = field(default_factory=dict)
    rejections: Counter = field(default_factory=Counter)

    def __post_init__(self):
        for series in (self.ohlcv, self.trades, self.holders, self.economics):
            unknown = set(series) - set(self.tokens)
            if unknown:
                raise InputError(f"series for unknown tokens: {sorted(unknown)[:5]}")

    @property
    def token_ids(self) -> list[str]:
        return sorted(self.tokens)

    @property
    def n_rejected(self) -> int:
        return sum(self.rejections.values())

    def equals(self, other: "Dataset") -> bool:
        if self.tokens != other.tokens or self.holders != other.holders:
            return False
        if self.economics.keys() != other.economics.keys() or self.rejections != other.rejections:
            return False
        for a, b in zip(self._econ_frames(), other._econ_frames()):
            if not a.equals(b):
                return False
        for mine, theirs in ((self.ohlcv, other.ohlcv), (self.trades, other.trades)):
            if mine.keys() != theirs.keys():
                return False
            if not all(mine[k].equals(theirs[k]) for k in mine):
                return False
        return True

    def _econ_frames(self):
        for key in sorted(self.economics):
            yield pd.DataFrame([vars(e) for e in self.economics[key]])

    def latest_economics(self, token_id: str) -> Optional[TokenEconomics]:
        # conflicting aggregator rows: the most recent observation wins
        rows = self.economics.get(token_id)
        return rows[-1] if rows else None


def _read_csv(path: Path, name: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype={"token_id": str, "maker_id": str, "side": str,
                                         "chain": str, "address": str, "name": str,
                                         "symbol": str, "sources": str, "kind": str},
                            keep_default_na=False, na_values=[""], encoding="utf-8")
    except pd.errors.EmptyDataError:
        return pd.DataFrame({c: pd.Series(dtype=object) for c in SCHEMAS[name]})
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in SCHEMAS[name] if c not in frame.columns]
    if missing:
        raise InputError(f"{path.name} is missing columns {missing}")
    return frame[SCHEMAS[name]]


def _numeric(frame: pd.DataFrame, cols: Iterable[str]) -> pd.DataFrame:
    for col in cols:
        if frame[col].dtype.kind not in "fiu":
            frame[col] = pd.to_numeric(frame[col], errors="coerce")
    return frame


class _Rejector:
    """Applies ordered row checks; each rejected row is counted once, under its first failure."""

    def __init__(self, name: str, frame: pd.DataFrame, counter: Counter):
        self.name = name
        self.keep = np.ones(len(frame), dtype=bool)
        self.counter = counter

    def reject(self, mask, reason: str):
        mask = np.asarray(mask, dtype=bool) & self.keep
        n = int(mask.sum())
        if n:
            self.counter[f"{self.name}:{reason}"] += n
            self.keep &= ~mask


def _load_tokens(path: Path, counter: Counter, verify_deployed) -> dict[str, TokenRecord]:
    frame = _read_csv(path, "tokens")
    frame = _numeric(frame, ["created_at"])
    tokens: dict[str, TokenRecord] = {}
    for row in frame.itertuples(index=False):
        token_id = row.token_id
        if not isinstance(token_id, str) or not token_id or not isinstance(row.chain, str):
            counter["tokens:malformed"] += 1
            continue
        chain = row.chain.strip().lower()
        problem = address_problem(chain, row.address if isinstance(row.address, str) else "")
        if problem is not None:
            counter[f"tokens:{problem}"] += 1
            continue
        created = row.created_at
        if not isinstance(created, (int, float, np.integer, np.floating)) or math.isnan(created) \
                or created != int(created):
            counter["tokens:malformed"] += 1
            continue
        if created <= 0:
            counter["tokens:bad-created-at"] += 1
            continue
        if verify_deployed is not None and not verify_deployed(chain, row.address):
            counter["tokens:not-deployed"] += 1
            continue
        sources = frozenset(s for s in (row.sources or "").split("|") if s) \
            if isinstance(row.sources, str) else frozenset()
        record = TokenRecord(token_id, chain, row.address,
                             row.name if isinstance(row.name, str) else "",
                             row.symbol if isinstance(row.symbol, str) else "",
                             int(created), sources)
        prior = tokens.get(token_id)
        if prior is not None:
            keep = record if record.created_at < prior.created_at else prior
            record = TokenRecord(keep.token_id, keep.chain, keep.address, keep.name, keep.symbol,
                                 keep.created_at, prior.sources | record.sources)
        tokens[token_id] = record
    return tokens


def _split(frame: pd.DataFrame, cols: list[str]) -> dict[str, pd.DataFrame]:
    """Per-token frames sorted by ts (stable, so equal timestamps keep file order)."""
    if len(frame) == 0:
        return {}
    codes, names = pd.factorize(frame["token_id"], sort=True)
    ts = frame["ts"].to_numpy()
    order = np.lexsort((np.arange(len(ts)), ts, codes))
    sub = frame[cols].iloc[order].reset_index(drop=True)
    codes = codes[order]
    starts = np.flatnonzero(np.r_[True, codes[1:] != codes[:-1]])
    ends = np.r_[starts[1:], len(codes)]
    return {names[codes[a]]: sub.iloc[a:b].reset_index(drop=True) for a, b in zip(starts, ends)}


def _series_frame(path: Optional[Path], name: str, counter: Counter, known):
    if path is None or not Path(path).exists():
        return None
    frame = _read_csv(Path(path), name)
    unknown = ~frame["token_id"].isin(known).to_numpy()
    frame = frame.copy()
    check = _Rejector(name, frame, counter)
    check.reject(unknown, "unknown-token")
    return frame, check


def _load_ohlcv(path, counter, known) -> dict[str, pd.DataFrame]:
    loaded = _series_frame(path, "ohlcv", counter, known)
    if loaded is None:
        return {}
    frame, check = loaded
    cols = ["ts", "open", "high", "low", "close", "volume_usd"]
    frame = _numeric(frame, cols)
    values = frame[cols].to_numpy(dtype=float)
    check.reject(np.isnan(values).any(axis=1) | ~np.isfinite(values).all(axis=1), "malformed")
    ts = values[:, 0]
    with np.errstate(invalid="ignore"):
        check.reject((ts % HOUR != 0) | (ts <= 0), "bad-timestamp")
        check.reject((values[:, 1:] < 0).any(axis=1), "negative-value")
        o, h, l, c = values[:, 1], values[:, 2], values[:, 3], values[:, 4]
        check.reject((l > np.minimum(o, c)) | (np.maximum(o, c) > h), "inverted-ohlc")
    frame = frame[check.keep]
    frame = frame.astype({c: float for c in cols[1:]}).assign(ts=frame["ts"].astype(np.int64))
    dup = frame.duplicated(["token_id", "ts"], keep="first").to_numpy()
    if dup.any():
        counter["ohlcv:duplicate-ts"] += int(dup.sum())
        frame = frame[~dup]
    return _split(frame, cols)


def _load_trades(path, counter, known) -> dict[str, pd.DataFrame]:
    loaded = _series_frame(path, "trades", counter, known)
    if loaded is None:
        return {}
    frame, check = loaded
    frame = _numeric(frame, ["ts", "amount_usd"])
    ts = frame["ts"].to_numpy(dtype=float)
    amount = frame["amount_usd"].to_numpy(dtype=float)
    maker_ok = frame["maker_id"].map(lambda m: isinstance(m, str) and m != "").to_numpy(dtype=bool)
    check.reject(np.isnan(ts) | ~np.isfinite(amount) | ~maker_ok | (ts != np.floor(ts)),
                 "malformed")
    check.reject(~frame["side"].isin(["buy", "sell"]).to_numpy(), "bad-side")
    with np.errstate(invalid="ignore"):
        check.reject(~(amount > 0), "nonpositive-amount")
    frame = frame[check.keep]
    frame = frame.assign(ts=frame["ts"].astype(np.int64),
                         amount_usd=frame["amount_usd"].astype(float))
    return _split(frame, ["ts", "maker_id", "side", "amount_usd"])


def _load_holders(path, counter, known) -> dict[str, list[HolderSnapshot]]:
    loaded = _series_frame(path, "holders", counter, known)
    if loaded is None:
        return {}
    frame, check = loaded
    shares = ["top10_share", "bundle_buy_share", "fresh_address_share", "airdrop_share"]
    frame = _numeric(frame, ["ts"] + shares + ["honeypot"])
    values = frame[["ts"] + shares].to_numpy(dtype=float)
    check.reject(np.isnan(values).any(axis=1), "malformed")
    with np.errstate(invalid="ignore"):
        check.reject(((values[:, 1:] < 0) | (values[:, 1:] > 100)).any(axis=1),
                     "share-out-of-range")
    check.reject(~frame["honeypot"].isin([0, 1]).to_numpy(), "bad-honeypot")
    frame = frame[check.keep].sort_values(["token_id", "ts"], kind="stable")
    out: dict[str, list[HolderSnapshot]] = {}
    for row in frame.itertuples(index=False):
        out.setdefault(row.token_id, []).append(HolderSnapshot(
            row.token_id, int(row.ts), float(row.top10_share), float(row.bundle_buy_share),
            float(row.fresh_address_share), float(row.airdrop_share), bool(row.honeypot)))
    return out


def _load_economics(path, counter, known) -> dict[str, list[TokenEconomics]]:
    loaded = _series_frame(path, "economics", counter, known)
    if loaded is None:
        return {}
    frame, check = loaded
    cols = ["ts", "price_usd", "circulating_supply", "market_cap_usd", "liquidity_usd"]
    raw_missing = frame[cols].isna().to_numpy()
    frame = _numeric(frame, cols)
    # blank cells mean "not reported"; anything else that fails to parse is malformed
    parsed_nan = frame[cols].isna().to_numpy()
    check.reject((parsed_nan & ~raw_missing).any(axis=1) | parsed_nan[:, 0] | parsed_nan[:, 1],
                 "malformed")
    values = frame[cols].to_numpy(dtype=float)
    with np.errstate(invalid="ignore"):
        check.reject((values[:, 1:] < 0).any(axis=1), "negative-value")
        price, supply, cap = values[:, 1], values[:, 2], values[:, 3]
        present = ~np.isnan(price) & ~np.isnan(supply) & ~np.isnan(cap)
        bad_cap = present & ~np.isclose(cap, price * supply, rtol=1e-6, atol=1e-12)
    check.reject(bad_cap, "market-cap-mismatch")
    frame = frame[check.keep].sort_values(["token_id", "ts"], kind="stable")
    out: dict[str, list[TokenEconomics]] = {}
    for row in frame.itertuples(index=False):
        out.setdefault(row.token_id, []).append(TokenEconomics(
            row.token_id, int(row.ts), float(row.price_usd), float(row.circulating_supply),
            float(row.market_cap_usd), float(row.liquidity_usd)))
    return out


def _resolve(paths) -> dict[str, Optional[Path]]:
    if isinstance(paths, (str, os.PathLike)):
        root = Path(paths)
        if not root.is_dir():
            raise InputError(f"{root} is not a dataset directory")
        return {name: root / f"{name}.csv" for name in FILES}
    resolved = {name: None for name in FILES}
    for name, value in dict(paths).items():
        if name not in FILES:
            raise InputError(f"unknown dataset file kind {name!r}")
        resolved[name] = Path(value) if value is not None else None
    return resolved


def load_dataset(paths: Union[PathLike, Mapping[str, Optional[PathLike]]],
                 verify_deployed: Optional[Callable[[str, str], bool]] = None) -> Dataset:
    """Load and validate a dataset.

    ``paths`` is either a directory holding the standard file names or a
    mapping from file kind (``tokens``, ``ohlcv``, ...) to path. ``tokens`` is
    required; other files may be absent. ``verify_deployed(chain, address)``
    is an optional hook for a creation-transaction check.
    """
    resolved = _resolve(paths)
    if resolved["tokens"] is None or not resolved["tokens"].exists():
        raise InputError("a tokens.csv file is required")
    counter: Counter = Counter()
    tokens = _load_tokens(resolved["tokens"], counter, verify_deployed)
    known = set(tokens)
    dataset = Dataset(
        tokens=tokens,
        ohlcv=_load_ohlcv(resolved["ohlcv"], counter, known),
        trades=_load_trades(resolved["trades"], counter, known),
        holders=_load_holders(resolved["holders"], counter, known),
        economics=_load_economics(resolved["economics"], counter, known),
        rejections=counter,
    )
    if counter:
        logger.info("rejected rows: %s", dict(sorted(counter.items())))
    return dataset


def load_labels(path: PathLike) -> pd.DataFrame:
    frame = _read_csv(Path(path), "labels")
    frame = _numeric(frame, ["window_start", "window_end"])
    if frame[["window_start", "window_end"]].isna().any().any():
        raise InputError(f"{path} has malformed label windows")
    valid = {k.value for k in EventKind}
    bad = set(frame["kind"]) - valid
    if bad:
        raise InputError(f"{path} has unknown label kinds {sorted(bad)}")
    return frame.astype({"window_start": np.int64, "window_end": np.int64})


# -- writing -----------------------------------------------------------------

def fmt_float(value: float) -> str:
    """Shortest round-trip text for a float; blank for NaN."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_rows(path: PathLike, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def write_dataset(dataset: Dataset, out_dir: PathLike) -> None:
    """Write a validated dataset back out in the fixture schemas."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "tokens.csv", SCHEMAS["tokens"], (
        (t.token_id, t.chain.value, t.address, t.name, t.symbol, t.created_at,
         "|".join(sorted(t.sources)))
        for t in (dataset.tokens[k] for k in sorted(dataset.tokens))))
    write_rows(out / "ohlcv.csv", SCHEMAS["ohlcv"], (
        (tid, int(r[0]), *map(float, r[1:]))
        for tid in sorted(dataset.ohlcv)
        for r in dataset.ohlcv[tid][SCHEMAS["ohlcv"][1:]].itertuples(index=False)))
    write_rows(out / "trades.csv", SCHEMAS["trades"], (
        (tid, int(r.ts), r.maker_id, r.side, float(r.amount_usd))
        for tid in sorted(dataset.trades)
        for r in dataset.trades[tid].itertuples(index=False)))
    write_rows(out / "holders.csv", SCHEMAS["holders"], (
        (h.token_id, h.ts, h.top10_share, h.bundle_buy_share, h.fresh_address_share,
         h.airdrop_share, int(h.honeypot))
        for tid in sorted(dataset.holders) for h in dataset.holders[tid]))
    write_rows(out / "economics.csv", SCHEMAS["economics"], (
        (e.token_id, e.ts, e.price_usd, e.circulating_supply, e.market_cap_usd, e.liquidity_usd)
        for tid in sorted(dataset.economics) for e in dataset.economics[tid]))
    with open(out / "rejections.json", "w", encoding="utf-8") as fh:
        json.dump(dict(sorted(dataset.rejections.items())), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- event (de)serialisation -------------------------------------------------

def _encode_number(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _decode_number(value):
    if isinstance(value, str):
        return float(value)
    return value


def event_to_dict(event: DetectionEvent) -> dict:
    return {
        "token_id": event.token_id,
        "kind": event.kind.value,
        "window_start": int(event.window_start),
        "window_end": int(event.window_end),
        "metrics": {k: _encode_number(v) for k, v in sorted(event.metrics.items())},
        "actors": sorted(event.actors),
    }


def event_from_dict(data: Mapping) -> DetectionEvent:
    return DetectionEvent(
        token_id=data["token_id"], kind=EventKind(data["kind"]),
        window_start=int(data["window_start"]), window_end=int(data["window_end"]),
        metrics={k: _decode_number(v) for k, v in data.get("metrics", {}).items()},
        actors=frozenset(data.get("actors", ())),
    )


def write_events(path: PathLike, events: Iterable[DetectionEvent]) -> None:
    ordered = sorted(events, key=DetectionEvent.sort_key)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for event in ordered:
            fh.write(json.dumps(event_to_dict(event), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_events(path: PathLike) -> list[DetectionEvent]:
    events = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    events.append(event_from_dict(json.loads(line)))
                except (KeyError, ValueError, TypeError) as exc:
                    raise InputError(f"{path}:{lineno}: bad event record ({exc})") from exc
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return events
