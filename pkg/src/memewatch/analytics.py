"""Return categories, manipulation prevalence and the written report."""
from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .detectors.extraction import linkage
from .exceptions import InputError
from .io import PathLike, fmt_float, write_events, write_rows
from .model import (ANOMALY_KINDS, DAY, EXTRACTION_KINDS, WASH_KINDS, Chain, DetectionEvent,
                    EventKind, ReturnCategory, ReturnRecord, pct_change)

WINDOW_DAYS = 90
FAMILIES = ("wash", "lpi", "anomaly", "pump_and_dump", "rug_pull")
RETURNS_COLUMNS = ["token_id", "p_start", "p_end", "return_pct", "category",
                   "window_volume_usd", "high_return"]
BASE_CATEGORIES = (ReturnCategory.MISSING, ReturnCategory.NEGATIVE, ReturnCategory.INACTIVE,
                   ReturnCategory.STABLE_ACTIVE, ReturnCategory.POSITIVE)


# -- returns -----------------------------------------------------------------

def categorize_return(token_id: str, p_start: Optional[float], p_end: Optional[float],
                      window_volume_usd: float = 0.0) -> ReturnRecord:
    """Place one token in the return decision table.

    >>> categorize_return("t", 1e-6, 2.5e-6).high_return
    True
    >>> categorize_return("t", 1.0, 1.0, 500.0).category.value
    'StableActive'
    """
    volume = float(window_volume_usd or 0.0)
    absent = lambda p: p is None or (isinstance(p, float) and math.isnan(p))
    if absent(p_start) or absent(p_end) or p_start <= 0:
        return ReturnRecord(token_id, float("nan") if absent(p_start) else float(p_start),
                            float("nan") if absent(p_end) else float(p_end), None,
                            ReturnCategory.MISSING, volume)
    ret = pct_change(p_start, p_end)
    if ret < 0:
        cat = ReturnCategory.NEGATIVE
    elif ret == 0:
        cat = ReturnCategory.INACTIVE if volume == 0 else ReturnCategory.STABLE_ACTIVE
    else:
        cat = ReturnCategory.POSITIVE
    return ReturnRecord(token_id, float(p_start), float(p_end), ret, cat, volume, ret > 100)


def _price_at(ts: np.ndarray, price: np.ndarray, lo: Optional[int], hi: int) -> Optional[float]:
    """Latest price with lo < ts <= hi (no lower bound when lo is None)."""
    mask = ts <= hi if lo is None else (ts > lo) & (ts <= hi)
    if not mask.any():
        return None
    return float(price[np.flatnonzero(mask)[-1]])


def compute_returns(dataset, t0: int, window_days: int = WINDOW_DAYS) -> list[ReturnRecord]:
    """One record per token over ``(t0, t0 + window_days]``.

    The start price is the last hourly close at or before ``t0``, the end price
    the last close inside the window. Economics snapshots fill in for tokens
    without bars. Window volume sums bars with ``t0 <= ts < t0 + window``.
    """
    if window_days <= 0:
        raise InputError("window_days must be positive")
    t1 = int(t0) + int(window_days) * DAY
    out = []
    for token_id in dataset.token_ids:
        p_start = p_end = None
        volume = 0.0
        bars = dataset.ohlcv.get(token_id)
        if bars is not None and len(bars):
            ts = bars["ts"].to_numpy()
            close = bars["close"].to_numpy(dtype=float)
            p_start = _price_at(ts, close, None, t0)
            p_end = _price_at(ts, close, t0, t1)
            in_window = (ts >= t0) & (ts < t1)
            volume = float(bars["volume_usd"].to_numpy(dtype=float)[in_window].sum())
        econ = dataset.economics.get(token_id, [])
        if econ and (p_start is None or p_end is None):
            ts = np.array([e.ts for e in econ])
            price = np.array([e.price_usd for e in econ])
            p_start = p_start if p_start is not None else _price_at(ts, price, None, t0)
            p_end = p_end if p_end is not None else _price_at(ts, price, t0, t1)
        out.append(categorize_return(token_id, p_start, p_end, volume))
    return out


def return_summary(records: Sequence[ReturnRecord]) -> dict:
    counts = Counter(r.category.value for r in records)
    summary = {c.value: counts.get(c.value, 0) for c in BASE_CATEGORIES}
    summary["universe"] = len(records)
    summary["high_return"] = sum(r.high_return for r in records)
    return summary


def write_returns(path: PathLike, records: Iterable[ReturnRecord]) -> None:
    rows = []
    for r in sorted(records, key=lambda r: r.token_id):
        rows.append((r.token_id, r.p_start, r.p_end,
                     float("nan") if r.return_pct is None else float(r.return_pct),
                     r.category.value, float(r.window_volume_usd), int(r.high_return)))
    write_rows(path, RETURNS_COLUMNS, rows)


def read_returns(path: PathLike) -> list[ReturnRecord]:
    try:
        frame = pd.read_csv(path, dtype={"token_id": str, "category": str},
                            keep_default_na=False, na_values=[""])
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InputError(f"cannot read returns file {path}: {exc}") from exc
    missing = [c for c in RETURNS_COLUMNS if c not in frame.columns]
    if missing:
        raise InputError(f"returns file lacks columns {missing}")
    out = []
    try:
        for row in frame.itertuples(index=False):
            ret = None if pd.isna(row.return_pct) else float(row.return_pct)
            out.append(ReturnRecord(row.token_id, float(row.p_start), float(row.p_end), ret,
                                    ReturnCategory(row.category), float(row.window_volume_usd),
                                    bool(int(row.high_return))))
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad returns row: {exc}") from exc
    return out


# -- prevalence ----------------------------------------------------------------

def chain_of(token_id: str) -> str:
    prefix = token_id.split(":", 1)[0]
    return prefix if prefix in {c.value for c in Chain} else "unknown"


def family_sets(events: Iterable[DetectionEvent],
                token_ids: Optional[Iterable[str]] = None) -> dict[str, set[str]]:
    allowed = None if token_ids is None else set(token_ids)
    out: dict[str, set[str]] = {f: set() for f in FAMILIES}
    out.update({k.value: set() for k in EventKind})
    for e in events:
        if allowed is None or e.token_id in allowed:
            out[e.kind.value].add(e.token_id)
            out[e.kind.family].add(e.token_id)
    return out


@dataclass(frozen=True)
class PrevalenceReport:
    universe: int
    high_return: int
    counts: dict
    union: int
    union_pct: float
    linkage: dict
    per_chain: dict
    anomaly_multi: int = 0
    returns: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def prevalence(returns: Sequence[ReturnRecord], events: Iterable[DetectionEvent],
               chains: Optional[Mapping[str, str]] = None) -> PrevalenceReport:
    """Manipulation counts over the high-return tokens of ``returns``.

    ``counts`` holds token counts per event kind and per family; ``union`` is
    the number of high-return tokens with at least one event of any kind.
    ``chains`` maps token ids to chains; by default the chain is read from the
    ``chain:address`` token id.
    """
    events = list(events)
    universe_ids = [r.token_id for r in returns]
    high = sorted({r.token_id for r in returns if r.high_return})
    sets = family_sets(events, high)
    union = set().union(*(sets[f] for f in FAMILIES))
    counts = {name: len(ids) for name, ids in sorted(sets.items())}
    high_set = set(high)
    anomaly_hits = Counter(t for t, k in {(e.token_id, e.kind) for e in events}
                           if k in ANOMALY_KINDS and t in high_set)
    anomaly_multi = sum(1 for n in anomaly_hits.values() if n > 1)

    lookup = chains or {}
    by_chain: dict[str, list[ReturnRecord]] = defaultdict(list)
    for r in returns:
        by_chain[lookup.get(r.token_id) or chain_of(r.token_id)].append(r)
    per_chain = {}
    for chain, recs in sorted(by_chain.items()):
        priced = [r for r in recs if r.category != ReturnCategory.MISSING]
        chain_high = {r.token_id for r in recs if r.high_return}
        chain_union = union & chain_high
        per_chain[chain] = {
            "listed": len(recs),
            "with_price_data": len(priced),
            "high_return": len(chain_high),
            "high_return_pct_of_listed": _pct(len(chain_high), len(recs)),
            "high_return_pct_of_priced": _pct(len(chain_high), len(priced)),
            "union": len(chain_union),
            "union_pct": _pct(len(chain_union), len(chain_high)),
            "union_pct_of_listed": _pct(len(chain_union), len(recs)),
            "union_pct_of_priced": _pct(len(chain_union), len(priced)),
        }
    return PrevalenceReport(
        universe=len(universe_ids), high_return=len(high), counts=counts, union=len(union),
        union_pct=_pct(len(union), len(high)), linkage=linkage(events, high),
        per_chain=per_chain, anomaly_multi=anomaly_multi, returns=return_summary(returns))


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


# -- label matching ----------------------------------------------------------

def _days(start: int, end: int) -> tuple[int, int]:
    return start // DAY, end // DAY


def windows_hit(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    """True when the two windows share at least one UTC day."""
    a0, a1 = _days(a_start, a_end)
    b0, b1 = _days(b_start, b_end)
    return max(a0, b0) <= min(a1, b1)


def match_labels(labels: pd.DataFrame, events: Iterable[DetectionEvent]) -> dict:
    """Recall per labeled kind plus the events no label explains.

    Returns ``{kind: {"labels": n, "hits": h, "recall": pct}}`` and, under
    ``"unmatched_events"``, the count of events per kind that share no day with
    a label of the same kind and token.
    """
    by_key = defaultdict(list)
    for e in events:
        by_key[(e.token_id, e.kind.value)].append(e)
    out: dict = {}
    for row in labels.itertuples(index=False):
        stats = out.setdefault(row.kind, {"labels": 0, "hits": 0})
        stats["labels"] += 1
        if any(windows_hit(row.window_start, row.window_end, e.window_start, e.window_end)
               for e in by_key.get((row.token_id, row.kind), ())):
            stats["hits"] += 1
    for stats in out.values():
        stats["recall"] = _pct(stats["hits"], stats["labels"])
    label_keys = defaultdict(list)
    for row in labels.itertuples(index=False):
        label_keys[(row.token_id, row.kind)].append((row.window_start, row.window_end))
    unmatched = Counter()
    for (token_id, kind), evs in by_key.items():
        for e in evs:
            if not any(windows_hit(s, t, e.window_start, e.window_end)
                       for s, t in label_keys.get((token_id, kind), ())):
                unmatched[kind] += 1
    out["unmatched_events"] = dict(sorted(unmatched.items()))
    return out


# -- rendering -----------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.4f}"


def summary_rows(report: PrevalenceReport) -> list[tuple[str, str, str]]:
    """Table-style statistics as (section, statistic, value) rows."""
    c = report.counts
    rows = [("returns", f"category_{k}", report.returns.get(k, 0))
            for k in [cat.value for cat in BASE_CATEGORIES]]
    rows += [("returns", "universe", report.universe),
             ("returns", "high_return_tokens", report.high_return),
             ("returns", "high_return_pct", _pct(report.high_return, report.universe))]
    for kind in sorted(ANOMALY_KINDS, key=lambda k: k.value):
        rows.append(("anomalies", f"{kind.value}_tokens", c[kind.value]))
    rows += [("anomalies", "anomaly_tokens", c["anomaly"]),
             ("anomalies", "multi_anomaly_tokens", report.anomaly_multi)]
    for kind in sorted(WASH_KINDS, key=lambda k: k.value):
        rows.append(("wash_trading", f"{kind.value}_tokens", c[kind.value]))
    rows.append(("wash_trading", "wash_trading_tokens", c["wash"]))
    rows += [("growth", "wash_trading_tokens", c["wash"]),
             ("growth", "lpi_tokens", c["lpi"]),
             ("growth", "anomaly_tokens", c["anomaly"]),
             ("growth", "union_tokens", report.union),
             ("growth", "union_pct", report.union_pct)]
    link = report.linkage
    rows += [("extraction", "pump_and_dump_tokens", c["pump_and_dump"]),
             ("extraction", "rug_pull_tokens", c["rug_pull"]),
             ("extraction", "extraction_tokens", link["extraction_token_count"]),
             ("extraction", "prior_growth_tokens", link["prior_growth_count"]),
             ("extraction", "linkage_ratio_pct", link["ratio"]),
             ("extraction", "prior_wash_tokens", link["prior_wash_count"]),
             ("extraction", "prior_lpi_tokens", link["prior_lpi_count"])]
    for kind in sorted(EXTRACTION_KINDS, key=lambda k: k.value):
        sub = link["by_kind"][kind.value]
        rows += [("extraction", f"{kind.value}_prior_growth_tokens", sub["prior_growth_count"]),
                 ("extraction", f"{kind.value}_linkage_ratio_pct", sub["ratio"])]
    for chain, stats in report.per_chain.items():
        rows += [(f"chain:{chain}", name, value) for name, value in sorted(stats.items())]
    return [(s, n, _fmt(v)) for s, n, v in rows]


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def render_report(out_dir: PathLike, report: PrevalenceReport,
                  events: Iterable[DetectionEvent]) -> dict[str, Path]:
    """Write report.json, events.jsonl and summary.csv under ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {name: out / name for name in ("report.json", "events.jsonl", "summary.csv")}
        paths["report.json"].write_text(
            json.dumps(_json_safe(report.to_dict()), sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
        write_events(paths["events.jsonl"], events)
        with open(paths["summary.csv"], "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["section", "statistic", "value"])
            writer.writerows(summary_rows(report))
    except OSError as exc:
        raise InputError(f"cannot write report to {out}: {exc}") from exc
    return paths


__all__ = [
    "FAMILIES", "PrevalenceReport", "WINDOW_DAYS", "categorize_return", "chain_of",
    "compute_returns", "family_sets", "fmt_float", "match_labels", "prevalence",
    "read_returns", "render_report", "return_summary", "summary_rows", "windows_hit",
    "write_returns",
]
