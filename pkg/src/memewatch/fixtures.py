"""A constructed dataset with a known manipulation composition.

The fixture has 1,000 tokens of which 707 are high-return. Growth
manipulation is laid out over the high-return tokens as a Venn diagram of
wash trading (W), LPI (L) and anomaly (A) tokens:

    W only 164, L only 7, A only 273, W+L 1, W+A 107, L+A 22, W+L+A 10

giving 282 wash, 40 LPI and 412 anomaly tokens and a union of 584.
Sixty high-return tokens are later pumped and dumped; 34 of them come from
"W only" and 3 from "L only", so 37 carry earlier growth manipulation.
Some low-return tokens also get events so that restricting to the
high-return set matters.
"""
from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path

from .analytics import categorize_return, read_returns, write_returns
from .io import PathLike, SCHEMAS, read_events, write_events, write_rows
from .model import DAY, HOUR, DetectionEvent, EventKind, ReturnRecord
from .validation import b58encode

EPOCH = 1_704_067_200
UNIVERSE = 1000
CHAINS = ("ethereum", "bsc", "solana", "base")
REGIONS = (("WLA", 10), ("WL", 1), ("WA", 107), ("LA", 22), ("W", 164), ("L", 7), ("A", 273))
NON_GROWTH_HIGH = 707 - sum(n for _, n in REGIONS)
ANOMALY_LAYOUT = (
    # (kinds, token count) over the 412 anomaly tokens
    (("AnomalyTopHolders", "AnomalyHoneypot"), 26),
    (("AnomalyAirdrop", "AnomalyBundle"), 1),
    (("AnomalyTopHolders",), 333),
    (("AnomalyHoneypot",), 2),
    (("AnomalyAirdrop",), 23),
    (("AnomalyBundle",), 19),
    (("AnomalyFresh",), 8),
)
LOW_RETURN_LAYOUT = (("Positive", 80), ("Negative", 140), ("Inactive", 30),
                     ("StableActive", 20), ("Missing", 23))

_METRICS = {
    EventKind.WASH_ZERO_RISK: {"volume_surge_pct": 900.0, "price_change_pct": 1.5,
                               "unique_makers": 2, "max_imbalance": 0.5},
    EventKind.WASH_CIRCULAR: {"volume_surge_pct": 2500.0, "price_change_pct": -0.8,
                              "circular_ratio": 0.995, "unique_makers": 3},
    EventKind.WASH_PERSISTENT: {"screened_days": 3, "persistent_makers": 1},
    EventKind.LPI: {"price_change_pct": 400.0, "volume_usd": 250.0, "buy_ratio": 1.0,
                    "unique_makers": 1},
    EventKind.PUMP_AND_DUMP: {"pump_pct": 120.0, "dump_pct": -55.0,
                              "pump_volume_surge_pct": 900.0, "peak_ts": 0},
    EventKind.ANOMALY_TOP_HOLDERS: {"top10_share": 64.0},
    EventKind.ANOMALY_BUNDLE: {"bundle_buy_share": 41.0},
    EventKind.ANOMALY_FRESH: {"fresh_address_share": 37.0},
    EventKind.ANOMALY_AIRDROP: {"airdrop_share": 52.0},
    EventKind.ANOMALY_HONEYPOT: {"honeypot": 1.0},
}


def _identity(i: int) -> tuple:
    chain = CHAINS[i % len(CHAINS)]
    raw = hashlib.sha256(f"composition-{i}".encode()).digest()
    address = b58encode(raw) if chain == "solana" else "0x" + raw[:20].hex()
    return (f"{chain}:{address}", chain, address, f"Fixture Meme {i}", f"FXM{i}",
            EPOCH - 200 * DAY + i * HOUR, "fixture")


def _event(token_id: str, kind: EventKind, day: int, days: int = 1) -> DetectionEvent:
    metrics = dict(_METRICS[kind])
    start = EPOCH + day * DAY
    if kind == EventKind.PUMP_AND_DUMP:
        metrics["peak_ts"] = start + 10 * HOUR
        return DetectionEvent(token_id, kind, start, start + 16 * HOUR - 1, metrics)
    return DetectionEvent(token_id, kind, start, start + days * DAY - 1, metrics)


def build_composition() -> tuple[list[tuple], list[ReturnRecord], list[DetectionEvent]]:
    """Token rows, return records and events of the composition fixture."""
    tokens = [_identity(i) for i in range(UNIVERSE)]
    ids = [t[0] for t in tokens]
    high_ids = ids[:707]
    returns = [categorize_return(t, 1e-6, 3e-6, 5000.0) for t in high_ids]
    cursor = 707
    for category, n in LOW_RETURN_LAYOUT:
        for t in ids[cursor:cursor + n]:
            p_end, vol = {"Positive": (1.5e-6, 800.0), "Negative": (4e-7, 1200.0),
                          "Inactive": (1e-6, 0.0), "StableActive": (1e-6, 300.0),
                          "Missing": (None, 0.0)}[category]
            returns.append(categorize_return(t, 1e-6, p_end, vol))
        cursor += n

    events: list[DetectionEvent] = []
    regions: dict[str, list[str]] = {}
    cursor = 0
    for name, n in REGIONS:
        regions[name] = high_ids[cursor:cursor + n]
        cursor += n

    wash = [t for name in ("WLA", "WL", "WA", "W") for t in regions[name]]
    lpi = [t for name in ("WLA", "WL", "LA", "L") for t in regions[name]]
    anomaly = [t for name in ("WLA", "WA", "LA", "A") for t in regions[name]]
    for i, t in enumerate(wash):
        if i < 271:
            events.append(_event(t, EventKind.WASH_ZERO_RISK, 10))
        if i >= len(wash) - 128:
            events.append(_event(t, EventKind.WASH_CIRCULAR, 12))
        if i < 14:
            events.append(_event(t, EventKind.WASH_ZERO_RISK, 14))
            events.append(_event(t, EventKind.WASH_PERSISTENT, 10, days=5))
    for t in lpi:
        events.append(_event(t, EventKind.LPI, 20))
    cursor = 0
    for kinds, n in ANOMALY_LAYOUT:
        for t in anomaly[cursor:cursor + n]:
            events.extend(_event(t, EventKind(k), 0) for k in kinds)
        cursor += n
    pumped = regions["W"][:34] + regions["L"][:3] + regions["A"][:23]
    events.extend(_event(t, EventKind.PUMP_AND_DUMP, 50) for t in pumped)

    # events on low-return tokens must not leak into the statistics
    for t in ids[707:757]:
        events.append(_event(t, EventKind.WASH_ZERO_RISK, 30))
    for t in ids[757:767]:
        events.append(_event(t, EventKind.LPI, 5))
        events.append(_event(t, EventKind.PUMP_AND_DUMP, 40))
    return tokens, returns, sorted(events, key=DetectionEvent.sort_key)


def write_composition(out_dir: PathLike) -> None:
    tokens, returns, events = build_composition()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "tokens.csv", SCHEMAS["tokens"], tokens)
    write_returns(out / "returns.csv", returns)
    write_events(out / "events.jsonl", events)


def composition_dir() -> Path:
    """Location of the bundled copy of the fixture."""
    return Path(str(resources.files("memewatch") / "data" / "composition"))


def load_composition() -> tuple[list[ReturnRecord], list[DetectionEvent]]:
    root = composition_dir()
    return read_returns(root / "returns.csv"), read_events(root / "events.jsonl")
