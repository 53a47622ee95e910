"""Small frame builders shared by the tests."""
import numpy as np
import pandas as pd

from memewatch.model import DAY, HOUR

T0 = 1_704_067_200


def make_bars(closes, volumes=None, start=T0):
    """Hourly bars whose open is the previous close."""
    closes = np.asarray(closes, dtype=float)
    volumes = np.full(len(closes), 100.0) if volumes is None else np.asarray(volumes, float)
    opens = np.r_[closes[0], closes[:-1]]
    return pd.DataFrame({
        "ts": start + HOUR * np.arange(len(closes), dtype=np.int64),
        "open": opens, "high": np.maximum(opens, closes), "low": np.minimum(opens, closes),
        "close": closes, "volume_usd": volumes,
    })


def make_daily(closes, volumes, start=T0):
    closes = np.asarray(closes, dtype=float)
    return pd.DataFrame({
        "date": start + DAY * np.arange(len(closes), dtype=np.int64),
        "open": np.r_[closes[:1], closes[:-1]], "close": closes,
        "volume_usd": np.asarray(volumes, dtype=float),
        "bar_count": np.full(len(closes), 24),
    })


def make_trades(rows, start=T0):
    """rows: (maker, side, amount) tuples, one second apart."""
    return pd.DataFrame({
        "ts": [start + i for i in range(len(rows))],
        "maker_id": [r[0] for r in rows], "side": [r[1] for r in rows],
        "amount_usd": [float(r[2]) for r in rows],
    })


def wilder_rsi_loop(closes, period=14):
    """Textbook Wilder RSI, one step at a time."""
    out = [float("nan")] * len(closes)
    gains, losses = [], []
    for i in range(1, len(closes)):
        d = closes[i] - closes[i - 1]
        gains.append(d if d > 0 else 0.0)
        losses.append(-d if d < 0 else 0.0)
    avg_g = sum(gains[:period]) / period
    avg_l = sum(losses[:period]) / period

    def value(g, l):
        if l == 0:
            return 100.0 if g > 0 else 50.0
        return 100.0 - 100.0 / (1.0 + g / l)

    out[period] = value(avg_g, avg_l)
    for i in range(period + 1, len(closes)):
        avg_g = (avg_g * (period - 1) + gains[i - 1]) / period
        avg_l = (avg_l * (period - 1) + losses[i - 1]) / period
        out[i] = value(avg_g, avg_l)
    return out
