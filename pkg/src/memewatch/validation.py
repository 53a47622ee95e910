"""Input validation helpers: address formats, frame schemas, parameter checks."""
from __future__ import annotations

import string
from numbers import Real
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from .exceptions import AddressError, InputError

B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(B58_ALPHABET)}
_HEX = frozenset(string.hexdigits)

EVM_CHAINS = frozenset({"ethereum", "bsc", "base"})
CHAINS = EVM_CHAINS | {"solana"}


def b58decode(text: str) -> bytes:
    """Decode a Bitcoin-alphabet base58 string. Raises ValueError on bad characters."""
    n = 0
    for ch in text:
        try:
            n = n * 58 + _B58_INDEX[ch]
        except KeyError:
            raise ValueError(f"invalid base58 character {ch!r}") from None
    body = n.to_bytes((n.bit_length() + 7) // 8, "big") if n else b""
    pad = len(text) - len(text.lstrip("1"))
    return b"\x00" * pad + body


def b58encode(data: bytes) -> str:
    n = int.from_bytes(data, "big")
    out = []
    while n:
        n, r = divmod(n, 58)
        out.append(B58_ALPHABET[r])
    pad = len(data) - len(data.lstrip(b"\x00"))
    return "1" * pad + "".join(reversed(out))


def address_problem(chain, address: str) -> Optional[str]:
    """Return why ``address`` is not a valid ``chain`` token address, or None.

    Reasons: ``bad-chain``, ``bad-length``, ``bad-prefix``, ``bad-charset``,
    ``bad-decode``.
    """
    chain = getattr(chain, "value", chain)
    if chain not in CHAINS:
        return "bad-chain"
    if not isinstance(address, str):
        return "bad-charset"
    if chain in EVM_CHAINS:
        if len(address) != 42:
            return "bad-length"
        if not address.startswith("0x"):
            return "bad-prefix"
        if not _HEX.issuperset(address[2:]):
            return "bad-charset"
        return None
    if not address or any(c not in _B58_INDEX for c in address):
        return "bad-charset"
    if len(b58decode(address)) != 32:
        return "bad-decode"
    return None


def validate_address(chain, address: str) -> None:
    reason = address_problem(chain, address)
    if reason is not None:
        raise AddressError(reason, f"invalid {getattr(chain, 'value', chain)} address {address!r}")


def is_valid_address(chain, address: str) -> bool:
    return address_problem(chain, address) is None


def check_columns(frame: pd.DataFrame, required: Iterable[str], what: str = "frame") -> None:
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise InputError(f"{what} is missing columns {missing}")


def check_sorted(values, what: str = "series", strict: bool = False) -> None:
    arr = np.asarray(values)
    if len(arr) < 2:
        return
    diff = np.diff(arr)
    if (diff <= 0).any() if strict else (diff < 0).any():
        raise InputError(f"{what} must be sorted ascending")


def check_bars(bars: pd.DataFrame) -> pd.DataFrame:
    check_columns(bars, ["ts", "open", "high", "low", "close", "volume_usd"], "bars")
    check_sorted(bars["ts"], "bar timestamps", strict=True)
    return bars


def check_trades(trades: Optional[pd.DataFrame]) -> Optional[pd.DataFrame]:
    if trades is None:
        return None
    check_columns(trades, ["ts", "maker_id", "side", "amount_usd"], "trades")
    check_sorted(trades["ts"], "trade timestamps")
    return trades


def check_daily(daily: pd.DataFrame) -> pd.DataFrame:
    check_columns(daily, ["date", "open", "close", "volume_usd"], "daily series")
    check_sorted(daily["date"], "daily dates", strict=True)
    return daily


def check_scalar(value, name: str, *, low=None, high=None, low_inclusive=True,
                 high_inclusive=True, integer=False):
    """Validate a numeric hyperparameter the way ``fit`` methods need it."""
    if integer:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise InputError(f"{name} must be an integer, got {value!r}")
    elif isinstance(value, bool) or not isinstance(value, Real):
        raise InputError(f"{name} must be a number, got {value!r}")
    if low is not None and (value < low or (value == low and not low_inclusive)):
        raise InputError(f"{name}={value!r} is below its allowed range")
    if high is not None and (value > high or (value == high and not high_inclusive)):
        raise InputError(f"{name}={value!r} is above its allowed range")
    return value


def check_dataset(X):
    """Accept a loaded Dataset or a dataset directory path."""
    from .io import Dataset, load_dataset

    if isinstance(X, Dataset):
        return X
    if isinstance(X, (str, bytes)) or hasattr(X, "__fspath__"):
        return load_dataset(X)
    raise InputError(f"expected a Dataset or a dataset directory, got {type(X).__name__}")
