"""Flat ``key=value`` threshold overrides.

Detector keys use the suite's nested parameter names, for example::

    # looser wash screen
    wash__volume_surge_pct = 400
    pnd__rsi_threshold = 75

Two more keys are understood: ``classify__cutoff`` and ``returns__window_days``.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from .detectors import DetectorSuite, make_suite
from .exceptions import InputError

EXTRA_KEYS = {"classify__cutoff": int, "returns__window_days": int}


def _parse_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise InputError(f"config value {text!r} is not a number") from None


def read_config(path) -> dict:
    """Parse a config file; blank lines and ``#`` comments are skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise InputError(f"{path}:{n}: expected key=value")
        if key in out:
            raise InputError(f"{path}:{n}: duplicate key {key!r}")
        out[key] = _parse_value(value)
    known = {k for k in make_suite().get_params(deep=True) if "__" in k} | set(EXTRA_KEYS)
    unknown = sorted(set(out) - known)
    if unknown:
        raise InputError(f"unknown config keys {unknown}")
    return out


def configured_suite(config: Optional[dict] = None, n_jobs: Optional[int] = None) -> DetectorSuite:
    params = {k: v for k, v in (config or {}).items() if k not in EXTRA_KEYS}
    suite = make_suite(n_jobs)
    try:
        suite.set_params(**params)
        suite.fit()
    except ValueError as exc:
        raise InputError(f"bad detector configuration: {exc}") from exc
    return suite
