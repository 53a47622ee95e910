from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar, NamedTuple, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from ..model import DAY, DetectionEvent, EventKind, daily_aggregates
from ..validation import check_dataset

_EMPTY_BARS = pd.DataFrame({c: pd.Series(dtype=float) for c in
                            ["ts", "open", "high", "low", "close", "volume_usd"]})


@dataclass(frozen=True)
class DetectionNote:
    """Something a detector could not decide: skipped, unconfirmed or provisional."""

    token_id: str
    kind: str
    ts: int
    status: str
    detail: str = ""


class Detections(NamedTuple):
    events: list[DetectionEvent]
    notes: list[DetectionNote]

    @classmethod
    def merge(cls, parts) -> "Detections":
        events, notes = [], []
        for part in parts:
            events.extend(part.events)
            notes.extend(part.notes)
        events.sort(key=DetectionEvent.sort_key)
        notes.sort(key=lambda n: (n.token_id, n.ts, n.kind, n.status, n.detail))
        return cls(events, notes)


@dataclass
class TokenData:
    """Everything known about one token, with lazily derived views."""

    token_id: str
    bars: pd.DataFrame = field(default_factory=lambda: _EMPTY_BARS)
    trades: Optional[pd.DataFrame] = None
    holders: list = field(default_factory=list)

    @cached_property
    def daily(self) -> pd.DataFrame:
        return daily_aggregates(self.bars)

    @cached_property
    def trades_by_day(self) -> dict[int, pd.DataFrame]:
        if self.trades is None or len(self.trades) == 0:
            return {}
        ts = self.trades["ts"].to_numpy(dtype=np.int64)
        days = ts - ts % DAY
        starts = np.flatnonzero(np.r_[True, days[1:] != days[:-1]])
        bounds = np.r_[starts, len(days)]
        return {int(days[a]): self.trades.iloc[a:b] for a, b in zip(bounds[:-1], bounds[1:])}

    def day_trades(self, day: int) -> Optional[pd.DataFrame]:
        return self.trades_by_day.get(int(day))


def iter_tokens(dataset):
    for token_id in dataset.token_ids:
        yield TokenData(token_id, dataset.ohlcv.get(token_id, _EMPTY_BARS),
                        dataset.trades.get(token_id), dataset.holders.get(token_id, []))


def day_window(day: int) -> tuple[int, int]:
    return int(day), int(day) + DAY - 1


class BaseDetector(BaseEstimator):
    """Stateless detector with the estimator interface.

    Hyperparameters are constructor arguments. ``fit`` only validates them;
    ``detect`` returns events plus notes, ``predict`` returns the events.
    Tokens are independent, so ``n_jobs`` fans them out with joblib; the
    merged output is sorted and does not depend on the degree of parallelism.
    """

    kinds: ClassVar[frozenset[EventKind]] = frozenset()

    def _check_params(self):
        pass

    def fit(self, X=None, y=None):
        self._check_params()
        return self

    def detect_token(self, token: TokenData) -> Detections:
        raise NotImplementedError

    def detect(self, X, n_jobs: Optional[int] = None) -> Detections:
        dataset = check_dataset(X)
        self._check_params()
        n_jobs = getattr(self, "n_jobs", None) if n_jobs is None else n_jobs
        tokens = iter_tokens(dataset)
        if n_jobs in (None, 1):
            parts = [self.detect_token(t) for t in tokens]
        else:
            parts = Parallel(n_jobs=n_jobs)(delayed(self.detect_token)(t) for t in tokens)
        return Detections.merge(parts)

    def predict(self, X) -> list[DetectionEvent]:
        return self.detect(X).events
