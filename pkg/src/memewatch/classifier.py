"""Name-based meme-coin classification.

Keywords are mined from names of known meme coins with TF-IDF (raw counts,
``idf = ln(N / df)``, scores summed over documents) and cut at the elbow of
the sorted score curve. A name is a meme name when any of its words is a
retained keyword.
"""
from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError

_NON_ALNUM = re.compile(r"[^0-9a-z]+")

REFINE_NAME_TERMS = ("usd", "wrapped", "staked")
REFINE_MAX_PRICE = 0.80
REFINE_MAX_MARKET_CAP = 1e7


def preprocess_name(name: str) -> list[str]:
    """Lowercase, turn every non-alphanumeric character into a space, split."""
    return _NON_ALNUM.sub(" ", name.lower()).split()


def tfidf_rank(corpus: Sequence[str]) -> list[tuple[str, float]]:
    """Rank corpus words by summed TF-IDF, best first; ties go alphabetical.

    Scores within 1e-9 of each other count as ties, so words whose scores
    are mathematically equal but differ in the last bits still sort by name.
    """
    if not corpus:
        raise InputError("TF-IDF needs a non-empty corpus")
    n_docs = len(corpus)
    tf_total: Counter = Counter()
    df: Counter = Counter()
    for name in corpus:
        counts = Counter(preprocess_name(name))
        tf_total.update(counts)
        df.update(counts.keys())
    scores = {w: tf_total[w] * math.log(n_docs / df[w]) for w in tf_total}
    return sorted(scores.items(), key=lambda item: (-round(item[1], 9), item[0]))


def elbow_cutoff(scores: Sequence[float]) -> int:
    """1-based index of the point farthest from the first-to-last chord."""
    y = np.asarray(scores, dtype=float)
    n = len(y)
    if n < 3:
        raise InputError("elbow cutoff needs at least three scores")
    x = np.arange(1, n + 1, dtype=float)
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    dist = np.abs(dy * (x - x[0]) - dx * (y - y[0])) / math.hypot(dx, dy)
    return int(np.argmax(dist)) + 1


def is_pumpfun(address: str) -> bool:
    return address.endswith("pump")


@dataclass(frozen=True)
class KeywordModel:
    keywords: tuple[tuple[str, float], ...]
    cutoff_k: int
    stoplist: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "keywords", tuple((w, float(s)) for w, s in self.keywords))
        object.__setattr__(self, "stoplist", frozenset(self.stoplist))
        scores = [s for _, s in self.keywords]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise InputError("keyword scores must be non-increasing")
        if not 0 < self.cutoff_k <= len(self.keywords):
            raise InputError(f"cutoff_k={self.cutoff_k} outside 1..{len(self.keywords)}")
        if any(w in self.stoplist for w, _ in self.keywords[:self.cutoff_k]):
            raise InputError("stoplisted words cannot sit inside the cutoff")

    @property
    def active(self) -> frozenset[str]:
        return frozenset(w for w, _ in self.keywords[:self.cutoff_k] if w not in self.stoplist)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rank", "word", "score"])
            for rank, (word, score) in enumerate(self.keywords[:self.cutoff_k], 1):
                writer.writerow([rank, word, f"{score:.6f}"])

    @classmethod
    def from_csv(cls, path, stoplist: Iterable[str] = ()) -> "KeywordModel":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["rank"]))
        keywords = tuple((r["word"], float(r["score"])) for r in rows)
        return cls(keywords, len(keywords), frozenset(stoplist))


def build_keyword_model(corpus: Sequence[str], stoplist: Iterable[str] = (),
                        cutoff: Optional[int] = None) -> KeywordModel:
    """Cut the full ranking at ``cutoff`` or the elbow, then drop stoplisted words.

    Stoplisted words inside the cutoff shrink the retained set rather than
    pulling lower-ranked words in.
    """
    stop = frozenset(w.lower() for w in stoplist)
    ranked = tfidf_rank(corpus)
    if cutoff is None:
        k = elbow_cutoff([s for _, s in ranked]) if len(ranked) >= 3 else len(ranked)
    else:
        k = min(int(cutoff), len(ranked))
    k -= sum(1 for w, _ in ranked[:k] if w in stop)
    kept = tuple((w, s) for w, s in ranked if w not in stop)
    if k <= 0:
        raise InputError("no keywords left inside the cutoff after applying the stoplist")
    return KeywordModel(kept, k, stop)


def classify_name(name: str, model: KeywordModel) -> bool:
    return not model.active.isdisjoint(preprocess_name(name))


def read_stoplist(path) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


class MemeNameClassifier(ClassifierMixin, BaseEstimator):
    """Keyword classifier for token names.

    ``fit`` takes names of known meme coins; ``predict`` returns a boolean
    array marking meme names. ``cutoff=None`` picks the elbow.

    >>> clf = MemeNameClassifier(cutoff=2).fit(["Doge Moon", "Pepe Cat", "Cat Inu"])
    >>> clf.predict(["Baby Doge", "Liquid Staking"]).tolist()
    [True, False]
    """

    def __init__(self, cutoff: Optional[int] = None, stoplist: Iterable[str] = ()):
        self.cutoff = cutoff
        self.stoplist = stoplist

    def fit(self, X, y=None):
        names = _as_names(X)
        if self.cutoff is not None and (not isinstance(self.cutoff, (int, np.integer))
                                        or self.cutoff <= 0):
            raise InputError(f"cutoff must be a positive integer, got {self.cutoff!r}")
        self.model_ = build_keyword_model(names, self.stoplist or (), self.cutoff)
        self.keywords_ = [w for w, _ in self.model_.keywords[:self.model_.cutoff_k]]
        self.cutoff_k_ = self.model_.cutoff_k
        self.classes_ = np.array([False, True])
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        active = self.model_.active
        return np.array([not active.isdisjoint(preprocess_name(n)) for n in _as_names(X)],
                        dtype=bool)


def _as_names(X) -> list[str]:
    if isinstance(X, str):
        raise InputError("expected a sequence of names, got a single string")
    names = list(np.asarray(X, dtype=object).ravel()) if not isinstance(X, list) else X
    if not all(isinstance(n, str) for n in names):
        raise InputError("names must be strings")
    return names


@dataclass(frozen=True)
class Removal:
    token_id: str
    stage: int
    reason: str


def refine(tokens: Mapping, economics: Mapping, stablecoin_ids: Iterable[str] = (),
           nonmeme_tagged_ids: Iterable[str] = ()) -> tuple[list[str], list[Removal]]:
    """Drop false positives in three ordered stages; the first matching stage wins.

    1. known stablecoins;
    2. tokens priced above $0.80 or capitalised above $1e7 that an external
       source tags as non-meme;
    3. names containing ``usd``, ``wrapped`` or ``staked``.

    ``economics`` maps token_id to a :class:`TokenEconomics` (the latest one)
    or a list of them.
    """
    stable = set(stablecoin_ids)
    tagged = set(nonmeme_tagged_ids)
    kept, removed = [], []
    for token_id in sorted(tokens):
        token = tokens[token_id]
        econ = economics.get(token_id)
        if isinstance(econ, (list, tuple)):
            econ = econ[-1] if econ else None
        if token_id in stable:
            removed.append(Removal(token_id, 1, "stablecoin"))
            continue
        if econ is not None and token_id in tagged and (
                econ.price_usd > REFINE_MAX_PRICE or econ.market_cap_usd > REFINE_MAX_MARKET_CAP):
            removed.append(Removal(token_id, 2, "non-meme-tag"))
            continue
        lowered = token.name.lower()
        if any(term in lowered for term in REFINE_NAME_TERMS):
            removed.append(Removal(token_id, 3, "name-term"))
            continue
        kept.append(token_id)
    return kept, removed
