from __future__ import annotations

from typing import Iterable, Optional

from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from ..exceptions import InputError
from ..validation import check_dataset
from ._base import Detections, iter_tokens
from .extraction import PumpDumpDetector, RugPullDetector
from .growth import AnomalyDetector, LPIDetector, WashTradingDetector

DETECTOR_NAMES = ("wash", "lpi", "pnd", "rug", "anomaly")


class DetectorSuite(BaseEstimator):
    """All detectors behind one estimator.

    Nested hyperparameters follow the usual ``<detector>__<param>`` naming,
    e.g. ``suite.set_params(wash__volume_surge_pct=400)``.
    """

    def __init__(self, wash=None, lpi=None, pnd=None, rug=None, anomaly=None,
                 n_jobs: Optional[int] = None):
        self.wash = wash
        self.lpi = lpi
        self.pnd = pnd
        self.rug = rug
        self.anomaly = anomaly
        self.n_jobs = n_jobs

    def _detectors(self, kinds: Optional[Iterable[str]] = None):
        names = DETECTOR_NAMES if kinds is None else tuple(kinds)
        unknown = set(names) - set(DETECTOR_NAMES)
        if unknown:
            raise InputError(f"unknown detector(s) {sorted(unknown)}")
        out = []
        for name in DETECTOR_NAMES:
            if name in names:
                det = getattr(self, name)
                if det is None:
                    raise InputError(f"detector {name!r} is not configured")
                out.append(det)
        return out

    def fit(self, X=None, y=None):
        for det in self._detectors():
            det.fit()
        return self

    def _detect_token(self, detectors, token):
        return Detections.merge(d.detect_token(token) for d in detectors)

    def detect(self, X, kinds: Optional[Iterable[str]] = None,
               n_jobs: Optional[int] = None) -> Detections:
        dataset = check_dataset(X)
        detectors = self._detectors(kinds)
        for det in detectors:
            det.fit()
        n_jobs = self.n_jobs if n_jobs is None else n_jobs
        tokens = iter_tokens(dataset)
        if n_jobs in (None, 1):
            parts = [self._detect_token(detectors, t) for t in tokens]
        else:
            parts = Parallel(n_jobs=n_jobs)(
                delayed(self._detect_token)(detectors, t) for t in tokens)
        return Detections.merge(parts)

    def predict(self, X, kinds: Optional[Iterable[str]] = None):
        return self.detect(X, kinds).events


def make_suite(n_jobs: Optional[int] = None) -> DetectorSuite:
    """Suite with every detector at its default thresholds."""
    return DetectorSuite(wash=WashTradingDetector(), lpi=LPIDetector(),
                         pnd=PumpDumpDetector(), rug=RugPullDetector(),
                         anomaly=AnomalyDetector(), n_jobs=n_jobs)
