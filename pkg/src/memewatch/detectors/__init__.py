from ._base import BaseDetector, DetectionNote, Detections, TokenData
from .extraction import (PumpDumpDetector, RugPullDetector, detect_pump_dump, detect_rug_pull,
                         linkage, local_maxima, rsi)
from .growth import (AnomalyDetector, LPIDetector, WashTradingDetector, detect_anomalies,
                     detect_circular_volume, detect_persistent_makers, detect_zero_risk,
                     lpi_phase_one, lpi_phase_two, screen_wash_days)
from .suite import DETECTOR_NAMES, DetectorSuite, make_suite

__all__ = [
    "AnomalyDetector", "BaseDetector", "DETECTOR_NAMES", "DetectionNote", "Detections",
    "DetectorSuite", "LPIDetector", "PumpDumpDetector", "RugPullDetector", "TokenData",
    "WashTradingDetector", "detect_anomalies", "detect_circular_volume",
    "detect_persistent_makers", "detect_pump_dump", "detect_rug_pull", "detect_zero_risk",
    "linkage", "local_maxima", "lpi_phase_one", "lpi_phase_two", "make_suite", "rsi",
    "screen_wash_days",
]
