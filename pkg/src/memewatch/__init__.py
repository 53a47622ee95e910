"""Detect growth manipulation and value extraction in meme coin markets."""
from .amm import PoolState, cost_to_multiply_price, swap_quote_in, swap_token_in, tokens_to_divide_price
from .classifier import KeywordModel, MemeNameClassifier, build_keyword_model, refine
from .detectors import DetectorSuite, make_suite
from .exceptions import AddressError, InputError, MemewatchError, ScenarioError
from .io import Dataset, load_dataset, read_events, write_events
from .model import Chain, DetectionEvent, EventKind, ReturnCategory

__version__ = "0.1.0"

__all__ = [
    "AddressError", "Chain", "Dataset", "DetectionEvent", "DetectorSuite", "EventKind",
    "InputError", "KeywordModel", "MemeNameClassifier", "MemewatchError", "PoolState",
    "ReturnCategory", "ScenarioError", "build_keyword_model", "cost_to_multiply_price",
    "load_dataset", "make_suite", "read_events", "refine", "swap_quote_in", "swap_token_in",
    "tokens_to_divide_price", "write_events",
]
