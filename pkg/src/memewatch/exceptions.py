class MemewatchError(Exception):
    """Base class for errors raised on purpose by this package."""


class InputError(MemewatchError, ValueError):
    """Bad input data, schema, configuration or parameters."""


class AddressError(InputError):
    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class ScenarioError(InputError):
    """Scenario parameters that cannot meet their own guarantees."""
