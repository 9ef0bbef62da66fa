"""Error types shared by the engine modules.

Every error carries a stable machine-readable ``code`` so callers (CLI,
bindings) can map failures without parsing messages.
"""


class EngineError(Exception):
    """Base class for engine failures."""

    code = "EngineError"

    def __init__(self, message: str):
        super().__init__(f"{self.code}: {message}")
        self.message = message


class SymbolOutOfRange(EngineError):
    """A class index exceeds the automaton alphabet."""

    code = "SymbolOutOfRange"


class ShapeMismatch(EngineError):
    """Array dimensions disagree with the automaton or group length."""

    code = "ShapeMismatch"


class InfeasibleSupervision(EngineError):
    """No labeling with positive weight satisfies the supervision."""

    code = "InfeasibleSupervision"


class UnsupportedCardinality(EngineError):
    """A binary-only supervision kind was compiled with K != 2."""

    code = "UnsupportedCardinality"


class InvalidSpec(EngineError):
    """A supervision annotation violates its invariants."""

    code = "InvalidSpec"


class InvalidParams(EngineError):
    """Generation parameters are out of range."""

    code = "InvalidParams"


class TooLarge(EngineError):
    """Exhaustive enumeration would exceed the safety guard."""

    code = "TooLarge"
