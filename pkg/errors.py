"""
Exception hierarchy for the leaf-growth toolkit
Every error raised on purpose by the library derives from LeafGrowthError
"""

from typing import Any, Dict, Optional


class LeafGrowthError(Exception):
    """Base class for all errors raised by the toolkit"""


class TreeError(LeafGrowthError, ValueError):
    """Structural misuse of a plane binary tree"""


class TreeParseError(TreeError):
    """Malformed balanced-parenthesis word"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class CapExceededError(LeafGrowthError, ValueError):
    """A size parameter is above its configured brute-force cap"""

    def __init__(self, name: str, value: int, cap: int):
        super().__init__(f"{name}={value} exceeds the configured cap of {cap}")
        self.name = name
        self.value = value
        self.cap = cap


class DomainError(LeafGrowthError, ValueError):
    """Numeric argument outside the domain of a function"""


class BracketError(LeafGrowthError, RuntimeError):
    """Root could not be bracketed"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UsageError(LeafGrowthError):
    """Bad command-line usage; the CLI maps it to exit code 2"""
