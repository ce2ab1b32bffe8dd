"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so the split matters:
configuration and input problems are recoverable user errors, numerical
blow-ups are not.
"""

from __future__ import annotations


class MemsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MemsimError):
    """Invalid parameter value, config key, or recipe definition."""


class TraceParseError(MemsimError):
    """Malformed trace file.  Carries a line number when one is known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SegmentationError(MemsimError):
    """Voltage trace does not decompose into a legal branch sequence."""


class InstabilityError(MemsimError):
    """Integration produced a non-finite state or current.

    Names the offending step so the caller can correlate with the
    waveform sample that triggered the blow-up.
    """

    def __init__(self, step: int, detail: str = ""):
        message = f"non-finite value at integration step {step}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.step = step
