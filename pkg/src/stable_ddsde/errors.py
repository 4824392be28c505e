"""Error taxonomy shared by all modules.

The CLI maps these onto process exit codes: ConfigError -> 2,
NumericalError -> 3, failed run assertions -> 1.
"""

from __future__ import annotations


class ParameterError(ValueError):
    """A single argument violates an operation precondition."""


class ConfigError(ValueError):
    """One or more config keys are invalid.

    Collects every violation so a bad config is reported in full rather
    than one key at a time.
    """

    def __init__(self, errors: list[tuple[str, str]] | str):
        if isinstance(errors, str):
            errors = [("", errors)]
        self.errors = list(errors)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.errors]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class NumericalError(RuntimeError):
    """A computation left its certified regime (non-convergence, mass loss,
    negativity beyond the floor, escaping particles)."""


class DomainSizeError(NumericalError):
    """Too much mass left the certified window; the box is too small for
    the requested horizon."""
