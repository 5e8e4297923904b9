"""Exception types raised across the package."""

from __future__ import annotations


class FracDomainError(ValueError):
    """An argument lies outside the domain of a gamma-ratio or sum operator."""


class FracOverflowError(OverflowError):
    """A gamma ratio or kernel value does not fit in double precision."""


class SequenceLengthError(ValueError):
    """A sampled sequence is too short for the requested operation."""


class KernelBudgetError(MemoryError):
    """Materializing a kernel table would exceed its entry budget."""


class NonFiniteStateError(ArithmeticError):
    """A solver produced a NaN or infinite value.

    ``step`` is the first grid index at which the value appeared.
    """

    def __init__(self, step: int, what: str = "state") -> None:
        self.step = step
        self.what = what
        super().__init__(f"non-finite {what} at step n={step}")


class SeriesOverflowError(ArithmeticError):
    """Matrix powers in a series solution overflowed at power ``k``."""

    def __init__(self, k: int) -> None:
        self.k = k
        super().__init__(f"matrix power A^{k} is not finite")


class TruncationNotConvergedError(ArithmeticError):
    """An infinite series did not reach its tolerance within the term budget."""


class ConfigError(ValueError):
    """Invalid run configuration.

    ``problems`` lists ``(key_path, reason)`` pairs, one per violated rule.
    """

    def __init__(self, problems: list[tuple[str, str]]) -> None:
        self.problems = list(problems)
        super().__init__("; ".join(f"{path}: {reason}" for path, reason in self.problems))
