"""Shared helpers: seeded RNG construction, x*log(x), enumeration budgets."""

from __future__ import annotations

import math

import numpy as np

# Default cap on exact enumerations (number of candidate words / buckets).
DEFAULT_ENUMERATION_BUDGET = 2**24


class EnumerationBudgetError(Exception):
    """Raised when an exact enumeration would exceed the allowed budget."""


def resolve_budget(budget: int | None) -> int:
    if budget is None:
        return DEFAULT_ENUMERATION_BUDGET
    if budget < 1:
        raise ValueError(f"enumeration budget must be positive, got {budget}")
    return budget


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) so substreams stay reproducible."""
    return np.random.Generator(np.random.Philox(seed))


def xlogx(x: float) -> float:
    """x*log(x) with the convention 0*log(0) = 0."""
    return 0.0 if x == 0.0 else x * math.log(x)
