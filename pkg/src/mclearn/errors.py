"""Exception types and enumeration budgets shared across the package."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


class BudgetError(RuntimeError):
    """An enumeration exceeded its configured budget."""

    def __init__(self, what: str, needed, limit):
        self.what = what
        self.needed = needed
        self.limit = limit
        super().__init__(f"{what}: needs {needed}, budget is {limit}")


class ProtocolError(RuntimeError):
    """An online/bandit protocol was violated (unrealizable feed, bad label, ...)."""


class InvariantError(RuntimeError):
    """An internal invariant of a learner or witness failed to hold."""


@dataclass(frozen=True)
class Budget:
    hypotheses: int = 2**20
    natarajan_domain: int = 20
    memo_entries: int = 500_000
    growth_samples: int = 200_000
    experts: int = 200_000
    tree_class_size: int = 4096


def _from_env() -> Budget:
    raw = os.environ.get("MCLEARN_BUDGET", "").strip()
    if not raw:
        return Budget()
    if raw.isdigit():
        return Budget(hypotheses=int(raw))
    fields = {}
    for item in raw.split(","):
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in Budget.__dataclass_fields__:
            raise ValueError(f"MCLEARN_BUDGET: unknown budget key {key!r}")
        fields[key] = int(value)
    return Budget(**fields)


_budget = _from_env()


def get_budget() -> Budget:
    return _budget


def set_budget(**changes) -> Budget:
    """Override budget fields process-wide; returns the previous budget."""
    global _budget
    old = _budget
    _budget = replace(_budget, **changes)
    return old
