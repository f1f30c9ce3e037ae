"""Work budgets for the exhaustive searches.

Every enumeration in this package is finite but potentially explosive
(2**(n**k) relation tables, n**(n**k) function tables, prod(|M_i|) choice
functions).  A WorkBudget caps how many candidates a search may visit;
crossing the cap raises BudgetExceededError instead of hanging.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MAX_NODES = 5_000_000
DEFAULT_MAX_FUNCTIONS = 1_000_000


class BudgetExceededError(RuntimeError):
    """An exhaustive search visited more nodes than its budget allows."""

    def __init__(self, what: str, limit: int):
        super().__init__(f"work budget exceeded while {what} (limit {limit})")
        self.what = what
        self.limit = limit


@dataclass(frozen=True)
class WorkBudget:
    """Caps for exhaustive searches.

    max_nodes counts candidates actually visited by an enumeration.
    max_functions caps the size of the function-table/constant factor of a
    model search before it starts, since that factor cannot be pruned
    against relation-only axioms.
    """

    max_nodes: int = DEFAULT_MAX_NODES
    max_functions: int = DEFAULT_MAX_FUNCTIONS

    def __post_init__(self) -> None:
        if self.max_nodes < 1 or self.max_functions < 1:
            raise ValueError("budget limits must be positive")


class NodeCounter:
    """Mutable tally of visited search nodes against a budget."""

    __slots__ = ("limit", "what", "count")

    def __init__(self, budget: WorkBudget, what: str):
        self.limit = budget.max_nodes
        self.what = what
        self.count = 0

    def tick(self, k: int = 1) -> None:
        self.count += k
        if self.count > self.limit:
            raise BudgetExceededError(self.what, self.limit)
