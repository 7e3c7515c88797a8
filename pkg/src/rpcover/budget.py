"""Work budgets for exhaustive enumeration."""

import os

DEFAULT_BUDGET = 50_000_000
ENV_VAR = "RPCOVER_BUDGET"


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed the configured work budget."""


def get_budget(budget=None):
    if budget is not None:
        return int(budget)
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return int(float(raw))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a number, got {raw!r}") from None
    return DEFAULT_BUDGET


def check_budget(amount, budget=None, what="enumeration"):
    limit = get_budget(budget)
    if amount > limit:
        raise BudgetExceeded(f"{what} needs {amount} units, budget is {limit} (set {ENV_VAR} to raise it)")
