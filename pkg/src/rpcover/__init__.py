"""Deterministic replacement-path coverings and their applications.

The package builds (L, f) replacement-path coverings from Reed-Solomon and
prime-modulus hit-and-miss hash families, and uses them for a distance
sensitivity oracle, fault-tolerant spanners and restricted coverings.
"""

__version__ = "0.1.0"

from .budget import BudgetExceeded, get_budget

__all__ = ["BudgetExceeded", "get_budget", "__version__"]
