"""Resource budgets for enumeration-heavy operations.

Every potentially large computation (subgroup closure, set products) is
guarded by an explicit cap so that an oversized request fails loudly instead
of stalling.  Defaults are desk-scale; the environment variable
``COSETOPE_BUDGET`` overrides them, either as a single integer applied to
both caps or as ``closure=N,product=M``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import ValidationError

DEFAULT_CLOSURE_CAP = 5_000_000
DEFAULT_PRODUCT_CAP = 10_000_000


@dataclass(frozen=True)
class Budgets:
    closure_cap: int = DEFAULT_CLOSURE_CAP
    product_cap: int = DEFAULT_PRODUCT_CAP

    def __post_init__(self) -> None:
        if self.closure_cap <= 0 or self.product_cap <= 0:
            raise ValidationError("budgets must be positive")


def from_env(environ=None) -> Budgets:
    """Budgets with the ``COSETOPE_BUDGET`` override applied, if present."""
    environ = os.environ if environ is None else environ
    raw = environ.get("COSETOPE_BUDGET", "").strip()
    if not raw:
        return Budgets()
    if raw.isdigit():
        n = int(raw)
        return Budgets(closure_cap=n, product_cap=n)
    closure = DEFAULT_CLOSURE_CAP
    product = DEFAULT_PRODUCT_CAP
    for part in raw.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if not value.strip().lstrip("-").isdigit():
            raise ValidationError(f"bad COSETOPE_BUDGET entry: {part!r}")
        if key == "closure":
            closure = int(value)
        elif key == "product":
            product = int(value)
        else:
            raise ValidationError(f"unknown COSETOPE_BUDGET key: {key!r}")
    return Budgets(closure_cap=closure, product_cap=product)


def active_budgets(budgets: Budgets | None = None) -> Budgets:
    return budgets if budgets is not None else from_env()
