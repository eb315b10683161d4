"""Numerical tolerances shared across modules.

``ROYDEN_LAB_TOL`` in the environment replaces the default boundary
residual, period mismatch and mass defect tolerances.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-8
    period: float = 1e-8
    mass: float = 1e-8
    condition: float = 1e12
    singular_value: float = 1e-10

    def override(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def default_tolerances() -> Tolerances:
    raw = os.environ.get("ROYDEN_LAB_TOL")
    if raw:
        tol = float(raw)
        return Tolerances(residual=tol, period=tol, mass=tol)
    return Tolerances()


def default_nodes(K: int) -> int:
    """Nodes per circle that resolve truncation ``K`` with a safety factor of 4."""
    return max(8, 4 * K + (4 * K) % 2)
