"""Coupling parameters for the exponential field weight e^(xi*h).

The derived exponents are tied together by xi = gamma/d and
Q = 2/gamma + gamma/2.  The dimension d is an input, not something this
package estimates; for gamma = sqrt(8/3) it equals 4.  A degenerate
xi = 0 (unit weights, Euclidean metric) can be forced explicitly for
smoke runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class LqgParams:
    gamma: float
    d: float
    xi_override: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.gamma < 2.0):
            raise ValueError(f"gamma must lie in (0, 2), got {self.gamma}")
        if self.d <= 0.0:
            raise ValueError(f"dimension must be positive, got {self.d}")

    @property
    def xi(self) -> float:
        if self.xi_override is not None:
            return self.xi_override
        return self.gamma / self.d

    @property
    def q(self) -> float:
        return 2.0 / self.gamma + self.gamma / 2.0

    @property
    def xi_q(self) -> float:
        return self.xi * self.q

    @classmethod
    def pure_gravity(cls) -> "LqgParams":
        """gamma = sqrt(8/3), d = 4, so xi = 1/sqrt(6) and Q = 5/sqrt(6)."""
        return cls(gamma=math.sqrt(8.0 / 3.0), d=4.0)

    @classmethod
    def degenerate(cls) -> "LqgParams":
        """xi forced to 0: every vertex weight is 1, metric is Euclidean."""
        return cls(gamma=math.sqrt(8.0 / 3.0), d=4.0, xi_override=0.0)
