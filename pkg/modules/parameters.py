"""
Duffing-Van der Pol Survey - Parameters
Parameter bundle of x'' - x + x^3 = eps [(p1 + p2 x - x^2) x' + p3 sin(p4 t)]
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import Dict

from .errors import DomainError


@dataclass(frozen=True)
class Params:
    """
    Equation parameters

    Attributes:
        epsilon: perturbation size (>= 0)
        p1, p2: dissipation coefficients
        p3: forcing amplitude
        p4: forcing frequency
    """

    epsilon: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    p4: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.epsilon < 0.0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def mu(self) -> float:
        """Resonance-zone scale sqrt(eps)"""
        return math.sqrt(self.epsilon)

    @property
    def forcing_period(self) -> float:
        if self.p4 == 0.0:
            raise DomainError("forcing period undefined for p4 = 0")
        return 2.0 * math.pi / abs(self.p4)

    @property
    def autonomous(self) -> bool:
        return self.p3 == 0.0

    def mirrored(self) -> "Params":
        """Parameters of the image under (p2, x, y) -> (-p2, -x, -y)"""
        return replace(self, p2=-self.p2)

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)
