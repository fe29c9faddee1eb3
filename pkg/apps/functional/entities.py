"""
FRACNEHARI - Functional Entities
"""

from dataclasses import asdict, dataclass
from typing import Dict


@dataclass(frozen=True)
class EnergyBreakdown:
    """
    I(u) split into its three terms; total = quadratic - concave - convex,
    all from the same quadrature.
    """
    quadratic: float
    concave: float
    convex: float
    total: float

    def as_dict(self) -> Dict:
        return asdict(self)
