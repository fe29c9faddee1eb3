"""
FRACNEHARI - Bubble Entities
Concentrating test functions and the records of their asymptotic fits.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from apps.assembly.entities import ProblemParams
from apps.core.exceptions import InputError, ParamError

QUINTIC = 'quintic'


@dataclass(frozen=True)
class BubbleParams:
    """
    v_eps(x) = k eps^{(N-2s)/4} / (eps + |x-center|^2)^{(N-2s)/2}, cut off to
    zero across the collar of width ``delta`` inside (a, b).

    ``delta`` defaults to 0.25 (b-a)/2 and ``center`` to the midpoint.
    """
    eps: float
    s: float
    a: float = -1.0
    b: float = 1.0
    N: int = 1
    k_amp: float = 1.0
    delta: Optional[float] = None
    center: Optional[float] = None
    smoothness: str = QUINTIC

    def __post_init__(self):
        if not (np.isfinite(self.eps) and self.eps > 0.0):
            raise InputError(f"Bubble scale must satisfy eps > 0 (got {self.eps}).")
        half = 0.5 * (self.b - self.a)
        if self.delta is None:
            object.__setattr__(self, 'delta', 0.25 * half)
        if self.center is None:
            object.__setattr__(self, 'center', 0.5 * (self.a + self.b))
        if not 0.0 < self.delta < half:
            raise ParamError(f"Cutoff margin must satisfy 0 < delta < (b-a)/2 (got {self.delta}).")
        if not self.a + self.delta <= self.center <= self.b - self.delta:
            raise ParamError('Bubble center must lie in the inner region {dist(x, boundary) >= delta}.')
        if self.smoothness != QUINTIC:
            raise ParamError(f"Unknown cutoff smoothness '{self.smoothness}'.")

    @classmethod
    def for_problem(cls, params: ProblemParams, eps: float, **kwargs) -> 'BubbleParams':
        return cls(eps=eps, s=params.s, a=params.a, b=params.b, N=params.N, **kwargs)

    @property
    def decay(self) -> float:
        """(N-2s)/2, the exponent of the denominator."""
        return 0.5 * (self.N - 2.0 * self.s)

    def with_eps(self, eps: float) -> 'BubbleParams':
        return BubbleParams(
            eps=eps, s=self.s, a=self.a, b=self.b, N=self.N, k_amp=self.k_amp,
            delta=self.delta, center=self.center, smoothness=self.smoothness,
        )

    def as_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class SlopeFit:
    """
    Least-squares slope of log(values) against log(eps).

    ``sharp_target`` and ``bound_holds`` are filled for upper-bound claims:
    the bound holds when the fitted slope is at least target - 0.1.
    """
    eps_grid: np.ndarray
    values: np.ndarray
    fitted_slope: float
    slope_stderr: float
    intercept: float
    residuals: np.ndarray
    target: float
    log_factor_detected: bool = False
    log_coefficient: Optional[float] = None
    sharp_target: Optional[float] = None
    bound_holds: Optional[bool] = None
    label: str = ''

    def rows(self) -> List[Dict]:
        """CSV rows (eps, value, residual)."""
        return [
            {'eps': float(e), 'value': float(v), 'residual': float(r)}
            for e, v, r in zip(self.eps_grid, self.values, self.residuals)
        ]


@dataclass(frozen=True)
class SobolevEstimate:
    """Extrapolated best Sobolev constant with its mesh-to-mesh change."""
    value: float
    error_bar: float
    intercepts: List[float]
    table: List[Dict] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return asdict(self)
