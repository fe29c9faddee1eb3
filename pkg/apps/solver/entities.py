"""
FRACNEHARI - Solver Entities
Solver settings, solution records and continuation results.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings

from apps.assembly.entities import DiscreteFunction, Mesh
from apps.core.exceptions import ConfigError
from apps.functional.entities import EnergyBreakdown

W0 = 'w0'
W1 = 'w1'
W2 = 'w2'


@dataclass
class SolverConfig:
    """
    Iteration controls shared by every solve.

    Unset ``max_iters`` and ``residual_tol`` come from FRACNEHARI_MAX_ITERS
    and FRACNEHARI_RESIDUAL_TOL.
    """
    max_iters: Optional[int] = None
    residual_tol: Optional[float] = None
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    projection_tol: float = 1e-10
    part_tol: float = 1e-6
    dedup_tol: float = 1e-4
    deflation_shift: float = 1.0
    deflation_power: float = 2.0
    seed: int = 0
    trace_path: Optional[str] = None
    S_estimate: Optional[float] = None

    def __post_init__(self):
        if self.max_iters is None:
            self.max_iters = int(settings.FRACNEHARI_MAX_ITERS)
        if self.residual_tol is None:
            self.residual_tol = float(settings.FRACNEHARI_RESIDUAL_TOL)
        positive = {
            'max_iters': self.max_iters, 'residual_tol': self.residual_tol, 'armijo_c': self.armijo_c,
            'min_step': self.min_step, 'projection_tol': self.projection_tol, 'part_tol': self.part_tol,
            'dedup_tol': self.dedup_tol, 'deflation_power': self.deflation_power,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ConfigError(f"Solver setting {name} must be positive (got {value}).")
        if not 0.0 < self.backtrack < 1.0:
            raise ConfigError(f"Backtracking factor must lie in (0, 1) (got {self.backtrack}).")
        if self.deflation_shift < 0.0:
            raise ConfigError('Deflation shift must be nonnegative.')

    def as_dict(self) -> Dict:
        return dict(self.__dict__)


@dataclass(eq=False)
class SolutionRecord:
    """
    A converged critical point with its energy and Nehari classifications.

    ``sign_changing`` holds when both nodal parts have L2 norm above part_tol.
    """
    label: str
    coefficients: np.ndarray
    mesh: Mesh
    energy: EnergyBreakdown
    residual: float
    nehari_class: str
    plus_class: Optional[str]
    minus_class: Optional[str]
    sign_changing: bool
    iterations: int
    wall_time: float
    trace: List[Dict] = field(default_factory=list)
    diagnostics: Dict = field(default_factory=dict)

    @property
    def function(self) -> DiscreteFunction:
        return DiscreteFunction(self.coefficients, self.mesh)

    def summary_row(self) -> Dict:
        """Flat row for the solutions CSV (no timing, so reruns are byte-identical)."""
        return {
            'label': self.label,
            'energy': self.energy.total,
            'quadratic': self.energy.quadratic,
            'concave': self.energy.concave,
            'convex': self.energy.convex,
            'residual': self.residual,
            'nehari_class': self.nehari_class,
            'plus_class': self.plus_class,
            'minus_class': self.minus_class,
            'sign_changing': self.sign_changing,
            'iterations': self.iterations,
        }


@dataclass(eq=False)
class ContinuationResult:
    """
    u_init = a (w1 - b u_eps) with both nodal parts on N^-.

    ``r_bar`` is the (min, max) of the nodal ratios w1/u_eps.
    """
    a: float
    b: float
    u_init: DiscreteFunction
    r_bar: tuple
    scan: List[Dict] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return {
            'a': self.a, 'b': self.b, 'r_bar': list(self.r_bar),
            'u_init': self.u_init.coefficients.tolist(), 'scan': self.scan,
        }
