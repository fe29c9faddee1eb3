"""
FRACNEHARI - Solution Records
Builds SolutionRecord objects and streams iteration traces.
"""

from typing import Dict, List, Optional

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.core.utils import append_jsonl
from apps.fibering.services import FiberingService
from apps.functional.services import FunctionalService
from .entities import SolutionRecord, SolverConfig


class TraceLog:
    """In-memory iteration trace, mirrored to a JSONL file when a path is set."""

    def __init__(self, path: Optional[str] = None, label: str = ''):
        self.path = path
        self.label = label
        self.entries: List[Dict] = []

    def append(self, **entry):
        entry = {'label': self.label, **entry}
        self.entries.append(entry)
        if self.path:
            append_jsonl(self.path, entry)


def build_record(A: StiffnessOperator, params: ProblemParams, u: DiscreteFunction, label: str,
                 config: SolverConfig, iterations: int, wall_time: float,
                 trace: List[Dict] = None, diagnostics: Dict = None) -> SolutionRecord:
    """Evaluate energy, residual and the Nehari classes of u and its nodal parts."""
    plus, minus = FunctionalService.split_parts(u)
    sign_changing = plus.l2_norm() > config.part_tol and minus.l2_norm() > config.part_tol

    plus_class = None
    if not plus.is_zero():
        plus_class = FiberingService.classify_nehari(plus, A, params, relative_to=u)
    minus_class = None
    if not minus.is_zero():
        minus_class = FiberingService.classify_nehari(-minus, A, params, relative_to=u)

    return SolutionRecord(
        label=label,
        coefficients=u.coefficients.copy(),
        mesh=u.mesh,
        energy=FunctionalService.energy(A, u, params),
        residual=FunctionalService.dual_norm(A, FunctionalService.gradient(A, u, params)),
        nehari_class=FiberingService.classify_nehari(u, A, params),
        plus_class=plus_class,
        minus_class=minus_class,
        sign_changing=bool(sign_changing),
        iterations=int(iterations),
        wall_time=float(wall_time),
        trace=list(trace or []),
        diagnostics=dict(diagnostics or {}),
    )
