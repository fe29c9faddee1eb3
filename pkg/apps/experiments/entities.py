"""
FRACNEHARI - Experiment Entities
"""

from dataclasses import dataclass, field
from typing import Any, Dict

from apps.assembly.entities import Mesh, ProblemParams
from apps.solver.entities import SolverConfig


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    A validated experiment: problem, mesh spec, solver controls and the
    kind-specific options, tied to the hash of its canonical key/value form.
    """
    kind: str
    params: ProblemParams
    solver: SolverConfig
    n_elements: int
    grading: float
    quadrature_order: int
    seed: int
    output_dir: str
    config_hash: str
    options: Dict[str, Any] = field(default_factory=dict)

    def mesh(self) -> Mesh:
        """Uniform mesh for grading 1, otherwise refined at the domain midpoint."""
        a, b = self.params.a, self.params.b
        if self.grading == 1.0:
            return Mesh.uniform(a, b, self.n_elements, quadrature_order=self.quadrature_order)
        return Mesh.graded(a, b, self.n_elements, ratio=self.grading, quadrature_order=self.quadrature_order)

    def option(self, name, default=None):
        value = self.options.get(name)
        return default if value is None else value
