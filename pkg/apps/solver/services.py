"""
FRACNEHARI - Solver Services
Entry points for the positive, sign-changing and multi-solution solves.
"""

import logging
from typing import Tuple

import numpy as np

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.fibering.entities import N_MINUS, N_PLUS
from apps.functional.services import FunctionalService
from . import deflation, descent, sign_changing
from .entities import SolutionRecord, SolverConfig

logger = logging.getLogger('apps.solver')


class SolverService:
    """
    Service computing critical points of I_mu on a fixed operator.

    Operators are shared read-only; every solve keeps its own state.
    """

    initial_guess = staticmethod(descent.initial_guess)
    minimize_on_nehari = staticmethod(descent.minimize_on_nehari)
    sign_changing_continuation = staticmethod(sign_changing.sign_changing_continuation)
    minimize_sign_changing = staticmethod(sign_changing.minimize_sign_changing)
    multi_solution_search = staticmethod(deflation.multi_solution_search)
    solution_trends = staticmethod(deflation.solution_trends)

    @staticmethod
    def solve_positive_pair(A: StiffnessOperator, params: ProblemParams,
                            config: SolverConfig = None) -> Tuple[SolutionRecord, SolutionRecord]:
        """w0 on N+ and w1 on N-, both from the ground eigenvector."""
        w0 = SolverService.minimize_on_nehari(A, params, N_PLUS, config=config)
        w1 = SolverService.minimize_on_nehari(A, params, N_MINUS, config=config)
        if not w1.energy.total > w0.energy.total:
            logger.warning(f"Branch energies out of order: I(w0)={w0.energy.total:.6g}, I(w1)={w1.energy.total:.6g}")
        return w0, w1

    @staticmethod
    def weak_solution_check(A: StiffnessOperator, params: ProblemParams, u: DiscreteFunction,
                            n_tests: int = 20, seed: int = 0) -> float:
        """max |<I'(u), v>| / ||v|| over seeded random test functions v."""
        rng = np.random.default_rng(seed)
        r = FunctionalService.gradient(A, u, params)
        worst = 0.0
        for _ in range(int(n_tests)):
            v = rng.standard_normal(A.n)
            worst = max(worst, abs(float(r @ v)) / np.sqrt(A.inner(v, v)))
        return worst
