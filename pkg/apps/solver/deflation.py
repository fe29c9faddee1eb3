"""
FRACNEHARI - Deflated Multi-Solution Search
Newton-Krylov on the Riesz-preconditioned residual, deflated at known solutions.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy import optimize

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.core.exceptions import EigenError, InputError, RootError
from apps.core.utils import thread_count
from apps.fibering.services import FiberingService
from apps.functional.services import FunctionalService
from .entities import SolutionRecord, SolverConfig
from .records import build_record

logger = logging.getLogger('apps.solver')

NEWTON_MAXITER = 60
PERTURBATIONS = 2
SEARCH_BATCH = 4


def _preconditioned_residual(A: StiffnessOperator, params: ProblemParams, coefficients: np.ndarray) -> np.ndarray:
    u = DiscreteFunction(coefficients, A.mesh)
    return A.solve(FunctionalService.gradient(A, u, params))


def _deflation_factor(A: StiffnessOperator, coefficients: np.ndarray, known: List[np.ndarray],
                      config: SolverConfig) -> float:
    """prod_k (shift + 1/||u - u_k||^power), with the X0 norm."""
    factor = 1.0
    for other in known:
        difference = coefficients - other
        distance = np.sqrt(max(difference @ A.matrix @ difference, 0.0))
        if distance == 0.0:
            return np.inf
        factor *= config.deflation_shift + distance ** (-config.deflation_power)
    return factor


def _starts(A: StiffnessOperator, params: ProblemParams, count: int, config: SolverConfig) -> List[tuple]:
    """Eigenvectors rescaled onto N+ and N-, then seeded perturbations of each."""
    n_modes = min(A.n, max(count, 3))
    try:
        _, vectors = scipy.linalg.eigh(A.matrix, A.mass, subset_by_index=[0, n_modes - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenError(f"Eigenvectors for search starts failed: {exc}")

    base = []
    for j in range(n_modes):
        v = vectors[:, j] * np.sign(vectors[np.argmax(np.abs(vectors[:, j])), j])
        mode = DiscreteFunction(v / np.sqrt(A.inner(v, v)), A.mesh)
        report = FiberingService.fibering_roots(mode, A, params)
        for name, t in (('minus', report.t_minus), ('plus', report.t_plus)):
            if t is not None:
                base.append((f"mode{j}-{name}", t * mode.coefficients))

    rng = np.random.default_rng(config.seed)
    perturbed = []
    for name, coefficients in base:
        scale = np.linalg.norm(coefficients) / np.sqrt(coefficients.size)
        for i in range(PERTURBATIONS):
            perturbed.append((f"{name}-perturbed{i}", coefficients + 0.3 * scale * rng.standard_normal(coefficients.size)))
    return base + perturbed


def _newton_from(A: StiffnessOperator, params: ProblemParams, config: SolverConfig,
                 known: List[np.ndarray], start: Tuple[str, np.ndarray]) -> Optional[np.ndarray]:
    """Deflated Newton-Krylov from one start, polished without deflation; None on failure."""
    name, coefficients = start

    def deflated(c):
        return _deflation_factor(A, c, known, config) * _preconditioned_residual(A, params, c)

    try:
        c = optimize.newton_krylov(deflated, coefficients, f_tol=config.residual_tol, maxiter=NEWTON_MAXITER)
        c = optimize.newton_krylov(
            lambda x: _preconditioned_residual(A, params, x), c,
            f_tol=1e-2 * config.residual_tol, maxiter=NEWTON_MAXITER,
        )
    except (optimize.NoConvergence, ValueError, np.linalg.LinAlgError, FloatingPointError) as exc:
        logger.debug(f"Start {name} did not converge: {exc}")
        return None
    return c if np.all(np.isfinite(c)) else None


def multi_solution_search(A: StiffnessOperator, params: ProblemParams, count: int,
                          config: SolverConfig = None) -> List[SolutionRecord]:
    """
    Up to ``count`` distinct critical points of I_mu, sorted by energy.

    Each start runs Newton-Krylov on eta(u) A^{-1} I'(u), where eta deflates
    every solution known when its batch began (and u = 0); the result is
    then polished without deflation. Batches of SEARCH_BATCH starts run on
    the thread pool and are accepted in start order, so the result does not
    depend on the pool size. Fewer than ``count`` solutions return a partial
    list with a warning.
    """
    config = config or SolverConfig()
    if count < 1:
        raise InputError('multi_solution_search needs count >= 1.')
    start_time = time.time()
    known = [np.zeros(A.n)]
    found: List[SolutionRecord] = []
    starts = _starts(A, params, count, config)

    for offset in range(0, len(starts), SEARCH_BATCH):
        if len(found) >= count:
            break
        batch = starts[offset:offset + SEARCH_BATCH]
        snapshot = list(known)
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            solutions = list(pool.map(lambda item: _newton_from(A, params, config, snapshot, item), batch))

        for (name, _), c in zip(batch, solutions):
            if len(found) >= count:
                break
            if c is None:
                continue
            u = DiscreteFunction(c, A.mesh)
            size = u.l2_norm()
            if size <= config.part_tol:
                continue
            if any((u - record.function).l2_norm() <= config.dedup_tol * max(size, record.function.l2_norm())
                   for record in found):
                continue
            try:
                record = build_record(A, params, u, f"search-{len(found)}", config, 0, time.time() - start_time,
                                      diagnostics={'start': name, 'order': len(found)})
            except (InputError, RootError) as exc:
                logger.debug(f"Start {name} gave an unclassifiable point: {exc}")
                continue
            if record.residual > config.residual_tol:
                continue
            found.append(record)
            known.append(c)
            logger.info(f"Solution {len(found)} from {name}: I={record.energy.total:.10g}")

    if len(found) < count:
        logger.warning(f"Multi-solution search found {len(found)} of {count} requested solutions")
    found.sort(key=lambda record: record.energy.total)
    for index, record in enumerate(found):
        record.label = f"sol{index}"
    return found


def solution_trends(records: List[SolutionRecord], params: ProblemParams) -> Dict:
    """
    Energy and norm trends of a search in the order solutions were found.

    For lam > 0, mu >= 0: whether the running maximum energy keeps growing
    and whether negative-energy solutions shrink as their energy rises to 0.
    """
    trends: Dict = {'count': len(records)}
    if not records or not (params.lam > 0.0 and params.mu >= 0.0):
        return trends
    ordered = sorted(records, key=lambda record: int(record.diagnostics.get('order', 0)))
    energies = [record.energy.total for record in ordered]
    running_max = list(np.maximum.accumulate(energies))
    trends['max_energy_by_count'] = running_max
    trends['max_energy_grows'] = bool(len(running_max) > 1 and running_max[-1] > running_max[0])

    negative = sorted((record for record in records if record.energy.total < 0.0), key=lambda r: r.energy.total)
    norms = [record.energy.quadratic for record in negative]
    trends['negative_energy_norms'] = [float(np.sqrt(2.0 * value)) for value in norms]
    trends['negative_branch_shrinks'] = bool(len(norms) > 1 and all(b <= a for a, b in zip(norms, norms[1:])))
    return trends
