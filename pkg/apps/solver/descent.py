"""
FRACNEHARI - Nehari Descent
Projected steepest descent of J_mu on the N+ and N- branches.
"""

import logging
import time

import numpy as np
import scipy.linalg

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.core.exceptions import EigenError, InputError, NoRoots, NonConvergence, ParamError, RootError
from apps.fibering import thresholds as th
from apps.fibering.entities import N_MINUS, N_PLUS
from apps.fibering.services import FiberingService
from apps.functional.services import FunctionalService
from .entities import W0, W1, SolutionRecord, SolverConfig
from .records import TraceLog, build_record

logger = logging.getLogger('apps.solver')

# Energy comparisons allow this relative slack for rounding
ROUNDING = 1e-13


def initial_guess(A: StiffnessOperator, params: ProblemParams) -> DiscreteFunction:
    """Smallest generalized eigenvector of (A, M), made positive, unit X0 norm."""
    try:
        _, vectors = scipy.linalg.eigh(A.matrix, A.mass, subset_by_index=[0, 0])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenError(f"Ground eigenvector failed: {exc}")
    v = np.abs(vectors[:, 0])
    return DiscreteFunction(v / np.sqrt(A.inner(v, v)), A.mesh)


def project_on_branch(A: StiffnessOperator, params: ProblemParams, u: DiscreteFunction,
                      branch: str) -> DiscreteFunction:
    """
    t u with t = t-(u) on N+ or t+(u) on N-, from the positive-part fiber.

    Raises:
        NoRoots: the fiber of u^+ never reaches the branch.
        InputError: u^+ = 0.
    """
    norms = FiberingService.norms(u, A, params, positive_part=True)
    report = FiberingService.roots_from_norms(norms, params, strict=True)
    t = report.t_minus if branch == N_PLUS else report.t_plus
    if t is None:
        raise NoRoots(f"Branch {branch} has no fibering root for this direction.")
    return t * u


def _positive_energy(A, u, params) -> float:
    return FunctionalService.energy_positive_part(A, u, params).total


def minimize_on_nehari(A: StiffnessOperator, params: ProblemParams, branch: str,
                       init: DiscreteFunction = None, config: SolverConfig = None,
                       label: str = None) -> SolutionRecord:
    """
    Minimize J_mu over N+ (label w0) or N- (label w1).

    Each step moves along the Riesz direction A d = -J'(u), projects back by
    the fibering root of the branch and backtracks (Armijo) on the projected
    energy. A projection without roots counts as a rejected step.

    Raises:
        ParamError: N+ requested with mu <= 0.
        NoRoots: the initial guess cannot be projected.
        NonConvergence: budget exhausted or steps stalled; carries the last
            (lowest-energy) iterate.
    """
    config = config or SolverConfig()
    if branch not in (N_PLUS, N_MINUS):
        raise ParamError(f"Unknown Nehari branch '{branch}'.")
    if branch == N_PLUS and not params.mu > 0.0:
        raise ParamError('The N+ branch is empty unless mu > 0.')
    label = label or (W0 if branch == N_PLUS else W1)

    start = time.time()
    u = initial_guess(A, params) if init is None else init
    if u.is_zero():
        raise InputError('Initial guess must be nonzero.')
    u = project_on_branch(A, params, u, branch)
    energy = _positive_energy(A, u, params)

    ceiling = None
    if params.is_critical and config.S_estimate:
        ceiling = th.compactness_ceiling(params, config.S_estimate)
    warned = False
    trace = TraceLog(config.trace_path, label)
    min_psi = FiberingService.psi_mu_diagnostic(u, A, params)
    damped = 0
    step = 1.0

    def diagnostics():
        return {
            'branch': branch, 'min_psi': min_psi, 'damped_steps': damped,
            'compactness_ceiling': ceiling,
            'above_ceiling': bool(ceiling is not None and energy > ceiling),
        }

    for iteration in range(config.max_iters + 1):
        r = FunctionalService.gradient(A, u, params, positive_part=True)
        residual = FunctionalService.dual_norm(A, r)
        trace.append(iteration=iteration, energy=energy, residual=residual, step=step)
        if residual <= config.residual_tol:
            break
        if iteration == config.max_iters:
            best = build_record(A, params, u, label, config, iteration, time.time() - start,
                                trace.entries, diagnostics())
            raise NonConvergence(
                f"{label}: residual {residual:.3e} after {iteration} iterations.",
                extra={'residual': residual}, best=best,
            )

        direction = u.with_coefficients(FunctionalService.riesz_direction(A, r))
        slope = residual ** 2
        alpha = min(1.0, 2.0 * step)
        candidate = None
        while alpha >= config.min_step:
            try:
                trial = project_on_branch(A, params, u + alpha * direction, branch)
            except (NoRoots, RootError, InputError):
                damped += 1
                alpha *= config.backtrack
                continue
            trial_energy = _positive_energy(A, trial, params)
            if trial_energy <= energy - config.armijo_c * alpha * slope + ROUNDING * max(1.0, abs(energy)):
                candidate = trial
                break
            alpha *= config.backtrack

        if candidate is None:
            best = build_record(A, params, u, label, config, iteration, time.time() - start,
                                trace.entries, diagnostics())
            raise NonConvergence(
                f"{label}: line search stalled at residual {residual:.3e}.",
                extra={'residual': residual}, best=best,
            )

        u, energy, step = candidate, trial_energy, alpha
        min_psi = min(min_psi, FiberingService.psi_mu_diagnostic(u, A, params))
        if ceiling is not None and energy > ceiling and not warned:
            logger.warning(f"{label}: energy {energy:.6g} above the compactness ceiling {ceiling:.6g}")
            warned = True

    record = build_record(A, params, u, label, config, iteration, time.time() - start,
                          trace.entries, diagnostics())
    logger.info(
        f"{label} converged: I={record.energy.total:.10g}, residual={record.residual:.2e}, "
        f"{iteration} iterations in {record.wall_time:.2f}s"
    )
    return record
