"""
FRACNEHARI - Sign-Changing Solutions
Continuation start a (w1 - b u_eps) and the two-sided nodal Nehari descent.
"""

import logging
import time
from typing import Tuple

import numpy as np
from scipy import optimize

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.bubbles.entities import BubbleParams
from apps.bubbles.services import BubbleService
from apps.core.exceptions import (
    CollapseError, ContinuationError, InputError, NoRoots, NonConvergence, RootError,
)
from apps.fibering.services import FiberingService
from apps.functional.services import FunctionalService
from .descent import ROUNDING
from .entities import W2, ContinuationResult, SolutionRecord, SolverConfig
from .records import TraceLog, build_record

logger = logging.getLogger('apps.solver')

SCAN_POINTS = 64


def _t_plus(part: DiscreteFunction, A: StiffnessOperator, params: ProblemParams) -> float:
    return FiberingService.fibering_roots(part, A, params, strict=True).t_plus


# ----------------------------------------------------------------------
# Continuation
# ----------------------------------------------------------------------

def sign_changing_continuation(A: StiffnessOperator, params: ProblemParams, w1: DiscreteFunction,
                               bp: BubbleParams, n_scan: int = SCAN_POINTS) -> ContinuationResult:
    """
    Find r = b in (r1, r2) where the nodal parts of w1 - r u_eps share their
    N- rescaling s+(b) = s-(b) = a.

    (r1, r2) are the extreme nodal ratios w1/u_eps; s+ - s- goes from
    negative near r1 to positive near r2 and is bracketed on a uniform scan.

    Raises:
        InputError: w1 is not positive at every interior node.
        ContinuationError: no sign change on the scan (table attached).
    """
    params.require_sign_changing_regime()
    if np.any(w1.coefficients <= 0.0):
        raise InputError('Continuation needs a positive w1 at every interior node.')
    bubble = BubbleService.bubble_interpolant(A.mesh, bp)
    ratios = w1.coefficients / bubble.coefficients
    r1, r2 = float(ratios.min()), float(ratios.max())
    if not r2 > r1:
        raise ContinuationError('w1 is proportional to u_eps; the nodal ratios do not spread.')

    def parts(r):
        plus, minus = FunctionalService.split_parts(w1 - r * bubble)
        return _t_plus(plus, A, params), _t_plus(minus, A, params)

    scan = []
    grid = r1 + (r2 - r1) * (np.arange(n_scan) + 0.5) / n_scan
    for r in grid:
        try:
            s_plus, s_minus = parts(r)
        except NoRoots:
            s_plus, s_minus = float('nan'), float('nan')
        scan.append({'r': float(r), 's_plus': s_plus, 's_minus': s_minus, 'difference': s_plus - s_minus})

    bracket = None
    for left, right in zip(scan, scan[1:]):
        if left['difference'] < 0.0 < right['difference']:
            bracket = (left['r'], right['r'])
            break
    if bracket is None:
        raise ContinuationError(
            's+ - s- does not change sign on the continuation scan.',
            extra={'scan': scan, 'r_bar': [r1, r2]},
        )

    def difference(r):
        s_plus, s_minus = parts(r)
        return s_plus - s_minus

    try:
        b = optimize.brentq(difference, *bracket, xtol=1e-14 * max(1.0, abs(r2)), rtol=1e-13)
    except NoRoots as exc:
        raise ContinuationError(f"Fibering roots lost inside the bracket: {exc.detail}", extra={'scan': scan})
    a, _ = parts(b)
    logger.info(f"Continuation: a={a:.10g}, b={b:.10g} in ({r1:.6g}, {r2:.6g})")
    return ContinuationResult(a=a, b=b, u_init=a * (w1 - b * bubble), r_bar=(r1, r2), scan=scan)


# ----------------------------------------------------------------------
# Two-sided projection
# ----------------------------------------------------------------------

def nodal_projection(A: StiffnessOperator, params: ProblemParams, u: DiscreteFunction,
                     config: SolverConfig, start: Tuple[float, float] = None) -> DiscreteFunction:
    """
    alpha u+ - beta u- with <I'(v), u+> = <I'(v), u-> = 0 for v itself.

    Solved in (log alpha, log beta); the default start rescales each part by
    its own t+ root.

    Raises:
        CollapseError: a nodal part has L2 norm below part_tol.
        RootError: the coupled system is not solved to projection_tol.
    """
    plus, minus = FunctionalService.split_parts(u)
    if plus.l2_norm() < config.part_tol or minus.l2_norm() < config.part_tol:
        raise CollapseError(
            f"Nodal parts have L2 norms {plus.l2_norm():.3e} and {minus.l2_norm():.3e}.",
        )
    if start is None:
        start = (_t_plus(plus, A, params), _t_plus(minus, A, params))
    a_plus, a_minus = A.inner(plus, plus), A.inner(minus, minus)

    def equations(x):
        alpha, beta = np.exp(x)
        r = FunctionalService.gradient(A, alpha * plus - beta * minus, params)
        return [
            float(r @ plus.coefficients) / (alpha * a_plus),
            -float(r @ minus.coefficients) / (beta * a_minus),
        ]

    solution = optimize.root(equations, np.log(start), method='hybr', options={'xtol': 1e-14})
    mismatch = float(np.max(np.abs(equations(solution.x))))
    if not np.all(np.isfinite(solution.x)) or mismatch > config.projection_tol:
        raise RootError(f"Nodal Nehari projection missed tolerance ({mismatch:.3e}).")
    alpha, beta = np.exp(solution.x)
    return alpha * plus - beta * minus


def minimize_sign_changing(A: StiffnessOperator, params: ProblemParams, u_init: DiscreteFunction,
                           config: SolverConfig = None, label: str = W2,
                           reference_energy: float = None) -> SolutionRecord:
    """
    Minimize I_mu over the nodal set {<I'(u), u+> = <I'(u), u-> = 0} by
    projected Riesz descent.

    ``reference_energy`` (I(w1)) adds the comparison with
    I(w1) + (s/N) S^{N/2s} when config.S_estimate is set.

    Raises:
        CollapseError: every trial step collapsed a nodal part.
        NonConvergence: budget exhausted or steps stalled.
    """
    config = config or SolverConfig()
    params.require_sign_changing_regime()
    start = time.time()
    u = nodal_projection(A, params, u_init, config)
    energy = FunctionalService.energy(A, u, params).total
    trace = TraceLog(config.trace_path, label)
    step = 1.0
    damped = 0

    for iteration in range(config.max_iters + 1):
        r = FunctionalService.gradient(A, u, params)
        residual = FunctionalService.dual_norm(A, r)
        trace.append(iteration=iteration, energy=energy, residual=residual, step=step)
        if residual <= config.residual_tol:
            break
        if iteration == config.max_iters:
            best = build_record(A, params, u, label, config, iteration, time.time() - start, trace.entries)
            raise NonConvergence(
                f"{label}: residual {residual:.3e} after {iteration} iterations.",
                extra={'residual': residual}, best=best,
            )

        direction = u.with_coefficients(FunctionalService.riesz_direction(A, r))
        alpha = min(1.0, 2.0 * step)
        candidate, collapsed = None, False
        while alpha >= config.min_step:
            try:
                trial = nodal_projection(A, params, u + alpha * direction, config, start=(1.0, 1.0))
            except CollapseError:
                collapsed = True
                damped += 1
                alpha *= config.backtrack
                continue
            except (RootError, NoRoots, InputError):
                damped += 1
                alpha *= config.backtrack
                continue
            trial_energy = FunctionalService.energy(A, trial, params).total
            if trial_energy <= energy - config.armijo_c * alpha * residual ** 2 + ROUNDING * max(1.0, abs(energy)):
                candidate = trial
                break
            alpha *= config.backtrack

        if candidate is None:
            if collapsed:
                raise CollapseError(f"{label}: every trial step collapsed a nodal part.")
            best = build_record(A, params, u, label, config, iteration, time.time() - start, trace.entries)
            raise NonConvergence(
                f"{label}: line search stalled at residual {residual:.3e}.",
                extra={'residual': residual}, best=best,
            )
        u, energy, step = candidate, trial_energy, alpha

    plus, minus = FunctionalService.split_parts(u)
    whole = FunctionalService.energy(A, u, params).total
    split = FunctionalService.energy(A, plus, params).total + FunctionalService.energy(A, minus, params).total
    diagnostics = {
        'damped_steps': damped,
        'decoupled_plus_class': FiberingService.classify_nehari(plus, A, params),
        'decoupled_minus_class': FiberingService.classify_nehari(-minus, A, params),
        'part_coupling': A.inner(plus, minus),
        'energy_plus': FunctionalService.energy(A, plus, params).total,
        'energy_minus': FunctionalService.energy(A, minus, params).total,
        'decomposition_holds': bool(whole >= split - ROUNDING * max(1.0, abs(whole))),
    }
    if reference_energy is not None and config.S_estimate:
        level = params.s / params.N * config.S_estimate ** (params.N / (2.0 * params.s))
        diagnostics['compactness_reference'] = reference_energy + level
        diagnostics['reference_gap'] = reference_energy + level - whole
        diagnostics['below_reference'] = bool(whole < reference_energy + level)

    record = build_record(A, params, u, label, config, iteration, time.time() - start,
                          trace.entries, diagnostics)
    if not record.sign_changing:
        raise CollapseError(f"{label}: converged to a one-signed function.")
    logger.info(
        f"{label} converged: I={record.energy.total:.10g}, residual={record.residual:.2e}, "
        f"{iteration} iterations in {record.wall_time:.2f}s"
    )
    return record
