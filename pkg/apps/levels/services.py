"""
FRACNEHARI - Level Services
Eigenbasis splitting, beta_k ascent, embedding constant and the level radii.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg
from django.conf import settings

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.core.exceptions import EigenError, InputError
from apps.core.utils import thread_count
from apps.core.validators import validate_lp_exponent, validate_positive
from apps.functional.services import FunctionalService, signed_power
from .entities import BetaEstimate, EmbeddingEstimate, LevelRadii, LevelStructure, SphereCheck

logger = logging.getLogger('apps.levels')


def _ascend(levels: LevelStructure, k: int, r: float, start: np.ndarray, max_iters: int, tol: float):
    """
    Maximize F(c) = int |Z_k c|^r on the unit sphere by c <- grad F / |grad F|.

    F is convex and positively homogeneous, so every step increases F.
    """
    Z = levels.z_basis(k)
    mesh = levels.operator.mesh
    _, weights, _, _ = mesh.gauss_rule
    c = start / np.linalg.norm(start)

    for iteration in range(1, max_iters + 1):
        u = DiscreteFunction(Z @ c, mesh)
        values = u.quadrature_values()
        gradient = Z.T @ (r * FunctionalService.load_vector(u, signed_power(values, r - 1.0)))
        norm = np.linalg.norm(gradient)
        if norm == 0.0:
            break
        step = gradient / norm
        change = np.linalg.norm(step - c)
        c = step
        if change <= tol:
            break
    else:
        iteration = max_iters + 1

    u = DiscreteFunction(Z @ c, mesh)
    value = float(np.sum(weights * np.abs(u.quadrature_values()) ** r)) ** (1.0 / r)
    return value, c, min(iteration, max_iters), iteration > max_iters


class LevelService:
    """
    Service for the Galerkin level structure Y_k / Z_k.
    """

    # ------------------------------------------------------------------
    # Eigenbasis
    # ------------------------------------------------------------------

    @staticmethod
    def build_levels(A: StiffnessOperator, mass: np.ndarray = None, k_max: int = None) -> LevelStructure:
        """
        Solve A e = lam M e and rescale the eigenvectors to unit X0 norm.

        Raises:
            EigenError: the generalized eigensolver fails or a nonpositive
                eigenvalue appears.
        """
        start = time.time()
        mass = A.mass if mass is None else np.asarray(mass, dtype=float)
        if mass.shape != (A.n, A.n):
            raise InputError(f"Mass matrix shape {mass.shape} does not match operator size {A.n}.")
        k_max = A.n if k_max is None else int(k_max)
        if not 1 <= k_max <= A.n:
            raise InputError(f"k_max must lie in 1..{A.n} (got {k_max}).")

        try:
            eigenvalues, vectors = scipy.linalg.eigh(A.matrix, mass)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenError(f"Generalized eigensolver failed: {exc}")
        if not np.all(eigenvalues > 0.0):
            raise EigenError(f"Nonpositive eigenvalue {eigenvalues.min():.3g}; operator is not definite.")

        basis = vectors / np.sqrt(eigenvalues)[None, :]
        levels = LevelStructure(operator=A, mass=mass, eigenvalues=eigenvalues, basis=basis, k_max=k_max)
        logger.info(
            f"Levels built: n={A.n}, lambda_1={eigenvalues[0]:.6g}, "
            f"max residual={levels.eigen_residuals().max():.2e} in {time.time() - start:.2f}s"
        )
        return levels

    # ------------------------------------------------------------------
    # beta_k
    # ------------------------------------------------------------------

    @staticmethod
    def _best_ascent(levels: LevelStructure, r: float, k: int, warm_start: np.ndarray = None,
                     n_random: int = None, seed: int = 0, max_iters: int = 500, tol: float = 1e-10) -> BetaEstimate:
        dimension = levels.n - k + 1
        n_random = settings.FRACNEHARI_ASCENT_STARTS if n_random is None else int(n_random)

        starts = []
        if warm_start is not None:
            warm = np.zeros(dimension)
            warm[dimension - warm_start.size:] = warm_start
            starts.append(('warm', warm))
        unit = np.zeros(dimension)
        unit[0] = 1.0
        starts.append(('e_k', unit))
        rng = np.random.default_rng([seed, k])
        for i in range(n_random):
            starts.append((f"random-{i}", rng.standard_normal(dimension)))

        def run(start):
            return _ascend(levels, k, r, start[1], max_iters, tol)

        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            results = list(pool.map(run, starts))

        # Highest value wins; ties go to the earliest start
        best = max(range(len(starts)), key=lambda i: (results[i][0], -i))
        value, coefficients, iterations, stagnated = results[best]
        if stagnated:
            logger.warning(f"beta_{k} (r={r:g}) ascent stagnated after {iterations} iterations")
        return BetaEstimate(
            k=k, r=float(r), value=value, coefficients=coefficients,
            start=starts[best][0], iterations=iterations, stagnated=stagnated,
        )

    @staticmethod
    def estimate_beta_k(levels: LevelStructure, r: float, k: int, warm_start: np.ndarray = None,
                        n_random: int = None, seed: int = 0, max_iters: int = 500) -> BetaEstimate:
        """
        Lower bound of beta_k = sup{|u|_{L^r} : u in Z_k, ||u|| = 1} by
        multi-start ascent.

        ``warm_start`` is a maximizer for level k+1 in Z_{k+1} coordinates.
        """
        validate_lp_exponent(r)
        two_star = levels.operator.params.critical_exponent
        if not r < two_star:
            raise InputError(f"beta_k needs r < 2* = {two_star:.6g} (got r={r}).")
        levels._check_level(k)
        return LevelService._best_ascent(levels, r, k, warm_start, n_random, seed, max_iters)

    @staticmethod
    def beta_sequence(levels: LevelStructure, r: float, k_max: int = None, seed: int = 0,
                      n_random: int = None) -> List[BetaEstimate]:
        """beta_k for k = k_max..1, each warm-started from k+1; nonincreasing in k."""
        k_max = levels.k_max if k_max is None else int(k_max)
        estimates = []
        warm = None
        for k in range(k_max, 0, -1):
            estimate = LevelService.estimate_beta_k(levels, r, k, warm_start=warm, n_random=n_random, seed=seed)
            estimates.append(estimate)
            warm = estimate.coefficients
        estimates.reverse()
        logger.info(
            f"beta sequence r={r:g}: beta_1={estimates[0].value:.6g}, "
            f"beta_{k_max}={estimates[-1].value:.6g}"
        )
        return estimates

    @staticmethod
    def estimate_embedding_constant(levels: LevelStructure, seed: int = 0, n_random: int = None) -> EmbeddingEstimate:
        """c = sup_{||u||=1} |u|_{2*}^{2*} on the discrete space, from sampled ascent."""
        two_star = levels.operator.params.critical_exponent
        estimate = LevelService._best_ascent(levels, two_star, 1, n_random=n_random, seed=seed)
        logger.warning('Embedding constant is a sampled lower bound of a continuum supremum')
        return EmbeddingEstimate(value=estimate.value ** two_star, exponent=two_star, stagnated=estimate.stagnated)

    # ------------------------------------------------------------------
    # Radii
    # ------------------------------------------------------------------

    @staticmethod
    def radii(params: ProblemParams, beta_concave: float, beta_convex: float,
              c_embed: float = None) -> LevelRadii:
        """
        rho_k = (4 mu beta^{q+1}/(q+1))^{1/(1-q)} with the L^{q+1} beta,
        r_k = ((lam+|mu|) beta^{p+1})^{1/(1-p)} with the L^{p+1} beta,
        R = (2*/(4c))^{1/(2*-2)} and r_k_dual = rho_k/2.

        Radii whose weight is not positive are None.
        """
        validate_positive(beta_concave, 'beta_concave')
        validate_positive(beta_convex, 'beta_convex')
        q, p = params.q, params.p
        two_star = params.critical_exponent

        rho_k = None
        if params.mu > 0.0:
            rho_k = (4.0 * params.mu * beta_concave ** (q + 1.0) / (q + 1.0)) ** (1.0 / (1.0 - q))
        weight = params.lam + abs(params.mu)
        r_k = (weight * beta_convex ** (p + 1.0)) ** (1.0 / (1.0 - p)) if weight > 0.0 else None
        R = None
        if c_embed is not None:
            validate_positive(c_embed, 'c_embed')
            R = (two_star / (4.0 * c_embed)) ** (1.0 / (two_star - 2.0))
        return LevelRadii(rho_k=rho_k, r_k=r_k, R=R, r_k_dual=None if rho_k is None else 0.5 * rho_k)

    @staticmethod
    def levels_table(levels: LevelStructure, params: ProblemParams, concave: List[BetaEstimate],
                     convex: List[BetaEstimate]) -> List[Dict]:
        """Rows (k, lambda_k, beta_k, rho_k, r_k) for the levels CSV."""
        rows = []
        for low, high in zip(concave, convex):
            radii = LevelService.radii(params, low.value, high.value)
            rows.append({
                'k': low.k,
                'lambda_k': float(levels.eigenvalues[low.k - 1]),
                'beta_k_concave': low.value,
                'beta_k_convex': high.value,
                'rho_k': radii.rho_k,
                'r_k': radii.r_k,
                'stagnated': low.stagnated or high.stagnated,
            })
        return rows

    # ------------------------------------------------------------------
    # Sampled sphere checks
    # ------------------------------------------------------------------

    @staticmethod
    def sphere_checks(levels: LevelStructure, params: ProblemParams, k: int, radii: LevelRadii,
                      beta_concave: Optional[float] = None, n_samples: int = 100, seed: int = 0) -> SphereCheck:
        """
        Count samples violating I >= 0 on the Z_k sphere of radius rho_k and
        I < 0 on the Y_k sphere of radius r_k_dual. Also reports the sampled
        minimum over the Z_k ball of radius rho_k against
        -mu/(q+1) beta^{q+1} rho^{q+1}.
        """
        if radii.rho_k is None:
            raise InputError('Sphere checks need rho_k, which requires mu > 0.')
        levels._check_level(k)
        A = levels.operator
        rng = np.random.default_rng([seed, k])
        rho, r_dual = radii.rho_k, radii.r_k_dual

        def energy(u):
            return FunctionalService.energy(A, u, params).total

        def sphere(dimension):
            c = rng.standard_normal(dimension)
            return c / np.linalg.norm(c)

        z_dim = levels.n - k + 1
        z_energies = np.array([energy(levels.z_function(k, rho * sphere(z_dim))) for _ in range(n_samples)])
        y_energies = np.array([energy(levels.y_function(k, r_dual * sphere(k))) for _ in range(n_samples)])
        ball = np.array([
            energy(levels.z_function(k, rho * rng.uniform() * sphere(z_dim))) for _ in range(n_samples)
        ])

        q = params.q
        bound = float('nan')
        if beta_concave is not None:
            bound = -params.mu / (q + 1.0) * beta_concave ** (q + 1.0) * rho ** (q + 1.0)

        check = SphereCheck(
            k=k, n_samples=n_samples, z_radius=rho, y_radius=r_dual,
            z_failures=int(np.sum(z_energies < 0.0)),
            y_failures=int(np.sum(y_energies >= 0.0)),
            z_min_energy=float(z_energies.min()),
            y_max_energy=float(y_energies.max()),
            ball_lower_bound=bound,
            ball_min_energy=float(ball.min()),
        )
        if check.z_failures or check.y_failures:
            logger.info(f"Sphere checks at k={k}: {check.z_failures} Z_k and {check.y_failures} Y_k failures")
        return check
