"""
FRACNEHARI - Assembly Services
Stiffness assembly for the X0 inner product and the Lebesgue functionals.
"""

import time
from typing import Dict, Tuple

import numpy as np
from django.conf import settings
import logging

from apps.core.exceptions import DimensionError, InputError, MeshError
from apps.core.utils import array_fingerprint
from apps.core.validators import validate_fractional_order, validate_lp_exponent
from .entities import DiscreteFunction, Mesh, ProblemParams, StiffnessOperator
from .quadrature import (
    adjacent_local,
    far_field,
    gauss_legendre,
    same_element_local,
    tail_function,
    tail_local_matrices,
)

logger = logging.getLogger('apps.assembly')


class AssemblyService:
    """
    Service assembling the nonlocal stiffness operator on a 1-D mesh.
    """

    @staticmethod
    def assemble_stiffness(mesh: Mesh, params: ProblemParams, far_order: int = None,
                           near_order: int = None) -> StiffnessOperator:
        """
        Assemble A_ij = int_Q (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) K(x-y) dx dy,
        Q = R^2 minus the exterior square, split as interaction + tail.
        """
        validate_fractional_order(params.N, params.s)
        if not (np.isclose(mesh.a, params.a) and np.isclose(mesh.b, params.b)):
            raise MeshError('Mesh does not cover the problem domain.')

        far_order = int(far_order or settings.FRACNEHARI_FAR_ORDER)
        near_order = int(near_order or settings.FRACNEHARI_NEAR_ORDER)
        started = time.perf_counter()

        n_nodes = mesh.nodes.size
        full = np.zeros((n_nodes, n_nodes))
        widths = mesh.widths

        same_cache: Dict[float, np.ndarray] = {}
        adjacent_cache: Dict[Tuple[float, float], np.ndarray] = {}

        for e in range(mesh.n_elements):
            key = float(f"{widths[e]:.15g}")
            if key not in same_cache:
                same_cache[key] = same_element_local(widths[e], params, near_order)
            full[e:e + 2, e:e + 2] += same_cache[key]

        for k in range(1, n_nodes - 1):
            key = (float(f"{widths[k - 1]:.15g}"), float(f"{widths[k]:.15g}"))
            if key not in adjacent_cache:
                adjacent_cache[key] = adjacent_local(widths[k - 1], widths[k], params, near_order)
            full[k - 1:k + 2, k - 1:k + 2] += adjacent_cache[key]

        points, weights = gauss_legendre(far_order)
        far = far_field(
            mesh.nodes, points, weights, float(params.s),
            params.profile_radii, params.profile_values, np.zeros((n_nodes, n_nodes)),
        )
        full += far

        interaction = full[1:-1, 1:-1]
        interaction = 0.5 * (interaction + interaction.T)

        tail_full = np.zeros((n_nodes, n_nodes))
        for e, block in enumerate(tail_local_matrices(mesh, params, near_order)):
            tail_full[e:e + 2, e:e + 2] += block
        tail = tail_full[1:-1, 1:-1]
        tail = 0.5 * (tail + tail.T)

        interior = mesh.interior_nodes
        tail_weights = tail_function(interior - mesh.a, params) + tail_function(mesh.b - interior, params)

        fingerprint = array_fingerprint(mesh.nodes, **params.kernel_signature())
        operator = StiffnessOperator(
            interaction=np.ascontiguousarray(interaction),
            tail=np.ascontiguousarray(tail),
            tail_weights=tail_weights,
            mass=AssemblyService.mass_matrix(mesh),
            mesh=mesh,
            params=params,
            fingerprint=fingerprint,
        )

        logger.info(
            f"Assembled stiffness n={mesh.n_interior} s={params.s} kernel={params.kernel} "
            f"in {time.perf_counter() - started:.3f}s (fingerprint {fingerprint[:12]})"
        )
        return operator

    @staticmethod
    def mass_matrix(mesh: Mesh) -> np.ndarray:
        """Consistent P1 L2 Gram matrix on interior nodes."""
        n_nodes = mesh.nodes.size
        full = np.zeros((n_nodes, n_nodes))
        local = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
        for e, h in enumerate(mesh.widths):
            full[e:e + 2, e:e + 2] += h * local
        return full[1:-1, 1:-1].copy()

    # ------------------------------------------------------------------
    # Norms
    # ------------------------------------------------------------------

    @staticmethod
    def gagliardo_norm(A: StiffnessOperator, u: DiscreteFunction) -> float:
        """||u||_X0 = sqrt(u^T A u)."""
        coefficients = A.check_dimension(u)
        return float(np.sqrt(max(coefficients @ A.matrix @ coefficients, 0.0)))

    @staticmethod
    def lp_power(u: DiscreteFunction, r: float) -> float:
        """int_Omega |u_h|^r by per-element Gauss quadrature of the interpolant."""
        validate_lp_exponent(r)
        _, weights, _, _ = u.mesh.gauss_rule
        return float(np.sum(weights * np.abs(u.quadrature_values()) ** r))

    @staticmethod
    def lp_norm(u: DiscreteFunction, r: float) -> float:
        """(int_Omega |u_h|^r)^{1/r}."""
        return AssemblyService.lp_power(u, r) ** (1.0 / r)

    @staticmethod
    def sobolev_quotient(A: StiffnessOperator, u: DiscreteFunction) -> float:
        """||u||^2 / |u|_{2*}^2."""
        if u.is_zero():
            raise InputError('Sobolev quotient is undefined for the zero function.')
        two_star = A.params.critical_exponent
        numerator = AssemblyService.gagliardo_norm(A, u) ** 2
        return numerator / AssemblyService.lp_norm(u, two_star) ** 2

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    @staticmethod
    def dump_operator(A: StiffnessOperator) -> Dict:
        from .serializers import StiffnessOperatorSerializer
        return StiffnessOperatorSerializer(A).data

    @staticmethod
    def load_operator(payload: Dict) -> StiffnessOperator:
        """
        Rebuild an operator from its JSON form.

        The fingerprint is recomputed from the stored nodes and kernel
        parameters; a mismatch raises MeshError.
        """
        from .serializers import MeshSerializer, ProblemParamsSerializer

        params_serializer = ProblemParamsSerializer(data=payload.get('params', {}))
        params_serializer.is_valid(raise_exception=True)
        mesh_serializer = MeshSerializer(data=payload.get('mesh', {}))
        mesh_serializer.is_valid(raise_exception=True)
        params = params_serializer.to_params()
        mesh = mesh_serializer.to_mesh()

        fingerprint = array_fingerprint(mesh.nodes, **params.kernel_signature())
        if fingerprint != payload.get('fingerprint'):
            raise MeshError('Operator fingerprint mismatch: data belongs to another mesh or kernel.')

        matrix = np.asarray(payload['matrix'], dtype=float)
        if matrix.shape != (mesh.n_interior, mesh.n_interior):
            raise DimensionError(f"Stored matrix has shape {matrix.shape}, mesh has {mesh.n_interior} unknowns.")
        tail = np.asarray(payload['tail'], dtype=float) if 'tail' in payload else np.zeros_like(matrix)
        interaction = matrix - tail

        logger.info(f"Loaded operator n={mesh.n_interior} (fingerprint {fingerprint[:12]})")
        return StiffnessOperator(
            interaction=interaction,
            tail=tail,
            tail_weights=np.asarray(payload['tail_weights'], dtype=float),
            mass=AssemblyService.mass_matrix(mesh),
            mesh=mesh,
            params=params,
            fingerprint=fingerprint,
        )
