"""
FRACNEHARI - Functional Services
Energy, positive-part energy, weak gradient and the part decomposition.
"""

from typing import Dict, Tuple

import numpy as np
from django.conf import settings
import logging

from apps.assembly.entities import DiscreteFunction, Mesh, ProblemParams, StiffnessOperator
from apps.assembly.quadrature import adjacent_moments, gauss_legendre
from apps.assembly.services import AssemblyService
from apps.core.exceptions import DimensionError, PartError
from .entities import EnergyBreakdown

logger = logging.getLogger('apps.functional')


def signed_power(values, exponent):
    """|v|^{exponent-1} v with the value 0 at v = 0."""
    return np.sign(values) * np.abs(values) ** exponent


class FunctionalService:
    """
    Service evaluating I_mu, J_mu and their weak gradients on P1 functions.
    """

    # ------------------------------------------------------------------
    # Energies
    # ------------------------------------------------------------------

    @staticmethod
    def energy(A: StiffnessOperator, u: DiscreteFunction, params: ProblemParams,
               positive_part: bool = False) -> EnergyBreakdown:
        """
        I(u) = 1/2 ||u||^2 - mu/(q+1) int |u|^{q+1} - lam/(p+1) int |u|^{p+1}.

        With ``positive_part`` the Lebesgue terms act on u^+ pointwise (J_mu).
        """
        quadratic = 0.5 * AssemblyService.gagliardo_norm(A, u) ** 2
        values = np.abs(u.quadrature_values())
        if positive_part:
            values = np.maximum(u.quadrature_values(), 0.0)
        _, weights, _, _ = u.mesh.gauss_rule

        concave = params.mu / (params.q + 1.0) * float(np.sum(weights * values ** (params.q + 1.0)))
        convex = params.lam / (params.p + 1.0) * float(np.sum(weights * values ** (params.p + 1.0)))
        return EnergyBreakdown(
            quadratic=quadratic,
            concave=concave,
            convex=convex,
            total=quadratic - concave - convex,
        )

    @staticmethod
    def energy_positive_part(A: StiffnessOperator, u: DiscreteFunction,
                             params: ProblemParams) -> EnergyBreakdown:
        return FunctionalService.energy(A, u, params, positive_part=True)

    # ------------------------------------------------------------------
    # Gradient
    # ------------------------------------------------------------------

    @staticmethod
    def load_vector(u: DiscreteFunction, values: np.ndarray) -> np.ndarray:
        """int f phi_i over interior hats, f given at the per-element Gauss points."""
        mesh = u.mesh
        _, weights, left, right = mesh.gauss_rule
        weighted = weights * values
        full = np.zeros(mesh.nodes.size)
        full[:-1] += weighted @ left
        full[1:] += weighted @ right
        return full[1:-1]

    @staticmethod
    def gradient(A: StiffnessOperator, u: DiscreteFunction, params: ProblemParams,
                 positive_part: bool = False) -> np.ndarray:
        """
        Covector r_i = <I'(u), phi_i> = (Au)_i - mu int |u|^{q-1}u phi_i
        - lam int |u|^{p-1}u phi_i.
        """
        values = u.quadrature_values()
        if positive_part:
            values = np.maximum(values, 0.0)
        nonlinear = params.mu * signed_power(values, params.q) + params.lam * signed_power(values, params.p)
        return A.apply(u) - FunctionalService.load_vector(u, nonlinear)

    @staticmethod
    def nehari_value(A: StiffnessOperator, u: DiscreteFunction, params: ProblemParams,
                     positive_part: bool = False) -> float:
        """<I'(u), u> = ||u||^2 - mu |u|_{q+1}^{q+1} - lam |u|_{p+1}^{p+1}."""
        return float(FunctionalService.gradient(A, u, params, positive_part) @ u.coefficients)

    @staticmethod
    def riesz_direction(A: StiffnessOperator, r: np.ndarray) -> np.ndarray:
        """Steepest descent direction in X0: A d = -r."""
        return -A.solve(A.check_dimension(r))

    @staticmethod
    def dual_norm(A: StiffnessOperator, r: np.ndarray) -> float:
        """||r||_{X0*} = sqrt(r^T A^{-1} r)."""
        r = A.check_dimension(r)
        return float(np.sqrt(max(r @ A.solve(r), 0.0)))

    # ------------------------------------------------------------------
    # Parts
    # ------------------------------------------------------------------

    @staticmethod
    def split_parts(u: DiscreteFunction) -> Tuple[DiscreteFunction, DiscreteFunction]:
        """Nodal u^+ = max(u, 0), u^- = max(-u, 0); u = u^+ - u^-."""
        c = u.coefficients
        return u.with_coefficients(np.maximum(c, 0.0)), u.with_coefficients(np.maximum(-c, 0.0))

    @staticmethod
    def conforming_split(u: DiscreteFunction, snap: float = 1e-9):
        """
        Insert every zero crossing of the interpolant as a mesh node.

        On the returned mesh the nodal split equals the pointwise split of u_h.
        Crossings within ``snap`` times the element width of an existing node
        are not inserted.

        Returns:
            (refined mesh, u on it, u^+, u^-)
        """
        mesh = u.mesh
        full = u.full_values()
        left, right = full[:-1], full[1:]
        crossing = left * right < 0.0
        widths = mesh.widths

        t = np.zeros_like(left)
        t[crossing] = left[crossing] / (left[crossing] - right[crossing])
        keep = crossing & (t > snap) & (t < 1.0 - snap)
        new_nodes = mesh.nodes[:-1][keep] + t[keep] * widths[keep]

        nodes = np.sort(np.concatenate((mesh.nodes, new_nodes)))
        refined = Mesh(nodes, mesh.quadrature_order)
        values = np.interp(refined.interior_nodes, mesh.nodes, full)
        values[np.isin(refined.interior_nodes, new_nodes)] = 0.0

        u_refined = DiscreteFunction(values, refined)
        plus, minus = FunctionalService.split_parts(u_refined)
        logger.debug(f"Conforming split inserted {new_nodes.size} nodes")
        return refined, u_refined, plus, minus

    @staticmethod
    def cross_energy(A: StiffnessOperator, u_plus: DiscreteFunction, u_minus: DiscreteFunction,
                     far_order: int = None, near_order: int = None) -> float:
        """
        2 int int (u+(x) u-(y) + u+(y) u-(x)) K(x-y) dx dy over Omega x Omega.

        Separated element pairs by tensor Gauss-Legendre, pairs meeting at a
        node by the analytic xi*eta moment. The parts must come from a
        conforming split: no element carries both.
        """
        mesh, params = A.mesh, A.params
        for part in (u_plus, u_minus):
            A.check_dimension(part)
            if not np.array_equal(part.mesh.nodes, mesh.nodes):
                raise DimensionError('Parts and operator live on different meshes.')
            if np.any(part.coefficients < 0.0):
                raise PartError('Positive and negative parts must be nonnegative.')

        fp, fm = u_plus.full_values(), u_minus.full_values()
        has_plus = (fp[:-1] > 0.0) | (fp[1:] > 0.0)
        has_minus = (fm[:-1] > 0.0) | (fm[1:] > 0.0)
        if np.any(has_plus & has_minus):
            raise PartError('Parts overlap on an element; use a conforming split.')

        far_order = int(far_order or settings.FRACNEHARI_FAR_ORDER)
        near_order = int(near_order or settings.FRACNEHARI_NEAR_ORDER)

        z, w = gauss_legendre(far_order)
        widths = mesh.widths
        points = mesh.nodes[:-1, None] + widths[:, None] * z[None, :]
        P = u_plus.evaluate(points) * widths[:, None] * w[None, :]
        Q = u_minus.evaluate(points) * widths[:, None] * w[None, :]

        plus_elements = np.flatnonzero(has_plus)
        minus_elements = np.flatnonzero(has_minus)

        separated = 0.0
        for e in plus_elements:
            others = minus_elements[np.abs(minus_elements - e) >= 2]
            if others.size == 0:
                continue
            r = np.abs(points[others][None, :, :] - points[e][:, None, None])
            separated += float(np.einsum('i,ifj,fj->', P[e], params.kernel_value(r), Q[others]))

        touching = 0.0
        for k in range(1, mesh.nodes.size - 1):
            weight = fp[k - 1] * fm[k + 1] + fm[k - 1] * fp[k + 1]
            if weight > 0.0:
                h1, h2 = widths[k - 1], widths[k]
                M11 = adjacent_moments(h1, h2, params, near_order)[1]
                touching += weight * M11 / (h1 * h2)

        return 4.0 * (separated + touching)

    # ------------------------------------------------------------------
    # Tables
    # ------------------------------------------------------------------

    @staticmethod
    def breakdown_row(label: str, breakdown: EnergyBreakdown, params: ProblemParams) -> Dict:
        """Flat CSV row for energy sweeps."""
        row = {'label': label, 'mu': params.mu, 'lam': params.lam, 'q': params.q, 'p': params.p}
        row.update(breakdown.as_dict())
        return row
