"""
FRACNEHARI - Fibering Services
Fibering maps t -> I(tu), their roots, the Nehari decomposition and the
threshold constants.
"""

from typing import Dict, Optional, Tuple

import numpy as np
from django.conf import settings
from scipy.optimize import bisect
import logging

from apps.assembly.entities import DiscreteFunction, ProblemParams, StiffnessOperator
from apps.assembly.services import AssemblyService
from apps.core.exceptions import InputError, NearDegenerateError, NoRoots, RootError
from apps.core.validators import validate_positive
from apps.functional.services import FunctionalService, signed_power
from . import thresholds as th
from .entities import (
    N_MINUS, N_PLUS, N_ZERO, NOT_ON_N,
    FiberingReport, FiberNorms, ThresholdSet,
)

logger = logging.getLogger('apps.fibering')

BISECTION_RTOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-9


class FiberingService:
    """
    Service for the fibering auxiliary phi(t) = t^{1-q} a - lam t^{p-q} b,
    whose level set phi = mu c gives the Nehari rescalings.
    """

    # ------------------------------------------------------------------
    # Norms and the auxiliary map
    # ------------------------------------------------------------------

    @staticmethod
    def norms(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams,
              positive_part: bool = False) -> FiberNorms:
        """(||u||^2, |u|_{p+1}^{p+1}, |u|_{q+1}^{q+1}); Lebesgue terms of u^+ for J_mu."""
        if u.is_zero():
            raise InputError('Fibering analysis is undefined for the zero function.')
        a = AssemblyService.gagliardo_norm(A, u) ** 2
        target = u
        if positive_part:
            target = u.with_coefficients(np.maximum(u.coefficients, 0.0))
            if target.is_zero():
                raise InputError('Positive-part fibering needs u^+ != 0.')
        return FiberNorms(
            a=a,
            b=AssemblyService.lp_power(target, params.p + 1.0),
            c=AssemblyService.lp_power(target, params.q + 1.0),
        )

    @staticmethod
    def phi(t, norms: FiberNorms, params: ProblemParams):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise InputError('Fibering map is defined for t >= 0.')
        q, p = params.q, params.p
        return t ** (1.0 - q) * norms.a - params.lam * t ** (p - q) * norms.b

    @staticmethod
    def phi_prime(t, norms: FiberNorms, params: ProblemParams):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise InputError('Fibering map is defined for t >= 0.')
        q, p = params.q, params.p
        return (1.0 - q) * t ** (-q) * norms.a - params.lam * (p - q) * t ** (p - q - 1.0) * norms.b

    @staticmethod
    def t_zero_from_norms(norms: FiberNorms, params: ProblemParams) -> float:
        """Maximizer of phi: ((1-q) a / ((p-q) lam b))^{1/(p-1)}."""
        q, p = params.q, params.p
        return ((1.0 - q) * norms.a / ((p - q) * params.lam * norms.b)) ** (1.0 / (p - 1.0))

    @staticmethod
    def t_zero(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams) -> float:
        FiberingService._require_convex_weight(params)
        return FiberingService.t_zero_from_norms(FiberingService.norms(u, A, params), params)

    @staticmethod
    def zero_crossing(norms: FiberNorms, params: ProblemParams) -> float:
        """T0 = (a/(lam b))^{1/(p-1)}, the zero of phi beyond t0."""
        return (norms.a / (params.lam * norms.b)) ** (1.0 / (params.p - 1.0))

    @staticmethod
    def _require_convex_weight(params):
        if not params.lam > 0.0:
            raise InputError('Fibering analysis requires lam > 0.')

    # ------------------------------------------------------------------
    # Roots
    # ------------------------------------------------------------------

    @staticmethod
    def _polished_root(norms: FiberNorms, params: ProblemParams, lo: float, hi: float, level: float) -> float:
        """Bisection on phi - level in log t over [lo, hi] (relative width), then two Newton steps clipped to the bracket."""
        def residual(t):
            return float(FiberingService.phi(t, norms, params)) - level

        t = float(np.exp(bisect(lambda x: residual(np.exp(x)), np.log(lo), np.log(hi),
                                xtol=BISECTION_RTOL, rtol=BISECTION_RTOL)))
        for _ in range(2):
            slope = float(FiberingService.phi_prime(t, norms, params))
            if slope == 0.0:
                break
            candidate = float(np.clip(t - residual(t) / slope, lo, hi))
            if abs(residual(candidate)) <= abs(residual(t)):
                t = candidate

        scale = max(abs(level), float(FiberingService.phi(FiberingService.t_zero_from_norms(norms, params), norms, params)))
        if abs(residual(t)) > ROOT_RESIDUAL_TOL * scale:
            logger.error(f"Fibering root residual {residual(t):.3e} above tolerance on [{lo:.6g}, {hi:.6g}]")
            raise RootError(f"Fibering root on [{lo:.6g}, {hi:.6g}] missed tolerance.")
        return t

    @staticmethod
    def _lower_bracket(norms: FiberNorms, params: ProblemParams, t0: float, level: float) -> float:
        """Positive t below t- with phi(t) < level; phi <= a t^{1-q} gives the start."""
        lo = min((level / norms.a) ** (1.0 / (1.0 - params.q)), 0.5 * t0)
        while float(FiberingService.phi(lo, norms, params)) >= level:
            lo *= 0.5
        return lo

    @staticmethod
    def roots_from_norms(norms: FiberNorms, params: ProblemParams, strict: bool = False,
                         tol: float = None) -> FiberingReport:
        FiberingService._require_convex_weight(params)
        tol = settings.FRACNEHARI_NEHARI_TOL if tol is None else tol

        t0 = FiberingService.t_zero_from_norms(norms, params)
        phi_t0 = float(FiberingService.phi(t0, norms, params))
        T0 = FiberingService.zero_crossing(norms, params)
        level = params.mu * norms.c

        t_minus: Optional[float] = None
        t_plus: Optional[float] = None
        roots_exist = level < phi_t0

        if roots_exist:
            if level > 0.0:
                lo = FiberingService._lower_bracket(norms, params, t0, level)
                t_minus = FiberingService._polished_root(norms, params, lo, t0, level)
                t_plus = FiberingService._polished_root(norms, params, t0, T0, level)
            elif level == 0.0:
                t_plus = T0
            else:
                hi = 2.0 * T0
                while float(FiberingService.phi(hi, norms, params)) > level:
                    hi *= 2.0
                t_plus = FiberingService._polished_root(norms, params, T0, hi, level)

        report = FiberingReport(
            t0=t0,
            phi_t0=phi_t0,
            mu_rhs=level,
            t_minus=t_minus,
            t_plus=t_plus,
            t_zero_crossing=T0,
            classification=FiberingService.classify_norms(norms, params, tol),
            roots_exist=roots_exist,
            norms=norms,
        )
        if not roots_exist:
            logger.debug(f"No fibering roots: mu*c={level:.6g} >= phi(t0)={phi_t0:.6g}")
            if strict:
                raise NoRoots(
                    f"mu*|u|_(q+1)^(q+1) = {level:.6g} >= phi(t0) = {phi_t0:.6g}",
                    extra={'report': report.as_dict()},
                )
        return report

    @staticmethod
    def fibering_roots(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams,
                       strict: bool = False, positive_part: bool = False, tol: float = None) -> FiberingReport:
        """
        Both rescalings t- < t0 < t+ with t-u in N+ and t+u in N-.

        For mu = 0 only t+ = T0 exists. Without roots the report carries
        roots_exist=False, or NoRoots is raised when ``strict``.
        """
        norms = FiberingService.norms(u, A, params, positive_part=positive_part)
        return FiberingService.roots_from_norms(norms, params, strict=strict, tol=tol)

    # ------------------------------------------------------------------
    # Nehari decomposition
    # ------------------------------------------------------------------

    @staticmethod
    def classify_norms(norms: FiberNorms, params: ProblemParams, tol: float = None) -> str:
        tol = settings.FRACNEHARI_NEHARI_TOL if tol is None else tol
        q, p = params.q, params.p
        nehari = norms.a - params.mu * norms.c - params.lam * norms.b
        if abs(nehari) > tol * norms.a:
            return NOT_ON_N
        second = (1.0 - q) * norms.a - (p - q) * params.lam * norms.b
        if abs(second) <= tol * norms.a:
            return N_ZERO
        return N_PLUS if second > 0.0 else N_MINUS

    @staticmethod
    def classify_nehari(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams,
                        tol: float = None, relative_to: DiscreteFunction = None) -> str:
        """
        Membership |<I'(u),u>| <= tol ||u||^2, then the sign of the second-order
        quantity (1-q)a - (p-q) lam b.

        With ``relative_to=w``, u is a part of w and membership is tested on
        <I'(w), u>; the sub-class follows ||u||^2 - q mu c - p lam b.
        """
        tol = settings.FRACNEHARI_NEHARI_TOL if tol is None else tol
        norms = FiberingService.norms(u, A, params)
        if relative_to is None:
            return FiberingService.classify_norms(norms, params, tol)

        coupling = float(FunctionalService.gradient(A, relative_to, params) @ u.coefficients)
        if abs(coupling) > tol * norms.a:
            return NOT_ON_N
        second = norms.a - params.q * params.mu * norms.c - params.p * params.lam * norms.b
        if abs(second) <= tol * norms.a:
            return N_ZERO
        return N_PLUS if second > 0.0 else N_MINUS

    @staticmethod
    def nehari_projection_derivative(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams,
                                     v: DiscreteFunction, tol: float = None) -> float:
        """
        d/dh t(u + h v) at h = 0, where t(.) is the fibering root on the
        branch of u (so t(u) = 1 for u on N):

            -(2<u,v> - (q+1) mu int |u|^{q-1}uv - (p+1) lam int |u|^{p-1}uv)
             / ((1-q)||u||^2 - (p-q) lam |u|_{p+1}^{p+1})
        """
        tol = settings.FRACNEHARI_NEHARI_TOL if tol is None else tol
        norms = FiberingService.norms(u, A, params)
        denominator = (1.0 - params.q) * norms.a - (params.p - params.q) * params.lam * norms.b
        if abs(denominator) <= tol * norms.a:
            raise NearDegenerateError(
                f"Second-order quantity {denominator:.3e} within tolerance of zero.",
                extra={'norms': norms.as_dict()},
            )

        values = u.quadrature_values()
        nonlinear = (
            (params.q + 1.0) * params.mu * signed_power(values, params.q)
            + (params.p + 1.0) * params.lam * signed_power(values, params.p)
        )
        numerator = 2.0 * A.inner(u, v) - float(FunctionalService.load_vector(u, nonlinear) @ v.coefficients)
        return -numerator / denominator

    @staticmethod
    def psi_mu_diagnostic(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams) -> float:
        """
        k0 (a^p / (lam b))^{1/(p-1)} - mu c with
        k0 = ((1-q)/(p-q))^{p/(p-1)} (p-1)/(1-q).
        """
        FiberingService._require_convex_weight(params)
        norms = FiberingService.norms(u, A, params)
        q, p = params.q, params.p
        k0 = ((1.0 - q) / (p - q)) ** (p / (p - 1.0)) * (p - 1.0) / (1.0 - q)
        return k0 * (norms.a ** p / (params.lam * norms.b)) ** (1.0 / (p - 1.0)) - params.mu * norms.c

    @staticmethod
    def fibering_scan(u: DiscreteFunction, A: StiffnessOperator, params: ProblemParams,
                      t_max: float = None, n: int = 10000,
                      positive_part: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """I(tu) on a uniform grid of [0, t_max] (default 2 T0)."""
        norms = FiberingService.norms(u, A, params, positive_part=positive_part)
        if t_max is None:
            t_max = 2.0 * FiberingService.zero_crossing(norms, params)
        t = np.linspace(0.0, t_max, int(n))
        q, p = params.q, params.p
        values = (
            0.5 * t ** 2 * norms.a
            - params.mu / (q + 1.0) * t ** (q + 1.0) * norms.c
            - params.lam / (p + 1.0) * t ** (p + 1.0) * norms.b
        )
        return t, values

    # ------------------------------------------------------------------
    # Thresholds
    # ------------------------------------------------------------------

    @staticmethod
    def thresholds(params: ProblemParams, S_estimate: float) -> ThresholdSet:
        validate_positive(S_estimate, 'S_estimate')
        tilde = th.tilde_mu(params, S_estimate)
        k = th.k_const(params)
        M = th.M_const(params)
        star = th.mu_star(params, S_estimate)

        discrepancy = abs(k - M) / M
        if discrepancy > 1e-8:
            logger.info(f"Compactness constants differ: k={k:.10g}, M={M:.10g} (rel {discrepancy:.3e})")

        return ThresholdSet(
            tilde_mu=tilde,
            k_const=k,
            M_const=M,
            k_M_discrepancy=discrepancy,
            S_estimate=S_estimate,
            omega_measure=params.omega_measure,
            mu_star=star,
            compactness_ceiling=th.compactness_ceiling(params, S_estimate),
            concave_floor_term=th.concave_floor_term(params, S_estimate),
            phi_lower_bound_factor=th.phi_lower_bound_factor(params, S_estimate),
            nehari_minus_norm_floor=th.nehari_minus_norm_floor(params, S_estimate),
            mu_below_tilde=bool(params.mu < tilde),
            mu_below_star=bool(params.mu < star),
            sign_changing_regime=params.sign_changing_regime,
        )

    @staticmethod
    def threshold_table(thresholds: ThresholdSet) -> str:
        """Human-readable two-column table."""
        rows = thresholds.as_dict()
        width = max(len(key) for key in rows)
        lines = []
        for key, value in rows.items():
            text = f"{value:.10g}" if isinstance(value, float) else str(value)
            lines.append(f"{key.ljust(width)}  {text}")
        return '\n'.join(lines)

    @staticmethod
    def report_dict(report: FiberingReport) -> Dict:
        from .serializers import FiberingReportSerializer
        return FiberingReportSerializer(report).data
