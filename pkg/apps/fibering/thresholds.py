"""
FRACNEHARI - Threshold Constants
Closed-form thresholds of the critical concave-convex problem.

Every formula uses the critical exponent 2* = 2N/(N-2s) and a numerically
estimated best Sobolev constant S; they are evaluated for subcritical p too.
"""

from apps.assembly.entities import ProblemParams
from apps.core.validators import validate_positive


def _exponents(params: ProblemParams):
    return float(params.N), float(params.s), float(params.q), params.critical_exponent


def tilde_mu(params: ProblemParams, S: float) -> float:
    """Below this mu the degenerate Nehari set N0 is empty."""
    validate_positive(S, 'S_estimate')
    N, s, q, two_star = _exponents(params)
    return (
        ((1.0 - q) / (two_star - q - 1.0)) ** ((1.0 - q) / (two_star - 2.0))
        * (two_star - 2.0) / (two_star - q - 1.0)
        * params.omega_measure ** ((q + 1.0 - two_star) / two_star)
        * S ** (N * (1.0 - q) / (4.0 * s) + (q + 1.0) / 2.0)
    )


def g_coefficient(params: ProblemParams) -> float:
    """a = (1-q)/(2(1+q)) |Omega|^{(2*-q-1)/2*}."""
    _, _, q, two_star = _exponents(params)
    return (1.0 - q) / (2.0 * (1.0 + q)) * params.omega_measure ** ((two_star - q - 1.0) / two_star)


def g_function(t, params: ProblemParams, mu: float):
    """g(t) = (s/N) t^{2*} - a mu t^{q+1}."""
    N, s, q, two_star = _exponents(params)
    return s / N * t ** two_star - g_coefficient(params) * mu * t ** (q + 1.0)


def g_minimizer(params: ProblemParams, mu: float) -> float:
    """t' = ((q+1) a mu N / (2* s))^{1/(2*-q-1)}."""
    N, s, q, two_star = _exponents(params)
    return ((q + 1.0) * g_coefficient(params) * mu * N / (two_star * s)) ** (1.0 / (two_star - q - 1.0))


def k_const(params: ProblemParams, mu: float = None) -> float:
    """
    k = -mu^{-2*/(2*-q-1)} min_{t>=0} g(t); independent of mu.
    """
    _, _, q, two_star = _exponents(params)
    mu = params.mu if mu is None else mu
    if not mu > 0.0:
        mu = 1.0
    g_min = g_function(g_minimizer(params, mu), params, mu)
    return -g_min / mu ** (two_star / (two_star - q - 1.0))


def M_const(params: ProblemParams) -> float:
    N, s, q, two_star = _exponents(params)
    return (
        (2.0 * N - (N - 2.0 * s) * (q + 1.0)) * (1.0 - q) / (4.0 * (q + 1.0))
        * ((1.0 - q) * (N - 2.0 * s) / (4.0 * s)) ** ((q + 1.0) / (two_star - q - 1.0))
        * params.omega_measure
    )


def mu_star(params: ProblemParams, S: float) -> float:
    """mu below which the compactness ceiling is positive."""
    N, s, q, two_star = _exponents(params)
    return (s * S ** (N / (2.0 * s)) / (N * k_const(params))) ** ((two_star - q - 1.0) / two_star)


def compactness_ceiling(params: ProblemParams, S: float, mu: float = None) -> float:
    """(s/N) S^{N/2s} - k mu^{2*/(2*-q-1)}; Palais-Smale holds below this level."""
    N, s, q, two_star = _exponents(params)
    mu = params.mu if mu is None else mu
    return s / N * S ** (N / (2.0 * s)) - k_const(params) * max(mu, 0.0) ** (two_star / (two_star - q - 1.0))


def concave_floor_term(params: ProblemParams, S: float, mu: float = None) -> float:
    """mu/(q+1) ((1-q)/(2*-q-1) S)^{(N-2s)(q+1)/(4s)}."""
    N, s, q, two_star = _exponents(params)
    mu = params.mu if mu is None else mu
    return mu / (q + 1.0) * ((1.0 - q) / (two_star - q - 1.0) * S) ** ((N - 2.0 * s) * (q + 1.0) / (4.0 * s))


def phi_lower_bound_factor(params: ProblemParams, S: float) -> float:
    """F with phi(t0) >= F ||u||^{q+1} in the critical case."""
    N, s, q, two_star = _exponents(params)
    return (
        ((1.0 - q) / (two_star - 1.0 - q)) ** ((1.0 - q) * (N - 2.0 * s) / (4.0 * s))
        * (two_star - 2.0) / (two_star - 1.0 - q)
        * S ** (N * (1.0 - q) / (4.0 * s))
    )


def nehari_minus_norm_floor(params: ProblemParams, S: float) -> float:
    """Lower bound on ||u|| over N^-: S^{N/4s} ((1-q)/(2*-1-q))^{(N-2s)/4s}."""
    N, s, q, two_star = _exponents(params)
    return S ** (N / (4.0 * s)) * ((1.0 - q) / (two_star - 1.0 - q)) ** ((N - 2.0 * s) / (4.0 * s))
