"""
FRACNEHARI - Singular Quadrature
Element-pair integrals of |x-y|^{-1-2s} rho(|x-y|) against P1 differences,
and the exterior tail integrals.

Same element and neighbours sharing a vertex are integrated in Duffy
coordinates, where the radial factor is exact (power kernel) or Gauss-Jacobi
(custom profile); separated pairs use tensor Gauss-Legendre in a compiled loop.
Separated pairs keep the fixed FRACNEHARI_FAR_ORDER for both kernels; only the
near-field custom integrals are refined to REFINEMENT_TOL.
"""

from functools import lru_cache

import numpy as np
from numba import njit
from scipy.special import roots_jacobi, roots_legendre

from apps.core.exceptions import QuadratureError
import logging

logger = logging.getLogger('apps.assembly')

REFINEMENT_TOL = 1e-9
MAX_ORDER = 1024


# Rules on [0, 1]
# ============================================================================

@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = roots_legendre(int(order))
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_jacobi(order, beta, alpha=0.0):
    """
    Nodes and weights for int_0^1 z^beta (1-z)^alpha f(z) dz.
    """
    x, w = roots_jacobi(int(order), alpha, beta)
    return 0.5 * (x + 1.0), w * 2.0 ** (-alpha - beta - 1.0)


def radial_integral(beta, length, params, g, order):
    """
    int_0^1 tau^beta g(tau) rho(length*tau) dtau.

    ``g`` is smooth. The interval is split at the profile table radii so each
    piece sees a linear profile: Gauss-Jacobi on the first piece, Gauss-Legendre
    elsewhere.
    """
    radii = params.profile_radii
    cuts = radii[(radii > 0.0) & (radii < length)] / length
    edges = np.concatenate(([0.0], cuts, [1.0]))

    z, w = gauss_jacobi(order, beta)
    first = edges[1]
    total = first ** (beta + 1.0) * np.sum(w * g(first * z) * params.kernel_profile(length * first * z))

    if edges.size > 2:
        zl, wl = gauss_legendre(order)
        lo, hi = edges[1:-1], edges[2:]
        tau = lo[:, None] + (hi - lo)[:, None] * zl[None, :]
        weights = (hi - lo)[:, None] * wl[None, :]
        total += np.sum(weights * tau ** beta * g(tau) * params.kernel_profile(length * tau))
    return float(total)


def refine_until_converged(evaluate, start_order, what):
    """
    Double the quadrature order until the relative increment is below 1e-9.
    """
    order = int(start_order)
    previous = evaluate(order)
    while order < MAX_ORDER:
        order *= 2
        current = evaluate(order)
        scale = max(1.0, float(np.max(np.abs(current))))
        if np.max(np.abs(np.asarray(current) - np.asarray(previous))) < REFINEMENT_TOL * scale:
            return current
        previous = current
    logger.error(f"Quadrature refinement for {what} stalled at order {order}")
    raise QuadratureError(f"Quadrature for {what} did not converge below {REFINEMENT_TOL} by order {MAX_ORDER}.")


# Same element
# ============================================================================

def same_element_local(h, params, order):
    """
    2x2 local matrix of the element with itself:
    int_e int_e (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) K(x-y) = J/h^2 [[1,-1],[-1,1]]
    with J = 2 int_0^h (h-r) r^2 K(r) dr.
    """
    s = params.s
    if params.kernel == 'fractional':
        J = 2.0 * h ** (3.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s))
    else:
        def evaluate(n):
            return radial_integral(1.0 - 2.0 * s, h, params, lambda tau: 1.0 - tau, n)

        J = 2.0 * h ** (3.0 - 2.0 * s) * refine_until_converged(evaluate, order, 'same-element pair')
    return J / (h * h) * np.array([[1.0, -1.0], [-1.0, 1.0]])


# Elements sharing a vertex
# ============================================================================

def adjacent_moments(h1, h2, params, order):
    """
    M_ab = int_0^h1 int_0^h2 xi^a eta^b K(xi+eta) for (a, b) in {(2,0),(1,1),(0,2)},
    xi the distance from the shared node into the left element, eta into the right one.

    Duffy split of the rectangle along its diagonal; both triangles reduce to
    h1^{a+1} h2^{b+1} int_0^1 w^{.} L(w)^{-1-2s} int_0^1 t^{2-2s} rho(t L(w)) dt dw.
    """
    s = params.s
    exponents = ((2, 0), (1, 1), (0, 2))

    def evaluate(n):
        w, ww = gauss_legendre(n)
        lengths = (h1 + h2 * w, h1 * w + h2)
        if params.kernel == 'fractional':
            radial = [np.full_like(w, 1.0 / (3.0 - 2.0 * s))] * 2
        else:
            radial = [
                np.array([radial_integral(2.0 - 2.0 * s, L, params, np.ones_like, n) for L in side])
                for side in lengths
            ]
        moments = []
        for a, b in exponents:
            lower = np.sum(ww * w ** b * lengths[0] ** (-1.0 - 2.0 * s) * radial[0])
            upper = np.sum(ww * w ** a * lengths[1] ** (-1.0 - 2.0 * s) * radial[1])
            moments.append(h1 ** (a + 1) * h2 ** (b + 1) * (lower + upper))
        return np.array(moments)

    if params.kernel == 'fractional':
        return evaluate(max(order, 24))
    return refine_until_converged(evaluate, order, 'adjacent pair')


def adjacent_local(h1, h2, params, order):
    """
    3x3 local matrix over (x_{k-1}, x_k, x_{k+1}) for the two elements meeting
    at x_k, both orderings included.
    """
    M20, M11, M02 = adjacent_moments(h1, h2, params, order)
    c1 = np.array([-1.0 / h1, 1.0 / h1, 0.0])
    c2 = np.array([0.0, -1.0 / h2, 1.0 / h2])
    return 2.0 * (
        M20 * np.outer(c1, c1)
        + M11 * (np.outer(c1, c2) + np.outer(c2, c1))
        + M02 * np.outer(c2, c2)
    )


# Separated pairs
# ============================================================================

@njit(cache=True)
def far_field(nodes, points, weights, s, radii, values, out):
    """
    Accumulate 2 int_e int_f D D^T K(y-x) for all element pairs f >= e+2 into
    the full-node matrix ``out``; D = (phi_e0(x), phi_e1(x), -phi_f0(y), -phi_f1(y)).
    """
    n_el = nodes.size - 1
    g = points.size
    custom = radii.size > 0
    d = np.empty(4)
    idx = np.empty(4, dtype=np.int64)
    for e in range(n_el):
        he = nodes[e + 1] - nodes[e]
        for f in range(e + 2, n_el):
            hf = nodes[f + 1] - nodes[f]
            idx[0] = e
            idx[1] = e + 1
            idx[2] = f
            idx[3] = f + 1
            for i in range(g):
                x = nodes[e] + he * points[i]
                wx = he * weights[i]
                d[0] = 1.0 - points[i]
                d[1] = points[i]
                for j in range(g):
                    y = nodes[f] + hf * points[j]
                    r = y - x
                    k = r ** (-1.0 - 2.0 * s)
                    if custom:
                        k *= np.interp(r, radii, values)
                    c = 2.0 * wx * hf * weights[j] * k
                    d[2] = -(1.0 - points[j])
                    d[3] = -points[j]
                    for p in range(4):
                        for q in range(4):
                            out[idx[p], idx[q]] += c * d[p] * d[q]
    return out


# Exterior tail
# ============================================================================

def tail_function(d, params):
    """
    T(d) = int_d^inf K(r) dr for d > 0; the power kernel gives d^{-2s}/(2s).

    For a tabulated profile each linear piece alpha + beta r integrates in closed
    form; the flat extensions below the first and beyond the last radius too.
    """
    s = params.s
    d = np.asarray(d, dtype=float)
    if params.kernel == 'fractional':
        return d ** (-2.0 * s) / (2.0 * s)

    radii, values = params.profile.radii, params.profile.values

    def primitive(r, alpha, beta):
        return -alpha * r ** (-2.0 * s) / (2.0 * s) + beta * r ** (1.0 - 2.0 * s) / (1.0 - 2.0 * s)

    total = np.zeros_like(d)
    # [d, r_0] with rho = values[0]
    lower = np.minimum(d, radii[0])
    total += values[0] * (lower ** (-2.0 * s) - radii[0] ** (-2.0 * s)) / (2.0 * s)
    for k in range(radii.size - 1):
        r0, r1 = radii[k], radii[k + 1]
        beta = (values[k + 1] - values[k]) / (r1 - r0)
        alpha = values[k] - beta * r0
        lo = np.clip(d, r0, r1)
        total += primitive(r1, alpha, beta) - primitive(lo, alpha, beta)
    # [max(d, r_last), inf) with rho = values[-1]
    total += values[-1] * np.maximum(d, radii[-1]) ** (-2.0 * s) / (2.0 * s)
    return total


def tail_local_matrices(mesh, params, order):
    """
    Per-element 2x2 matrices 2 int_e phi_i phi_j kappa with
    kappa(x) = T(x-a) + T(b-x).

    The leading singular part v0 d^{-2s}/(2s) of each term is integrated with
    Gauss-Jacobi on the element touching that boundary; the bounded remainder
    T(d) - v0 d^{-2s}/(2s) with Gauss-Legendre.
    """
    s = params.s
    a, b = mesh.a, mesh.b
    nodes, widths = mesh.nodes, mesh.widths
    n_el = mesh.n_elements
    v0 = 1.0 if params.kernel == 'fractional' else params.profile.inner_value

    zl, wl = gauss_legendre(order)
    zj, wj = gauss_jacobi(order, -2.0 * s)

    def local_from(z, w, values, h):
        shapes = np.stack((1.0 - z, z))
        return 2.0 * h * (shapes * (w * values)) @ shapes.T

    def remainder(dist):
        return tail_function(dist, params) - v0 * dist ** (-2.0 * s) / (2.0 * s)

    local = np.zeros((n_el, 2, 2))
    for e in range(n_el):
        h = widths[e]
        x = nodes[e] + h * zl
        kappa = tail_function(x - a, params) + tail_function(b - x, params)

        if e == 0 or e == n_el - 1:
            # rebuild this element with the singular parts split off
            kappa = remainder(x - a) + remainder(b - x)
            if e != 0:
                kappa = kappa + v0 * (x - a) ** (-2.0 * s) / (2.0 * s)
            if e != n_el - 1:
                kappa = kappa + v0 * (b - x) ** (-2.0 * s) / (2.0 * s)
            block = local_from(zl, wl, kappa, h)
            if e == 0:
                # (x-a)^{-2s} = h^{-2s} z^{-2s}
                block += local_from(zj, wj, np.full_like(zj, v0 * h ** (-2.0 * s) / (2.0 * s)), h)
            if e == n_el - 1:
                # (b-x)^{-2s} = h^{-2s} (1-z)^{-2s}; mirror the rule
                mirrored = local_from(zj, wj, np.full_like(zj, v0 * h ** (-2.0 * s) / (2.0 * s)), h)
                block += mirrored[::-1, ::-1]
            local[e] = block
        else:
            local[e] = local_from(zl, wl, kappa, h)
    return local
