"""
FRACNEHARI - Custom Validators
Reusable validators for problem parameters, meshes and numeric arguments.
"""

import math

import numpy as np
from django.utils.translation import gettext_lazy as _

from .exceptions import InputError, MeshError, ParamError


# Exponent Validators
# ============================================================================

def critical_exponent(N, s):
    """Return 2* = 2N/(N-2s)."""
    return 2.0 * N / (N - 2.0 * s)


def validate_fractional_order(N, s):
    """
    Validate 0 < s < N/2 (equivalently N > 2s).
    """
    if not (math.isfinite(s) and 0.0 < s < 1.0):
        raise ParamError(_('Fractional order must satisfy 0<s<1 (got s=%(s)s).') % {'s': s})
    if not N > 2.0 * s:
        raise ParamError(_('Dimension must satisfy N>2s (got N=%(N)s, s=%(s)s).') % {'N': N, 's': s})


def validate_exponents(N, s, q, p):
    """
    Validate 0<q<1<p<=2*-1.
    """
    validate_fractional_order(N, s)
    if not (math.isfinite(q) and 0.0 < q < 1.0):
        raise ParamError(_('Concave exponent violates 0<q<1 (got q=%(q)s).') % {'q': q})

    p_max = critical_exponent(N, s) - 1.0
    if not (math.isfinite(p) and 1.0 < p <= p_max + 1e-12):
        raise ParamError(
            _('Convex exponent violates 1<p<=2*-1=%(pmax).6g (got p=%(p)s).') % {'pmax': p_max, 'p': p}
        )


def validate_sign_changing_regime(N, s, q):
    """
    Validate N>6s and q>(1/2)(N+2s)/(N-2s) for sign-changing runs.
    """
    if not N > 6.0 * s:
        raise ParamError(_('Sign-changing runs require N>6s (got N=%(N)s, s=%(s)s).') % {'N': N, 's': s})

    q_min = 0.5 * (N + 2.0 * s) / (N - 2.0 * s)
    if not q > q_min:
        raise ParamError(
            _('Sign-changing runs require q>(1/2)(N+2s)/(N-2s)=%(qmin).6g (got q=%(q)s).') % {'qmin': q_min, 'q': q}
        )


def validate_domain(a, b):
    """Validate an interval with b>a."""
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise ParamError(_('Domain must satisfy b>a (got a=%(a)s, b=%(b)s).') % {'a': a, 'b': b})


# Kernel Validators
# ============================================================================

def validate_kernel_profile(radii, values, theta):
    """
    Validate a tabulated radial profile rho(r) = K(r) r^{N+2s}.

    The lower bound K(r) >= theta r^{-(N+2s)} becomes rho >= theta on the table;
    linear interpolation with flat extension keeps it between samples.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)

    if radii.ndim != 1 or radii.size < 1 or radii.shape != values.shape:
        raise ParamError(_('Kernel profile needs matching 1-D radii and values.'))
    if np.any(radii <= 0.0) or np.any(np.diff(radii) <= 0.0):
        raise ParamError(_('Kernel profile radii must be positive and strictly increasing.'))
    if not np.all(np.isfinite(values)):
        raise ParamError(_('Kernel profile values must be finite.'))
    if not theta > 0.0:
        raise ParamError(_('Kernel lower-bound constant theta must be positive.'))
    if np.min(values) < theta:
        raise ParamError(
            _('Kernel violates K(r) >= theta r^-(N+2s) at r=%(r).6g.') % {'r': radii[int(np.argmin(values))]}
        )


# Mesh Validators
# ============================================================================

def validate_nodes(nodes, a, b):
    """
    Validate mesh nodes: strictly increasing, first a, last b, at least one interior node.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 3:
        raise MeshError(_('Mesh needs at least 3 nodes.'))
    if np.any(np.diff(nodes) <= 0.0):
        raise MeshError(_('Mesh nodes must be strictly increasing.'))
    if not (math.isclose(nodes[0], a, abs_tol=1e-14) and math.isclose(nodes[-1], b, abs_tol=1e-14)):
        raise MeshError(_('Mesh nodes must start at a and end at b.'))


def validate_quadrature_order(order):
    if int(order) != order or order < 2:
        raise MeshError(_('Quadrature order must be an integer >= 2.'))


# Numeric Argument Validators
# ============================================================================

def validate_lp_exponent(r):
    """Validate an Lebesgue exponent r >= 1."""
    if not (math.isfinite(r) and r >= 1.0):
        raise InputError(_('Lebesgue exponent must satisfy r>=1 (got r=%(r)s).') % {'r': r})


def validate_positive(value, name):
    if not (math.isfinite(value) and value > 0.0):
        raise InputError(_('%(name)s must be positive (got %(value)s).') % {'name': name, 'value': value})
