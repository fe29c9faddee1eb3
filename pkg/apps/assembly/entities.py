"""
FRACNEHARI - Assembly Entities
Problem parameters, meshes, discrete functions and the assembled operator.
"""

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import roots_legendre

from apps.core.exceptions import DimensionError, MeshError, ParamError
from apps.core.validators import (
    critical_exponent,
    validate_domain,
    validate_exponents,
    validate_kernel_profile,
    validate_nodes,
    validate_quadrature_order,
    validate_sign_changing_regime,
)

FRACTIONAL = 'fractional'
CUSTOM = 'custom'
KERNEL_CHOICES = (FRACTIONAL, CUSTOM)


# Kernel
# ============================================================================

@dataclass(frozen=True, eq=False)
class KernelProfile:
    """
    Tabulated radial profile rho(r) = K(r) r^{N+2s}.

    Linear interpolation between samples, flat extension outside the table.
    """
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'radii', np.asarray(self.radii, dtype=float))
        object.__setattr__(self, 'values', np.asarray(self.values, dtype=float))

    def __call__(self, r):
        return np.interp(r, self.radii, self.values)

    @property
    def inner_value(self) -> float:
        return float(self.values[0])

    def as_dict(self) -> Dict:
        return {'radii': self.radii.tolist(), 'values': self.values.tolist()}


# Problem Parameters
# ============================================================================

@dataclass(frozen=True, eq=False)
class ProblemParams:
    """
    All scalar parameters of the concave-convex problem on (a, b).

    Invariants are checked on construction; sign-changing runs additionally
    call ``require_sign_changing_regime``.
    """
    s: float
    q: float
    p: float
    mu: float = 0.0
    lam: float = 1.0
    a: float = -1.0
    b: float = 1.0
    N: int = 1
    kernel: str = FRACTIONAL
    theta: float = 1.0
    profile: Optional[KernelProfile] = None

    def __post_init__(self):
        if self.N != 1:
            raise ParamError('Only N=1 (interval domains) is supported.')
        validate_exponents(self.N, self.s, self.q, self.p)
        validate_domain(self.a, self.b)
        if not (np.isfinite(self.mu) and np.isfinite(self.lam)):
            raise ParamError('Weights mu and lambda must be finite.')
        if self.kernel not in KERNEL_CHOICES:
            raise ParamError(f"Unknown kernel '{self.kernel}'.")
        if self.kernel == CUSTOM:
            if self.profile is None:
                raise ParamError('Custom kernel needs a tabulated profile.')
            validate_kernel_profile(self.profile.radii, self.profile.values, self.theta)
        elif not 0.0 < self.theta <= 1.0:
            raise ParamError('Fractional kernel satisfies the lower bound only for 0<theta<=1.')

    @property
    def critical_exponent(self) -> float:
        return critical_exponent(self.N, self.s)

    @property
    def is_critical(self) -> bool:
        return abs(self.p - (self.critical_exponent - 1.0)) <= 1e-12

    @property
    def omega_measure(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def sign_changing_regime(self) -> bool:
        N, s = self.N, self.s
        return N > 6.0 * s and self.q > 0.5 * (N + 2.0 * s) / (N - 2.0 * s)

    @property
    def log_borderline_q(self) -> float:
        """q = 2s/(N-2s), where the |ln eps| factor appears."""
        return 2.0 * self.s / (self.N - 2.0 * self.s)

    def require_sign_changing_regime(self):
        validate_sign_changing_regime(self.N, self.s, self.q)

    @property
    def profile_radii(self) -> np.ndarray:
        """Table radii, empty for the pure power kernel (numba-friendly)."""
        if self.kernel == FRACTIONAL:
            return np.empty(0)
        return self.profile.radii

    @property
    def profile_values(self) -> np.ndarray:
        if self.kernel == FRACTIONAL:
            return np.empty(0)
        return self.profile.values

    def kernel_profile(self, r):
        """rho(r); identically one for the fractional kernel."""
        if self.kernel == FRACTIONAL:
            return np.ones_like(np.asarray(r, dtype=float))
        return self.profile(r)

    def kernel_value(self, r):
        """K(r) = r^{-(N+2s)} rho(r) for r > 0."""
        r = np.asarray(r, dtype=float)
        return r ** (-self.N - 2.0 * self.s) * self.kernel_profile(r)

    def kernel_signature(self) -> Dict:
        signature = {'N': self.N, 's': self.s, 'kernel': self.kernel, 'theta': self.theta}
        if self.profile is not None:
            signature['profile'] = self.profile.as_dict()
        return signature

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> Dict:
        data = {
            'N': self.N, 's': self.s, 'q': self.q, 'p': self.p, 'mu': self.mu,
            'lam': self.lam, 'a': self.a, 'b': self.b, 'kernel': self.kernel,
            'theta': self.theta,
        }
        if self.profile is not None:
            data['profile'] = self.profile.as_dict()
        return data


# Mesh
# ============================================================================

@dataclass(frozen=True, eq=False)
class Mesh:
    """
    1-D mesh of [a, b]; interior nodes carry the degrees of freedom.

    ``quadrature_order`` is the per-element Gauss-Legendre order used for the
    nonlinear (Lebesgue) terms.
    """
    nodes: np.ndarray
    quadrature_order: int = 8

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, 'nodes', nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise MeshError('Mesh needs at least 3 nodes.')
        validate_nodes(nodes, nodes[0], nodes[-1])
        validate_quadrature_order(self.quadrature_order)

    @classmethod
    def uniform(cls, a, b, n_elements, quadrature_order=8):
        if int(n_elements) < 2:
            raise MeshError('Uniform mesh needs at least 2 elements.')
        return cls(np.linspace(a, b, int(n_elements) + 1), quadrature_order)

    @classmethod
    def graded(cls, a, b, n_elements, center=None, ratio=4.0, quadrature_order=8):
        """
        Nodes clustered at ``center``: spacing there is ``ratio`` times finer than
        at the ends, varying smoothly (sinh stretching).
        """
        if int(n_elements) < 2:
            raise MeshError('Graded mesh needs at least 2 elements.')
        if not ratio >= 1.0:
            raise MeshError('Grading ratio must be >= 1.')
        center = 0.5 * (a + b) if center is None else float(center)
        if not a < center < b:
            raise MeshError('Grading center must lie inside the domain.')

        xi = np.linspace(-1.0, 1.0, int(n_elements) + 1)
        if ratio == 1.0:
            stretched = xi
        else:
            beta = np.arccosh(ratio)
            stretched = np.sinh(beta * xi) / np.sinh(beta)
        nodes = np.where(stretched < 0.0, center + stretched * (center - a), center + stretched * (b - center))
        nodes[0], nodes[-1] = a, b
        return cls(nodes, quadrature_order)

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def n_interior(self) -> int:
        return self.nodes.size - 2

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @cached_property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def width_at(self, x) -> float:
        """Width of the element containing x."""
        e = int(np.clip(np.searchsorted(self.nodes, x, side='right') - 1, 0, self.n_elements - 1))
        return float(self.widths[e])

    @cached_property
    def gauss_rule(self):
        """
        Per-element Gauss data.

        Returns:
            (points (nE, g), weights (nE, g), left shape values (g,), right shape values (g,))
        """
        z, w = roots_legendre(self.quadrature_order)
        z = 0.5 * (z + 1.0)
        w = 0.5 * w
        points = self.nodes[:-1, None] + self.widths[:, None] * z[None, :]
        weights = self.widths[:, None] * w[None, :]
        return points, weights, 1.0 - z, z

    def as_dict(self) -> Dict:
        return {'nodes': self.nodes.tolist(), 'quadrature_order': self.quadrature_order}


# Discrete Function
# ============================================================================

@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """
    P1 function given by its values at interior nodes; zero on the boundary
    nodes and outside the domain.
    """
    coefficients: np.ndarray
    mesh: Mesh

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, 'coefficients', coefficients)
        if coefficients.shape != (self.mesh.n_interior,):
            raise DimensionError(
                f"Expected {self.mesh.n_interior} coefficients, got shape {coefficients.shape}."
            )

    @classmethod
    def zeros(cls, mesh):
        return cls(np.zeros(mesh.n_interior), mesh)

    @classmethod
    def interpolate(cls, mesh, func):
        """Nodal interpolant of a callable at interior nodes."""
        return cls(np.asarray(func(mesh.interior_nodes), dtype=float), mesh)

    @property
    def n(self) -> int:
        return self.coefficients.size

    def full_values(self) -> np.ndarray:
        """Nodal values including the zero boundary nodes."""
        return np.concatenate(([0.0], self.coefficients, [0.0]))

    def evaluate(self, x):
        """Value of the interpolant at x; zero outside [a, b]."""
        return np.interp(x, self.mesh.nodes, self.full_values(), left=0.0, right=0.0)

    def quadrature_values(self) -> np.ndarray:
        """Interpolant values at the per-element Gauss points, shape (nE, g)."""
        full = self.full_values()
        _, _, left, right = self.mesh.gauss_rule
        return full[:-1, None] * left[None, :] + full[1:, None] * right[None, :]

    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def l2_norm(self) -> float:
        values = self.quadrature_values()
        _, weights, _, _ = self.mesh.gauss_rule
        return float(np.sqrt(np.sum(weights * values * values)))

    def with_coefficients(self, coefficients):
        return DiscreteFunction(coefficients, self.mesh)

    def _check_same_mesh(self, other):
        if other.mesh is not self.mesh and not np.array_equal(other.mesh.nodes, self.mesh.nodes):
            raise DimensionError('Functions live on different meshes.')

    def __add__(self, other):
        self._check_same_mesh(other)
        return self.with_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check_same_mesh(other)
        return self.with_coefficients(self.coefficients - other.coefficients)

    def __mul__(self, scalar):
        return self.with_coefficients(float(scalar) * self.coefficients)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_coefficients(-self.coefficients)


# Stiffness Operator
# ============================================================================

@dataclass(frozen=True, eq=False)
class StiffnessOperator:
    """
    Galerkin realization of the X0 inner product.

    ``interaction`` holds the Omega x Omega part, ``tail`` the 2 Omega x C(Omega)
    part; ``matrix`` is their sum. Immutable after assembly.
    """
    interaction: np.ndarray
    tail: np.ndarray
    tail_weights: np.ndarray
    mass: np.ndarray
    mesh: Mesh
    params: ProblemParams
    fingerprint: str

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.interaction + self.tail

    @property
    def n(self) -> int:
        return self.mesh.n_interior

    @cached_property
    def cholesky(self):
        return cho_factor(self.matrix, lower=True)

    def check_dimension(self, u):
        coefficients = u.coefficients if isinstance(u, DiscreteFunction) else np.asarray(u)
        if coefficients.shape != (self.n,):
            raise DimensionError(f"Operator has dimension {self.n}, got shape {coefficients.shape}.")
        return coefficients

    def apply(self, u) -> np.ndarray:
        return self.matrix @ self.check_dimension(u)

    def inner(self, u, v) -> float:
        return float(self.check_dimension(u) @ self.matrix @ self.check_dimension(v))

    def solve(self, rhs) -> np.ndarray:
        """A^{-1} rhs via the cached Cholesky factor."""
        return cho_solve(self.cholesky, np.asarray(rhs, dtype=float))

    def with_params(self, params):
        """Same operator, new nonlinearity parameters (kernel must match)."""
        if params.kernel_signature() != self.params.kernel_signature():
            raise MeshError('Kernel parameters differ from the assembled operator.')
        operator = dataclasses.replace(self, params=params)
        for key in ('matrix', 'cholesky'):
            if key in self.__dict__:
                operator.__dict__[key] = self.__dict__[key]
        return operator
