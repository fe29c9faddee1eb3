"""
FRACNEHARI - Level Entities
Eigenbasis splitting Y_k / Z_k and the quantities computed on it.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from apps.assembly.entities import DiscreteFunction, StiffnessOperator
from apps.core.exceptions import InputError


@dataclass(frozen=True, eq=False)
class LevelStructure:
    """
    Generalized eigenpairs A e = lam M e with <e_i, e_j>_{X0} = delta_ij.

    Y_k spans the first k eigenvectors; Z_k spans e_k, e_{k+1}, ... (the
    complement of Y_{k-1}).
    """
    operator: StiffnessOperator
    mass: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    k_max: int

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def _check_level(self, k: int):
        if not 1 <= k <= self.n:
            raise InputError(f"Level k={k} outside 1..{self.n}.")

    def y_basis(self, k: int) -> np.ndarray:
        self._check_level(k)
        return self.basis[:, :k]

    def z_basis(self, k: int) -> np.ndarray:
        self._check_level(k)
        return self.basis[:, k - 1:]

    def y_function(self, k: int, coefficients: np.ndarray) -> DiscreteFunction:
        return DiscreteFunction(self.y_basis(k) @ coefficients, self.operator.mesh)

    def z_function(self, k: int, coefficients: np.ndarray) -> DiscreteFunction:
        return DiscreteFunction(self.z_basis(k) @ coefficients, self.operator.mesh)

    def eigen_residuals(self) -> np.ndarray:
        """||A e - lam M e||_inf per pair."""
        A = self.operator.matrix
        return np.max(np.abs(A @ self.basis - (self.mass @ self.basis) * self.eigenvalues[None, :]), axis=0)


@dataclass(frozen=True, eq=False)
class BetaEstimate:
    """
    Lower-bound estimate of sup |u|_{L^r} over the unit sphere of Z_k.

    ``coefficients`` are in the Z_k basis; ``start`` names the winning start.
    """
    k: int
    r: float
    value: float
    coefficients: np.ndarray
    start: str
    iterations: int
    stagnated: bool

    def as_dict(self) -> Dict:
        return {
            'k': self.k, 'r': self.r, 'value': self.value, 'start': self.start,
            'iterations': self.iterations, 'stagnated': self.stagnated,
        }


@dataclass(frozen=True)
class EmbeddingEstimate:
    """Sampled c = sup_{||u||=1} |u|_{2*}^{2*}; a lower bound, never certified."""
    value: float
    exponent: float
    stagnated: bool
    certified: bool = False


@dataclass(frozen=True)
class LevelRadii:
    rho_k: Optional[float]
    r_k: Optional[float]
    R: Optional[float]
    r_k_dual: Optional[float]

    def as_dict(self) -> Dict:
        return {'rho_k': self.rho_k, 'r_k': self.r_k, 'R': self.R, 'r_k_dual': self.r_k_dual}


@dataclass(frozen=True)
class SphereCheck:
    """
    Sampled sphere inequalities at level k.

    Nonnegative energy on the Z_k sphere of radius rho_k, negative energy on
    the Y_k sphere of radius r_k_dual; failures are counts.
    """
    k: int
    n_samples: int
    z_radius: float
    y_radius: float
    z_failures: int
    y_failures: int
    z_min_energy: float
    y_max_energy: float
    ball_lower_bound: float
    ball_min_energy: float

    def as_dict(self) -> Dict:
        return dict(self.__dict__)
