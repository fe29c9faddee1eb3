"""
FRACNEHARI - Fibering Entities
Norm triples, fibering reports and threshold sets.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

NOT_ON_N = 'not_on_N'
N_PLUS = 'N_plus'
N_MINUS = 'N_minus'
N_ZERO = 'N_zero_within_tol'

NEHARI_CLASSES = (NOT_ON_N, N_PLUS, N_MINUS, N_ZERO)


@dataclass(frozen=True)
class FiberNorms:
    """
    a = ||u||^2, b = |u|_{p+1}^{p+1}, c = |u|_{q+1}^{q+1}.
    """
    a: float
    b: float
    c: float

    def as_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class FiberingReport:
    """
    Fibering analysis of one function.

    ``t_minus``/``t_plus`` solve phi(t) = mu*c when ``roots_exist``;
    ``t_zero_crossing`` is the zero of phi beyond t0.
    """
    t0: float
    phi_t0: float
    mu_rhs: float
    t_minus: Optional[float]
    t_plus: Optional[float]
    t_zero_crossing: float
    classification: str
    roots_exist: bool
    norms: FiberNorms

    def as_dict(self) -> Dict:
        data = asdict(self)
        data['norms'] = self.norms.as_dict()
        return data


@dataclass(frozen=True)
class ThresholdSet:
    """Closed-form thresholds evaluated at one S estimate."""
    tilde_mu: float
    k_const: float
    M_const: float
    k_M_discrepancy: float
    S_estimate: float
    omega_measure: float
    mu_star: float
    compactness_ceiling: float
    concave_floor_term: float
    phi_lower_bound_factor: float
    nehari_minus_norm_floor: float
    mu_below_tilde: bool
    mu_below_star: bool
    sign_changing_regime: bool

    def as_dict(self) -> Dict:
        return asdict(self)
