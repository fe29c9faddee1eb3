"""
FRACNEHARI - Fibering Serializers
"""

from rest_framework import serializers

from apps.core.serializers import FiniteFloatField
from .entities import NEHARI_CLASSES


class FiberNormsSerializer(serializers.Serializer):
    a = FiniteFloatField(read_only=True)
    b = FiniteFloatField(read_only=True)
    c = FiniteFloatField(read_only=True)


class FiberingReportSerializer(serializers.Serializer):
    """Serializer for FiberingReport records."""
    t0 = FiniteFloatField(read_only=True)
    phi_t0 = FiniteFloatField(read_only=True)
    mu_rhs = FiniteFloatField(read_only=True)
    t_minus = FiniteFloatField(read_only=True, allow_null=True)
    t_plus = FiniteFloatField(read_only=True, allow_null=True)
    t_zero_crossing = FiniteFloatField(read_only=True)
    classification = serializers.ChoiceField(choices=NEHARI_CLASSES, read_only=True)
    roots_exist = serializers.BooleanField(read_only=True)
    norms = FiberNormsSerializer(read_only=True)


class ThresholdSetSerializer(serializers.Serializer):
    """Serializer for ThresholdSet records."""
    tilde_mu = FiniteFloatField(read_only=True)
    k_const = FiniteFloatField(read_only=True)
    M_const = FiniteFloatField(read_only=True)
    k_M_discrepancy = FiniteFloatField(read_only=True)
    S_estimate = FiniteFloatField(read_only=True)
    omega_measure = FiniteFloatField(read_only=True)
    mu_star = FiniteFloatField(read_only=True)
    compactness_ceiling = FiniteFloatField(read_only=True)
    concave_floor_term = FiniteFloatField(read_only=True)
    phi_lower_bound_factor = FiniteFloatField(read_only=True)
    nehari_minus_norm_floor = FiniteFloatField(read_only=True)
    mu_below_tilde = serializers.BooleanField(read_only=True)
    mu_below_star = serializers.BooleanField(read_only=True)
    sign_changing_regime = serializers.BooleanField(read_only=True)
