"""
FRACNEHARI - Level Serializers
"""

from rest_framework import serializers

from apps.core.serializers import FiniteFloatField


class BetaEstimateSerializer(serializers.Serializer):
    k = serializers.IntegerField(read_only=True)
    r = FiniteFloatField(read_only=True)
    value = FiniteFloatField(read_only=True)
    start = serializers.CharField(read_only=True)
    iterations = serializers.IntegerField(read_only=True)
    stagnated = serializers.BooleanField(read_only=True)


class LevelRadiiSerializer(serializers.Serializer):
    rho_k = FiniteFloatField(read_only=True, allow_null=True)
    r_k = FiniteFloatField(read_only=True, allow_null=True)
    R = FiniteFloatField(read_only=True, allow_null=True)
    r_k_dual = FiniteFloatField(read_only=True, allow_null=True)


class SphereCheckSerializer(serializers.Serializer):
    """Serializer for sampled sphere checks."""
    k = serializers.IntegerField(read_only=True)
    n_samples = serializers.IntegerField(read_only=True)
    z_radius = FiniteFloatField(read_only=True)
    y_radius = FiniteFloatField(read_only=True)
    z_failures = serializers.IntegerField(read_only=True)
    y_failures = serializers.IntegerField(read_only=True)
    z_min_energy = FiniteFloatField(read_only=True)
    y_max_energy = FiniteFloatField(read_only=True)
    ball_lower_bound = FiniteFloatField(read_only=True)
    ball_min_energy = FiniteFloatField(read_only=True)
