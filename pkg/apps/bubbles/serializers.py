"""
FRACNEHARI - Bubble Serializers
"""

from rest_framework import serializers

from apps.core.serializers import FiniteFloatField, FloatArrayField


class SlopeFitSerializer(serializers.Serializer):
    """Serializer for SlopeFit records."""
    label = serializers.CharField(read_only=True)
    eps_grid = FloatArrayField(read_only=True)
    values = FloatArrayField(read_only=True)
    fitted_slope = FiniteFloatField(read_only=True)
    slope_stderr = FiniteFloatField(read_only=True)
    intercept = FiniteFloatField(read_only=True)
    residuals = FloatArrayField(read_only=True)
    target = FiniteFloatField(read_only=True)
    log_factor_detected = serializers.BooleanField(read_only=True)
    log_coefficient = FiniteFloatField(read_only=True, allow_null=True)
    sharp_target = FiniteFloatField(read_only=True, allow_null=True)
    bound_holds = serializers.BooleanField(read_only=True, allow_null=True)


class SobolevEstimateSerializer(serializers.Serializer):
    """Serializer for SobolevEstimate records."""
    value = FiniteFloatField(read_only=True)
    error_bar = FiniteFloatField(read_only=True)
    intercepts = serializers.ListField(child=FiniteFloatField(), read_only=True)
    table = serializers.ListField(child=serializers.DictField(), read_only=True)
