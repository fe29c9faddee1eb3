"""
FRACNEHARI - Solver Serializers
"""

from rest_framework import serializers

from apps.core.exceptions import ConfigError
from apps.core.serializers import FiniteFloatField, FloatArrayField
from apps.fibering.entities import NEHARI_CLASSES
from apps.functional.serializers import EnergyBreakdownSerializer
from .entities import SolverConfig


class SolverConfigSerializer(serializers.Serializer):
    """
    Serializer for SolverConfig; unset iteration limits fall back to settings.
    """
    max_iters = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    residual_tol = FiniteFloatField(min_value=0.0, required=False, allow_null=True, default=None)
    armijo_c = FiniteFloatField(default=1e-4)
    backtrack = FiniteFloatField(default=0.5)
    min_step = FiniteFloatField(default=1e-12)
    projection_tol = FiniteFloatField(default=1e-10)
    part_tol = FiniteFloatField(default=1e-6)
    dedup_tol = FiniteFloatField(default=1e-4)
    deflation_shift = FiniteFloatField(default=1.0)
    deflation_power = FiniteFloatField(default=2.0)
    seed = serializers.IntegerField(default=0)
    trace_path = serializers.CharField(required=False, allow_null=True, default=None)
    S_estimate = FiniteFloatField(required=False, allow_null=True, default=None)

    def validate(self, attrs):
        try:
            attrs['instance'] = SolverConfig(**attrs)
        except ConfigError as exc:
            raise serializers.ValidationError({'solver': [str(exc.detail)]})
        return attrs

    def to_config(self) -> SolverConfig:
        return self.validated_data['instance']


class SolutionRecordSerializer(serializers.Serializer):
    """Serializer for SolutionRecord; coefficients inline, trace and timing omitted."""
    label = serializers.CharField(read_only=True)
    coefficients = FloatArrayField(read_only=True)
    energy = EnergyBreakdownSerializer(read_only=True)
    residual = FiniteFloatField(read_only=True)
    nehari_class = serializers.ChoiceField(choices=NEHARI_CLASSES, read_only=True)
    plus_class = serializers.ChoiceField(choices=NEHARI_CLASSES, read_only=True, allow_null=True)
    minus_class = serializers.ChoiceField(choices=NEHARI_CLASSES, read_only=True, allow_null=True)
    sign_changing = serializers.BooleanField(read_only=True)
    iterations = serializers.IntegerField(read_only=True)
    diagnostics = serializers.DictField(read_only=True)


class ContinuationResultSerializer(serializers.Serializer):
    """Continuation constants, the start u_init and the s+ - s- scan."""
    a = FiniteFloatField(read_only=True)
    b = FiniteFloatField(read_only=True)
    r_bar = serializers.ListField(child=FiniteFloatField(), read_only=True)
    u_init = FloatArrayField(source='u_init.coefficients', read_only=True)
    scan = serializers.ListField(child=serializers.DictField(), read_only=True)
