"""
FRACNEHARI - Functional Serializers
"""

from rest_framework import serializers

from apps.core.serializers import FiniteFloatField


class EnergyBreakdownSerializer(serializers.Serializer):
    """Serializer for EnergyBreakdown records."""
    quadratic = FiniteFloatField(read_only=True)
    concave = FiniteFloatField(read_only=True)
    convex = FiniteFloatField(read_only=True)
    total = FiniteFloatField(read_only=True)
