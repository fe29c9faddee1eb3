"""
FRACNEHARI - Assembly Serializers
Serializers for problem parameters, meshes, functions and operators.
"""

from rest_framework import serializers
from django.utils.translation import gettext_lazy as _

from apps.core.exceptions import ParamError
from apps.core.serializers import FiniteFloatField, FloatArrayField
from .entities import CUSTOM, FRACTIONAL, KernelProfile, Mesh, ProblemParams


class KernelProfileSerializer(serializers.Serializer):
    """Tabulated rho(r) = K(r) r^{N+2s}."""
    radii = FloatArrayField()
    values = FloatArrayField()

    def validate(self, attrs):
        if attrs['radii'].ndim != 1 or attrs['radii'].shape != attrs['values'].shape:
            raise serializers.ValidationError(_('Profile radii and values must be 1-D arrays of equal length.'))
        return attrs


class ProblemParamsSerializer(serializers.Serializer):
    """
    Serializer for ProblemParams.

    ``to_params`` builds the entity; entity invariants surface as validation
    errors on the ``params`` field.
    """
    N = serializers.IntegerField(default=1)
    s = FiniteFloatField()
    q = FiniteFloatField()
    p = FiniteFloatField()
    mu = FiniteFloatField(default=0.0)
    lam = FiniteFloatField(default=1.0)
    a = FiniteFloatField(default=-1.0)
    b = FiniteFloatField(default=1.0)
    kernel = serializers.ChoiceField(choices=[FRACTIONAL, CUSTOM], default=FRACTIONAL)
    theta = FiniteFloatField(default=1.0)
    profile = KernelProfileSerializer(required=False, allow_null=True)

    def validate(self, attrs):
        try:
            attrs['instance'] = self._build(attrs)
        except ParamError as exc:
            raise serializers.ValidationError({'params': [str(exc.detail)]})
        return attrs

    @staticmethod
    def _build(attrs):
        profile = attrs.get('profile')
        if profile is not None:
            profile = KernelProfile(profile['radii'], profile['values'])
        return ProblemParams(
            s=attrs['s'], q=attrs['q'], p=attrs['p'], mu=attrs['mu'], lam=attrs['lam'],
            a=attrs['a'], b=attrs['b'], N=attrs['N'], kernel=attrs['kernel'],
            theta=attrs['theta'], profile=profile,
        )

    def to_params(self) -> ProblemParams:
        return self.validated_data['instance']


class MeshSerializer(serializers.Serializer):
    nodes = FloatArrayField()
    quadrature_order = serializers.IntegerField(min_value=2, default=8)

    def to_representation(self, instance):
        return instance.as_dict()

    def to_mesh(self) -> Mesh:
        return Mesh(self.validated_data['nodes'], self.validated_data['quadrature_order'])


class DiscreteFunctionSerializer(serializers.Serializer):
    """Nodal coefficients plus the nodes they live on."""

    def to_representation(self, instance):
        return {
            'nodes': instance.mesh.nodes.tolist(),
            'coefficients': instance.coefficients.tolist(),
        }


class StiffnessOperatorSerializer(serializers.Serializer):
    """
    Operator JSON: params, mesh, row-major matrix (and its two parts),
    tail weights, fingerprint.
    """

    def to_representation(self, instance):
        return {
            'params': instance.params.as_dict(),
            'mesh': instance.mesh.as_dict(),
            'matrix': instance.matrix.tolist(),
            'interaction': instance.interaction.tolist(),
            'tail': instance.tail.tolist(),
            'tail_weights': instance.tail_weights.tolist(),
            'fingerprint': instance.fingerprint,
        }
