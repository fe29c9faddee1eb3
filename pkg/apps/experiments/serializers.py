"""
FRACNEHARI - Experiment Serializers
Validation of experiment configs and the run records.
"""

import numpy as np
from rest_framework import serializers

from apps.assembly.entities import CUSTOM, FRACTIONAL
from apps.assembly.serializers import ProblemParamsSerializer
from apps.core.exceptions import ParamError
from apps.core.serializers import FiniteFloatField
from apps.core.utils import calculate_sha256, canonical_json
from apps.solver.serializers import SolverConfigSerializer
from .entities import ExperimentConfig
from .models import KINDS, ExperimentRun

PARAM_KEYS = ('N', 's', 'q', 'p', 'mu', 'lam', 'a', 'b', 'kernel', 'theta')
SOLVER_KEYS = (
    'max_iters', 'residual_tol', 'armijo_c', 'backtrack', 'min_step', 'projection_tol',
    'part_tol', 'dedup_tol', 'deflation_shift', 'deflation_power',
)
MESH_KEYS = ('n_elements', 'grading', 'quadrature_order')
UNHASHED_KEYS = ('output_dir',)


def deep_eps_grid():
    return [float(value) for value in np.logspace(-60.0, -20.0, 9)]


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Flat experiment configuration.

    Every field documents its unit and default; ``describe`` prints them.
    Problem and solver keys are re-validated by their own serializers.
    """
    kind = serializers.ChoiceField(choices=KINDS, help_text='experiment kind')
    seed = serializers.IntegerField(default=0, help_text='random seed for every sampled start')
    output_dir = serializers.CharField(default='', allow_blank=True,
                                       help_text='artifact directory (default FRACNEHARI_DEFAULT_OUTPUT_DIR/<kind>)')

    # Problem
    N = serializers.IntegerField(default=1, help_text='spatial dimension (only 1)')
    s = FiniteFloatField(help_text='fractional order, 0<s<1')
    q = FiniteFloatField(help_text='concave exponent, 0<q<1')
    p = FiniteFloatField(help_text='convex exponent, 1<p<=2*-1')
    mu = FiniteFloatField(default=0.0, help_text='concave weight')
    lam = FiniteFloatField(default=1.0, help_text='convex weight')
    a = FiniteFloatField(default=-1.0, help_text='left end of the domain')
    b = FiniteFloatField(default=1.0, help_text='right end of the domain')
    kernel = serializers.ChoiceField(choices=[FRACTIONAL, CUSTOM], default=FRACTIONAL,
                                     help_text='fractional or custom (tabulated radial profile)')
    theta = FiniteFloatField(default=1.0, help_text='kernel lower-bound constant')
    profile_radii = serializers.ListField(child=FiniteFloatField(), default=list,
                                          help_text='custom kernel radii, comma separated, increasing')
    profile_values = serializers.ListField(child=FiniteFloatField(), default=list,
                                           help_text='custom kernel values K(r) at profile_radii')

    # Mesh
    n_elements = serializers.IntegerField(min_value=2, default=32, help_text='number of P1 elements')
    grading = FiniteFloatField(min_value=1.0, default=1.0,
                               help_text='center/end spacing ratio; 1 gives a uniform mesh')
    quadrature_order = serializers.IntegerField(min_value=2, default=8, help_text='Gauss points per element')

    # Solver
    max_iters = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None,
                                         help_text='iteration budget (default FRACNEHARI_MAX_ITERS)')
    residual_tol = FiniteFloatField(required=False, allow_null=True, default=None,
                                    help_text='dual-norm residual tolerance (default FRACNEHARI_RESIDUAL_TOL)')
    armijo_c = FiniteFloatField(default=1e-4, help_text='Armijo sufficient-decrease constant')
    backtrack = FiniteFloatField(default=0.5, help_text='step reduction factor, 0<backtrack<1')
    min_step = FiniteFloatField(default=1e-12, help_text='smallest trial step')
    projection_tol = FiniteFloatField(default=1e-10, help_text='nodal Nehari projection tolerance')
    part_tol = FiniteFloatField(default=1e-6, help_text='L2 norm below which a nodal part counts as zero')
    dedup_tol = FiniteFloatField(default=1e-4, help_text='relative L2 distance identifying two solutions')
    deflation_shift = FiniteFloatField(default=1.0, help_text='deflation shift')
    deflation_power = FiniteFloatField(default=2.0, help_text='deflation power')
    trace = serializers.BooleanField(default=False, help_text='stream solver iterations to trace.jsonl')

    # Kind-specific
    s_estimate = FiniteFloatField(required=False, allow_null=True, default=None, min_value=0.0,
                                  help_text='Sobolev constant S; estimated from bubbles when unset')
    s_meshes = serializers.ListField(child=serializers.IntegerField(min_value=4), default=lambda: [64, 128],
                                     help_text='element counts of the graded meshes for estimating S')
    s_eps_grid = serializers.ListField(child=FiniteFloatField(min_value=0.0),
                                       default=lambda: [0.2, 0.1, 0.05, 0.025, 0.0125],
                                       help_text='bubble eps values extrapolated to S')
    s_grading = FiniteFloatField(min_value=1.0, default=8.0, help_text='grading ratio of the S meshes')
    eps = FiniteFloatField(min_value=0.0, default=0.05, help_text='bubble eps of the sign-changing start')
    eps_grid = serializers.ListField(child=FiniteFloatField(min_value=0.0), default=deep_eps_grid,
                                     help_text='eps values of the bubble slope fits (>= 4 over 2 decades)')
    q_values = serializers.ListField(child=FiniteFloatField(), default=list,
                                     help_text='q values of the |u_eps|^{q+1} fits (default q and 2s/(N-2s))')
    k_max = serializers.IntegerField(min_value=1, default=16, help_text='largest level k')
    check_k = serializers.IntegerField(min_value=1, default=2, help_text='level of the sampled sphere checks')
    samples = serializers.IntegerField(min_value=1, default=100, help_text='samples per sphere check')
    count = serializers.IntegerField(min_value=1, default=4, help_text='solutions requested by multi-solve')
    scan_points = serializers.IntegerField(min_value=2, default=10000, help_text='points of the fibering scan')

    def validate(self, attrs):
        param_data = {key: attrs[key] for key in PARAM_KEYS}
        if attrs['kernel'] == CUSTOM:
            param_data['profile'] = {'radii': attrs['profile_radii'], 'values': attrs['profile_values']}
        params_serializer = ProblemParamsSerializer(data=param_data)
        if not params_serializer.is_valid():
            raise serializers.ValidationError(params_serializer.errors)
        params = params_serializer.to_params()

        if attrs['kind'] == 'solve-signchanging':
            try:
                params.require_sign_changing_regime()
            except ParamError as exc:
                raise serializers.ValidationError({'params': [str(exc.detail)]})

        solver_data = {key: attrs[key] for key in SOLVER_KEYS}
        solver_data.update(seed=attrs['seed'], S_estimate=attrs['s_estimate'])
        solver_serializer = SolverConfigSerializer(data=solver_data)
        if not solver_serializer.is_valid():
            raise serializers.ValidationError({'solver': solver_serializer.errors})

        n_interior = attrs['n_elements'] - 1
        if attrs['kind'] == 'fountain-levels':
            if attrs['k_max'] > n_interior:
                raise serializers.ValidationError({'k_max': [f"k_max must not exceed {n_interior} interior nodes."]})
            if attrs['check_k'] > attrs['k_max']:
                raise serializers.ValidationError({'check_k': ['check_k must not exceed k_max.']})
        if attrs['kind'] == 'bubble-asymptotics':
            grid = attrs['eps_grid']
            if len(set(grid)) < 4 or not max(grid) >= 100.0 * min(grid):
                raise serializers.ValidationError({'eps_grid': ['Need at least 4 distinct values spanning 2 decades.']})

        attrs['_params'] = params
        attrs['_solver'] = solver_serializer.to_config()
        return attrs

    def config_hash(self) -> str:
        """SHA-256 of the canonical key/value form, output directory excluded."""
        data = {
            key: value for key, value in self.validated_data.items()
            if not key.startswith('_') and key not in UNHASHED_KEYS
        }
        return calculate_sha256(canonical_json(data))

    def to_config(self) -> ExperimentConfig:
        data = self.validated_data
        options = {
            key: value for key, value in data.items()
            if not key.startswith('_') and key not in PARAM_KEYS + SOLVER_KEYS + MESH_KEYS
            and key not in ('kind', 'seed', 'output_dir')
        }
        return ExperimentConfig(
            kind=data['kind'],
            params=data['_params'],
            solver=data['_solver'],
            n_elements=data['n_elements'],
            grading=data['grading'],
            quadrature_order=data['quadrature_order'],
            seed=data['seed'],
            output_dir=data['output_dir'],
            config_hash=self.config_hash(),
            options=options,
        )


class ExperimentRunSerializer(serializers.ModelSerializer):
    """Serializer for ExperimentRun rows."""
    files = serializers.ListField(child=serializers.CharField(), read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'kind', 'status', 'exit_code', 'config_hash', 'seed', 'output_dir',
            'manifest', 'error', 'duration', 'files', 'created_at',
        ]
        read_only_fields = fields
