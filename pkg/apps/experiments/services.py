"""
FRACNEHARI - Experiment Services
Runs one experiment kind, writes its artifacts and manifest, records the run.
"""

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

from django.conf import settings
from django.db import DatabaseError
from rest_framework.exceptions import ValidationError

from apps.assembly.entities import Mesh
from apps.assembly.serializers import DiscreteFunctionSerializer
from apps.assembly.services import AssemblyService
from apps.bubbles.entities import BubbleParams
from apps.bubbles.serializers import SlopeFitSerializer, SobolevEstimateSerializer
from apps.bubbles.services import BubbleService
from apps.core.exceptions import EXIT_OK, NonConvergence, custom_exception_handler
from apps.core.utils import file_sha256, to_jsonable, write_csv, write_json
from apps.fibering.entities import N_MINUS, N_PLUS
from apps.fibering.serializers import ThresholdSetSerializer
from apps.fibering.services import FiberingService
from apps.levels.serializers import BetaEstimateSerializer, LevelRadiiSerializer, SphereCheckSerializer
from apps.levels.services import LevelService
from apps.solver.entities import SolutionRecord
from apps.solver.serializers import ContinuationResultSerializer, SolutionRecordSerializer
from apps.solver.services import SolverService
from .config import read_config_file
from .entities import ExperimentConfig
from .models import ExperimentRun
from .serializers import ExperimentConfigSerializer

logger = logging.getLogger('apps.experiments')

MANIFEST = 'manifest.json'
TRACE = 'trace.jsonl'


@dataclass
class RunOutcome:
    """Result of one CLI invocation."""
    exit_code: int
    output_dir: Optional[str] = None
    manifest: Dict = field(default_factory=dict)
    error: Optional[Dict] = None
    text: str = ''


class ArtifactWriter:
    """Writes artifacts under one directory and remembers every file."""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self.files: List[str] = []

    def path(self, name) -> Path:
        return self.output_dir / name

    def register(self, name):
        if name not in self.files:
            self.files.append(name)

    def json(self, name, payload):
        write_json(self.path(name), payload)
        self.register(name)

    def csv(self, name, rows, columns=None):
        write_csv(self.path(name), rows, columns=columns)
        self.register(name)

    def manifest(self, config_hash, kind, seed, exit_code) -> Dict:
        """manifest.json listing every other file with its SHA-256."""
        if self.path(TRACE).exists():
            self.register(TRACE)
        files = [
            {'name': name, 'sha256': file_sha256(self.path(name)), 'bytes': self.path(name).stat().st_size}
            for name in sorted(self.files)
        ]
        manifest = {
            'kind': kind, 'config_hash': config_hash, 'seed': seed,
            'exit_code': exit_code, 'files': files,
        }
        write_json(self.path(MANIFEST), manifest)
        return manifest


class ExperimentService:
    """
    Service running experiments end to end.

    Artifacts carry no timestamps or timings, so an identical config and
    seed reproduce every file byte for byte.
    """

    # ------------------------------------------------------------------
    # Entry points
    # ------------------------------------------------------------------

    @staticmethod
    def validate(raw: Dict) -> ExperimentConfig:
        """Validate raw key/values; raises DRF ValidationError (exit 2)."""
        serializer = ExperimentConfigSerializer(data=raw)
        if not serializer.is_valid():
            raise ValidationError(serializer.errors)
        return serializer.to_config()

    @staticmethod
    def load(kind: str, config_path, output_dir: str = None, seed: int = None) -> ExperimentConfig:
        """Read a config file, apply the command-line overrides and validate."""
        raw = read_config_file(config_path)
        raw['kind'] = kind
        if output_dir is not None:
            raw['output_dir'] = output_dir
        if seed is not None:
            raw['seed'] = seed
        return ExperimentService.validate(raw)

    @staticmethod
    def run_file(kind: str, config_path, output_dir: str = None, seed: int = None) -> RunOutcome:
        """load + run; failures before the run starts are reported the same way."""
        start = time.time()
        try:
            config = ExperimentService.load(kind, config_path, output_dir=output_dir, seed=seed)
        except Exception as exc:
            exit_code, payload = custom_exception_handler(exc, {'kind': kind})
            ExperimentService.record_run(
                kind=kind, exit_code=exit_code, config_hash='', seed=seed or 0,
                output_dir=output_dir or '', manifest={}, error=payload, duration=time.time() - start,
            )
            return RunOutcome(exit_code=exit_code, output_dir=output_dir, error=payload)
        return ExperimentService.run(config)

    @staticmethod
    def run(config: ExperimentConfig) -> RunOutcome:
        """
        Run one experiment and write its artifacts plus manifest.json.

        Exit codes: 0 success, 2 validation, 3 numerical failure, 4 I/O.
        A NonConvergence still writes its best iterate before the manifest.
        """
        start = time.time()
        output_dir = config.output_dir or str(Path(settings.FRACNEHARI_DEFAULT_OUTPUT_DIR) / config.kind)
        writer = ArtifactWriter(output_dir)
        runner = ExperimentService.runners()[config.kind]
        exit_code, error, text, manifest = EXIT_OK, None, '', {}

        try:
            writer.output_dir.mkdir(parents=True, exist_ok=True)
            writer.path(TRACE).unlink(missing_ok=True)
            writer.json('config.json', ExperimentService.config_payload(config))
            text = runner(config, writer) or ''
        except Exception as exc:
            exit_code, error = custom_exception_handler(exc, {'kind': config.kind})
            best = getattr(exc, 'best', None)
            if isinstance(exc, NonConvergence) and isinstance(best, SolutionRecord):
                try:
                    writer.json(f"{best.label}_best.json", SolutionRecordSerializer(best).data)
                except Exception as write_exc:
                    logger.error(f"Could not write the best iterate: {write_exc}")

        try:
            manifest = writer.manifest(config.config_hash, config.kind, config.seed, exit_code)
        except Exception as exc:
            if exit_code == EXIT_OK:
                exit_code, error = custom_exception_handler(exc, {'kind': config.kind})

        duration = time.time() - start
        if exit_code == EXIT_OK:
            logger.info(f"{config.kind} finished in {duration:.2f}s, {len(writer.files)} artifacts in {output_dir}")
        ExperimentService.record_run(
            kind=config.kind, exit_code=exit_code, config_hash=config.config_hash, seed=config.seed,
            output_dir=output_dir, manifest=manifest, error=error, duration=duration,
        )
        return RunOutcome(exit_code=exit_code, output_dir=output_dir, manifest=manifest, error=error, text=text)

    @staticmethod
    def record_run(kind, exit_code, config_hash, seed, output_dir, manifest, error, duration) -> Optional[ExperimentRun]:
        """Best-effort ExperimentRun row; database failures never change the exit code."""
        if not settings.FRACNEHARI_RECORD_RUNS:
            return None
        try:
            return ExperimentRun.objects.create(
                kind=kind,
                status=ExperimentRun.SUCCEEDED if exit_code == EXIT_OK else ExperimentRun.FAILED,
                exit_code=exit_code,
                config_hash=config_hash,
                seed=seed,
                output_dir=str(output_dir),
                manifest=to_jsonable(manifest or {}),
                error=to_jsonable(error) if error else None,
                duration=duration,
            )
        except DatabaseError as exc:
            logger.warning(f"Run not recorded: {exc}")
            return None

    @staticmethod
    def config_payload(config: ExperimentConfig) -> Dict:
        return {
            'kind': config.kind,
            'config_hash': config.config_hash,
            'seed': config.seed,
            'params': config.params.as_dict(),
            'mesh': {
                'n_elements': config.n_elements, 'grading': config.grading,
                'quadrature_order': config.quadrature_order,
            },
            'solver': {key: value for key, value in config.solver.as_dict().items() if key != 'trace_path'},
            'options': config.options,
        }

    @staticmethod
    def runners() -> Dict[str, Callable]:
        return {
            'assemble': ExperimentService.run_assemble,
            'thresholds': ExperimentService.run_thresholds,
            'fibering-report': ExperimentService.run_fibering_report,
            'solve-positive': ExperimentService.run_solve_positive,
            'solve-signchanging': ExperimentService.run_solve_signchanging,
            'bubble-asymptotics': ExperimentService.run_bubble_asymptotics,
            'fountain-levels': ExperimentService.run_fountain_levels,
            'multi-solve': ExperimentService.run_multi_solve,
        }

    # ------------------------------------------------------------------
    # Shared steps
    # ------------------------------------------------------------------

    @staticmethod
    def operator(config: ExperimentConfig):
        return AssemblyService.assemble_stiffness(config.mesh(), config.params)

    @staticmethod
    def solver_config(config: ExperimentConfig, writer: ArtifactWriter, S_estimate: float = None):
        solver = replace(config.solver)
        if config.option('trace'):
            solver.trace_path = str(writer.path(TRACE))
        if S_estimate is not None:
            solver.S_estimate = S_estimate
        return solver

    @staticmethod
    def sobolev_estimate(config: ExperimentConfig, writer: ArtifactWriter) -> float:
        """The configured S, or a fresh bubble extrapolation written to sobolev.json."""
        if config.option('s_estimate') is not None:
            return float(config.option('s_estimate'))
        params = config.params
        meshes = [
            Mesh.graded(params.a, params.b, n, ratio=config.option('s_grading'))
            for n in config.option('s_meshes')
        ]
        estimate = BubbleService.estimate_S(meshes, config.option('s_eps_grid'), params)
        writer.json('sobolev.json', SobolevEstimateSerializer(estimate).data)
        writer.csv('sobolev_table.csv', estimate.table)
        return estimate.value

    @staticmethod
    def write_solutions(writer: ArtifactWriter, records: List[SolutionRecord], extra_columns: Dict = None):
        writer.json('solutions.json', {'solutions': [SolutionRecordSerializer(r).data for r in records]})
        rows = []
        for record in records:
            row = record.summary_row()
            row.update((extra_columns or {}).get(record.label, {}))
            rows.append(row)
        writer.csv('solutions.csv', rows)

    # ------------------------------------------------------------------
    # Kinds
    # ------------------------------------------------------------------

    @staticmethod
    def run_assemble(config: ExperimentConfig, writer: ArtifactWriter):
        A = ExperimentService.operator(config)
        writer.json('operator.json', AssemblyService.dump_operator(A))

    @staticmethod
    def run_thresholds(config: ExperimentConfig, writer: ArtifactWriter) -> str:
        S = ExperimentService.sobolev_estimate(config, writer)
        thresholds = FiberingService.thresholds(config.params, S)
        writer.json('thresholds.json', ThresholdSetSerializer(thresholds).data)
        return FiberingService.threshold_table(thresholds)

    @staticmethod
    def run_fibering_report(config: ExperimentConfig, writer: ArtifactWriter):
        """Fibering analysis of the ground eigenvector: roots, projections, scan."""
        params = config.params
        A = ExperimentService.operator(config)
        u = SolverService.initial_guess(A, params)
        report = FiberingService.fibering_roots(u, A, params)
        projections = {}
        if report.t_minus is not None:
            projections['t_minus'] = FiberingService.classify_nehari(report.t_minus * u, A, params)
        if report.t_plus is not None:
            projections['t_plus'] = FiberingService.classify_nehari(report.t_plus * u, A, params)
        payload = {
            'report': FiberingService.report_dict(report),
            'projections': projections,
            'function': DiscreteFunctionSerializer(u).data,
        }
        if params.lam > 0.0:
            payload['psi_mu'] = FiberingService.psi_mu_diagnostic(u, A, params)
        writer.json('fibering.json', payload)

        t, values = FiberingService.fibering_scan(u, A, params, n=config.option('scan_points'))
        writer.csv('fibering_scan.csv', [{'t': ti, 'energy': vi} for ti, vi in zip(t, values)])

    @staticmethod
    def run_solve_positive(config: ExperimentConfig, writer: ArtifactWriter):
        params = config.params
        A = ExperimentService.operator(config)
        solver = ExperimentService.solver_config(config, writer)
        records = []
        if params.mu > 0.0:
            records.append(SolverService.minimize_on_nehari(A, params, N_PLUS, config=solver))
        else:
            logger.info('mu <= 0: N+ is empty, solving on N- only')
        records.append(SolverService.minimize_on_nehari(A, params, N_MINUS, config=solver))
        checks = {
            record.label: {'weak_check': SolverService.weak_solution_check(A, params, record.function, seed=config.seed)}
            for record in records
        }
        ExperimentService.write_solutions(writer, records, checks)

    @staticmethod
    def run_solve_signchanging(config: ExperimentConfig, writer: ArtifactWriter):
        """w1 on N-, continuation start from w1 and the bubble, then the nodal descent."""
        params = config.params
        A = ExperimentService.operator(config)
        S = ExperimentService.sobolev_estimate(config, writer)
        solver = ExperimentService.solver_config(config, writer, S_estimate=S)

        w1 = SolverService.minimize_on_nehari(A, params, N_MINUS, config=solver)
        bp = BubbleParams.for_problem(params, config.option('eps'))
        continuation = SolverService.sign_changing_continuation(A, params, w1.function, bp)
        writer.json('continuation.json', ContinuationResultSerializer(continuation).data)
        writer.csv('continuation_scan.csv', continuation.scan)

        w2 = SolverService.minimize_sign_changing(
            A, params, continuation.u_init, config=solver, reference_energy=w1.energy.total,
        )
        ExperimentService.write_solutions(writer, [w1, w2])

    @staticmethod
    def run_bubble_asymptotics(config: ExperimentConfig, writer: ArtifactWriter):
        """Slope fits of the coupling integrals and of |u_eps|^{q+1}, plus S."""
        params = config.params
        eps_grid = config.option('eps_grid')
        A = ExperimentService.operator(config)
        solver = ExperimentService.solver_config(config, writer)
        w1 = SolverService.minimize_on_nehari(A, params, N_MINUS, config=solver)

        fits = BubbleService.coupling_slopes(w1.function, eps_grid, params)
        q_values = config.option('q_values') or [params.q, params.log_borderline_q]
        q_values = [q for q in dict.fromkeys(q_values) if 0.0 < q < 1.0]
        power_fits = [BubbleService.power_slope(eps_grid, q, params) for q in q_values]

        all_fits = list(fits.values()) + power_fits
        writer.json('slopes.json', {
            'coupling': {key: SlopeFitSerializer(fit).data for key, fit in fits.items()},
            'power': [SlopeFitSerializer(fit).data for fit in power_fits],
        })
        writer.csv('slopes.csv', [
            {
                'label': fit.label, 'target': fit.target, 'fitted_slope': fit.fitted_slope,
                'slope_stderr': fit.slope_stderr, 'sharp_target': fit.sharp_target,
                'bound_holds': fit.bound_holds, 'log_factor_detected': fit.log_factor_detected,
            }
            for fit in all_fits
        ])
        writer.csv('slope_points.csv', [
            {'label': fit.label, **row} for fit in all_fits for row in fit.rows()
        ])

        S = ExperimentService.sobolev_estimate(config, writer)
        writer.json('bubble_energy.json', {
            'S_estimate': S,
            'critical_bubble_energy': BubbleService.critical_bubble_energy(S, params),
        })

    @staticmethod
    def run_fountain_levels(config: ExperimentConfig, writer: ArtifactWriter):
        """beta_k for the L^{q+1} and L^{p+1} norms, radii table and sphere checks."""
        params = config.params
        A = ExperimentService.operator(config)
        k_max, check_k = config.option('k_max'), config.option('check_k')
        levels = LevelService.build_levels(A, k_max=k_max)
        concave = LevelService.beta_sequence(levels, params.q + 1.0, seed=config.seed)
        convex = LevelService.beta_sequence(levels, params.p + 1.0, seed=config.seed)
        embedding = LevelService.estimate_embedding_constant(levels, seed=config.seed)

        writer.csv('levels.csv', LevelService.levels_table(levels, params, concave, convex))
        radii = LevelService.radii(params, concave[check_k - 1].value, convex[check_k - 1].value, embedding.value)
        payload = {
            'eigenvalues': levels.eigenvalues[:k_max],
            'max_eigen_residual': float(levels.eigen_residuals().max()),
            'beta_concave': [BetaEstimateSerializer(b).data for b in concave],
            'beta_convex': [BetaEstimateSerializer(b).data for b in convex],
            'embedding': asdict(embedding),
            'check_k': check_k,
            'radii': LevelRadiiSerializer(radii).data,
        }
        if radii.rho_k is not None:
            check = LevelService.sphere_checks(
                levels, params, check_k, radii, beta_concave=concave[check_k - 1].value,
                n_samples=config.option('samples'), seed=config.seed,
            )
            payload['sphere_check'] = SphereCheckSerializer(check).data
        writer.json('levels.json', payload)

    @staticmethod
    def run_multi_solve(config: ExperimentConfig, writer: ArtifactWriter):
        params = config.params
        A = ExperimentService.operator(config)
        solver = ExperimentService.solver_config(config, writer)
        records = SolverService.multi_solution_search(A, params, config.option('count'), config=solver)
        if not records:
            raise NonConvergence('Multi-solution search found no nontrivial solution.')
        ExperimentService.write_solutions(writer, records)
        writer.json('trends.json', SolverService.solution_trends(records, params))

