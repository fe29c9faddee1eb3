"""
FRACNEHARI - Experiment Factories
"""

import factory

from apps.experiments.models import ExperimentRun


class ExperimentRunFactory(factory.django.DjangoModelFactory):
    """Successful assemble run with a one-file manifest."""

    class Meta:
        model = ExperimentRun

    kind = 'assemble'
    status = ExperimentRun.SUCCEEDED
    exit_code = 0
    config_hash = factory.Sequence(lambda n: f"{n:064x}")
    seed = 0
    output_dir = factory.LazyAttribute(lambda run: f"runs/{run.kind}")
    manifest = factory.LazyAttribute(lambda run: {
        'kind': run.kind, 'config_hash': run.config_hash, 'seed': run.seed, 'exit_code': run.exit_code,
        'files': [{'name': 'config.json', 'sha256': '0' * 64, 'bytes': 10}],
    })
    error = None
    duration = 0.5

    class Params:
        failed = factory.Trait(
            status=ExperimentRun.FAILED,
            exit_code=3,
            manifest={},
            error={'error': {'code': 'non_convergence', 'message': 'budget', 'exit_code': 3}},
        )
