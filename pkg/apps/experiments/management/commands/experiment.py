"""
Management command running one experiment kind from a key=value config file.
"""
import json
import logging
import sys

from django.core.management.base import BaseCommand

from apps.core.utils import to_jsonable
from apps.experiments.config import describe_text
from apps.experiments.models import KINDS
from apps.experiments.services import ExperimentService


class Command(BaseCommand):
    help = 'Run an experiment (or `describe` the config keys)'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=KINDS + ['describe'], help='experiment kind')
        parser.add_argument('--config', dest='config_path', help='key=value config file')
        parser.add_argument('--out', dest='output_dir', default=None, help='artifact directory')
        parser.add_argument('--seed', type=int, default=None, help='override the config seed')
        parser.add_argument('--quiet', action='store_true', help='only warnings and errors on the log')

    def handle(self, *args, **options):
        """Run the experiment; exits with its status code."""
        if options['quiet']:
            logging.getLogger('apps').setLevel(logging.WARNING)

        kind = options['kind']
        if kind == 'describe':
            self.stdout.write(describe_text())
            return

        if not options['config_path']:
            self.write_error({'error': {
                'code': 'invalid_config', 'message': '--config is required.', 'exit_code': 2,
            }})
            sys.exit(2)

        outcome = ExperimentService.run_file(
            kind, options['config_path'], output_dir=options['output_dir'], seed=options['seed'],
        )
        if outcome.text and not options['quiet']:
            self.stdout.write(outcome.text)
        if outcome.exit_code:
            self.write_error(outcome.error)
            sys.exit(outcome.exit_code)
        self.stdout.write(self.style.SUCCESS(
            f"{kind}: {len(outcome.manifest.get('files', []))} artifacts in {outcome.output_dir}"
        ))

    def write_error(self, payload):
        self.stderr.write(json.dumps(to_jsonable(payload), sort_keys=True))
