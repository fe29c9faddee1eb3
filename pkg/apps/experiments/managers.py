"""
FRACNEHARI - Experiment Managers
Custom managers for experiment run queries.
"""

from django.db import models


class ExperimentRunManager(models.Manager):
    """Manager for ExperimentRun model."""

    def succeeded(self):
        """Runs that exited with status 0."""
        return self.filter(exit_code=0)

    def failed(self):
        """Runs that exited with a nonzero status."""
        return self.exclude(exit_code=0)

    def for_config(self, config_hash):
        """Every run of one configuration, newest first."""
        return self.filter(config_hash=config_hash).order_by('-created_at', '-pk')

    def latest_for_kind(self, kind):
        """Most recent successful run of an experiment kind, or None."""
        return self.succeeded().filter(kind=kind).order_by('-created_at', '-pk').first()
