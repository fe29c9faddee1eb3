"""
FRACNEHARI - Experiment Models
One row per CLI invocation: what ran, with which configuration and how it ended.
"""

from django.db import models
from django.utils.translation import gettext_lazy as _

from apps.core.models import TimestampedModel
from .managers import ExperimentRunManager

KIND_CHOICES = [
    ('assemble', _('Assemble')),
    ('thresholds', _('Thresholds')),
    ('fibering-report', _('Fibering report')),
    ('solve-positive', _('Solve positive')),
    ('solve-signchanging', _('Solve sign-changing')),
    ('bubble-asymptotics', _('Bubble asymptotics')),
    ('fountain-levels', _('Fountain levels')),
    ('multi-solve', _('Multi-solve')),
]
KINDS = [kind for kind, _label in KIND_CHOICES]


class ExperimentRun(TimestampedModel):
    """
    Record of a single experiment run.

    ``manifest`` is the manifest.json payload of a successful run; ``error``
    the diagnostic payload written to stderr on failure.
    """
    SUCCEEDED = 'succeeded'
    FAILED = 'failed'

    STATUS_CHOICES = [
        (SUCCEEDED, _('Succeeded')),
        (FAILED, _('Failed')),
    ]

    kind = models.CharField(
        _('kind'),
        max_length=32,
        choices=KIND_CHOICES,
        db_index=True
    )
    status = models.CharField(
        _('status'),
        max_length=16,
        choices=STATUS_CHOICES
    )
    exit_code = models.PositiveSmallIntegerField(
        _('exit code'),
        default=0
    )
    config_hash = models.CharField(
        _('config hash'),
        max_length=64,
        blank=True,
        db_index=True,
        help_text=_('SHA-256 of the canonical configuration; empty when validation failed')
    )
    seed = models.BigIntegerField(
        _('seed'),
        default=0
    )
    output_dir = models.CharField(
        _('output directory'),
        max_length=500
    )
    manifest = models.JSONField(
        _('manifest'),
        default=dict,
        blank=True
    )
    error = models.JSONField(
        _('error'),
        null=True,
        blank=True
    )
    duration = models.FloatField(
        _('duration (s)'),
        default=0.0
    )

    objects = ExperimentRunManager()

    class Meta:
        db_table = 'experiment_runs'
        verbose_name = _('Experiment run')
        verbose_name_plural = _('Experiment runs')
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['kind', 'status'], name='experiment_kind_status_idx'),
        ]

    def __str__(self):
        return f"{self.kind} [{self.status}] exit={self.exit_code}"

    @property
    def succeeded(self):
        return self.exit_code == 0

    @property
    def files(self):
        """File names listed in the manifest."""
        return [entry['name'] for entry in (self.manifest or {}).get('files', [])]
