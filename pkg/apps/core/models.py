"""
FRACNEHARI - Core Models
"""

from django.db import models
from django.utils.translation import gettext_lazy as _


class TimestampedModel(models.Model):
    """Abstract base for persisted records: creation and last-update times, newest first."""
    created_at = models.DateTimeField(_('created at'), auto_now_add=True, db_index=True,
                                      help_text=_("Creation timestamp"))
    updated_at = models.DateTimeField(_('updated at'), auto_now=True,
                                      help_text=_("Last modification timestamp"))

    class Meta:
        abstract = True
        ordering = ['-created_at']
        get_latest_by = 'created_at'
