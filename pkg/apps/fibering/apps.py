"""
FRACNEHARI - Fibering App Configuration
"""

from django.apps import AppConfig


class FiberingConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.fibering'
    verbose_name = 'Fibering & Nehari Analysis'
