"""
FRACNEHARI - Functional App Configuration
"""

from django.apps import AppConfig


class FunctionalConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.functional'
    verbose_name = 'Energy Functional'
