"""
FRACNEHARI - Assembly App Configuration
"""

from django.apps import AppConfig


class AssemblyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.assembly'
    verbose_name = 'Nonlocal Assembly'
