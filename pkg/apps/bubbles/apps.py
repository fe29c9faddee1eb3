"""
FRACNEHARI - Bubbles App Configuration
"""

from django.apps import AppConfig


class BubblesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.bubbles'
    verbose_name = 'Bubble Asymptotics'
