"""
FRACNEHARI - Base Settings
Configuration common to all environments.
Numerical tunables are read from the environment with python-decouple.
"""

from pathlib import Path
from decouple import config

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent

SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-in-production')

DEBUG = config('DEBUG', default=False, cast=bool)

# Environment
ENVIRONMENT = config('ENVIRONMENT', default='development')

TIME_ZONE = 'UTC'
LANGUAGE_CODE = 'en-us'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

CUSTOM_APPS = [
    'apps.core',
    'apps.assembly',
    'apps.functional',
    'apps.fibering',
    'apps.bubbles',
    'apps.solver',
    'apps.levels',
    'apps.experiments',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + CUSTOM_APPS

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('DATABASE_PATH', default=str(BASE_DIR / 'base.sqlite3')),
    }
}

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'UNAUTHENTICATED_USER': None,
}

# ==============================================================================
# NUMERICS
# ==============================================================================

# Worker count for multi-start pools; results do not depend on it
FRACNEHARI_THREADS = config('FRACNEHARI_THREADS', default=1, cast=int)

FRACNEHARI_RECORD_RUNS = config('FRACNEHARI_RECORD_RUNS', default=True, cast=bool)
FRACNEHARI_DEFAULT_OUTPUT_DIR = config('FRACNEHARI_DEFAULT_OUTPUT_DIR', default='runs')

FRACNEHARI_RESIDUAL_TOL = config('FRACNEHARI_RESIDUAL_TOL', default=1e-8, cast=float)
FRACNEHARI_MAX_ITERS = config('FRACNEHARI_MAX_ITERS', default=5000, cast=int)
FRACNEHARI_NEHARI_TOL = config('FRACNEHARI_NEHARI_TOL', default=1e-8, cast=float)

# Random starts per level for the beta_k ascent
FRACNEHARI_ASCENT_STARTS = config('FRACNEHARI_ASCENT_STARTS', default=4, cast=int)

# Gauss-Legendre orders for separated and touching element pairs
FRACNEHARI_FAR_ORDER = config('FRACNEHARI_FAR_ORDER', default=10, cast=int)
FRACNEHARI_NEAR_ORDER = config('FRACNEHARI_NEAR_ORDER', default=24, cast=int)

# ==============================================================================
# LOGGING
# ==============================================================================

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
