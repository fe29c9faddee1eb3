from .base import *

DEBUG = False

LOGGING['loggers']['apps']['level'] = config('LOG_LEVEL', default='WARNING')
