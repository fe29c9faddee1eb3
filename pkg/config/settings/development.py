from .base import *

DEBUG = True

LOGGING['handlers']['console']['formatter'] = 'verbose'
