"""
FRACNEHARI - Experiment Config Files
Flat key=value files read with python-decouple.
"""

import logging
from typing import Dict, List

from decouple import Csv, RepositoryEnv
from rest_framework import serializers

from apps.core.exceptions import ConfigError

logger = logging.getLogger('apps.experiments')


def read_config_file(path) -> Dict[str, object]:
    """
    Raw values of a config file; list-valued keys are split on commas.

    Only the file is read: environment variables never override experiment keys.

    Raises:
        ConfigError: unreadable file or unknown keys.
    """
    from .serializers import ExperimentConfigSerializer

    try:
        repository = RepositoryEnv(str(path))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}")

    fields = ExperimentConfigSerializer().fields
    unknown = sorted(key for key in repository.data if key not in fields)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}.", extra={'unknown_keys': unknown})

    raw = {}
    for key, value in repository.data.items():
        if isinstance(fields[key], serializers.ListField):
            raw[key] = Csv()(value)
        else:
            raw[key] = value
    logger.debug(f"Read {len(raw)} keys from {path}")
    return raw


def describe_keys() -> List[Dict[str, object]]:
    """Every accepted key with its default and documentation, in declaration order."""
    from .serializers import ExperimentConfigSerializer

    rows = []
    for name, field in ExperimentConfigSerializer().fields.items():
        if field.read_only:
            continue
        default = None if field.default is serializers.empty else field.default
        if callable(default):
            default = default()
        rows.append({
            'key': name,
            'required': field.required,
            'default': default,
            'help': str(field.help_text or ''),
        })
    return rows


def describe_text() -> str:
    """Human-readable key table for the ``describe`` subcommand."""
    rows = describe_keys()
    width = max(len(row['key']) for row in rows)
    lines = ['# key = default    description', '']
    for row in rows:
        if row['required']:
            default = '(required)'
        elif isinstance(row['default'], (list, tuple)):
            default = ','.join(f"{value:g}" if isinstance(value, float) else str(value) for value in row['default'])
        elif row['default'] is None:
            default = '(unset)'
        else:
            default = str(row['default'])
        lines.append(f"{row['key'].ljust(width)} = {default}    {row['help']}")
    return '\n'.join(lines)
