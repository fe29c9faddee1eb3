"""
FRACNEHARI - Core Utilities
Reusable utility functions across the application.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
import logging

from .exceptions import ArtifactIOError

logger = logging.getLogger('apps.core')


# Hash Utilities
# ============================================================================

def calculate_sha256(data):
    """
    Calculate SHA-256 hash of data.

    Args:
        data: String or bytes to hash

    Returns:
        Hexadecimal hash string
    """
    if isinstance(data, str):
        data = data.encode('utf-8')

    return hashlib.sha256(data).hexdigest()


def array_fingerprint(*arrays, **scalars):
    """
    Hash float arrays bit-exactly together with named scalar parameters.

    Used to tie an operator to the (nodes, kernel) pair it was built from.
    """
    digest = hashlib.sha256()
    for array in arrays:
        digest.update(np.ascontiguousarray(array, dtype=np.float64).tobytes())
    digest.update(canonical_json(scalars).encode('utf-8'))
    return digest.hexdigest()


# Serialization Utilities
# ============================================================================

def to_jsonable(value):
    """
    Convert numpy containers and scalars to plain JSON types.

    Floats keep their shortest round-trip repr; non-finite floats become strings
    so the output stays strict JSON.
    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isfinite(value):
            return value
        return repr(value)
    return value


def canonical_json(payload):
    """Deterministic JSON text: sorted keys, fixed separators, round-trip floats."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, allow_nan=False)


def write_json(path, payload):
    """
    Write a payload as canonical JSON.

    Returns:
        Path written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(payload) + '\n', encoding='utf-8')
    except OSError as exc:
        logger.error(f"Failed to write {path}: {exc}")
        raise ArtifactIOError(f"Cannot write {path}: {exc}")
    return path


def append_jsonl(path, entry):
    """Append one compact JSON line (iteration traces)."""
    path = Path(path)
    line = json.dumps(to_jsonable(entry), sort_keys=True, separators=(',', ':'), allow_nan=False)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('a', encoding='utf-8') as handle:
            handle.write(line + '\n')
    except OSError as exc:
        logger.error(f"Failed to append to {path}: {exc}")
        raise ArtifactIOError(f"Cannot write {path}: {exc}")
    return path


def write_csv(path, rows, columns=None):
    """
    Write rows (list of dicts) as a CSV table with 17 significant digits.

    Returns:
        Path written
    """
    path = Path(path)
    frame = pd.DataFrame(list(rows), columns=columns)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    except OSError as exc:
        logger.error(f"Failed to write {path}: {exc}")
        raise ArtifactIOError(f"Cannot write {path}: {exc}")
    return path


def file_sha256(path):
    """SHA-256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# Runtime Utilities
# ============================================================================

def thread_count():
    """Worker count for multi-start pools, from FRACNEHARI_THREADS."""
    return max(1, int(getattr(settings, 'FRACNEHARI_THREADS', 1)))
