"""
FRACNEHARI - Custom Exceptions
Centralized exception handling for consistent CLI error diagnostics.
"""

from rest_framework import status
from rest_framework.exceptions import APIException, ValidationError
from django.utils.translation import gettext_lazy as _
import logging

logger = logging.getLogger('apps.core')

# Process exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
EXIT_INTERNAL = 1


def custom_exception_handler(exc, context=None):
    """
    Turn any exception into a machine-readable diagnostic.

    Returns:
        Tuple (exit_code, payload) where payload has the standardized format:
        {
            "error": {
                "code": "error_code",
                "message": "Human-readable error message",
                "exit_code": 2,
                "details": {...}  # Optional additional details
            }
        }
    """
    if isinstance(exc, BaseFracNehariException):
        exit_code = exc.exit_code
    elif isinstance(exc, ValidationError):
        exit_code = EXIT_VALIDATION
    elif isinstance(exc, OSError):
        exit_code = EXIT_IO
    else:
        exit_code = EXIT_INTERNAL

    payload = {
        'error': {
            'code': getattr(exc, 'default_code', exc.__class__.__name__.lower()),
            'message': _flatten_message(exc),
            'exit_code': exit_code,
        }
    }

    details = {}
    if isinstance(exc, APIException) and isinstance(exc.detail, dict):
        details.update(_plain(exc.detail))
    elif isinstance(exc, APIException) and isinstance(exc.detail, list):
        details['errors'] = _plain(exc.detail)
    details.update(getattr(exc, 'extra', None) or {})
    if details:
        payload['error']['details'] = details

    logger.error(
        f"{exc.__class__.__name__}: {payload['error']['message']}",
        extra={
            'exit_code': exit_code,
            'kind': (context or {}).get('kind'),
        }
    )

    return exit_code, payload


def _plain(detail):
    """Convert DRF ErrorDetail containers to plain JSON types."""
    if isinstance(detail, dict):
        return {str(key): _plain(value) for key, value in detail.items()}
    if isinstance(detail, (list, tuple)):
        return [_plain(item) for item in detail]
    return str(detail)


def _flatten_message(exc):
    if isinstance(exc, APIException) and isinstance(exc.detail, dict):
        parts = []
        for field, errors in exc.detail.items():
            errors = errors if isinstance(errors, list) else [errors]
            parts.append(f"{field}: {'; '.join(str(e) for e in errors)}")
        return ' | '.join(parts)
    if isinstance(exc, APIException) and isinstance(exc.detail, list):
        return '; '.join(str(e) for e in exc.detail)
    return str(exc)


# ============================================================================
# CUSTOM EXCEPTIONS
# ============================================================================

class BaseFracNehariException(APIException):
    """
    Base exception for all FRACNEHARI custom exceptions.

    Accepts an optional ``extra`` mapping that is attached to the diagnostic
    payload (scan tables, best iterate summaries, ...).
    """
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = _('An error occurred.')
    default_code = 'error'
    exit_code = EXIT_INTERNAL

    def __init__(self, detail=None, code=None, extra=None):
        super().__init__(detail=detail, code=code)
        self.extra = extra or {}


# Validation Exceptions
# ============================================================================

class FracNehariValidationException(BaseFracNehariException):
    """Base class for invalid input; maps to exit code 2."""
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = _('Invalid input.')
    default_code = 'invalid'
    exit_code = EXIT_VALIDATION


class ParamError(FracNehariValidationException):
    """Raised when problem parameters violate their invariants."""
    default_detail = _('Problem parameters are invalid.')
    default_code = 'invalid_params'


class MeshError(FracNehariValidationException):
    """Raised when a mesh is malformed or an operator belongs to another mesh."""
    default_detail = _('Mesh is invalid.')
    default_code = 'invalid_mesh'


class ConfigError(FracNehariValidationException):
    """Raised when an experiment configuration cannot be read or is invalid."""
    default_detail = _('Experiment configuration is invalid.')
    default_code = 'invalid_config'


class InputError(FracNehariValidationException):
    """Raised when a function argument is outside the operation's domain."""
    default_detail = _('Invalid argument.')
    default_code = 'invalid_input'


class DimensionError(FracNehariValidationException):
    """Raised when vector and operator dimensions do not match."""
    default_detail = _('Dimension mismatch.')
    default_code = 'dimension_mismatch'


class PartError(FracNehariValidationException):
    """Raised when positive/negative parts are not nonnegative."""
    default_detail = _('Parts must be nonnegative.')
    default_code = 'invalid_parts'


# Numerical Exceptions
# ============================================================================

class NumericalException(BaseFracNehariException):
    """Base class for numerical failures; maps to exit code 3."""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = _('Numerical procedure failed.')
    default_code = 'numerical_failure'
    exit_code = EXIT_NUMERICAL


class QuadratureError(NumericalException):
    """Raised when quadrature refinement does not converge."""
    default_detail = _('Quadrature did not converge.')
    default_code = 'quadrature_not_converged'


class NoRoots(NumericalException):
    """Raised when the fibering equation has no roots (mu term too large)."""
    default_detail = _('Fibering equation has no roots for this function.')
    default_code = 'no_roots'


class RootError(NumericalException):
    """Raised when a bracketed root fails the tolerance check."""
    default_detail = _('Root polishing failed to reach tolerance.')
    default_code = 'root_tolerance'


class NearDegenerateError(NumericalException):
    """Raised when a point is too close to the degenerate Nehari set."""
    default_detail = _('Point is too close to the degenerate Nehari set.')
    default_code = 'near_degenerate'


class ExtrapolationError(NumericalException):
    """Raised when a quotient sequence is not monotone enough to extrapolate."""
    default_detail = _('Quotient sequence is not monotone; extrapolation refused.')
    default_code = 'extrapolation_failed'


class FitError(NumericalException):
    """Raised when a slope fit has too few points or too narrow a range."""
    default_detail = _('Slope fit requires at least 4 points spanning 2 decades.')
    default_code = 'fit_failed'


class ContinuationError(NumericalException):
    """Raised when the two-sided continuation finds no balancing parameter."""
    default_detail = _('Continuation scan found no sign change.')
    default_code = 'continuation_failed'


class CollapseError(NumericalException):
    """Raised when one part of a sign-changing iterate vanishes."""
    default_detail = _('Sign-changing iterate collapsed to a one-signed function.')
    default_code = 'part_collapse'


class NonConvergence(NumericalException):
    """Raised when an iteration hits its budget; carries the best iterate."""
    default_detail = _('Solver did not converge.')
    default_code = 'non_convergence'

    def __init__(self, detail=None, code=None, extra=None, best=None):
        super().__init__(detail=detail, code=code, extra=extra)
        self.best = best


class EigenError(NumericalException):
    """Raised when the generalized eigenproblem fails."""
    default_detail = _('Generalized eigen-decomposition failed.')
    default_code = 'eigen_failed'


# I/O Exceptions
# ============================================================================

class ArtifactIOError(BaseFracNehariException):
    """Raised when artifacts cannot be written; maps to exit code 4."""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_detail = _('Could not write experiment artifacts.')
    default_code = 'artifact_io'
    exit_code = EXIT_IO
