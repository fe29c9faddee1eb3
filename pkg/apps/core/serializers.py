"""
FRACNEHARI - Core Serializers
Base serializers and fields shared by every record type.
"""

import math

import numpy as np
from rest_framework import serializers
from django.utils.translation import gettext_lazy as _


class FloatArrayField(serializers.Field):
    """
    Numpy array <-> nested list of floats.

    Non-finite entries are rejected on input; output keeps full double precision.
    """

    default_error_messages = {
        'invalid': _('Expected a (nested) list of numbers.'),
        'not_finite': _('Array entries must be finite.'),
    }

    def to_representation(self, value):
        return np.asarray(value, dtype=float).tolist()

    def to_internal_value(self, data):
        try:
            array = np.asarray(data, dtype=float)
        except (TypeError, ValueError):
            self.fail('invalid')
        if not np.all(np.isfinite(array)):
            self.fail('not_finite')
        return array


class FiniteFloatField(serializers.FloatField):
    """FloatField that refuses nan/inf on input and renders non-finite output as a string."""

    default_error_messages = {
        'not_finite': _('Value must be finite.'),
    }

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not math.isfinite(value):
            self.fail('not_finite')
        return value

    def to_representation(self, value):
        if value is None:
            return None
        value = float(value)
        return value if math.isfinite(value) else repr(value)

