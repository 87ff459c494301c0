# Copyright 2026, the wcotools developers
#
# This file is part of wcotools.
#
# wcotools is free software: you can redistribute it and/or modify
# it under the terms of the GNU Lesser General Public License as
# published by the Free Software Foundation, either version 2.1 of
# the License, or (at your option) any later version.
#
# wcotools is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Lesser General Public License for more details.
#
# You should have received a copy of the GNU Lesser General Public
# License along with wcotools.  If not, see
# <http://www.gnu.org/licenses/>.
#
import math
from enum import Enum
from fractions import Fraction

import numpy as np
import pkg_resources

from .exception import InvalidExponent

INF_TOKEN = "inf"


def parse_exponent(value):
    """
    Convert an exponent to a float in [1, inf].

    Parameter:
    value       A number or the string "inf".

    Exceptions:
    InvalidExponent     The value is not a number in [1, inf].
    """
    if isinstance(value, str):
        if value.strip().lower() == INF_TOKEN:
            return math.inf

        try:
            value = float(value)
        except ValueError as ex:
            raise InvalidExponent("Invalid exponent: {0!r}".format(value)) from ex

    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise InvalidExponent("Invalid exponent: {0!r}".format(value))

    value = float(value)
    if math.isnan(value) or value < 1:
        raise InvalidExponent("Exponents must be in [1, inf]: {0}".format(value))

    return value


def format_exponent(value):
    """Convert an exponent to its scenario file form."""
    if math.isinf(value):
        return INF_TOKEN

    if float(value).is_integer():
        return int(value)

    return value


def parse_mass(value):
    """
    Convert a mass to a float.  Strings such as "1/3" are read
    as rationals.
    """
    if isinstance(value, str):
        return float(Fraction(value.strip()))

    if isinstance(value, bool):
        raise ValueError("Invalid mass: {0!r}".format(value))

    return float(value)


def lcm(values):
    """Least common multiple of positive integers."""
    return int(np.lcm.reduce(np.asarray(list(values), dtype=np.int64), initial=1))


def max_entry(matrix):
    """Max-entry norm of a matrix; 0 for empty matrices."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0

    return float(np.max(np.abs(matrix)))


def relative_threshold(values, rtol):
    """
    Threshold for "nonzero" entries: rtol times the largest
    absolute value.  Zero for all-zero arrays.
    """
    values = np.asarray(values)
    if values.size == 0:
        return 0.0

    return rtol * float(np.max(np.abs(values)))


def complex_to_json(value):
    """Convert a complex number to a float, or a [re, im] pair if not real."""
    value = complex(value)
    if value.imag == 0:
        return float_to_json(value.real)

    return [float_to_json(value.real), float_to_json(value.imag)]


def float_to_json(value):
    """Convert a float to JSON; infinities use the "inf" token."""
    value = float(value)
    if math.isinf(value):
        return INF_TOKEN if value > 0 else "-" + INF_TOKEN

    return value


def json_to_complex(value):
    """Inverse of complex_to_json."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("Complex values are [re, im] pairs: {0!r}".format(value))

        return complex(float(value[0]), float(value[1]))

    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("Invalid number: {0!r}".format(value))

    return complex(float(value), 0.0)


class LookupEnum(Enum):

    """Enumeration with lookup by member, value, or name."""

    def __str__(self):
        return str(self.value)

    @classmethod
    def lookup(cls, value):
        """Look up a member by member, value, or name."""
        if isinstance(value, cls):
            return value

        try:
            return cls(value)
        except ValueError:
            pass

        name = str(value).replace("-", "_")
        for candidate in (name, name.upper(), name.lower()):
            if candidate in cls.__members__:
                return cls[candidate]

        raise ValueError("{0!r} is not a valid {1}".format(value, cls.__name__))


def package_version():
    """The installed wcotools version, or "unknown" in a bare source tree."""
    try:
        # pylint: disable=no-member
        return pkg_resources.get_distribution("wcotools").version
    except pkg_resources.DistributionNotFound:  # pragma: no cover
        return "unknown"
