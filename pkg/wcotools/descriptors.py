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
"""Validated settings for the analysis classes."""

from weakref import WeakKeyDictionary


class SettingDescriptor:

    """
    An analysis setting, validated on assignment.

    Assigning None restores the default.  After every assignment the
    owner's invalidate() method, if it has one, is called so cached
    quantities are recomputed with the new setting.

    Keyword Parameters:
    validator       Callable converting and checking a raw value.
    enum_class      A LookupEnum; values are resolved with its lookup().
                    Mutually exclusive with validator.
    default_value   The value before the first assignment.
    """

    def __init__(self, validator=None, enum_class=None, default_value=None):
        assert not (validator and enum_class), "Give a validator or an enum class, not both."
        self.convert = enum_class.lookup if enum_class else validator
        self.default_value = default_value
        self.name = None
        self.values = WeakKeyDictionary()

    def __set_name__(self, owner, name):
        self.name = name

    def __get__(self, obj, objtype=None):
        if obj is None:
            return self

        return self.values.get(obj, self.default_value)

    def __set__(self, obj, value):
        if value is None:
            value = self.default_value
        elif self.convert:
            try:
                value = self.convert(value)
            except (TypeError, ValueError) as ex:
                raise ValueError("{0}: {1}".format(self.name, ex)) from ex

        self.values[obj] = value

        invalidate = getattr(obj, "invalidate", None)
        if callable(invalidate):
            invalidate()


def validate_positive(value):
    """A positive finite number, as a float."""
    number = float(value)
    if not 0 < number < float("inf"):
        raise ValueError("expected a positive number, got {0!r}".format(value))

    return number


def validate_nonnegative_int(value):
    """A nonnegative integer."""
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ValueError("expected a nonnegative integer, got {0!r}".format(value))

    return int(value)
