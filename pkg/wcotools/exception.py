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

#
# Base class for exceptions
#


class WCOToolsException(Exception):

    """Base class for all wcotools exceptions."""
    pass


#
# Measure space exceptions
#
class SpaceError(ValueError, WCOToolsException):

    """Base class for invalid measure space data."""
    pass


class InvalidMass(SpaceError):

    """Exception for non-positive or non-finite atom masses."""
    pass


class DuplicateAtom(SpaceError):

    """Exception for atom identifiers used more than once."""
    pass


class InvalidPartition(SpaceError):

    """
    Exception for partitions that are not disjoint, not exhaustive,
    or have empty blocks.
    """
    pass


class SpaceMismatch(SpaceError):

    """Exception for combining objects that live on different spaces."""
    pass


class InvalidFunction(SpaceError):

    """Exception for functions with the wrong length or non-finite values."""
    pass


class InvalidMap(SpaceError):

    """Exception for self-maps with out of range target indices."""
    pass


class InvalidExponent(ValueError, WCOToolsException):

    """Exception for L^p exponents outside of [1, inf]."""
    pass


class NotFiberConstant(ValueError, WCOToolsException):

    """
    Exception when pushing forward a function that is not
    constant on the fibers of the map.
    """
    pass


#
# Hypothesis exceptions
#
class HypothesisError(WCOToolsException):

    """
    Base class for failed preconditions of a check.  These are
    recorded in reports rather than aborting a run.
    """
    pass


class ExponentMismatch(HypothesisError):

    """Exception when a check requires other source/target exponents."""
    pass


class OverlappingSupports(HypothesisError):

    """Exception when the term weights do not have disjoint supports."""
    pass


class NotPurelyAtomic(HypothesisError):

    """Exception when a check requires a space without non-atomic cells."""
    pass


class AperiodicMap(HypothesisError):

    """Exception when a map is not a permutation, so it has no period."""
    pass


class CrossTermsSurvive(HypothesisError):

    """
    Exception when the N-th power of the operator is not a
    multiplication operator.
    """
    pass


class PowerOutOfRange(HypothesisError):

    """
    Exception when a product of weights along an orbit overflows or
    underflows floating point, so W^N cannot be represented.
    """
    pass


class InvalidWeights(HypothesisError):

    """Exception for weights that are not real and nonnegative."""
    pass


class NotInvertible(HypothesisError):

    """Exception when inverting an operator that is not invertible."""
    pass


class EmptyRegion(HypothesisError):

    """Exception for an empty atom region."""
    pass


#
# Oracle exceptions
#
class OracleResidualExceeded(WCOToolsException):

    """Exception when an oracle residual is above its tolerance."""
    pass


#
# Scenario exceptions
#
class ScenarioException(WCOToolsException):

    """Base class for all scenario exceptions."""
    pass


class ScenarioParseError(ScenarioException):

    """Exception for parse errors while reading scenario files."""
    pass


class ScenarioValidationError(ScenarioException):

    """Exception for scenario files that parse but are inconsistent."""
    pass


class InvalidGeneratorConfig(ValueError, ScenarioException):

    """Exception for random generator settings that cannot be satisfied."""
    pass


class InvalidCriterion(ScenarioValidationError):

    """Exception for unknown criterion identifiers."""
    pass
