"""Unit test mixin classes."""
# Copyright 2026, the wcotools developers
#
# This file is part of wcotools.
#
# wcotools is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 2 of the License, or
# (at your option) any later version.
#
# wcotools is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with wcotools.  If not, see <http://www.gnu.org/licenses/>.
#
# pylint: disable=too-few-public-methods
import math
import unittest

import numpy as np

from wcotools import Criterion, FiniteMeasureSpace, PFunction, SelfMap, WeightedSumOperator


class ValidateVerdict(unittest.TestCase):

    """Mixin for validating criterion verdicts."""

    def validate_verdict(self, verdict, criterion, holds, margin=None, witness=None):
        """Validate a verdict."""
        self.assertEqual(Criterion.lookup(criterion), verdict.criterion)
        self.assertEqual(holds, verdict.holds)
        self.assertEqual(holds, bool(verdict))

        if margin is not None:
            if math.isinf(margin):
                self.assertEqual(margin, verdict.margin)
            else:
                self.assertAlmostEqual(margin, verdict.margin, places=9)

        if witness is None:
            self.assertIsNone(verdict.witness)
        else:
            self.assertSetEqual(set(witness), set(np.flatnonzero(verdict.witness.values)))


def swap_operator(weights=(2, 3), masses=(1, 2), p=2, q=2):
    """One term exchanging two atoms."""
    space = FiniteMeasureSpace.from_masses(masses)
    return WeightedSumOperator([(PFunction(space, weights), SelfMap(space, [1, 0]))], p, q)


def constant_operator(masses=(1, 1, 2), p=2, q=2):
    """One unit-weight term sending every atom to atom 0."""
    space = FiniteMeasureSpace.from_masses(masses)
    return WeightedSumOperator([(PFunction.constant(space, 1), SelfMap.constant(space, 0))], p, q)


def multiplication_operator(weights, masses=None, p=2, q=2):
    """One term with the identity map."""
    masses = [1] * len(weights) if masses is None else masses
    space = FiniteMeasureSpace.from_masses(masses)
    return WeightedSumOperator([(PFunction(space, weights), SelfMap.identity(space))], p, q)


def overlapping_operator():
    """Identity plus swap on two unit atoms."""
    space = FiniteMeasureSpace.from_masses([1, 1])
    one = PFunction.constant(space, 1)
    return WeightedSumOperator([(one, SelfMap.identity(space)), (one, SelfMap(space, [1, 0]))])


def cycle_operator(lengths, weights):
    """
    One term on unit atoms whose map is a product of cycles of the
    given lengths.  weights holds one weight per cycle.
    """
    targets = []
    values = []
    for length, weight in zip(lengths, weights):
        start = len(targets)
        targets.extend(start + (k + 1) % length for k in range(length))
        values.extend([weight] * length)

    space = FiniteMeasureSpace.from_masses([1] * len(targets))
    return WeightedSumOperator([(PFunction(space, values), SelfMap(space, targets))])
