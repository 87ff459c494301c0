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
import math
import unittest

import numpy as np

from wcotools import FiniteMeasureSpace, PFunction, SelfMap, WeightedSumOperator, lp_norm, \
    nonatomic_cell
from wcotools.exception import ExponentMismatch, SpaceError, SpaceMismatch

from .mixins import constant_operator, overlapping_operator, swap_operator


class WeightedSumOperatorTest(unittest.TestCase):

    """Weighted sum of composition operators unit tests."""

    @classmethod
    def setUpClass(cls):
        cls.W = swap_operator()

    def test_001_apply(self):
        """Weighted sum: apply to a function."""
        f = PFunction(self.W.space, [1, 10])
        self.assertListEqual([20, 3], self.W.apply(f).real.tolist())

    def test_002_matrix(self):
        """Weighted sum: matrix in the orthonormal basis."""
        expected = np.array([[0, math.sqrt(2)], [3 * math.sqrt(2), 0]])
        self.assertTrue(np.allclose(expected, self.W.matrix(), rtol=0, atol=1e-14))

    def test_003_matrix_matches_apply(self):
        """Weighted sum: matrix action agrees with apply."""
        W = constant_operator()
        f = PFunction(W.space, [1 + 2j, -3, 0.5])
        self.assertTrue(np.allclose(W.to_coordinates(W.apply(f)),
                                    W.matrix() @ W.to_coordinates(f), rtol=0, atol=1e-12))

    def test_004_compute_j(self):
        """Weighted sum: criterion function closed form."""
        J = self.W.compute_j()
        self.assertEqual(2, J.exponent)
        self.assertTrue(np.allclose([18, 2], J.J.values, rtol=0, atol=1e-12))

    def test_005_compute_j_exponent(self):
        """Weighted sum: criterion function for s = 1."""
        self.assertTrue(np.allclose([6, 1], self.W.compute_j(1).J.values, rtol=0, atol=1e-12))

    def test_006_compute_j_chained(self):
        """Weighted sum: chained criterion function matches the closed form."""
        for W in (self.W, constant_operator(), overlapping_operator()):
            for s in (1, 2, 3):
                self.assertTrue(np.allclose(W.compute_j(s).J.values,
                                            W.compute_j_chained(s).J.values,
                                            rtol=1e-12, atol=1e-12))

    def test_007_compute_j_infinite(self):
        """Weighted sum: criterion function with an infinite exponent."""
        with self.assertRaises(ExponentMismatch):
            self.W.compute_j(math.inf)

    def test_008_wstarw(self):
        """Weighted sum: W*W equals M_J for disjoint supports."""
        result = self.W.verify_wstarw_equals_mj()
        self.assertTrue(result.disjoint)
        self.assertLess(result.residual, 1e-12)

    def test_009_wstarw_overlapping(self):
        """Weighted sum: W*W differs from M_J for overlapping supports."""
        result = overlapping_operator().verify_wstarw_equals_mj()
        self.assertFalse(result.disjoint)
        self.assertAlmostEqual(2.0, result.residual)

    def test_010_adjoint_exponents(self):
        """Weighted sum: adjoints require L^2."""
        with self.assertRaises(ExponentMismatch):
            swap_operator(p=1, q=1).adjoint_matrix()

        with self.assertRaises(ExponentMismatch):
            swap_operator(p=2, q=3).verify_wstarw_equals_mj()

    def test_011_adjoint_inner_product(self):
        """Weighted sum: <Wf, g> = <f, W*g>."""
        f = PFunction(self.W.space, [1 + 1j, -2])
        g = PFunction(self.W.space, [0.5, 3j])
        masses = self.W.space.masses
        left = np.sum(masses * self.W.apply(f).values * np.conj(g.values))
        right = np.sum(masses * f.values * np.conj(self.W.apply_adjoint(g).values))
        self.assertAlmostEqual(left, right)

    def test_012_power_matrix(self):
        """Weighted sum: square of the swap is a multiple of the identity."""
        self.assertTrue(np.allclose(6 * np.eye(2), self.W.power_matrix(2), rtol=0, atol=1e-12))

    def test_013_norm_inequality(self):
        """Weighted sum: the norm inequality residual is nonnegative."""
        space = FiniteMeasureSpace.from_masses([0.5, 1, 2, 4])
        W = WeightedSumOperator([(PFunction(space, [1, -2, 0.5j, 3]), SelfMap(space, [1, 1, 3, 0])),
                                 (PFunction(space, [2, 1, 1, 1]), SelfMap(space, [2, 0, 2, 2]))],
                                p=3, q=3)
        rng = np.random.default_rng(0)
        for _ in range(20):
            f = PFunction(space, rng.standard_normal(4) + 1j * rng.standard_normal(4))
            self.assertGreaterEqual(W.norm_inequality_residual(f),
                                    -1e-10 * max(1.0, lp_norm(W.apply(f), 3) ** 3))

    def test_014_norm_inequality_single_term(self):
        """Weighted sum: the norm inequality is an equality for one term."""
        f = PFunction(self.W.space, [0.3, -1.2])
        self.assertAlmostEqual(0.0, self.W.norm_inequality_residual(f))

    def test_015_disjoint_supports(self):
        """Weighted sum: disjoint support detection."""
        space = FiniteMeasureSpace.from_masses([1, 1, 1])
        W = WeightedSumOperator([(PFunction(space, [1, 0, 0]), SelfMap.identity(space)),
                                 (PFunction(space, [0, 2, 3]), SelfMap.constant(space, 0))])
        self.assertTrue(W.disjoint_supports())
        self.assertFalse(overlapping_operator().disjoint_supports())

    def test_016_refine(self):
        """Weighted sum: lift to a refined space."""
        space = FiniteMeasureSpace([nonatomic_cell("c", 1)])
        W = WeightedSumOperator([(PFunction.constant(space, 2), SelfMap.identity(space))])
        refined, coarsen_map = W.refine()
        self.assertEqual(2, len(refined.space))
        self.assertListEqual([0, 0], coarsen_map.tolist())
        self.assertListEqual([0, 1], refined.maps[0].targets.tolist())
        self.assertListEqual([2, 2], refined.weights[0].real.tolist())

    def test_017_zero(self):
        """Weighted sum: zero operator."""
        self.assertTrue(swap_operator(weights=(0, 0)).is_zero)
        self.assertFalse(self.W.is_zero)

    def test_018_invalid_terms(self):
        """Weighted sum: invalid terms."""
        with self.assertRaises(SpaceError):
            WeightedSumOperator([])

        space = FiniteMeasureSpace.from_masses([1, 1])
        other = FiniteMeasureSpace.from_masses([1, 2])
        with self.assertRaises(SpaceMismatch):
            WeightedSumOperator([(PFunction.constant(space, 1), SelfMap.identity(other))])

        with self.assertRaises(TypeError):
            WeightedSumOperator([([1, 1], SelfMap.identity(space))])
