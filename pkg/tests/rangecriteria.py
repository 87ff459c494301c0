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

from wcotools import BandScheme, ClosedRangeAnalysis, Criterion, FiniteMeasureSpace, PFunction, \
    RangeVerdict, SelfMap, WeightedSumOperator, genuine_atom, nonatomic_cell
from wcotools.exception import EmptyRegion, ExponentMismatch, InvalidWeights, \
    OverlappingSupports

from .mixins import ValidateVerdict, constant_operator, multiplication_operator, \
    overlapping_operator, swap_operator


def cell_operator(weights, masses=(1, 1)):
    """A genuine atom followed by a non-atomic cell, identity map."""
    space = FiniteMeasureSpace([genuine_atom("a", masses[0]), nonatomic_cell("c", masses[1])])
    return WeightedSumOperator([(PFunction(space, weights), SelfMap.identity(space))])


def single_cell_operator(weight, p=2, q=2):
    """One non-atomic cell, identity map."""
    space = FiniteMeasureSpace([nonatomic_cell("c", 1)])
    return WeightedSumOperator([(PFunction.constant(space, weight), SelfMap.identity(space))], p, q)


class L2BoundTest(ValidateVerdict):

    def test_001_swap(self):
        """L^2 criterion: c* is the smallest J on its cozero set."""
        verdict = ClosedRangeAnalysis(swap_operator(), samples=10).check_l2_bound()
        self.validate_verdict(verdict, Criterion.l2_closed_range, True, margin=2)
        self.assertEqual(2, verdict.details["cozero_size"])
        self.assertAlmostEqual(2, verdict.details["min_singular_value_squared"])

    def test_002_constant_map(self):
        """L^2 criterion: J vanishes off the image of the map."""
        verdict = ClosedRangeAnalysis(constant_operator(), samples=10).check_l2_bound()
        self.validate_verdict(verdict, Criterion.l2_closed_range, True, margin=4)
        self.assertEqual(1, verdict.details["cozero_size"])
        self.assertGreaterEqual(verdict.details["oracle_min_quotient"], 4 * (1 - 1e-10))

    def test_003_zero_operator(self):
        """L^2 criterion: zero operator holds vacuously."""
        verdict = ClosedRangeAnalysis(swap_operator(weights=(0, 0))).check_l2_bound()
        self.validate_verdict(verdict, Criterion.l2_closed_range, True, margin=math.inf)
        self.assertEqual(0, verdict.details["cozero_size"])

    def test_004_overlapping(self):
        """L^2 criterion: overlapping supports."""
        with self.assertRaises(OverlappingSupports):
            ClosedRangeAnalysis(overlapping_operator()).check_l2_bound()

    def test_005_exponents(self):
        """L^2 criterion: other exponents."""
        with self.assertRaises(ExponentMismatch):
            ClosedRangeAnalysis(swap_operator(p=1, q=1)).check_l2_bound()

    def test_006_unit_masses(self):
        """L^2 criterion: swap on unit masses."""
        W = swap_operator(masses=(1, 1))
        self.assertTrue(np.allclose([9, 4], W.compute_j().J.values, rtol=0, atol=1e-12))
        self.assertTrue(np.allclose([[0, 2], [3, 0]], W.matrix(), rtol=0, atol=1e-14))

        verdict = ClosedRangeAnalysis(W, samples=10).check_l2_bound()
        self.validate_verdict(verdict, Criterion.l2_closed_range, True, margin=4)
        self.assertAlmostEqual(4, verdict.details["min_singular_value_squared"])


class AtomicSummabilityTest(ValidateVerdict):

    def test_001_positive_on_cell(self):
        """Atomic summability: J positive on a cell."""
        analysis = ClosedRangeAnalysis(cell_operator([1, 1]), refinement_levels=1)
        verdict = analysis.check_atomic_summability()
        self.validate_verdict(verdict, Criterion.atomic_summability, False, witness=[1])
        self.assertEqual(1.0, verdict.details["atom_sum"])
        self.assertEqual(2, len(verdict.details["trend"]))
        self.assertEqual(3, verdict.details["trend"][1]["atoms"])

    def test_002_zero_on_cell(self):
        """Atomic summability: J vanishes on the cells."""
        verdict = ClosedRangeAnalysis(cell_operator([1, 0])).check_atomic_summability()
        self.validate_verdict(verdict, Criterion.atomic_summability, True)
        self.assertGreaterEqual(verdict.margin, 0)

    def test_003_purely_atomic(self):
        """Atomic summability: purely atomic space."""
        verdict = ClosedRangeAnalysis(swap_operator()).check_atomic_summability()
        self.validate_verdict(verdict, Criterion.atomic_summability, True, margin=math.inf)
        self.assertEqual(1, len(verdict.details["trend"]))
        self.assertAlmostEqual(22.0, verdict.details["atom_sum"])


class FiniteSupportTest(ValidateVerdict):

    def test_001_weighted_sum(self):
        """Finite support: support count and weighted sum of J_q."""
        verdict = ClosedRangeAnalysis(swap_operator(p=2, q=1)).check_finite_support_over_atoms()
        self.validate_verdict(verdict, Criterion.finite_atomic_support, True, margin=38)
        self.assertEqual(2, verdict.details["support_count"])
        self.assertEqual(1, len(verdict.details["trend"]))

    def test_002_exponents(self):
        """Finite support: q >= p."""
        with self.assertRaises(ExponentMismatch):
            ClosedRangeAnalysis(swap_operator()).check_finite_support_over_atoms()

        with self.assertRaises(ExponentMismatch):
            ClosedRangeAnalysis(swap_operator(p="inf", q="inf")).check_finite_support_over_atoms()

    def test_003_sup_norm_source(self):
        """Finite support: p = inf sums J_q itself."""
        verdict = ClosedRangeAnalysis(swap_operator(p="inf", q=2)).check_finite_support_over_atoms()
        self.validate_verdict(verdict, Criterion.finite_atomic_support, True, margin=22)
        self.assertEqual(2, verdict.details["support_count"])

        verdict = ClosedRangeAnalysis(swap_operator(weights=(0, 3), p="inf", q=1)).\
            check_finite_support_over_atoms()
        self.validate_verdict(verdict, Criterion.finite_atomic_support, True, margin=6)
        self.assertEqual(1, verdict.details["support_count"])


class WeightLowerBoundTest(ValidateVerdict):

    def test_001_bounded_below(self):
        """Weight lower bound: positive weights."""
        verdict = ClosedRangeAnalysis(swap_operator()).check_lower_bound_u()
        self.validate_verdict(verdict, Criterion.weight_lower_bound, True, margin=4)
        self.assertAlmostEqual(22.0, verdict.details["weight_integral_bound"])
        self.assertAlmostEqual(22.0, verdict.details["image_of_one"])

    def test_002_zero_weight(self):
        """Weight lower bound: a zero weight."""
        verdict = ClosedRangeAnalysis(swap_operator(weights=(0, 3))).check_lower_bound_u()
        self.validate_verdict(verdict, Criterion.weight_lower_bound, False, margin=0,
                              witness=[0])

    def test_003_complex(self):
        """Weight lower bound: complex weights."""
        with self.assertRaises(InvalidWeights):
            ClosedRangeAnalysis(swap_operator(weights=(1j, 1))).check_lower_bound_u()

    def test_004_infinite_exponent(self):
        """Weight lower bound: p = inf uses the plain weight sum."""
        analysis = ClosedRangeAnalysis(swap_operator(p="inf", q="inf"))
        self.assertListEqual([2, 3], analysis.weight_sum().tolist())
        verdict = analysis.check_lower_bound_u()
        self.validate_verdict(verdict, Criterion.weight_lower_bound, True, margin=2)
        self.assertNotIn("image_of_one", verdict.details)


class BandTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        # J = [0.25, 2.25, 6.25, 1.0]
        cls.analysis = ClosedRangeAnalysis(multiplication_operator([0.5, 1.5, 2.5, 1.0]))

    def test_001_unit(self):
        """Bands: unit scheme."""
        bands = self.analysis.band_decomposition(range(4), scheme="unit").bands
        self.assertEqual([1, 2, 3, 7], [b.index for b in bands])
        self.assertEqual([{0}, {3}, {1}, {2}], [set(b.atoms) for b in bands])

    def test_002_scaled(self):
        """Bands: scaled scheme."""
        bands = self.analysis.band_decomposition(range(4), alpha=1,
                                                 scheme=BandScheme.scaled).bands
        self.assertEqual([1, 2, 3], [b.index for b in bands])
        self.assertEqual([{0}, {1, 3}, {2}], [set(b.atoms) for b in bands])
        self.assertAlmostEqual(1.0, bands[1].lower)
        self.assertAlmostEqual(4.0, bands[1].upper)

    def test_003_alpha(self):
        """Bands: wider bands with a larger alpha."""
        bands = self.analysis.band_decomposition(range(4), alpha=3, scheme="scaled").bands
        self.assertEqual([1], [b.index for b in bands])

    def test_004_empty(self):
        """Bands: empty region."""
        with self.assertRaises(EmptyRegion):
            self.analysis.band_decomposition([])

    def test_005_partition(self):
        """Bands: bands partition the region."""
        decomposition = self.analysis.band_decomposition([0, 2, 3])
        atoms = [a for band in decomposition.bands for a in band.atoms]
        self.assertListEqual([0, 2, 3], sorted(atoms))
        self.assertEqual(frozenset([0, 2, 3]), decomposition.source_region)


class WitnessTest(ValidateVerdict):

    @classmethod
    def setUpClass(cls):
        cls.analysis = ClosedRangeAnalysis(multiplication_operator([0.5, 1.5, 2.5, 1.0]))

    def test_001_ratio(self):
        """Witness: ratio of a single atom indicator."""
        self.assertAlmostEqual(1.5, self.analysis.witness_ratio([1]))

    def test_002_search(self):
        """Witness: exhaustive search."""
        f, ratio = self.analysis.witness_search(range(4))
        self.assertAlmostEqual(0.5, ratio)
        self.assertListEqual([1, 0, 0, 0], f.real.tolist())

    def test_003_search_region(self):
        """Witness: search a region."""
        f, ratio = self.analysis.witness_search([1, 2])
        self.assertAlmostEqual(1.5, ratio)
        self.assertListEqual([0, 1, 0, 0], f.real.tolist())

    def test_004_tie_break(self):
        """Witness: ties go to the lexicographically smallest subset."""
        analysis = ClosedRangeAnalysis(multiplication_operator([1, 1, 1]))
        f, ratio = analysis.witness_search([2, 1, 0])
        self.assertAlmostEqual(1.0, ratio)
        self.assertListEqual([1, 0, 0], f.real.tolist())

    def test_005_lexicographic_min(self):
        """Witness: lexicographic order of bitmask subsets."""
        self.assertEqual(3, self.analysis._lexicographic_min([6, 5, 3]))
        self.assertEqual(10, self.analysis._lexicographic_min([12, 10]))
        self.assertEqual(1, self.analysis._lexicographic_min([7, 1, 3]))

    def test_006_greedy(self):
        """Witness: greedy search over a large region."""
        weights = np.arange(25, 0, -1) / 10
        analysis = ClosedRangeAnalysis(multiplication_operator(weights))
        f, ratio = analysis.witness_search(range(25))
        self.assertAlmostEqual(0.1, ratio)
        self.assertListEqual([24], np.flatnonzero(f.real).tolist())

    def test_007_empty(self):
        """Witness: empty region."""
        with self.assertRaises(EmptyRegion):
            self.analysis.witness_search([])

    def test_008_check(self):
        """Witness: the ratio is below its estimate."""
        verdict = ClosedRangeAnalysis(swap_operator()).check_witness_search([0, 1])
        self.validate_verdict(verdict, Criterion.witness_search, True, margin=math.sqrt(2),
                              witness=[1])
        self.assertTrue(verdict.details["exhaustive"])
        self.assertAlmostEqual(math.sqrt(2), verdict.details["bound"])

    def test_009_refinement_scaling(self):
        """Witness: ratio on refined cells scales with the cell mass."""
        W = single_cell_operator(1, p=1, q=2)
        for level in range(1, 4):
            W = W.refine()[0]
            ratio = ClosedRangeAnalysis(W).witness_ratio([0])
            self.assertAlmostEqual(2 ** (level / 2), ratio)

    def test_010_supremum_norms(self):
        """Witness: infinite exponents."""
        analysis = ClosedRangeAnalysis(multiplication_operator([0.5, 2], p="inf", q="inf"))
        f, ratio = analysis.witness_search([0, 1])
        self.assertAlmostEqual(0.5, ratio)
        self.assertListEqual([1, 0], f.real.tolist())


class PurelyAtomicTest(ValidateVerdict):

    def test_001_purely_atomic(self):
        """Purely atomic: no cells."""
        verdict = ClosedRangeAnalysis(swap_operator(p="inf", q="inf")).check_purely_atomic_closed()
        self.validate_verdict(verdict, Criterion.purely_atomic, True, margin=0)

    def test_002_cells(self):
        """Purely atomic: cells present."""
        verdict = ClosedRangeAnalysis(single_cell_operator(1, p="inf", q="inf")). \
            check_purely_atomic_closed()
        self.validate_verdict(verdict, Criterion.purely_atomic, False, margin=-1, witness=[0])

    def test_003_finite_q(self):
        """Purely atomic: finite target exponent."""
        with self.assertRaises(ExponentMismatch):
            ClosedRangeAnalysis(swap_operator()).check_purely_atomic_closed()


class BandConstructionTest(ValidateVerdict):

    def test_001_scaled(self):
        """Band construction: scaled bands."""
        verdict = ClosedRangeAnalysis(single_cell_operator(2)).check_band_construction(
            alpha=1, scheme="scaled")
        self.validate_verdict(verdict, Criterion.band_witness, False, witness=[0])
        self.assertEqual(3, verdict.details["band"])
        self.assertAlmostEqual(2.0, verdict.details["ratio"])
        self.assertEqual(3, verdict.details["claimed_bound"])
        self.assertTrue(verdict.details["beats_claimed_bound"])

    def test_002_unit(self):
        """Band construction: unit bands."""
        verdict = ClosedRangeAnalysis(single_cell_operator(2)).check_band_construction(
            alpha=1, scheme="unit")
        self.assertEqual(5, verdict.details["band"])
        self.assertEqual(5, verdict.details["claimed_bound"])

    def test_003_no_region(self):
        """Band construction: J vanishes on the cells."""
        verdict = ClosedRangeAnalysis(cell_operator([1, 0])).check_band_construction()
        self.validate_verdict(verdict, Criterion.band_witness, True)
        self.assertEqual(0, verdict.details["region_size"])

    def test_004_purely_atomic(self):
        """Band construction: no cells."""
        verdict = ClosedRangeAnalysis(swap_operator()).check_band_construction()
        self.validate_verdict(verdict, Criterion.band_witness, True, margin=math.inf)


class SettingsTest(unittest.TestCase):

    def test_001_defaults(self):
        """Analysis settings: defaults."""
        analysis = ClosedRangeAnalysis(swap_operator())
        self.assertEqual(1.0, analysis.alpha)
        self.assertEqual(BandScheme.scaled, analysis.band_scheme)
        self.assertEqual(100, analysis.samples)

    def test_002_invalid_alpha(self):
        """Analysis settings: non-positive alpha."""
        with self.assertRaises(ValueError):
            ClosedRangeAnalysis(swap_operator(), alpha=0)

    def test_003_scheme_lookup(self):
        """Analysis settings: band scheme by name."""
        self.assertEqual(BandScheme.unit,
                         ClosedRangeAnalysis(swap_operator(), band_scheme="unit").band_scheme)

    def test_004_invalidate(self):
        """Analysis settings: changing a setting clears cached J."""
        analysis = ClosedRangeAnalysis(swap_operator())
        analysis.criterion_j(2)
        self.assertTrue(analysis._j)
        analysis.alpha = 2
        self.assertFalse(analysis._j)


class RangeVerdictTest(unittest.TestCase):

    def test_001_to_dict(self):
        """Verdict: JSON form."""
        space = FiniteMeasureSpace.from_masses([1, 1, 1])
        verdict = RangeVerdict("injectivity", False, math.inf,
                               witness=PFunction(space, [0, 2, 1j]), notes="x")
        data = verdict.to_dict()
        self.assertEqual("injectivity", data["criterion"])
        self.assertFalse(data["holds"])
        self.assertEqual("inf", data["margin"])
        self.assertEqual([[1, 2.0], [2, [0.0, 1.0]]], data["witness"])
        self.assertEqual("x", data["notes"])

    def test_002_no_witness(self):
        """Verdict: no witness."""
        self.assertIsNone(RangeVerdict(Criterion.adjoint_product, True, 0).to_dict()["witness"])

    def test_003_unknown(self):
        """Verdict: unknown criterion."""
        with self.assertRaises(ValueError):
            RangeVerdict("closed-range-estimate", True, 0)
