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
import logging
import math
from collections import namedtuple

import numpy as np
from scipy.linalg import svdvals

from . import exception
from .config import tolerances
from .descriptors import SettingDescriptor, validate_nonnegative_int, validate_positive
from .measurespace import PFunction, lp_norm
from .util import LookupEnum, complex_to_json, float_to_json, relative_threshold

__all__ = ['Criterion', 'BandScheme', 'RangeVerdict', 'Band', 'BandDecomposition',
           'ClosedRangeAnalysis']

# exhaustive witness searches are limited to this many atoms
EXHAUSTIVE_LIMIT = 20

# Return values for band decompositions
# are in the following tuple formats:
Band = namedtuple("band", ["index", "atoms", "lower", "upper"])
BandDecomposition = namedtuple("band_decomposition", ["bands", "source_region", "scheme",
                                                      "alpha"])


class Criterion(LookupEnum):

    """Identifiers of the checks a scenario can request."""

    l2_closed_range = "l2-closed-range"
    atomic_summability = "atomic-summability"
    finite_atomic_support = "finite-atomic-support"
    weight_lower_bound = "weight-lower-bound"
    purely_atomic = "purely-atomic"
    band_witness = "band-witness"
    witness_search = "witness-search"
    adjoint_product = "adjoint-product"
    norm_inequality = "norm-inequality"
    polar_decomposition = "polar-decomposition"
    periodic_invertibility = "periodic-invertibility"
    spectral_measure = "spectral-measure"
    injectivity = "injectivity"


class BandScheme(LookupEnum):

    """
    Band thresholds.

    scaled      ((n-1)a / m^((p-1)/p))^p <= J < (na / m^((p-1)/p))^p
    unit        n-1 <= J < n
    """

    scaled = "scaled"
    unit = "unit"


class RangeVerdict:

    """
    The outcome of one criterion.

    Parameters:
    criterion   The Criterion.
    holds       True if the criterion's condition holds.
    margin      The distance to the criterion's threshold.

    Keyword Parameters:
    witness     A PFunction witnessing the outcome, or None.
    notes       Free text.
    details     A dict of additional quantities.
    """

    def __init__(self, criterion, holds, margin, witness=None, notes="", details=None):
        self.criterion = Criterion.lookup(criterion)
        self.holds = bool(holds)
        self.margin = float(margin)
        self.witness = witness
        self.notes = notes
        self.details = details or {}

    def __repr__(self):
        return "<{0.__class__.__name__}({0.criterion}, holds={0.holds}, margin={0.margin})>". \
            format(self)

    def __bool__(self):
        return self.holds

    def to_dict(self):
        """Convert the verdict to JSON-compatible values."""
        if self.witness is None:
            witness = None
        else:
            witness = [[atom_id, complex_to_json(value)]
                       for atom_id, value in self.witness.items() if value != 0]

        return {"criterion": str(self.criterion),
                "holds": self.holds,
                "margin": float_to_json(self.margin),
                "witness": witness,
                "notes": self.notes,
                "details": self.details}


class ClosedRangeAnalysis:

    """
    Closed-range criteria of a weighted sum of composition operators.

    On a finite space every operator has closed range, so the criteria
    report their margins, and refinement trends of the quantities whose
    growth signals failure in the limit.

    Parameter:
    operator    The WeightedSumOperator.

    Keyword Parameters:
    tols        The ToleranceConfig.  The default is read from the
                configuration file and the environment.
    """

    alpha = SettingDescriptor(validate_positive, default_value=1.0)
    band_scheme = SettingDescriptor(enum_class=BandScheme, default_value=BandScheme.scaled)
    samples = SettingDescriptor(validate_nonnegative_int, default_value=100)
    seed = SettingDescriptor(validate_nonnegative_int, default_value=0)
    refinement_levels = SettingDescriptor(validate_nonnegative_int, default_value=2)

    def __init__(self, operator, tols=None, alpha=None, band_scheme=None, samples=None,
                 seed=None, refinement_levels=None):
        self.log = logging.getLogger(__name__)
        self.operator = operator
        self.tols = tols or tolerances()
        self._j = {}

        self.alpha = alpha
        self.band_scheme = band_scheme
        self.samples = samples
        self.seed = seed
        self.refinement_levels = refinement_levels

    def invalidate(self):
        self._j = {}

    @property
    def space(self):
        return self.operator.space

    def criterion_j(self, s=None):
        """J_s as a real array; s defaults to the target exponent."""
        s = self.operator.q if s is None else s
        try:
            return self._j[s]
        except KeyError:
            J = self.operator.compute_j(s).J.real
            self._j[s] = J
            return J

    def _cozero_tol(self, values):
        return relative_threshold(values, self.tols["cozero"])

    def _trend(self, quantity):
        """Evaluate quantity(analysis) on the operator and its refinements."""
        trend = []
        operator = self.operator
        for level in range(self.refinement_levels + 1):
            if level:
                operator = operator.refine()[0]

            analysis = ClosedRangeAnalysis(operator, tols=self.tols, alpha=self.alpha,
                                           band_scheme=self.band_scheme)
            record = quantity(analysis)
            record["level"] = level
            record["atoms"] = len(operator.space)
            trend.append(record)

            if self.space.is_purely_atomic:
                # refinement leaves purely atomic spaces unchanged
                break

        return trend

    #
    # L^2 criterion
    #
    def check_l2_bound(self):
        """
        The L^2 criterion: J_2 >= c on the cozero set of J_2.

        The margin is c* = min J_2 over Coz J_2 (+inf if it is empty).
        Random functions supported on Coz J_2 are checked against
        ||Wf||^2 >= c* ||f||^2, and c* is compared with the smallest
        nonzero squared singular value of the matrix.

        Exceptions:
        ExponentMismatch        The operator is not on L^2.
        OverlappingSupports     The weight supports are not disjoint.
        OracleResidualExceeded  An oracle disagrees with c*.
        """
        W = self.operator
        if W.p != 2 or W.q != 2:
            raise exception.ExponentMismatch("The L^2 criterion requires p = q = 2.")

        if not W.disjoint_supports():
            raise exception.OverlappingSupports("The L^2 criterion requires disjoint supports.")

        self.log.info("Checking the L^2 closed range criterion for {0!r}".format(W))

        J = self.criterion_j(2)
        support = np.flatnonzero(J > self._cozero_tol(J))
        c_star = float(np.min(J[support])) if support.size else math.inf
        self.log.debug("c* = {0}, |Coz J| = {1}".format(c_star, support.size))

        details = {"c_star": float_to_json(c_star),
                   "cozero_size": int(support.size),
                   "samples": self.samples}

        # Rayleigh quotient oracle
        if support.size and self.samples:
            rng = np.random.default_rng(self.seed)
            worst = math.inf
            for _ in range(self.samples):
                values = np.zeros(len(self.space), dtype=complex)
                values[support] = rng.standard_normal(support.size) + \
                    1j * rng.standard_normal(support.size)
                f = PFunction(self.space, values)
                worst = min(worst, lp_norm(W.apply(f), 2) ** 2 / lp_norm(f, 2) ** 2)

            details["oracle_min_quotient"] = worst
            if worst < c_star * (1 - self.tols["norm_inequality"]):
                raise exception.OracleResidualExceeded(
                    "||Wf||^2 / ||f||^2 = {0} is below c* = {1}".format(worst, c_star))

        # singular value oracle
        squares = np.sort(svdvals(W.matrix()) ** 2)
        nonzero = squares[squares > self._cozero_tol(squares)]
        if nonzero.size:
            details["min_singular_value_squared"] = float(nonzero[0])
            residual = abs(nonzero[0] - c_star) / float(np.max(J))
            details["singular_value_residual"] = residual
            if residual > self.tols["singular_values"]:
                raise exception.OracleResidualExceeded(
                    "Smallest nonzero squared singular value {0} differs from c* = {1}".format(
                        nonzero[0], c_star))

        notes = "Coz J is empty; the bound holds vacuously." if not support.size else \
            "Finite spaces satisfy the criterion with c = c*."

        return RangeVerdict(Criterion.l2_closed_range, True, c_star, notes=notes,
                            details=details)

    #
    # Atomic summability
    #
    def _summability(self, s):
        J = self.criterion_j(s)
        tol = self._cozero_tol(J)
        cells = list(self.space.nonatomic_indices)
        genuine = list(self.space.genuine_indices)

        max_cell = float(np.max(J[cells])) if cells else 0.0
        total = float(np.sum(J[genuine] * self.space.masses[genuine]))
        bad = [c for c in cells if J[c] > tol]
        return {"max_cell_j": max_cell, "atom_sum": total, "tol": tol, "bad": bad}

    def check_atomic_summability(self, s=None):
        """
        J_s = 0 on the non-atomic part and sum_i J_s(A_i) mu(A_i) < inf.

        The sum is always finite on a finite space, so its value and
        its growth across refinement levels are reported.  The witness
        is the set of cells where J_s is positive.
        """
        s = self.operator.q if s is None else s
        self.log.info("Checking atomic summability of J_{0} for {1!r}".format(s, self.operator))

        summary = self._summability(s)
        cells = self.space.nonatomic_indices
        margin = summary["tol"] - summary["max_cell_j"] if cells else math.inf

        def trend_record(analysis):
            result = analysis._summability(s)
            return {"atom_sum": result["atom_sum"], "max_cell_j": result["max_cell_j"]}

        details = {"atom_sum": summary["atom_sum"],
                   "max_cell_j": summary["max_cell_j"],
                   "trend": self._trend(trend_record)}

        witness = PFunction.indicator(self.space, summary["bad"]) if summary["bad"] else None
        if summary["bad"]:
            self.log.warning("J_{0} is positive on {1} non-atomic cells.".format(
                s, len(summary["bad"])))

        return RangeVerdict(Criterion.atomic_summability, not summary["bad"], margin,
                            witness=witness, details=details)

    #
    # Finite support over atoms (q < p)
    #
    def _finite_support(self):
        W = self.operator
        J = self.criterion_j(W.q)
        genuine = list(self.space.genuine_indices)
        tol = self._cozero_tol(J)
        values = J[genuine]
        power = 1.0 if math.isinf(W.p) else W.p / (W.p - W.q)
        return {"support_count": int(np.count_nonzero(values > tol)),
                "weighted_sum": float(np.sum(values ** power * self.space.masses[genuine]))}

    def check_finite_support_over_atoms(self):
        """
        For q < p: the number of atoms with J_q(A_i) > 0, and
        sum_i J_q(A_i)^(p/(p-q)) mu(A_i), with their refinement trends.
        For p = inf the power is 1.

        Exceptions:
        ExponentMismatch    q >= p, or q is infinite.
        """
        W = self.operator
        if math.isinf(W.q) or not W.q < W.p:
            raise exception.ExponentMismatch(
                "The finite support criterion requires a finite q < p.")

        self.log.info("Checking finite atomic support of J_q for {0!r}".format(W))

        summary = self._finite_support()
        details = dict(summary)
        details["trend"] = self._trend(lambda analysis: analysis._finite_support())

        return RangeVerdict(Criterion.finite_atomic_support, True, summary["weighted_sum"],
                            notes="Finite spaces have finitely many atoms; see the trend.",
                            details=details)

    #
    # Lower bound of the weights
    #
    def weight_sum(self, power=None):
        """
        sum_i u_i^power for real nonnegative weights.  The power
        defaults to p, or 1 if p is infinite.

        Exceptions:
        InvalidWeights      A weight is negative or complex.
        """
        W = self.operator
        if power is None:
            power = 1.0 if math.isinf(W.p) else W.p

        total = np.zeros(len(self.space))
        for u in W.weights:
            if not u.is_real or np.any(u.real < 0):
                raise exception.InvalidWeights("Weights must be real and nonnegative.")

            total += u.real ** power

        return total

    def check_lower_bound_u(self, power=None):
        """
        u = sum_i u_i^p >= delta for some delta > 0.

        The margin is delta* = min u.  The details carry the two sides
        n^(p-1) int u dmu and ||W chi_X||_p^p of the estimate relating
        a lower bound of W to a lower bound of u.
        """
        W = self.operator
        self.log.info("Checking the weight lower bound for {0!r}".format(W))

        if power is None:
            power = 1.0 if math.isinf(W.p) else W.p

        u = self.weight_sum(power)
        delta = float(np.min(u))
        details = {"delta_star": delta, "power": power}

        if not math.isinf(W.p):
            whole = W.apply(PFunction.constant(self.space, 1.0))
            details["weight_integral_bound"] = float(
                len(W) ** (W.p - 1) * np.sum(self.space.masses * u))
            details["image_of_one"] = lp_norm(whole, W.p) ** W.p

        witness = None
        if delta <= 0:
            witness = PFunction.indicator(self.space, np.flatnonzero(u <= 0))

        return RangeVerdict(Criterion.weight_lower_bound, delta > 0, delta, witness=witness,
                            details=details)

    #
    # Bands
    #
    def _thresholds(self, scheme, alpha):
        W = self.operator
        if scheme == BandScheme.unit:
            return lambda n: float(n)

        if math.isinf(W.p):
            raise exception.ExponentMismatch("Scaled bands require a finite source exponent.")

        scale = len(W) ** ((W.p - 1) / W.p)
        return lambda n: (n * alpha / scale) ** W.p

    def band_decomposition(self, region, alpha=None, s=None, scheme=None):
        """
        Split a region into bands of J_s values.

        Parameters:
        region      An iterable of atom indices.

        Keyword Parameters:
        alpha       The band width parameter.  The default is the
                    analysis' alpha.
        s           The exponent of J.  The default is q.
        scheme      The BandScheme.  The default is the analysis'
                    band_scheme.

        Exceptions:
        EmptyRegion     The region is empty.

        Return: BandDecomposition
        Bands are ordered by index and only nonempty bands are included.
        """
        region = frozenset(int(a) for a in region)
        if not region:
            raise exception.EmptyRegion("Band decompositions need a nonempty region.")

        alpha = self.alpha if alpha is None else validate_positive(alpha)
        scheme = self.band_scheme if scheme is None else BandScheme.lookup(scheme)
        threshold = self._thresholds(scheme, alpha)
        J = self.criterion_j(s)

        members = {}
        for a in sorted(region):
            value = J[a]
            if scheme == BandScheme.unit:
                n = int(math.floor(value)) + 1
            else:
                n = int(math.floor((value / threshold(1)) ** (1 / self.operator.p))) + 1

            # settle the index with exact threshold comparisons
            while n > 1 and value < threshold(n - 1):
                n -= 1
            while value >= threshold(n):
                n += 1

            members.setdefault(n, []).append(a)

        bands = tuple(Band(n, frozenset(atoms), threshold(n - 1), threshold(n))
                      for n, atoms in sorted(members.items()))

        self.log.debug("{0} bands over {1} atoms ({2}, alpha {3})".format(
            len(bands), len(region), scheme, alpha))

        return BandDecomposition(bands, region, scheme, alpha)

    #
    # Witness functions
    #
    def _column_images(self):
        """Images of the atom indicators: column a is W chi_a."""
        W = self.operator
        n = len(self.space)
        A = np.zeros((n, n), dtype=complex)
        rows = np.arange(n)
        for u, phi in W.terms:
            np.add.at(A, (rows, phi.targets), u.values)

        return A

    def _ratios(self, images, masses):
        """
        ||W chi_E||_q / ||chi_E||_p for each column of images,
        where masses holds mu(E) per column.
        """
        W = self.operator
        magnitudes = np.abs(images)

        if math.isinf(W.q):
            numerator = np.max(magnitudes, axis=0)
        else:
            numerator = np.sum(self.space.masses[:, None] * magnitudes ** W.q,
                               axis=0) ** (1 / W.q)

        if math.isinf(W.p):
            return numerator

        return numerator / masses ** (1 / W.p)

    def witness_ratio(self, subset):
        """||W chi_E||_q / ||chi_E||_p for a set of atom indices E."""
        f = PFunction.indicator(self.space, subset)
        return lp_norm(self.operator.apply(f), self.operator.q) / lp_norm(f, self.operator.p)

    def witness_bound(self, subset):
        """
        The estimate m^((q-1)/q) (int J_q chi_E dmu)^(1/q) / ||chi_E||_p
        of the witness ratio.
        """
        W = self.operator
        if math.isinf(W.q):
            raise exception.ExponentMismatch("The witness estimate needs a finite q.")

        subset = sorted(subset)
        J = self.criterion_j(W.q)
        integral = float(np.sum(J[subset] * self.space.masses[subset]))
        f = PFunction.indicator(self.space, subset)
        return len(W) ** ((W.q - 1) / W.q) * integral ** (1 / W.q) / lp_norm(f, W.p)

    def _lexicographic_min(self, masks):
        """
        The mask whose set bits, read as a sorted tuple of positions,
        is lexicographically smallest.
        """
        masks = np.unique(np.asarray(masks, dtype=np.int64))
        prefix = 0
        while True:
            if np.any(masks == 0):
                return prefix

            lowbits = masks & -masks
            low = lowbits.min()
            masks = masks[lowbits == low] ^ low
            prefix |= int(low)

    def witness_search(self, region):
        """
        Find the indicator chi_E, E a nonempty subset of region, that
        minimizes ||W chi_E||_q / ||chi_E||_p.

        Regions of up to 20 atoms are searched exhaustively, with ties
        going to the lexicographically smallest subset.  Larger regions
        are searched greedily over the bands of J, the single atoms, and
        the unions of the atoms with the smallest J values.

        Parameter:
        region      An iterable of atom indices.

        Exceptions:
        EmptyRegion     The region is empty.

        Return: tuple(f, ratio)
        f           The indicator PFunction of the minimizing subset.
        ratio       Its ratio.
        """
        region = sorted(set(int(a) for a in region))
        if not region:
            raise exception.EmptyRegion("Witness searches need a nonempty region.")

        self.log.info("Searching {0} witness subsets of {1} atoms...".format(
            "all" if len(region) <= EXHAUSTIVE_LIMIT else "greedy", len(region)))

        if len(region) <= EXHAUSTIVE_LIMIT:
            subset, ratio = self._exhaustive_search(region)
        else:
            subset, ratio = self._greedy_search(region)

        self.log.debug("Best witness subset {0} with ratio {1}".format(subset, ratio))
        return PFunction.indicator(self.space, subset), ratio

    def _is_tie(self, value, best):
        return value <= best + self.tols["norm_inequality"] * best

    def _exhaustive_search(self, region):
        images = self._column_images()[:, region]
        region_masses = self.space.masses[region]
        k = len(region)
        total = 1 << k
        chunk = max(1, min(1 << 16, (1 << 22) // max(1, len(self.space))))
        bits = np.int64(1) << np.arange(k, dtype=np.int64)

        best = math.inf
        candidates = np.empty(0, dtype=np.int64)
        candidate_ratios = np.empty(0)

        for start in range(1, total, chunk):
            masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
            selection = ((masks[None, :] & bits[:, None]) != 0).astype(float)
            ratios = self._ratios(images @ selection, region_masses @ selection)

            best = min(best, float(np.min(ratios)))
            tied = self._is_tie(ratios, best)
            candidates = np.concatenate((candidates, masks[tied]))
            candidate_ratios = np.concatenate((candidate_ratios, ratios[tied]))

            keep = self._is_tie(candidate_ratios, best)
            candidates = candidates[keep]
            candidate_ratios = candidate_ratios[keep]

        winner = self._lexicographic_min(candidates)
        subset = [region[j] for j in range(k) if winner >> j & 1]
        return subset, best

    def _greedy_exponent(self):
        """The J exponent for greedy searches: q, else p, else 1."""
        for exponent in (self.operator.q, self.operator.p):
            if not math.isinf(exponent):
                return exponent

        return 1.0

    def _greedy_search(self, region):
        s = self._greedy_exponent()
        J = self.criterion_j(s)
        candidates = [[a] for a in region]

        ordered = sorted(region, key=lambda a: (J[a], a))
        candidates.extend(ordered[:i] for i in range(2, len(ordered) + 1))

        bands = self.band_decomposition(region, s=s, scheme=BandScheme.unit)
        candidates.extend(sorted(band.atoms) for band in bands.bands)

        ratios = [self.witness_ratio(c) for c in candidates]
        best = min(ratios)
        tied = [tuple(sorted(c)) for c, r in zip(candidates, ratios) if self._is_tie(r, best)]
        return list(min(tied)), best

    def check_witness_search(self, region):
        """
        Run witness_search and compare the ratio with its estimate.

        Exceptions:
        OracleResidualExceeded  The ratio exceeds the estimate.
        """
        f, ratio = self.witness_search(region)
        subset = sorted(np.flatnonzero(f.real).tolist())
        details = {"ratio": ratio,
                   "subset_size": len(subset),
                   "exhaustive": len(set(region)) <= EXHAUSTIVE_LIMIT}

        if not math.isinf(self.operator.q):
            bound = self.witness_bound(subset)
            details["bound"] = bound
            if ratio > bound + self.tols["norm_inequality"] * max(1.0, bound):
                raise exception.OracleResidualExceeded(
                    "Witness ratio {0} exceeds its estimate {1}".format(ratio, bound))

        return RangeVerdict(Criterion.witness_search, True, ratio, witness=f, details=details)

    #
    # Non-atomic part
    #
    def check_purely_atomic_closed(self):
        """
        For q = inf, a bounded operator on a purely atomic space has
        closed range with no further condition.

        Exceptions:
        ExponentMismatch    q is finite.
        """
        if not math.isinf(self.operator.q):
            raise exception.ExponentMismatch(
                "The purely atomic criterion requires an infinite target exponent.")

        cells = self.space.nonatomic_indices
        witness = PFunction.indicator(self.space, cells) if cells else None
        notes = "Purely atomic space: closed range needs no further condition." \
            if not cells else "The space has {0} non-atomic cells.".format(len(cells))

        return RangeVerdict(Criterion.purely_atomic, not cells, -len(cells), witness=witness,
                            notes=notes, details={"cells": len(cells)})

    def check_band_construction(self, alpha=None, scheme=None, s=None):
        """
        Carry out the band construction on the non-atomic region where
        J_s is positive: take the first nonempty band G_N, choose its
        smallest cell E and compare the ratio of chi_E with the bound
        claimed for the construction (N alpha for scaled bands, N / alpha
        for unit bands).

        The criterion holds when the region is empty, that is J_s = 0
        on the non-atomic part.  The details record whether the witness
        beat the claimed bound.
        """
        alpha = self.alpha if alpha is None else validate_positive(alpha)
        scheme = self.band_scheme if scheme is None else BandScheme.lookup(scheme)

        J = self.criterion_j(s)
        tol = self._cozero_tol(J)
        cells = self.space.nonatomic_indices
        region = [c for c in cells if J[c] > tol]
        details = {"region_size": len(region), "scheme": str(scheme), "alpha": alpha}

        if not region:
            margin = tol - float(np.max(J[list(cells)])) if cells else math.inf
            return RangeVerdict(Criterion.band_witness, True, margin,
                                notes="J vanishes on the non-atomic part.", details=details)

        decomposition = self.band_decomposition(region, alpha=alpha, s=s, scheme=scheme)
        first = decomposition.bands[0]
        masses = self.space.masses
        cell = min(first.atoms, key=lambda a: (masses[a], a))

        ratio = self.witness_ratio([cell])
        claimed = first.index * alpha if scheme == BandScheme.scaled else first.index / alpha
        details.update({"band": first.index,
                        "cell": self.space[cell].atom_id,
                        "ratio": ratio,
                        "claimed_bound": claimed,
                        "beats_claimed_bound": ratio < claimed})

        if ratio >= claimed:
            self.log.warning("Band witness ratio {0} does not beat the claimed bound {1}".
                             format(ratio, claimed))

        return RangeVerdict(Criterion.band_witness, False, tol - float(np.max(J[region])),
                            witness=PFunction.indicator(self.space, [cell]), details=details)
