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
"""
Seeded invariant sweeps over random operators.

Each suite draws its instances from generate_random with consecutive
seeds and compares formula results with matrix oracles.
"""
import json
import logging
import math
from collections import namedtuple
from itertools import combinations

import numpy as np
from scipy.linalg import null_space, svdvals

from . import exception
from .checks import EXIT_ORACLE, EXIT_SUCCESS, run_batch
from .config import tolerances
from .measurespace import FiniteMeasureSpace, Partition, PFunction, conditional_expectation, \
    lp_norm, nonatomic_cell
from .dynamics import SelfMap
from .polarspectral import apply_inverse, injectivity_check, oracle_residuals, \
    periodic_invertibility, polar_decomposition, spectral_measure, verify_partial_isometry
from .rangecriteria import ClosedRangeAnalysis
from .scenario import generate_random
from .util import max_entry
from .weightedsum import WeightedSumOperator

__all__ = ['SelfTest', 'SuiteResult', 'SelfTestReport']

SuiteResult = namedtuple("suite_result", ["name", "passed", "cases", "failures", "worst"])

# suite name: number of instances
default_sweeps = {"adjoint-product": 500,
                  "singular-values": 500,
                  "polar-decomposition": 200,
                  "periodic-invertibility": 200,
                  "spectral-measure": 50,
                  "injectivity": 500,
                  "norm-inequality": 1000,
                  "witness-scaling": 50,
                  "conditional-expectation": 500,
                  "determinism": 5}


class SelfTestReport:

    """The results of the self-test suites."""

    def __init__(self, results):
        self.results = list(results)

    def __iter__(self):
        return iter(self.results)

    def __getitem__(self, name):
        for result in self.results:
            if result.name == name:
                return result

        raise KeyError(name)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    @property
    def exit_status(self):
        return EXIT_SUCCESS if self.passed else EXIT_ORACLE

    def to_dict(self):
        return {"suites": [{"name": r.name,
                            "passed": r.passed,
                            "cases": r.cases,
                            "failures": r.failures,
                            "worst": r.worst} for r in self.results],
                "exit_status": self.exit_status}

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class SelfTest:

    """
    Invariant suites.

    Keyword Parameters:
    scale       Fraction of the default sweep sizes to run.
                The default is 1.
    tols        The ToleranceConfig.
    j_override  A callable taking a WeightedSumOperator and returning
                J_2 values to use in place of the computed ones.
                Used to check that the suites catch a wrong J.
    """

    def __init__(self, scale=1.0, tols=None, j_override=None):
        self.log = logging.getLogger(__name__)
        self.scale = scale
        self.tols = tols or tolerances()
        self.j_override = j_override

        self.suites = {"adjoint-product": self.suite_adjoint_product,
                       "singular-values": self.suite_singular_values,
                       "polar-decomposition": self.suite_polar,
                       "periodic-invertibility": self.suite_invertibility,
                       "spectral-measure": self.suite_spectral_measure,
                       "injectivity": self.suite_injectivity,
                       "norm-inequality": self.suite_norm_inequality,
                       "witness-scaling": self.suite_witness_scaling,
                       "conditional-expectation": self.suite_conditional_expectation,
                       "determinism": self.suite_determinism}

    def run(self, names=None):
        """
        Run suites.

        Keyword Parameters:
        names       The suite names to run.  The default is all.

        Return: SelfTestReport
        """
        results = []
        for name in names or self.suites:
            self.log.info("Running self-test suite {0}...".format(name))
            result = self.suites[name](self._count(name))
            if result.passed:
                self.log.info("Suite {0} passed {1} cases.".format(name, result.cases))
            else:
                self.log.warning("Suite {0} failed {1} of {2} cases (worst {3}).".format(
                    name, result.failures, result.cases, result.worst))

            results.append(result)

        return SelfTestReport(results)

    def _count(self, name):
        return max(1, int(math.ceil(default_sweeps[name] * self.scale)))

    def _j(self, W):
        if self.j_override is not None:
            return np.asarray(self.j_override(W), dtype=float)

        return W.compute_j(2).J.real

    @staticmethod
    def _result(name, outcomes):
        """outcomes: list of (ok, residual)"""
        failures = sum(1 for ok, _ in outcomes if not ok)
        worst = max((r for _, r in outcomes), default=0.0)
        return SuiteResult(name, failures == 0, len(outcomes), failures, float(worst))

    def _disjoint_sweep(self, count, **kwargs):
        for seed in range(count):
            yield generate_random(seed, atoms=(2, 32), terms=(1, 4), disjoint=True,
                                  **kwargs).operator()

    #
    # Suites
    #
    def suite_adjoint_product(self, count):
        outcomes = []
        for W in self._disjoint_sweep(count):
            M = W.matrix()
            J = self._j(W)
            residual = max_entry(M.conj().T @ M - np.diag(J))
            outcomes.append((residual <= self.tols["wstarw"] * max(1.0, float(np.max(J))),
                             residual))

        return self._result("adjoint-product", outcomes)

    def suite_singular_values(self, count):
        outcomes = []
        for W in self._disjoint_sweep(count):
            J = np.sort(self._j(W))
            squares = np.sort(svdvals(W.matrix()) ** 2)
            residual = max_entry(squares - J) / max(1.0, float(np.max(np.abs(J))))
            outcomes.append((residual <= self.tols["singular_values"], residual))

        return self._result("singular-values", outcomes)

    def suite_polar(self, count):
        outcomes = []
        for W in self._disjoint_sweep(count, zero_probability=0.2, complex_weights=True):
            parts = polar_decomposition(W, self.tols)
            isometry = verify_partial_isometry(parts)
            oracle = oracle_residuals(parts, self.tols)
            scale = max(1.0, max_entry(W.matrix()))
            root_scale = max(1.0, float(np.max(parts.abs_w.real)))

            residual = max(isometry.factorization / scale, isometry.projection,
                           oracle.factorization / scale, oracle.positive_factor / root_scale,
                           oracle.isometry_factor / scale)
            ok = isometry.factorization <= self.tols["polar"] * scale and \
                isometry.projection <= self.tols["partial_isometry"] and \
                isometry.trace == isometry.rank and \
                oracle.factorization <= self.tols["oracle_polar"] * scale and \
                oracle.positive_factor <= self.tols["oracle_polar"] * root_scale and \
                oracle.isometry_factor <= self.tols["oracle_polar"] * scale
            outcomes.append((ok, residual))

        return self._result("polar-decomposition", outcomes)

    def suite_invertibility(self, count):
        outcomes = []
        for seed in range(count):
            W = generate_random(seed, atoms=(2, 32), terms=(1, 4), disjoint=True, invariant=True,
                                zero_probability=0.05 if seed % 4 == 0 else 0.0).operator()
            try:
                result = periodic_invertibility(W, self.tols)
            except exception.CrossTermsSurvive:
                outcomes.append((False, 1.0))
                continue

            full_rank = np.linalg.matrix_rank(W.matrix()) == len(W.space)

            ok = result.residual <= self.tols["power"] and full_rank == result.invertible
            residual = result.residual

            if result.invertible:
                g = PFunction(W.space, np.random.default_rng(seed).standard_normal(len(W.space)))
                round_trip = max_entry(W.apply(apply_inverse(W, g, result)).values - g.values) / \
                    max(1.0, max_entry(g.values))
                ok = ok and round_trip <= self.tols["inverse"]
                residual = max(residual, round_trip)

            outcomes.append((ok, residual))

        return self._result("periodic-invertibility", outcomes)

    def suite_spectral_measure(self, count):
        outcomes = []
        for seed in range(count):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 33))
            palette = rng.standard_normal(int(rng.integers(1, 11))) + \
                1j * rng.standard_normal(1)
            v = PFunction(FiniteMeasureSpace.from_masses(rng.uniform(0.1, 10, n)),
                          rng.choice(palette, n))
            table = spectral_measure(v)
            values = table.distinct_values

            ok = bool(np.all(table.whole().values == 1))
            ok = ok and np.array_equal(table.reconstruct().values, v.values)
            for i, first in enumerate(values):
                single = table.projector(first).values
                ok = ok and np.array_equal(single * single, single)
                for second in values[i + 1:]:
                    other = table.projector(second).values
                    ok = ok and not np.any(single * other) and \
                        np.array_equal(table.projector((first, second)).values, single + other)

            outcomes.append((bool(ok), 0.0 if ok else 1.0))

        return self._result("spectral-measure", outcomes)

    def suite_injectivity(self, count):
        outcomes = []
        for seed in range(count):
            W = generate_random(seed, atoms=(2, 32), terms=(1, 4), disjoint=True,
                                zero_probability=0.1 if seed % 2 else 0.0).operator()
            try:
                verdict = injectivity_check(W, self.tols)
            except exception.OracleResidualExceeded:
                outcomes.append((False, 1.0))
                continue

            nullity = null_space(W.matrix(), rcond=math.sqrt(self.tols["injectivity"])).shape[1]
            ok = verdict.holds == (nullity == 0)
            outcomes.append((ok, 0.0 if ok else 1.0))

        return self._result("injectivity", outcomes)

    def suite_norm_inequality(self, count):
        outcomes = []
        for q in (1, 2, 3):
            for seed in range(count):
                W = generate_random(seed, atoms=(2, 16), terms=(1, 4), p=q, q=q,
                                    complex_weights=bool(seed % 2)).operator()
                rng = np.random.default_rng(seed)
                f = PFunction(W.space, rng.standard_normal(len(W.space)) +
                              1j * rng.standard_normal(len(W.space)))
                residual = W.norm_inequality_residual(f)
                scale = max(1.0, lp_norm(W.apply(f), q) ** q)
                outcomes.append((residual >= -self.tols["norm_inequality"] * scale,
                                 max(0.0, -residual / scale)))

        return self._result("norm-inequality", outcomes)

    def suite_witness_scaling(self, count):
        outcomes = []

        # identity composition on one refined cell
        for p, q in ((1, 2), (2, 1), (2, 3)):
            space = FiniteMeasureSpace([nonatomic_cell("x", 1.0)])
            W = WeightedSumOperator([(PFunction.constant(space, 1.0), SelfMap.identity(space))],
                                    p, q)
            for level in range(1, 5):
                W = W.refine()[0]
                ratio = ClosedRangeAnalysis(W, tols=self.tols).witness_ratio([0])
                expected = (2.0 ** -level) ** (1 / q - 1 / p)
                residual = abs(ratio - expected)
                outcomes.append((residual <= self.tols["norm_inequality"], residual))

        # exhaustive search against an independent enumeration
        for seed in range(count):
            exponents = (1, 2, 3)
            rng = np.random.default_rng(seed)
            p, q = (int(e) for e in rng.choice(exponents, 2))
            W = generate_random(seed, atoms=(2, 12), terms=(1, 3), p=p, q=q).operator()
            analysis = ClosedRangeAnalysis(W, tols=self.tols)
            region = list(range(len(W.space)))
            _, ratio = analysis.witness_search(region)

            best = min(analysis.witness_ratio(subset)
                       for k in range(1, len(region) + 1)
                       for subset in combinations(region, k))
            residual = abs(ratio - best)
            outcomes.append((residual <= self.tols["norm_inequality"] * max(1.0, best),
                             residual))

        return self._result("witness-scaling", outcomes)

    def suite_conditional_expectation(self, count):
        outcomes = []
        for seed in range(count):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 33))
            space = FiniteMeasureSpace.from_masses(rng.uniform(0.1, 10, n))
            labels = rng.integers(0, int(rng.integers(1, n + 1)), n)
            part = Partition(space, [np.flatnonzero(labels == b) for b in np.unique(labels)])
            f = PFunction(space, rng.standard_normal(n) + 1j * rng.standard_normal(n))

            expected = conditional_expectation(f, part)
            ok = np.array_equal(conditional_expectation(expected, part).values, expected.values)

            residual = 0.0
            scale = max(1.0, float(np.max(np.abs(f.values))) * space.total_mass)
            for block in part:
                block = list(block)
                integral = np.sum(space.masses[block] * f.values[block])
                averaged = np.sum(space.masses[block] * expected.values[block])
                residual = max(residual, abs(integral - averaged) / scale)

            for p in (1, 2, math.inf):
                ok = ok and lp_norm(expected, p) <= lp_norm(f, p) * (1 + self.tols["cozero"])

            outcomes.append((bool(ok) and residual <= self.tols["cozero"], residual))

        return self._result("conditional-expectation", outcomes)

    def suite_determinism(self, count):
        scenarios = [generate_random(seed, atoms=(2, 12), terms=(1, 3), disjoint=True,
                                     invariant=True,
                                     checks=["l2-closed-range", "adjoint-product",
                                             "polar-decomposition", "periodic-invertibility",
                                             "injectivity", "norm-inequality"])
                     for seed in range(count)]

        serial = [r.dumps() for r in run_batch(scenarios, jobs=1, tols=self.tols)]
        parallel = [r.dumps() for r in run_batch(scenarios, jobs=4, tols=self.tols)]
        outcomes = [(a == b, 0.0 if a == b else 1.0) for a, b in zip(serial, parallel)]
        return self._result("determinism", outcomes)
