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
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np
import pkg_resources

from . import exception
from .config import tolerances
from .measurespace import PFunction, lp_norm
from .polarspectral import apply_inverse, injectivity_check, oracle_residuals, \
    periodic_invertibility, polar_decomposition, spectral_measure, verify_partial_isometry
from .rangecriteria import ClosedRangeAnalysis, Criterion, RangeVerdict
from .util import float_to_json, max_entry, package_version

__all__ = ['Report', 'CheckRecord', 'run_checks', 'run_batch', 'validate_report',
           'EXIT_SUCCESS', 'EXIT_HYPOTHESIS', 'EXIT_ORACLE', 'EXIT_INPUT']

EXIT_SUCCESS = 0
EXIT_HYPOTHESIS = 2
EXIT_ORACLE = 3
EXIT_INPUT = 4

STATUS_OK = "ok"
STATUS_HYPOTHESIS = "hypothesis-failure"
STATUS_ORACLE = "oracle-failure"

log = logging.getLogger(__name__)


def jsonable(value):
    """Convert numpy values and infinities to JSON-compatible values."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]

    if isinstance(value, (bool, np.bool_)):
        return bool(value)

    if isinstance(value, (int, np.integer)):
        return int(value)

    if isinstance(value, (float, np.floating)):
        value = float(value)
        return float_to_json(value) if math.isinf(value) else value

    return value


class CheckRecord:

    """
    The outcome of one requested check.

    Parameters:
    criterion   The Criterion.
    status      "ok", "hypothesis-failure" or "oracle-failure".

    Keyword Parameters:
    verdict     The RangeVerdict, for checks that ran.
    error       The exception, for checks that did not.
    """

    def __init__(self, criterion, status, verdict=None, error=None):
        self.criterion = criterion
        self.status = status
        self.verdict = verdict
        self.error = error

    def __repr__(self):
        return "<{0.__class__.__name__}({0.criterion}, {0.status})>".format(self)

    def to_dict(self):
        data = {"criterion": str(self.criterion), "status": self.status}
        if self.verdict is not None:
            data["verdict"] = self.verdict.to_dict()

        if self.error is not None:
            data["error"] = {"type": type(self.error).__name__, "message": str(self.error)}

        return jsonable(data)


class Report:

    """
    The results of running a scenario's checks.

    Parameters:
    records     The CheckRecord list, in request order.
    seed        The scenario seed.

    Keyword Parameters:
    source      The scenario path, if any.
    timing      The elapsed seconds, or None to leave it out.
    """

    def __init__(self, records, seed, source=None, timing=None):
        self.records = list(records)
        self.seed = seed
        self.source = source
        self.timing = timing

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, criterion):
        criterion = Criterion.lookup(criterion)
        for record in self.records:
            if record.criterion == criterion:
                return record

        raise KeyError(criterion)

    @property
    def exit_status(self):
        """Oracle failures outrank hypothesis failures."""
        statuses = set(r.status for r in self.records)
        if STATUS_ORACLE in statuses:
            return EXIT_ORACLE

        if STATUS_HYPOTHESIS in statuses:
            return EXIT_HYPOTHESIS

        return EXIT_SUCCESS

    def to_dict(self):
        data = {"environment": {"version": package_version(),
                                "seed": self.seed},
                "source": self.source,
                "checks": [r.to_dict() for r in self.records],
                "exit_status": self.exit_status}

        if self.timing is not None:
            data["timing"] = self.timing

        return data

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path):
        log.info("Writing report to \"{0}\"".format(path))
        with open(path, "w", encoding="utf-8") as report_file:
            report_file.write(self.dumps())
            report_file.write("\n")


def validate_report(data):
    """
    Validate report data against the published report schema.

    Exceptions:
    jsonschema.ValidationError  The data does not match the schema.
    """
    schema = json.loads(pkg_resources.resource_string("wcotools", "report_schema.json").
                        decode("utf-8"))
    jsonschema.validate(instance=data, schema=schema)


class CheckRunner:

    """
    Dispatches the requested checks of one scenario.

    Parameter:
    scenario    The Scenario.

    Keyword Parameters:
    tols        The ToleranceConfig.
    """

    def __init__(self, scenario, tols=None):
        self.log = logging.getLogger(__name__)
        self.scenario = scenario
        self.tols = tols or tolerances()
        self.instance = scenario.build()
        self.operator = self.instance.operator
        self.seed = 0 if scenario.seed is None else scenario.seed

        options = scenario.options
        self.samples = options.get("samples", 100)
        self.analysis = ClosedRangeAnalysis(self.operator, tols=self.tols,
                                            alpha=options.get("alpha"),
                                            band_scheme=options.get("band_scheme"),
                                            samples=self.samples, seed=self.seed)

        self._dispatch = {
            Criterion.l2_closed_range: self.analysis.check_l2_bound,
            Criterion.atomic_summability: self.analysis.check_atomic_summability,
            Criterion.finite_atomic_support: self.analysis.check_finite_support_over_atoms,
            Criterion.weight_lower_bound: self.analysis.check_lower_bound_u,
            Criterion.purely_atomic: self.analysis.check_purely_atomic_closed,
            Criterion.band_witness: self.analysis.check_band_construction,
            Criterion.witness_search: self.check_witness_search,
            Criterion.adjoint_product: self.check_adjoint_product,
            Criterion.norm_inequality: self.check_norm_inequality,
            Criterion.polar_decomposition: self.check_polar_decomposition,
            Criterion.periodic_invertibility: self.check_periodic_invertibility,
            Criterion.spectral_measure: self.check_spectral_measure,
            Criterion.injectivity: self.check_injectivity}

    def run(self, criterion):
        """
        Run one check.  Hypothesis and oracle failures are recorded
        rather than raised, as are other wcotools errors, which count
        as failed hypotheses.

        Return: CheckRecord
        """
        criterion = Criterion.lookup(criterion)
        self.log.info("Running check {0}".format(criterion))

        try:
            verdict = self._dispatch[criterion]()
        except exception.HypothesisError as ex:
            self.log.warning("{0}: hypotheses failed: {1}".format(criterion, ex))
            return CheckRecord(criterion, STATUS_HYPOTHESIS, error=ex)
        except exception.OracleResidualExceeded as ex:
            self.log.warning("{0}: oracle failed: {1}".format(criterion, ex))
            return CheckRecord(criterion, STATUS_ORACLE, error=ex)
        except exception.WCOToolsException as ex:
            self.log.warning("{0}: cannot be evaluated: {1}".format(criterion, ex))
            return CheckRecord(criterion, STATUS_HYPOTHESIS, error=ex)

        return CheckRecord(criterion, STATUS_OK, verdict=verdict)

    def _scale(self, M):
        return max(1.0, max_entry(M))

    def _oracle(self, name, residual, limit):
        if not residual <= limit:
            raise exception.OracleResidualExceeded("{0} residual {1} exceeds {2}".format(
                name, residual, limit))

    def _random_function(self, rng, support=None):
        n = len(self.operator.space)
        values = np.zeros(n, dtype=complex)
        support = np.arange(n) if support is None else np.asarray(support, dtype=int)
        values[support] = rng.standard_normal(support.size) + \
            1j * rng.standard_normal(support.size)
        return PFunction(self.operator.space, values)

    #
    # Checks
    #
    def check_witness_search(self):
        region = self.instance.region
        if region is None:
            space = self.operator.space
            region = space.nonatomic_indices or tuple(range(len(space)))

        return self.analysis.check_witness_search(region)

    def check_adjoint_product(self):
        W = self.operator
        result = W.verify_wstarw_equals_mj()
        limit = self.tols["wstarw"] * max(1.0, float(np.max(result.J.real)))
        details = {"residual": result.residual, "disjoint_supports": result.disjoint}

        if not result.disjoint:
            if result.residual > limit:
                raise exception.OverlappingSupports(
                    "Weight supports overlap and W*W - M_J has residual {0}".format(
                        result.residual))

            self.log.info("W*W = M_J holds without disjoint supports.")
            return RangeVerdict(Criterion.adjoint_product, True, limit - result.residual,
                                notes="W*W = M_J holds although the supports overlap.",
                                details=details)

        self._oracle("W*W - M_J", result.residual, limit)
        return RangeVerdict(Criterion.adjoint_product, True, limit - result.residual,
                            details=details)

    def check_norm_inequality(self):
        W = self.operator
        rng = np.random.default_rng(self.seed)
        worst = math.inf
        for _ in range(max(1, self.samples)):
            f = self._random_function(rng)
            residual = W.norm_inequality_residual(f)
            scale = max(1.0, lp_norm(W.apply(f), W.q) ** W.q)
            worst = min(worst, residual / scale)

        self._oracle("Norm inequality", -worst, self.tols["norm_inequality"])
        return RangeVerdict(Criterion.norm_inequality, True, worst,
                            details={"min_relative_residual": worst,
                                     "samples": max(1, self.samples)})

    def check_polar_decomposition(self):
        W = self.operator
        parts = polar_decomposition(W, self.tols)
        isometry = verify_partial_isometry(parts, seed=self.seed)
        oracle = oracle_residuals(parts, self.tols)
        scale = self._scale(W.matrix())
        root_scale = max(1.0, float(np.max(parts.abs_w.real)))

        self._oracle("V*V projection", isometry.projection, self.tols["partial_isometry"])
        self._oracle("Partial isometry norm", isometry.isometry, self.tols["partial_isometry"])
        self._oracle("W - V|W|", isometry.factorization, self.tols["polar"] * scale)
        self._oracle("V*V trace", abs(isometry.trace - isometry.rank), 0)
        self._oracle("Oracle W - UP", oracle.factorization, self.tols["oracle_polar"] * scale)
        self._oracle("Oracle P - |W|", oracle.positive_factor,
                     self.tols["oracle_polar"] * root_scale)
        self._oracle("Oracle U - V", oracle.isometry_factor, self.tols["oracle_polar"] * scale)

        roots = parts.abs_w.real[sorted(parts.B)]
        margin = float(np.min(roots)) if roots.size else math.inf
        details = {"initial_space_size": len(parts.B),
                   "projection_residual": isometry.projection,
                   "isometry_residual": isometry.isometry,
                   "factorization_residual": isometry.factorization,
                   "trace": isometry.trace,
                   "oracle_factorization_residual": oracle.factorization,
                   "oracle_positive_factor_residual": oracle.positive_factor,
                   "oracle_isometry_factor_residual": oracle.isometry_factor}

        return RangeVerdict(Criterion.polar_decomposition, True, margin, witness=parts.abs_w,
                            details=details)

    def check_periodic_invertibility(self):
        W = self.operator
        result = periodic_invertibility(W, self.tols)
        M = W.matrix()
        rank = int(np.linalg.matrix_rank(M))
        full_rank = rank == len(W.space)
        details = {"N": result.N, "power_residual": result.residual, "rank": rank}

        if full_rank != result.invertible:
            raise exception.OracleResidualExceeded(
                "Invertibility verdict {0} disagrees with rank {1}".format(result.invertible,
                                                                          rank))

        if result.invertible:
            rng = np.random.default_rng(self.seed)
            g = self._random_function(rng)
            f = apply_inverse(W, g, result)
            scale = max(1.0, float(np.max(np.abs(g.values))))
            round_trip = max_entry(W.apply(f).values - g.values) / scale
            solved = np.linalg.solve(M, W.to_coordinates(g))
            solve_residual = max_entry(W.to_coordinates(f) - solved) / \
                max(1.0, max_entry(solved))

            self._oracle("Inverse round trip", round_trip, self.tols["inverse"])
            self._oracle("Inverse matrix solve", solve_residual, self.tols["power"])
            details.update({"round_trip_residual": round_trip,
                            "solve_residual": solve_residual})

        magnitudes = np.abs(result.v.values)
        return RangeVerdict(Criterion.periodic_invertibility, result.invertible,
                            float(np.min(magnitudes)), witness=result.v, details=details)

    def check_spectral_measure(self):
        result = periodic_invertibility(self.operator, self.tols)
        table = spectral_measure(result.v)
        values = table.distinct_values

        if not np.all(table.whole().values == 1):
            raise exception.OracleResidualExceeded("E(C) is not the identity.")

        for i, first in enumerate(values):
            single = table.projector(first).values
            for second in values[i + 1:]:
                other = table.projector(second).values
                if np.any(single * other) or \
                        not np.array_equal(table.projector((first, second)).values,
                                           single + other):
                    raise exception.OracleResidualExceeded(
                        "Spectral projectors of {0} and {1} are not orthogonal and additive.".
                        format(first, second))

        if not np.array_equal(table.reconstruct().values, result.v.values):
            raise exception.OracleResidualExceeded("sum z E({z}) does not reproduce v.")

        return RangeVerdict(Criterion.spectral_measure, True, float(len(table)),
                            witness=result.v, details={"distinct_values": len(table)})

    def check_injectivity(self):
        return injectivity_check(self.operator, self.tols)


def run_checks(scenario, timing=False, tols=None):
    """
    Run every check a scenario requests.  A failed check does not
    stop the others.

    Parameter:
    scenario    The Scenario.

    Keyword Parameters:
    timing      If true, the report includes the elapsed time.
    tols        The ToleranceConfig.

    Return: Report
    """
    start = time.perf_counter()
    log.info("Running {0} checks on {1!r}".format(len(scenario.checks), scenario))

    records = []
    if scenario.checks:
        runner = CheckRunner(scenario, tols)
        records = [runner.run(c) for c in scenario.checks]

    elapsed = time.perf_counter() - start if timing else None
    return Report(records, scenario.seed, source=scenario.path, timing=elapsed)


def run_batch(scenarios, jobs=1, timing=False, tols=None):
    """
    Run several scenarios on a thread pool.

    Return: list of Report, in input order
    """
    tols = tols or tolerances()
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda s: run_checks(s, timing, tols), scenarios))
