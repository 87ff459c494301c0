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
from collections import namedtuple
from numbers import Integral, Real

import numpy as np

from . import exception
from .dynamics import SelfMap
from .measurespace import AtomKind, FiniteMeasureSpace, PFunction, genuine_atom, \
    nonatomic_cell
from .rangecriteria import BandScheme, Criterion
from .util import complex_to_json, format_exponent, json_to_complex, parse_exponent, parse_mass
from .weightedsum import WeightedSumOperator

__all__ = ['Scenario', 'Instance', 'load_scenario', 'save_scenario', 'generate_random']

log = logging.getLogger(__name__)

# generated permutations use cycles no longer than this
MAX_CYCLE = 4

# The operator built from a scenario, with the witness region
# as atom indices of the (possibly refined) space, or None.
Instance = namedtuple("instance", ["operator", "region"])

map_modes = ["any", "permutation"]


def _field_error(path, field, msg):
    return exception.ScenarioValidationError("{0}: {1}: {2}".format(path, field, msg))


class Scenario:

    """
    A weighted sum of composition operators and the checks to run on it.

    Parameters:
    atoms               A list of Atom tuples.
    terms               A list of (weights, targets) pairs, one value
                        per atom in each.

    Keyword Parameters:
    p, q                The exponents.  The default is 2.
    checks              The Criterion list to run.
    seed                The random seed of the oracles, or None.
    refinement_levels   The number of times to refine the operator
                        before running checks.
    options             A dict of analysis options: alpha, band_scheme,
                        region (atom ids), samples.
    """

    def __init__(self, atoms, terms, p=2, q=2, checks=None, seed=None, refinement_levels=0,
                 options=None):
        self.log = logging.getLogger(__name__)
        self.atoms = list(atoms)
        self.terms = [(np.array(w, dtype=complex), np.array(t, dtype=int)) for w, t in terms]
        self.p = parse_exponent(p)
        self.q = parse_exponent(q)
        self.checks = [Criterion.lookup(c) for c in (checks or [])]
        self.seed = seed
        self.refinement_levels = refinement_levels
        self.options = dict(options or {})
        self.path = None

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return "<{0.__class__.__name__}({1} atoms, {2} terms, checks {3})>".format(
            self, len(self.atoms), len(self.terms), [str(c) for c in self.checks])

    def space(self):
        """The (unrefined) FiniteMeasureSpace."""
        return FiniteMeasureSpace(self.atoms)

    def operator(self):
        """The (unrefined) WeightedSumOperator."""
        space = self.space()
        return WeightedSumOperator(((PFunction(space, w), SelfMap(space, t))
                                    for w, t in self.terms), self.p, self.q)

    def build(self):
        """
        Build the operator, refined refinement_levels times, and map
        the region option onto the refined atoms.

        Return: Instance
        """
        return self._build(self.refinement_levels)

    def _build(self, levels):
        W = self.operator()
        region = self.options.get("region")
        if region is not None:
            region = [W.space.index(atom_id) for atom_id in region]

        for _ in range(levels):
            W, coarsen_map = W.refine()
            if region is not None:
                coarse = set(region)
                region = [i for i, parent in enumerate(coarsen_map) if parent in coarse]

        return Instance(W, region)

    def refined(self, levels):
        """
        A new scenario with the operator refined levels more times.
        The region option is mapped onto the children of its atoms.
        """
        W, region = self._build(self.refinement_levels + levels)

        options = dict(self.options)
        if region is not None:
            options["region"] = [W.space.ids[i] for i in region]

        return Scenario.from_operator(W, checks=self.checks, seed=self.seed, options=options)

    @classmethod
    def from_operator(cls, W, **kwargs):
        """Create a scenario from a WeightedSumOperator."""
        terms = [(u.values, phi.targets) for u, phi in W.terms]
        return cls(W.space.atoms, terms, p=W.p, q=W.q, **kwargs)

    #
    # Serialization
    #
    def to_dict(self):
        """Convert the scenario to JSON-compatible values."""
        atoms = []
        for atom in self.atoms:
            entry = {"id": atom.atom_id, "mass": atom.mass, "kind": str(atom.kind)}
            if atom.kind == AtomKind.cell:
                entry["level"] = atom.level
                entry["lineage"] = atom.lineage

            atoms.append(entry)

        data = {"atoms": atoms,
                "terms": [{"weight": [complex_to_json(x) for x in w],
                           "map": t.tolist()} for w, t in self.terms],
                "p": format_exponent(self.p),
                "q": format_exponent(self.q),
                "checks": [str(c) for c in self.checks],
                "seed": self.seed,
                "refinement_levels": self.refinement_levels}

        if self.options:
            data["options"] = {k: (str(v) if isinstance(v, BandScheme) else v)
                               for k, v in sorted(self.options.items())}

        return data

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path):
        """
        Save the scenario to the specified path.  Existing files
        will be overwritten.
        """
        self.log.info("Writing scenario to \"{0}\"".format(path))
        with open(path, "w", encoding="utf-8") as scenario_file:
            scenario_file.write(self.dumps())
            scenario_file.write("\n")

    @classmethod
    def from_dict(cls, data, path="<scenario>"):
        """
        Validate and convert JSON data to a scenario.

        Exceptions:
        ScenarioValidationError     The data is inconsistent.  The
                                    message names the offending field.
        InvalidCriterion            A check identifier is unknown.
        """
        if not isinstance(data, dict):
            raise _field_error(path, "<root>", "expected an object")

        atoms = _parse_atoms(data.get("atoms"), path)
        n = len(atoms)

        try:
            space = FiniteMeasureSpace(atoms)
        except exception.SpaceError as ex:
            raise _field_error(path, "atoms", ex) from ex

        terms = _parse_terms(data.get("terms"), n, path)

        exponents = {}
        for name in ("p", "q"):
            try:
                exponents[name] = parse_exponent(data.get(name, 2))
            except exception.InvalidExponent as ex:
                raise _field_error(path, name, ex) from ex

        checks = data.get("checks", [])
        if not isinstance(checks, list):
            raise _field_error(path, "checks", "expected a list")

        criteria = []
        for i, check in enumerate(checks):
            try:
                criterion = Criterion.lookup(check)
            except ValueError as ex:
                raise exception.InvalidCriterion("{0}: checks[{1}]: unknown check {2!r}".format(
                    path, i, check)) from ex

            if criterion in criteria:
                raise _field_error(path, "checks[{0}]".format(i),
                                   "{0} is requested more than once".format(criterion))

            criteria.append(criterion)

        seed = data.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, Integral) or
                                 seed < 0):
            raise _field_error(path, "seed", "expected a nonnegative integer or null")

        levels = data.get("refinement_levels", 0)
        if isinstance(levels, bool) or not isinstance(levels, Integral) or levels < 0:
            raise _field_error(path, "refinement_levels", "expected a nonnegative integer")

        options = _parse_options(data.get("options", {}), space, path)

        scenario = cls(atoms, terms, p=exponents["p"], q=exponents["q"], checks=criteria,
                       seed=seed, refinement_levels=levels, options=options)
        scenario.path = path
        return scenario


def _parse_atoms(atoms, path):
    if not isinstance(atoms, list) or not atoms:
        raise _field_error(path, "atoms", "expected a nonempty list")

    parsed = []
    for i, entry in enumerate(atoms):
        field = "atoms[{0}]".format(i)
        if not isinstance(entry, dict):
            raise _field_error(path, field, "expected an object")

        if "id" not in entry or not isinstance(entry["id"], (str, int)) or \
                isinstance(entry["id"], bool):
            raise _field_error(path, field + ".id", "expected a string or integer id")

        try:
            mass = parse_mass(entry.get("mass"))
        except (TypeError, ValueError, ZeroDivisionError) as ex:
            raise _field_error(path, field + ".mass", "invalid mass {0!r}".format(
                entry.get("mass"))) from ex

        try:
            kind = AtomKind.lookup(entry.get("kind", "atom"))
        except ValueError as ex:
            raise _field_error(path, field + ".kind", ex) from ex

        if kind == AtomKind.genuine:
            parsed.append(genuine_atom(entry["id"], mass))
        else:
            level = entry.get("level", 0)
            if isinstance(level, bool) or not isinstance(level, Integral) or level < 0:
                raise _field_error(path, field + ".level", "expected a nonnegative integer")

            parsed.append(nonatomic_cell(entry["id"], mass, level, entry.get("lineage")))

    return parsed


def _parse_terms(terms, n, path):
    if not isinstance(terms, list) or not terms:
        raise _field_error(path, "terms", "expected a nonempty list")

    parsed = []
    for i, entry in enumerate(terms):
        field = "terms[{0}]".format(i)
        if not isinstance(entry, dict):
            raise _field_error(path, field, "expected an object")

        weight = entry.get("weight")
        if not isinstance(weight, list) or len(weight) != n:
            raise _field_error(path, field + ".weight",
                               "expected {0} values, one per atom".format(n))

        try:
            values = [json_to_complex(x) for x in weight]
        except ValueError as ex:
            raise _field_error(path, field + ".weight", ex) from ex

        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in values):
            raise _field_error(path, field + ".weight", "weights must be finite")

        targets = entry.get("map")
        if not isinstance(targets, list) or len(targets) != n:
            raise _field_error(path, field + ".map",
                               "expected {0} atom indices, one per atom".format(n))

        for j, target in enumerate(targets):
            if isinstance(target, bool) or not isinstance(target, Integral) or \
                    not 0 <= target < n:
                raise _field_error(path, "{0}.map[{1}]".format(field, j),
                                   "invalid atom index {0!r}".format(target))

        parsed.append((values, targets))

    return parsed


def _parse_options(options, space, path):
    if not isinstance(options, dict):
        raise _field_error(path, "options", "expected an object")

    parsed = {}
    for key, value in options.items():
        field = "options.{0}".format(key)

        if key == "alpha":
            if isinstance(value, bool) or not isinstance(value, Real) or not value > 0:
                raise _field_error(path, field, "expected a positive number")

            parsed[key] = float(value)

        elif key == "band_scheme":
            try:
                parsed[key] = str(BandScheme.lookup(value))
            except ValueError as ex:
                raise _field_error(path, field, ex) from ex

        elif key == "region":
            if not isinstance(value, list) or not value:
                raise _field_error(path, field, "expected a nonempty list of atom ids")

            for atom_id in value:
                try:
                    space.index(atom_id)
                except exception.SpaceError as ex:
                    raise _field_error(path, field, ex) from ex

            parsed[key] = list(value)

        elif key == "samples":
            if isinstance(value, bool) or not isinstance(value, Integral) or value < 0:
                raise _field_error(path, field, "expected a nonnegative integer")

            parsed[key] = value

        else:
            raise _field_error(path, field, "unknown option")

    return parsed


def load_scenario(path):
    """
    Load and validate a scenario file.

    Exceptions:
    ScenarioParseError          The file is not valid JSON.  The
                                message is path:line:col annotated.
    ScenarioValidationError     The file is inconsistent.
    """
    log.info("Opening scenario \"{0}\"".format(path))

    with open(path, "r", encoding="utf-8") as scenario_file:
        try:
            data = json.load(scenario_file)
        except json.JSONDecodeError as ex:
            raise exception.ScenarioParseError("{0}:{1}:{2}: {3}".format(
                path, ex.lineno, ex.colno, ex.msg)) from ex

    scenario = Scenario.from_dict(data, path)
    log.debug("Loaded {0!r}".format(scenario))
    return scenario


def save_scenario(scenario, path):
    scenario.save(path)


#
# Random generation
#
def _count(rng, value, name, limit=None):
    """
    Draw a count from an int or an inclusive (low, high) range.  The
    upper end of a range is capped at limit, if given.
    """
    if isinstance(value, Integral):
        low = high = int(value)
    else:
        try:
            low, high = (int(v) for v in value)
        except (TypeError, ValueError) as ex:
            raise exception.InvalidGeneratorConfig(
                "{0} must be an integer or a (low, high) range".format(name)) from ex

        if limit is not None:
            high = min(high, limit)

    if not 1 <= low <= high:
        raise exception.InvalidGeneratorConfig("Invalid {0} range: {1}-{2}".format(
            name, low, high))

    return int(rng.integers(low, high + 1))


def _cycles(rng, atoms, targets):
    """Permute atoms among themselves in cycles of at most MAX_CYCLE."""
    atoms = list(rng.permutation(atoms))
    while atoms:
        length = int(rng.integers(1, min(MAX_CYCLE, len(atoms)) + 1))
        cycle, atoms = atoms[:length], atoms[length:]
        for source, target in zip(cycle, cycle[1:] + cycle[:1]):
            targets[source] = target


def generate_random(seed, atoms=(2, 32), terms=(1, 4), p=2, q=2, disjoint=False, maps="any",
                    invariant=False, zero_probability=0.0, complex_weights=False, cells=0,
                    checks=None):
    """
    Generate a random scenario.  The result depends only on the
    arguments.

    Parameters:
    seed                The random seed.

    Keyword Parameters:
    atoms               The atom count, or an inclusive (low, high)
                        range.  The default is 2-32.
    terms               The term count, or a range.  The default is 1-4.
                        With disjoint supports a range is capped at
                        the atom count.
    p, q                The exponents.  The default is 2.
    disjoint            If true, the weight supports are pairwise
                        disjoint.
    maps                "any" or "permutation".  Permutations are
                        built from cycles of at most 4 atoms.
    invariant           If true, each map permutes the support of its
                        weight, so W^N is a multiplication operator.
                        Implies permutation maps.
    zero_probability    The probability of planting a zero in a weight.
    complex_weights     If true, weights get random phases.
    cells               The number of atoms that are non-atomic cells.
    checks              The checks of the scenario.

    Exceptions:
    InvalidGeneratorConfig  The settings cannot be satisfied.

    Return: Scenario
    """
    if maps not in map_modes:
        raise exception.InvalidGeneratorConfig("Invalid map mode: {0}".format(maps))

    if not 0 <= zero_probability <= 1:
        raise exception.InvalidGeneratorConfig("Zero probability must be in [0, 1].")

    rng = np.random.default_rng(seed)
    n = _count(rng, atoms, "atom count")
    m = _count(rng, terms, "term count", limit=n if disjoint else None)

    if disjoint and m > n:
        raise exception.InvalidGeneratorConfig(
            "{0} terms cannot have disjoint supports on {1} atoms.".format(m, n))

    if not 0 <= cells <= n:
        raise exception.InvalidGeneratorConfig("Invalid cell count {0} for {1} atoms.".format(
            cells, n))

    masses = rng.uniform(0.1, 10, n)
    space_atoms = [genuine_atom("a{0}".format(i), masses[i]) for i in range(n - cells)]
    space_atoms.extend(nonatomic_cell("c{0}".format(i), masses[n - cells + i])
                       for i in range(cells))

    if disjoint:
        order = rng.permutation(n)
        cuts = np.sort(rng.choice(np.arange(1, n), size=m - 1, replace=False)) if m > 1 else []
        supports = [sorted(s.tolist()) for s in np.split(order, cuts)]
    else:
        supports = [list(range(n))] * m

    term_list = []
    for support in supports:
        weight = np.zeros(n, dtype=complex)
        weight[support] = rng.uniform(0.5, 2.0, len(support))
        if complex_weights:
            weight[support] *= np.exp(1j * rng.uniform(0, 2 * math.pi, len(support)))

        if zero_probability:
            weight[rng.random(n) < zero_probability] = 0

        targets = np.zeros(n, dtype=int)
        if invariant:
            _cycles(rng, support, targets)
            _cycles(rng, sorted(set(range(n)) - set(support)), targets)
        elif maps == "permutation":
            _cycles(rng, list(range(n)), targets)
        else:
            targets = rng.integers(0, n, n)

        term_list.append((weight, targets))

    scenario = Scenario(space_atoms, term_list, p=p, q=q, checks=checks, seed=seed)
    log.debug("Generated {0!r} from seed {1}".format(scenario, seed))
    return scenario
