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

import networkx as nx
import numpy as np

from . import exception
from .config import tolerances
from .measurespace import Partition, PFunction, refinement_children
from .util import lcm

__all__ = ['SelfMap', 'radon_nikodym', 'fiber_partition', 'pushforward_of_fiber_constant',
           'detect_period', 'compose_power']

log = logging.getLogger(__name__)


class SelfMap:

    """
    A map of the atoms of a space into itself.

    Every atom has positive mass, so the map is automatically
    non-singular.

    Parameters:
    space       The FiniteMeasureSpace.
    targets     The index of the image of each atom.

    Exceptions:
    InvalidMap  The number of targets does not match the space
                or a target index is out of range.
    """

    def __init__(self, space, targets):
        targets = np.array(targets)

        if targets.shape != (len(space),):
            raise exception.InvalidMap("Expected {0} targets, got shape {1}".format(
                len(space), targets.shape))

        if targets.size and not np.issubdtype(targets.dtype, np.integer):
            if not np.all(np.equal(np.mod(targets, 1), 0)):
                raise exception.InvalidMap("Map targets must be atom indices.")

        targets = targets.astype(int)

        if np.any(targets < 0) or np.any(targets >= len(space)):
            raise exception.InvalidMap("Map target out of range: {0}".format(targets.tolist()))

        targets.setflags(write=False)
        self.space = space
        self._targets = targets
        self._graph = None

    def __len__(self):
        return len(self._targets)

    def __getitem__(self, index):
        return int(self._targets[index])

    def __eq__(self, other):
        return isinstance(other, SelfMap) and self.space == other.space and \
            np.array_equal(self._targets, other._targets)

    def __hash__(self):
        return hash(tuple(self._targets.tolist()))

    def __repr__(self):
        return "<{0.__class__.__name__}({1!r})>".format(self, self._targets.tolist())

    @property
    def targets(self):
        return self._targets

    @property
    def graph(self):
        """The functional graph of the map, with an edge a -> phi(a)."""
        if self._graph is None:
            G = nx.DiGraph()
            G.add_nodes_from(range(len(self._targets)))
            G.add_edges_from(enumerate(self._targets.tolist()))
            self._graph = G

        return self._graph

    @property
    def is_permutation(self):
        return all(d == 1 for _, d in self.graph.in_degree())

    def fiber(self, atom):
        """The sorted preimage indices of an atom."""
        return sorted(self.graph.predecessors(atom))

    def compose(self, values):
        """Compose an array of atom values with the map: values o phi."""
        return np.asarray(values)[self._targets]

    def lift(self, coarsen_map, new_space):
        """
        Lift the map to a refined space.  Child j of atom a is
        sent to child j (modulo the child count) of phi(a).

        Parameters:
        coarsen_map     The refined-atom to coarse-atom index map.
        new_space       The refined space.

        Return: SelfMap
        """
        children = refinement_children(coarsen_map, len(self.space))
        targets = np.empty(len(new_space), dtype=int)

        for parent, kids in enumerate(children):
            image = children[self._targets[parent]]
            for j, child in enumerate(kids):
                targets[child] = image[j % len(image)]

        return SelfMap(new_space, targets)

    @classmethod
    def identity(cls, space):
        return cls(space, np.arange(len(space)))

    @classmethod
    def constant(cls, space, target):
        return cls(space, np.full(len(space), target, dtype=int))


def _check_space(space, phi):
    if phi.space != space:
        raise exception.SpaceMismatch("The map is not on this space.")


def radon_nikodym(space, phi):
    """
    Radon-Nikodym derivative of the pushforward measure mu o phi^-1
    with respect to mu: h(a) = mu(phi^-1({a})) / mu(a).

    Return: PFunction
    """
    _check_space(space, phi)
    preimage_mass = np.bincount(phi.targets, weights=space.masses, minlength=len(space))
    return PFunction(space, preimage_mass / space.masses)


def fiber_partition(phi):
    """
    The partition of the atoms into the nonempty fibers of phi,
    which generate the sub-sigma-algebra phi^-1(Sigma).

    Return: Partition
    """
    G = phi.graph
    blocks = [list(G.predecessors(a)) for a in sorted(G) if G.in_degree(a)]
    return Partition(phi.space, blocks)


def pushforward_of_fiber_constant(g, phi):
    """
    Compose a fiber-constant function with phi^-1.

    The result at atom a is the value of g on the fiber of a, and
    0 where the fiber is empty.

    Parameters:
    g       A PFunction that is constant on the fibers of phi.
    phi     The SelfMap.

    Exceptions:
    NotFiberConstant    g varies on a fiber by more than the
                        fiber-constancy relative tolerance.

    Return: PFunction
    """
    _check_space(g.space, phi)
    rtol = tolerances()["fiber_constant"]
    values = g.values
    result = np.zeros(len(values), dtype=complex)

    for a in phi.graph:
        fiber = phi.fiber(a)
        if not fiber:
            continue

        fiber_values = values[fiber]
        spread = np.max(np.abs(fiber_values - fiber_values[0]))
        if spread > rtol * np.max(np.abs(fiber_values)):
            raise exception.NotFiberConstant(
                "Function is not constant on the fiber of atom {0}: {1}".format(
                    g.space[a].atom_id, fiber_values.tolist()))

        result[a] = fiber_values[0]

    return PFunction(g.space, result)


def detect_period(phi):
    """
    The least N >= 1 with phi^N = identity.

    Return: int, or None if phi is not a permutation.
    """
    if not phi.is_permutation:
        return None

    lengths = [len(c) for c in nx.simple_cycles(phi.graph)]
    period = lcm(lengths)
    log.debug("Map {0!r} has cycle lengths {1}, period {2}".format(phi, lengths, period))
    return period


def compose_power(phi, k):
    """
    Iterate a map k times; k = 0 gives the identity.

    Return: SelfMap
    """
    if int(k) != k or k < 0:
        raise ValueError("Powers must be nonnegative integers: {0}".format(k))

    targets = np.arange(len(phi))
    for _ in range(int(k)):
        targets = phi.targets[targets]

    return SelfMap(phi.space, targets)
