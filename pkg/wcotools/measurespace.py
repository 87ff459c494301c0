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
Finite measure spaces.

A space is an ordered list of atoms with positive masses.  Atoms are
either genuine atoms or cells standing in for a non-atomic part; cells
can be split into two halves any number of times by refine().  The atom
order is the coordinate layout of every function on the space.
"""
import logging
import math
from collections import defaultdict, namedtuple
import numbers

import numpy as np

from . import exception
from .config import tolerances
from .util import LookupEnum, relative_threshold

__all__ = ['AtomKind', 'Atom', 'genuine_atom', 'nonatomic_cell', 'FiniteMeasureSpace',
           'Partition', 'PFunction', 'lp_norm', 'conditional_expectation', 'refine',
           'refinement_children', 'cozero']

log = logging.getLogger(__name__)


class AtomKind(LookupEnum):

    """Kinds of atoms in a finite measure space."""

    genuine = "atom"
    cell = "cell"


# level and lineage are None for genuine atoms
Atom = namedtuple("atom", ["atom_id", "mass", "kind", "level", "lineage"])


def genuine_atom(atom_id, mass):
    """Create a genuine atom."""
    return Atom(atom_id, float(mass), AtomKind.genuine, None, None)


def nonatomic_cell(atom_id, mass, level=0, lineage=None):
    """
    Create a cell of the non-atomic part.

    Parameters:
    atom_id     The atom identifier.
    mass        The mass of the cell.

    Keyword Parameters:
    level       The refinement level of the cell.  The default is 0.
    lineage     The lineage of the cell.  Cells split from the same
                cell share a lineage.  The default is the atom_id.
    """
    return Atom(atom_id, float(mass), AtomKind.cell, int(level),
                atom_id if lineage is None else lineage)


class FiniteMeasureSpace:

    """
    A finite measure space.

    Parameter:
    atoms       An iterable of Atom tuples.

    Exceptions:
    InvalidMass     A mass is not positive and finite.
    DuplicateAtom   An atom identifier is used more than once.
    SpaceError      Cells of one lineage and level have different masses.
    """

    def __init__(self, atoms):
        self._atoms = tuple(atoms)

        if not self._atoms:
            raise exception.SpaceError("A measure space needs at least one atom.")

        self._index = {}
        for i, atom in enumerate(self._atoms):
            if not isinstance(atom, Atom):
                raise exception.SpaceError("Not an atom: {0!r}".format(atom))

            if not (math.isfinite(atom.mass) and atom.mass > 0):
                raise exception.InvalidMass("Atom {0} has invalid mass {1}".format(
                    atom.atom_id, atom.mass))

            if atom.atom_id in self._index:
                raise exception.DuplicateAtom("Atom {0} is declared more than once.".format(
                    atom.atom_id))

            if atom.kind == AtomKind.cell and (atom.level is None or atom.level < 0):
                raise exception.SpaceError("Cell {0} has invalid refinement level {1}".format(
                    atom.atom_id, atom.level))

            self._index[atom.atom_id] = i

        self._check_lineages()

        self._masses = np.array([a.mass for a in self._atoms], dtype=float)
        self._masses.setflags(write=False)

    def _check_lineages(self):
        """Cells sharing a lineage and level must have equal masses."""
        generations = defaultdict(list)
        for atom in self._atoms:
            if atom.kind == AtomKind.cell:
                generations[(atom.lineage, atom.level)].append(atom)

        for (lineage, level), cells in generations.items():
            first = cells[0].mass
            for cell in cells[1:]:
                if not math.isclose(cell.mass, first, rel_tol=1e-12):
                    raise exception.SpaceError(
                        "Cells {0} and {1} of lineage {2} at level {3} have unequal masses.".
                        format(cells[0].atom_id, cell.atom_id, lineage, level))

    def __len__(self):
        return len(self._atoms)

    def __iter__(self):
        return iter(self._atoms)

    def __getitem__(self, index):
        return self._atoms[index]

    def __eq__(self, other):
        if self is other:
            return True

        return isinstance(other, FiniteMeasureSpace) and self._atoms == other._atoms

    def __hash__(self):
        return hash(self._atoms)

    def __repr__(self):
        return "<{0.__class__.__name__}({1} atoms, {2} cells, mass {3})>".format(
            self, len(self), len(self.nonatomic_indices), self.total_mass)

    @property
    def atoms(self):
        return self._atoms

    @property
    def masses(self):
        return self._masses

    @property
    def ids(self):
        return tuple(a.atom_id for a in self._atoms)

    @property
    def total_mass(self):
        return float(np.sum(self._masses))

    @property
    def nonatomic_indices(self):
        return tuple(i for i, a in enumerate(self._atoms) if a.kind == AtomKind.cell)

    @property
    def genuine_indices(self):
        return tuple(i for i, a in enumerate(self._atoms) if a.kind == AtomKind.genuine)

    @property
    def is_purely_atomic(self):
        return not self.nonatomic_indices

    def index(self, atom_id):
        """Get the coordinate index of an atom."""
        try:
            return self._index[atom_id]
        except KeyError as ex:
            raise exception.SpaceError("No atom {0!r} in the space.".format(atom_id)) from ex

    def as_purely_atomic(self):
        """Get the same space with every cell retagged as a genuine atom."""
        return FiniteMeasureSpace(genuine_atom(a.atom_id, a.mass) for a in self._atoms)

    @classmethod
    def from_masses(cls, masses, ids=None):
        """
        Create a purely atomic space.

        Parameters:
        masses      The atom masses.
        ids         The atom identifiers.  The default is 0..n-1.
        """
        masses = list(masses)
        if ids is None:
            ids = range(len(masses))

        return cls(genuine_atom(i, m) for i, m in zip(ids, masses))


class Partition:

    """
    A partition of the atoms of a space, the finite form
    of a sub-sigma-algebra.

    Parameters:
    space       The FiniteMeasureSpace.
    blocks      An iterable of atom index collections.

    Exceptions:
    InvalidPartition    The blocks are not disjoint, not exhaustive,
                        contain an invalid index, or are empty.
    """

    def __init__(self, space, blocks):
        self.space = space
        labels = np.full(len(space), -1, dtype=int)

        normalized = []
        for block in blocks:
            block = tuple(sorted(int(a) for a in block))
            if not block:
                raise exception.InvalidPartition("Partitions cannot have empty blocks.")

            normalized.append(block)

        normalized.sort()

        for b, block in enumerate(normalized):
            for a in block:
                if not 0 <= a < len(space):
                    raise exception.InvalidPartition("Invalid atom index {0}".format(a))

                if labels[a] >= 0:
                    raise exception.InvalidPartition("Atom {0} is in more than one block.".
                                                     format(a))

                labels[a] = b

        missing = np.flatnonzero(labels < 0)
        if missing.size:
            raise exception.InvalidPartition("Atoms {0} are not in any block.".format(
                missing.tolist()))

        self._blocks = tuple(normalized)
        self._labels = labels
        self._labels.setflags(write=False)

    def __len__(self):
        return len(self._blocks)

    def __iter__(self):
        return iter(self._blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.space == other.space and \
            self._blocks == other._blocks

    def __repr__(self):
        return "<{0.__class__.__name__}({1!r})>".format(self, self._blocks)

    @property
    def blocks(self):
        return self._blocks

    @property
    def labels(self):
        """The block number of each atom."""
        return self._labels

    @classmethod
    def singletons(cls, space):
        """The finest partition: the full sigma-algebra."""
        return cls(space, ((a,) for a in range(len(space))))

    @classmethod
    def trivial(cls, space):
        """The coarsest partition: the trivial sigma-algebra."""
        return cls(space, (range(len(space)),))


class PFunction:

    """
    A complex-valued function on the atoms of a space.

    Parameters:
    space       The FiniteMeasureSpace.
    values      One value per atom, in the space's atom order.

    Exceptions:
    InvalidFunction     The number of values does not match the
                        number of atoms, or a value is not finite.
    """

    __slots__ = ("space", "_values", "__weakref__")

    def __init__(self, space, values):
        values = np.array(values, dtype=complex)

        if values.shape != (len(space),):
            raise exception.InvalidFunction("Expected {0} values, got shape {1}".format(
                len(space), values.shape))

        if not np.all(np.isfinite(values)):
            raise exception.InvalidFunction("Function values must be finite.")

        values.setflags(write=False)
        self.space = space
        self._values = values

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def __getitem__(self, index):
        return self._values[index]

    def __repr__(self):
        return "<{0.__class__.__name__}({1!r})>".format(self, self._values.tolist())

    @property
    def values(self):
        return self._values

    @property
    def real(self):
        return self._values.real

    @property
    def is_real(self):
        return not np.any(self._values.imag)

    def _other_values(self, other):
        if isinstance(other, PFunction):
            if other.space != self.space:
                raise exception.SpaceMismatch("Functions are on different spaces.")

            return other._values

        if isinstance(other, numbers.Number):
            return other

        return NotImplemented

    def __add__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return values

        return PFunction(self.space, self._values + values)

    __radd__ = __add__

    def __sub__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return values

        return PFunction(self.space, self._values - values)

    def __mul__(self, other):
        values = self._other_values(other)
        if values is NotImplemented:
            return values

        return PFunction(self.space, self._values * values)

    __rmul__ = __mul__

    def __neg__(self):
        return PFunction(self.space, -self._values)

    def __abs__(self):
        return PFunction(self.space, np.abs(self._values))

    def allclose(self, other, atol=1e-12):
        """Compare two functions on the same space, entrywise within atol."""
        return bool(np.allclose(self._values, self._other_values(other), rtol=0, atol=atol))

    def items(self):
        """Generate (atom_id, value) pairs."""
        for atom, value in zip(self.space, self._values):
            yield atom.atom_id, value

    def pullback(self, coarsen_map, new_space):
        """
        Pull the function back to a refined space.

        Parameters:
        coarsen_map     The refined-atom to coarse-atom index map.
        new_space       The refined space.
        """
        return PFunction(new_space, self._values[np.asarray(coarsen_map, dtype=int)])

    @classmethod
    def zeros(cls, space):
        return cls(space, np.zeros(len(space)))

    @classmethod
    def constant(cls, space, value):
        return cls(space, np.full(len(space), value, dtype=complex))

    @classmethod
    def indicator(cls, space, indices):
        """The characteristic function of a set of atom indices."""
        values = np.zeros(len(space))
        values[list(indices)] = 1.0
        return cls(space, values)


def lp_norm(f, p):
    """
    Weighted L^p norm of a function.

    Parameters:
    f       A PFunction.
    p       The exponent in [1, inf].

    Return: float
    """
    if not (p >= 1):
        raise exception.InvalidExponent("Exponents must be in [1, inf]: {0}".format(p))

    magnitudes = np.abs(f.values)

    if math.isinf(p):
        return float(np.max(magnitudes))

    return float(np.sum(f.space.masses * magnitudes ** p) ** (1.0 / p))


def conditional_expectation(f, part):
    """
    Conditional expectation of a function onto the sigma-algebra of a partition.

    The value on each block is the mass-weighted average of f on the
    block.  Blocks on which f is already constant keep their value, so
    the operation is exactly idempotent.

    Parameters:
    f       A PFunction.
    part    A Partition of the same space.

    Return: PFunction
    """
    if part.space != f.space:
        raise exception.SpaceMismatch("The function and partition are on different spaces.")

    masses = f.space.masses
    values = f.values
    labels = part.labels
    count = len(part)

    total_mass = np.bincount(labels, weights=masses, minlength=count)
    weighted = np.bincount(labels, weights=masses * values.real, minlength=count) + \
        1j * np.bincount(labels, weights=masses * values.imag, minlength=count)

    first = values[[block[0] for block in part.blocks]]
    varying = np.bincount(labels, weights=(values != first[labels]).astype(float),
                          minlength=count)
    means = np.where(varying == 0, first, weighted / total_mass)

    return PFunction(f.space, means[labels])


def refine(space):
    """
    Split every non-atomic cell into two equal-mass children one
    level deeper.  Genuine atoms pass through unchanged.

    Parameter:
    space       The FiniteMeasureSpace.

    Return: tuple(new_space, coarsen_map)
    new_space       The refined FiniteMeasureSpace.
    coarsen_map     Array of the coarse atom index of each refined atom.
    """
    atoms = []
    coarsen_map = []

    for i, atom in enumerate(space):
        if atom.kind == AtomKind.genuine:
            atoms.append(atom)
            coarsen_map.append(i)
        else:
            for j in range(2):
                atoms.append(nonatomic_cell("{0}.{1}".format(atom.atom_id, j), atom.mass / 2,
                                            atom.level + 1, atom.lineage))
                coarsen_map.append(i)

    new_space = FiniteMeasureSpace(atoms)
    log.debug("Refined {0!r} to {1!r}".format(space, new_space))

    coarsen_map = np.array(coarsen_map, dtype=int)
    coarsen_map.setflags(write=False)
    return new_space, coarsen_map


def refinement_children(coarsen_map, coarse_count):
    """
    Invert a coarsening map.

    Return: list of lists
    The refined atom indices of each coarse atom, in order.
    """
    children = [[] for _ in range(coarse_count)]
    for new, old in enumerate(coarsen_map):
        children[old].append(new)

    return children


def cozero(f, tol=None):
    """
    The cozero set of a function: indices with |f(a)| > tol.

    Parameters:
    f       A PFunction.
    tol     The absolute threshold.  The default is the cozero
            relative tolerance times max |f|.

    Return: frozenset of atom indices
    """
    magnitudes = np.abs(f.values)

    if tol is None:
        tol = relative_threshold(magnitudes, tolerances()["cozero"])
    elif tol < 0:
        raise ValueError("Cozero tolerance must be nonnegative: {0}".format(tol))

    return frozenset(int(a) for a in np.flatnonzero(magnitudes > tol))
