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
Weighted sums of composition operators.

    (W f)(x) = sum_i u_i(x) f(phi_i(x))

Matrices are expressed in the orthonormal basis e_a = chi_a / sqrt(mu(a))
of L^2(mu), so adjoints and singular values of the operator are those
of its matrix.  A function f has coordinates f(a) sqrt(mu(a)).
"""
import logging
import math
from collections import namedtuple
from itertools import combinations

import numpy as np

from . import exception
from .dynamics import SelfMap, fiber_partition, pushforward_of_fiber_constant, radon_nikodym
from .measurespace import PFunction, conditional_expectation, lp_norm, refine
from .util import format_exponent, max_entry, parse_exponent

__all__ = ['WeightedSumOperator', 'CriterionFunction', 'AdjointProduct']

log = logging.getLogger(__name__)

CriterionFunction = namedtuple("criterion_function", ["J", "exponent"])

# residual is the max-entry norm of W*W - M_J.  disjoint records whether
# the weight supports were disjoint when the residual was computed.
AdjointProduct = namedtuple("adjoint_product", ["residual", "disjoint", "J"])


class WeightedSumOperator:

    """
    W = sum_i u_i C_phi_i, from L^p to L^q.

    Parameters:
    terms       A nonempty iterable of (PFunction, SelfMap) pairs.

    Keyword Parameters:
    p           The source exponent in [1, inf].  The default is 2.
    q           The target exponent in [1, inf].  The default is 2.
    """

    def __init__(self, terms, p=2, q=2):
        self._terms = tuple((u, phi) for u, phi in terms)

        if not self._terms:
            raise exception.SpaceError("A weighted sum needs at least one term.")

        for i, (u, phi) in enumerate(self._terms):
            if not isinstance(u, PFunction) or not isinstance(phi, SelfMap):
                raise TypeError("Term {0} is not a (PFunction, SelfMap) pair.".format(i))

        self.space = self._terms[0][0].space
        for i, (u, phi) in enumerate(self._terms):
            if u.space != self.space or phi.space != self.space:
                raise exception.SpaceMismatch("Term {0} is on a different space.".format(i))

        self.p = parse_exponent(p)
        self.q = parse_exponent(q)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __repr__(self):
        return "<{0.__class__.__name__}({1} terms, {2} atoms, p={3}, q={4})>".format(
            self, len(self), len(self.space), format_exponent(self.p), format_exponent(self.q))

    @property
    def terms(self):
        return self._terms

    @property
    def weights(self):
        return tuple(u for u, _ in self._terms)

    @property
    def maps(self):
        return tuple(phi for _, phi in self._terms)

    @property
    def is_zero(self):
        return all(not np.any(u.values) for u, _ in self._terms)

    def _require_l2(self, what):
        if self.p != 2 or self.q != 2:
            raise exception.ExponentMismatch(
                "{0} requires p = q = 2, not p={1}, q={2}".format(
                    what, format_exponent(self.p), format_exponent(self.q)))

    def apply(self, f):
        """Apply the operator to a PFunction."""
        if f.space != self.space:
            raise exception.SpaceMismatch("The function is on a different space.")

        result = np.zeros(len(self.space), dtype=complex)
        for u, phi in self._terms:
            result += u.values * phi.compose(f.values)

        return PFunction(self.space, result)

    def apply_power(self, f, k):
        """Apply the operator k times."""
        for _ in range(k):
            f = self.apply(f)

        return f

    def matrix(self):
        """
        The matrix of W in the orthonormal basis.

        Entry (b, a) is sqrt(mu(b)/mu(a)) times the sum of u_i(b)
        over the terms with phi_i(b) = a.
        """
        masses = self.space.masses
        rows = np.arange(len(self.space))
        M = np.zeros((len(self.space), len(self.space)), dtype=complex)

        for u, phi in self._terms:
            cols = phi.targets
            np.add.at(M, (rows, cols), np.sqrt(masses / masses[cols]) * u.values)

        return M

    def adjoint_matrix(self):
        """
        The matrix of W* under the weighted inner product.

        Exceptions:
        ExponentMismatch    The operator is not on L^2.
        """
        self._require_l2("The adjoint")
        return self.matrix().conj().T

    def power_matrix(self, k):
        """The matrix of W^k."""
        return np.linalg.matrix_power(self.matrix(), k)

    def to_coordinates(self, f):
        """Coordinates of a function in the orthonormal basis."""
        return f.values * np.sqrt(self.space.masses)

    def from_coordinates(self, coords):
        """The function with the given orthonormal basis coordinates."""
        return PFunction(self.space, np.asarray(coords) / np.sqrt(self.space.masses))

    def apply_adjoint(self, g):
        """Apply W* to a PFunction, through the adjoint matrix."""
        return self.from_coordinates(self.adjoint_matrix() @ self.to_coordinates(g))

    def _j_exponent(self, s):
        s = self.q if s is None else parse_exponent(s)
        if math.isinf(s):
            raise exception.ExponentMismatch("The criterion function needs a finite exponent.")

        return s

    def compute_j(self, s=None):
        """
        The criterion function J_s = sum_i h_i E_i(|u_i|^s) o phi_i^-1,
        evaluated in closed form as

            J_s(a) = sum_i (1/mu(a)) sum_{x: phi_i(x) = a} mu(x) |u_i(x)|^s

        Keyword Parameters:
        s       The exponent.  The default is q.

        Return: CriterionFunction
        """
        s = self._j_exponent(s)
        masses = self.space.masses
        J = np.zeros(len(self.space))

        for u, phi in self._terms:
            J += np.bincount(phi.targets, weights=masses * np.abs(u.values) ** s,
                             minlength=len(self.space))

        return CriterionFunction(PFunction(self.space, J / masses), s)

    def compute_j_chained(self, s=None):
        """
        The criterion function computed from its definition: for each
        term, the conditional expectation onto the fiber partition,
        composed with phi_i^-1 and multiplied by h_i.

        Return: CriterionFunction
        """
        s = self._j_exponent(s)
        J = PFunction.zeros(self.space)

        for u, phi in self._terms:
            expected = conditional_expectation(PFunction(self.space, np.abs(u.values) ** s),
                                               fiber_partition(phi))
            J = J + radon_nikodym(self.space, phi) * pushforward_of_fiber_constant(expected, phi)

        return CriterionFunction(PFunction(self.space, J.real), s)

    def disjoint_supports(self):
        """True if u_i(x) u_j(x) = 0 for every atom x and every i != j."""
        for (u, _), (w, _) in combinations(self._terms, 2):
            if np.any(u.values * w.values):
                return False

        return True

    def verify_wstarw_equals_mj(self):
        """
        Compare W*W with the multiplication operator M_J, J = J_2.

        The residual is computed even when the supports overlap, so
        operators where the identity holds without disjoint supports
        can be recorded.

        Exceptions:
        ExponentMismatch    The operator is not on L^2.

        Return: AdjointProduct
        """
        self._require_l2("W*W = M_J")
        M = self.matrix()
        J = self.compute_j(2).J
        residual = max_entry(M.conj().T @ M - np.diag(J.values))
        disjoint = self.disjoint_supports()

        log.debug("W*W - M_J residual {0} (disjoint supports: {1})".format(residual, disjoint))
        return AdjointProduct(residual, disjoint, J)

    def norm_inequality_residual(self, f):
        """
        n^(q-1) int J_q |f|^q dmu - ||Wf||_q^q, which is nonnegative.

        Exceptions:
        ExponentMismatch    q is infinite.
        """
        q = self._j_exponent(self.q)
        J = self.compute_j(q).J.real
        bound = len(self) ** (q - 1) * np.sum(self.space.masses * J * np.abs(f.values) ** q)
        return float(bound - lp_norm(self.apply(f), q) ** q)

    def refine(self):
        """
        Lift the operator to the refined space: weights are pulled back
        and each map is lifted child by child.

        Return: tuple(WeightedSumOperator, coarsen_map)
        """
        new_space, coarsen_map = refine(self.space)
        terms = [(u.pullback(coarsen_map, new_space), phi.lift(coarsen_map, new_space))
                 for u, phi in self._terms]

        return WeightedSumOperator(terms, self.p, self.q), coarsen_map
