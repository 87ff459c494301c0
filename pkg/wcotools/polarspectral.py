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
Polar decomposition, invertibility of operators with periodic maps,
spectral measures of multiplication operators, and injectivity.

Every formula result is paired with an independent matrix oracle.
"""
import logging
import math
from collections import namedtuple
from numbers import Number

import numpy as np
from scipy.linalg import eigh, null_space, pinv

from . import exception
from .config import tolerances
from .dynamics import detect_period
from .measurespace import PFunction
from .rangecriteria import Criterion, RangeVerdict
from .util import lcm, max_entry, relative_threshold
from .weightedsum import WeightedSumOperator

__all__ = ['PolarParts', 'polar_decomposition', 'verify_partial_isometry', 'oracle_polar',
           'oracle_residuals', 'periodic_invertibility', 'apply_inverse', 'spectral_measure',
           'SpectralMeasureTable', 'injectivity_check']

log = logging.getLogger(__name__)

# V is a WeightedSumOperator; abs_w is the multiplier sqrt(J);
# B is the frozenset of atom indices of Coz J.
PolarParts = namedtuple("polar_parts", ["V", "abs_w", "B", "operator"])

PartialIsometryResiduals = namedtuple("partial_isometry", ["projection", "isometry",
                                                           "factorization", "trace", "rank"])

OracleResiduals = namedtuple("oracle_polar_residuals", ["factorization", "positive_factor",
                                                        "isometry_factor"])

PeriodicResult = namedtuple("periodic_result", ["N", "v", "invertible", "residual"])


def _require_polar_hypotheses(W):
    if W.p != 2 or W.q != 2:
        raise exception.ExponentMismatch("Polar decompositions require p = q = 2.")

    if not W.disjoint_supports():
        raise exception.OverlappingSupports("Polar decompositions require disjoint supports.")


def polar_decomposition(W, tols=None):
    """
    The polar decomposition W = V |W|, where |W| = M_sqrt(J) and

        V g = sum_i u_i ((chi_B g / sqrt(J)) o phi_i)

    is a partial isometry with initial space L^2(B), B = Coz J.

    Exceptions:
    ExponentMismatch        The operator is not on L^2.
    OverlappingSupports     The weight supports are not disjoint.

    Return: PolarParts
    """
    _require_polar_hypotheses(W)
    tols = tols or tolerances()

    J = W.compute_j(2).J.real
    in_b = J > relative_threshold(J, tols["cozero"])
    root = np.sqrt(J)
    scale = np.zeros(len(J))
    scale[in_b] = 1 / root[in_b]

    terms = []
    for u, phi in W.terms:
        terms.append((PFunction(W.space, u.values * scale[phi.targets]), phi))

    abs_w = np.where(in_b, root, 0.0)
    B = frozenset(np.flatnonzero(in_b).tolist())
    log.debug("Polar decomposition with |B| = {0}".format(len(B)))

    return PolarParts(WeightedSumOperator(terms, 2, 2), PFunction(W.space, abs_w), B, W)


def verify_partial_isometry(parts, samples=20, seed=0):
    """
    Check that V*V is the orthogonal projection onto the coordinates
    of B, that ||Vg|| = ||g|| for random g supported on B, and that
    W = V M_sqrt(J).

    Return: PartialIsometryResiduals
    projection      max-entry norm of V*V - diag(chi_B)
    isometry        max relative | ||Vg|| - ||g|| |
    factorization   max-entry norm of matrix(W) - matrix(V) diag(sqrt(J))
    trace           trace of V*V, rounded to an integer
    rank            |B|
    """
    V = parts.V.matrix()
    gram = V.conj().T @ V
    chi_b = np.zeros(len(parts.abs_w))
    chi_b[sorted(parts.B)] = 1.0

    projection = max_entry(gram - np.diag(chi_b))
    factorization = max_entry(parts.operator.matrix() - V @ np.diag(parts.abs_w.real))

    isometry = 0.0
    if parts.B:
        rng = np.random.default_rng(seed)
        support = sorted(parts.B)
        for _ in range(samples):
            coords = np.zeros(len(chi_b), dtype=complex)
            coords[support] = rng.standard_normal(len(support)) + \
                1j * rng.standard_normal(len(support))
            norm = np.linalg.norm(coords)
            isometry = max(isometry, abs(np.linalg.norm(V @ coords) - norm) / norm)

    trace = int(round(float(np.trace(gram).real)))
    return PartialIsometryResiduals(projection, isometry, factorization, trace, len(parts.B))


def oracle_polar(W, tols=None):
    """
    Matrix polar decomposition matrix(W) = U P, with P the Hermitian
    square root of W*W from an eigendecomposition and U = matrix(W) P^+.

    Exceptions:
    ExponentMismatch    The operator is not on L^2.

    Return: tuple(U, P)
    """
    if W.p != 2 or W.q != 2:
        raise exception.ExponentMismatch("Polar decompositions require p = q = 2.")

    tols = tols or tolerances()
    M = W.matrix()
    eigenvalues, eigenvectors = eigh(M.conj().T @ M)
    eigenvalues = np.clip(eigenvalues, 0, None)

    P = (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.conj().T
    U = M @ pinv(P, atol=0, rtol=math.sqrt(tols["cozero"]))
    return U, P


def oracle_residuals(parts, tols=None):
    """
    Compare the polar parts with the matrix oracle.

    Return: OracleResiduals
    factorization       max-entry norm of matrix(W) - U P
    positive_factor     max-entry norm of P - diag(sqrt(J))
    isometry_factor     max-entry norm of (U - matrix(V)) on the columns of B
    """
    U, P = oracle_polar(parts.operator, tols)
    M = parts.operator.matrix()
    columns = sorted(parts.B)

    return OracleResiduals(max_entry(M - U @ P),
                           max_entry(P - np.diag(parts.abs_w.real)),
                           max_entry((U - parts.V.matrix())[:, columns]))


def periodic_invertibility(W, tols=None):
    """
    Invertibility of W when every map is a permutation.

    With N the lcm of the map periods, W^N is the multiplication
    operator M_v where

        v(a) = sum_i prod_{k=0}^{N-1} u_i(phi_i^k(a))

    and W is invertible exactly when v has no zeros.  v(a) counts as
    zero when |v(a)|^(1/N) is below the invertibility tolerance relative
    to the largest such root.  W^N = M_v is confirmed against the
    matrix power.

    Exceptions:
    NotPurelyAtomic     The space has non-atomic cells.
    AperiodicMap        A map is not a permutation.
    CrossTermsSurvive   matrix(W)^N is not the matrix of M_v.
    PowerOutOfRange     An orbit product or W^N is out of floating point
                        range.

    Return: PeriodicResult
    """
    tols = tols or tolerances()

    if not W.space.is_purely_atomic:
        raise exception.NotPurelyAtomic("Periodic invertibility needs a purely atomic space.")

    periods = []
    for i, phi in enumerate(W.maps):
        period = detect_period(phi)
        if period is None:
            raise exception.AperiodicMap("The map of term {0} is not a permutation.".format(i))

        periods.append(period)

    N = lcm(periods)
    v = np.zeros(len(W.space), dtype=complex)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        for u, phi in W.terms:
            product = np.ones(len(W.space), dtype=complex)
            has_zero = np.zeros(len(W.space), dtype=bool)
            orbit = np.arange(len(W.space))
            for _ in range(N):
                factors = u.values[orbit]
                product *= factors
                has_zero |= factors == 0
                orbit = phi.targets[orbit]

            if not np.all(np.isfinite(product)) or np.any((product == 0) & ~has_zero):
                raise exception.PowerOutOfRange(
                    "Products of {0} weights along the orbits are out of floating point "
                    "range.".format(N))

            v += product

        scale = max(1.0, float(np.max(np.abs(v))))
        residual = max_entry(W.power_matrix(N) - np.diag(v)) / scale

    log.debug("Periods {0}, N = {1}, W^N residual {2}".format(periods, N, residual))

    if not np.isfinite(residual):
        raise exception.PowerOutOfRange("W^{0} is out of floating point range.".format(N))

    if residual > tols["power"]:
        raise exception.CrossTermsSurvive(
            "W^{0} is not a multiplication operator (residual {1})".format(N, residual))

    # |v|^(1/N) is on the scale of the weights
    roots = np.abs(v) ** (1 / N)
    invertible = bool(np.max(roots) > 0 and
                      np.min(roots) > relative_threshold(roots, tols["invertibility"]))

    return PeriodicResult(N, PFunction(W.space, v), invertible, residual)


def apply_inverse(W, g, result=None, tols=None):
    """
    W^-1 g = W^(N-1) (g / v).

    Parameters:
    W           The WeightedSumOperator.
    g           The PFunction to invert.

    Keyword Parameters:
    result      A PeriodicResult for W.  The default is to compute it.

    Exceptions:
    NotInvertible   W is not invertible.
    """
    if result is None:
        result = periodic_invertibility(W, tols)

    if not result.invertible:
        raise exception.NotInvertible("v has zeros, so W is not invertible.")

    return W.apply_power(PFunction(W.space, g.values / result.v.values), result.N - 1)


class SpectralMeasureTable:

    """
    The spectral measure E(B) = M_(chi_B o v) of the multiplication
    operator M_v.

    Parameter:
    v       A PFunction.
    """

    def __init__(self, v):
        self.v = v
        self._groups = {}
        for a, value in enumerate(v.values.tolist()):
            self._groups.setdefault(value, []).append(a)

    def __len__(self):
        return len(self._groups)

    @property
    def distinct_values(self):
        """The distinct values of v, in order of first appearance."""
        return tuple(self._groups)

    def multiplicity(self, value):
        """The atom indices where v takes a value."""
        return tuple(self._groups.get(complex(value), ()))

    def projector(self, predicate):
        """
        The diagonal of E(B).

        Parameter:
        predicate   A callable on complex numbers, or a collection
                    of values (membership) or a single value.

        Return: PFunction of 0/1 values
        """
        if isinstance(predicate, Number):
            predicate = (predicate,)

        if callable(predicate):
            member = predicate
        else:
            member = frozenset(complex(z) for z in predicate).__contains__

        mask = np.zeros(len(self.v))
        for value, atoms in self._groups.items():
            if member(value):
                mask[atoms] = 1.0

        return PFunction(self.v.space, mask)

    def whole(self):
        """E(C)."""
        return self.projector(lambda z: True)

    def reconstruct(self):
        """sum over distinct values z of z E({z}), which equals v."""
        total = np.zeros(len(self.v), dtype=complex)
        for value in self._groups:
            total += value * self.projector(value).values

        return PFunction(self.v.space, total)


def spectral_measure(v):
    """Build the spectral measure table of M_v."""
    return SpectralMeasureTable(v)


def injectivity_check(W, tols=None):
    """
    W is injective exactly when J_2 > 0 everywhere.

    The verdict is compared with the nullity of matrix(W), and every
    atom with J(a) mu(a) = 0 is checked to lie in the kernel.

    Exceptions:
    ExponentMismatch        The operator is not on L^2.
    OverlappingSupports     The weight supports are not disjoint.
    OracleResidualExceeded  The nullity or kernel oracle disagrees.

    Return: RangeVerdict
    """
    _require_polar_hypotheses(W)
    tols = tols or tolerances()

    J = W.compute_j(2).J.real
    tol = relative_threshold(J, tols["injectivity"])
    holds = bool(np.min(J) > tol)

    M = W.matrix()
    nullity = null_space(M, rcond=math.sqrt(tols["injectivity"])).shape[1]
    if (nullity == 0) != holds:
        raise exception.OracleResidualExceeded(
            "Injectivity verdict {0} disagrees with nullity {1}".format(holds, nullity))

    # J(a) mu(a) = 0 exactly when J(a) = 0; the squared norm of column a is J(a)
    zero_atoms = np.flatnonzero(J <= tol)
    column_tol = tol + tols["adjoint"] * max(1.0, float(np.max(J)))
    for a in zero_atoms:
        if np.linalg.norm(M[:, a]) ** 2 > column_tol:
            raise exception.OracleResidualExceeded(
                "Atom {0} has J = 0 but is not in the kernel.".format(W.space[a].atom_id))

    details = {"nullity": int(nullity),
               "zero_atoms": [W.space[a].atom_id for a in zero_atoms]}
    witness = PFunction.indicator(W.space, zero_atoms) if zero_atoms.size else None

    return RangeVerdict(Criterion.injectivity, holds, float(np.min(J)), witness=witness,
                        details=details)
