# The Toda system laboratory.
#   by imacat <imacat@mail.imacat.idv.tw>, 2026/10/18

#  Copyright (c) 2026 imacat.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""The Cartan matrices of the simple Lie algebras, their symmetric
decompositions, spectra and the uniqueness thresholds they imply.

The matrices, their inverses and the decompositions are exact, in rational
arithmetic.  The spectra are in double precision.

"""
import logging
import math
import re
from collections import deque
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .utils import CertificateError, EigenSolverError, InvalidParameterError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]
ExactMatrix = Tuple[Tuple[Fraction, ...], ...]

FAMILIES = "ABCDEFG"
SYMMETRIC_FAMILIES = "ADE"
CLOSED_FORM = "closed_form"
DENSE_EIG = "dense_eig"
RECURSION_BOUND = "recursion_bound"
METHODS = [CLOSED_FORM, DENSE_EIG, RECURSION_BOUND]
EIGEN_RESIDUAL_TOLERANCE = 1e-10

# The exponents and the Coxeter numbers of the simply-laced exceptional
# algebras.  The eigenvalues of their Cartan matrices are 4 sin^2(m pi/2h).
_E_EXPONENTS: Dict[int, Tuple[int, ...]] = {
    6: (1, 4, 5, 7, 8, 11),
    7: (1, 5, 7, 9, 11, 13, 17),
    8: (1, 7, 11, 13, 17, 19, 23, 29),
}
_E_COXETER: Dict[int, int] = {6: 12, 7: 18, 8: 30}

# rho(A^s) of the exceptional algebras, derived from the characteristic
# polynomials and pinned against the dense eigensolver by the tests.
# F4: the largest root of x^4 - 6x^3 + 43/4 x^2 - 6x + 1/4.
EXCEPTIONAL_RADII: Dict[str, float] = {
    "E6": 2 + 2 * math.cos(math.pi / 12),
    "E7": 2 + 2 * math.cos(math.pi / 18),
    "E8": 2 + 2 * math.cos(math.pi / 30),
    "F4": 3.25940834663615,
    "G2": (4 + math.sqrt(13)) / 3,
}


class LieFamily:
    """A simple Lie algebra, as its family letter and its rank.

    Args:
        family: The family letter, one of A to G.
        rank: The rank.

    Raises:
        InvalidParameterError: When the family and rank do not name a simple
            Lie algebra.
    """

    def __init__(self, family: str, rank: int):
        family = str(family).upper()
        if family not in FAMILIES or len(family) != 1:
            raise InvalidParameterError(F"unknown Lie family {family!r}")
        if isinstance(rank, bool) or int(rank) != rank:
            raise InvalidParameterError(F"rank must be an integer: {rank!r}")
        rank = int(rank)
        if not self.is_valid(family, rank):
            raise InvalidParameterError(
                F"{family}{rank} is not a simple Lie algebra")
        self._family = family
        self._rank = rank

    @staticmethod
    def is_valid(family: str, rank: int) -> bool:
        """Returns whether a family and a rank name a simple Lie algebra.

        Args:
            family: The family letter.
            rank: The rank.

        Returns:
            True if the pair is valid, or False otherwise.
        """
        if family == "A":
            return rank >= 1
        if family in "BC":
            return rank >= 2
        if family == "D":
            return rank >= 3
        if family == "E":
            return rank in (6, 7, 8)
        if family == "F":
            return rank == 4
        if family == "G":
            return rank == 2
        return False

    @staticmethod
    def valid_ranks(family: str, max_rank: int) -> List[int]:
        """Returns the valid ranks of a family up to a maximum rank.

        Args:
            family: The family letter.
            max_rank: The maximum rank.

        Returns:
            The valid ranks in increasing order.
        """
        return [x for x in range(1, max_rank + 1)
                if LieFamily.is_valid(family, x)]

    @classmethod
    def parse(cls, name: str) -> "LieFamily":
        """Parses an algebra name like "A2" or "g2".

        Args:
            name: The algebra name.

        Returns:
            The Lie family.

        Raises:
            InvalidParameterError: When the name is invalid.
        """
        m = re.match(r"^\s*([A-Ga-g])\s*(\d+)\s*$", name)
        if m is None:
            raise InvalidParameterError(F"not an algebra name: {name!r}")
        return cls(m.group(1), int(m.group(2)))

    @property
    def family(self) -> str:
        """The family letter."""
        return self._family

    @property
    def rank(self) -> int:
        """The rank."""
        return self._rank

    @property
    def is_symmetric(self) -> bool:
        """Whether the Cartan matrix is symmetric."""
        return self._family in SYMMETRIC_FAMILIES

    def __str__(self) -> str:
        return F"{self._family}{self._rank}"

    def __repr__(self) -> str:
        return F"LieFamily({self._family!r}, {self._rank})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LieFamily):
            return NotImplemented
        return self._family == other._family and self._rank == other._rank

    def __hash__(self) -> int:
        return hash((self._family, self._rank))


def identity_matrix(n: int) -> np.ndarray:
    """Returns the exact identity matrix.

    Args:
        n: The size.

    Returns:
        The n x n identity as an object array of fractions.
    """
    return np.array([[Fraction(int(i == j)) for j in range(n)]
                     for i in range(n)], dtype=object)


def exact_inverse(matrix: Sequence[Sequence[Number]]) -> ExactMatrix:
    """Inverts a rational matrix exactly by Gauss-Jordan elimination.

    Args:
        matrix: The square matrix.

    Returns:
        The inverse, as rows of fractions.

    Raises:
        InvalidParameterError: When the matrix is not square or is singular.
    """
    x = np.array([[Fraction(v) for v in row] for row in matrix],
                 dtype=object)
    if len(x.shape) != 2 or x.shape[0] != x.shape[1]:
        raise InvalidParameterError(
            F"matrix is not square (shape = {x.shape})")
    n = x.shape[0]
    y = identity_matrix(n)
    for i in range(n):
        for j in range(i, n):
            if x[j, i] != 0:
                if i != j:
                    x[[i, j]] = x[[j, i]]
                    y[[i, j]] = y[[j, i]]
                break
        else:
            raise InvalidParameterError("matrix is singular")
        pivot = x[i, i]
        x[i, :] = x[i, :] / pivot
        y[i, :] = y[i, :] / pivot
        for j in range(n):
            if j != i and x[j, i] != 0:
                factor = x[j, i]
                x[j, :] = x[j, :] - factor * x[i, :]
                y[j, :] = y[j, :] - factor * y[i, :]
    return _freeze(y)


def exact_determinant(matrix: Sequence[Sequence[Number]]) -> Fraction:
    """Returns the exact determinant of a rational matrix.

    Args:
        matrix: The square matrix.

    Returns:
        The determinant.
    """
    x = [[Fraction(v) for v in row] for row in matrix]
    n = len(x)
    det = Fraction(1)
    for i in range(n):
        pivot_row = next((j for j in range(i, n) if x[j][i] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != i:
            x[i], x[pivot_row] = x[pivot_row], x[i]
            det = -det
        det = det * x[i][i]
        for j in range(i + 1, n):
            if x[j][i] != 0:
                factor = x[j][i] / x[i][i]
                x[j] = [a - factor * b for a, b in zip(x[j], x[i])]
    return det


def leading_minors(matrix: Sequence[Sequence[Number]]) -> List[Fraction]:
    """Returns the exact leading principal minors of a matrix, as the
    running products of the pivots of the elimination without pivoting.

    Args:
        matrix: The square matrix.

    Returns:
        The minors of orders 1 to n.
    """
    x = [[Fraction(v) for v in row] for row in matrix]
    n = len(x)
    minors: List[Fraction] = []
    det = Fraction(1)
    for i in range(n):
        if x[i][i] == 0:
            return minors + [
                exact_determinant([row[:k] for row in matrix[:k]])
                for k in range(i + 1, n + 1)]
        det = det * x[i][i]
        minors.append(det)
        for j in range(i + 1, n):
            if x[j][i] != 0:
                factor = x[j][i] / x[i][i]
                x[j] = [a - factor * b for a, b in zip(x[j], x[i])]
    return minors


def exact_product(a: Sequence[Sequence[Number]],
                  b: Sequence[Sequence[Number]]) -> ExactMatrix:
    """Returns the exact product of two rational matrices.

    Args:
        a: The left matrix.
        b: The right matrix.

    Returns:
        The product.
    """
    columns = list(zip(*b))
    return tuple(tuple(sum((Fraction(x) * Fraction(y)
                            for x, y in zip(row, column)), Fraction(0))
                       for column in columns) for row in a)


def _freeze(matrix) -> ExactMatrix:
    return tuple(tuple(Fraction(v) for v in row) for row in matrix)


class CartanMatrix:
    """The Cartan matrix of a simple Lie algebra, with its exact inverse.

    Args:
        family: The Lie algebra.
        entries: The integer entries.

    Raises:
        InvalidParameterError: When the entries are not a Cartan matrix.
    """

    def __init__(self, family: LieFamily, entries: Sequence[Sequence[int]]):
        self._family = family
        self._entries: Tuple[Tuple[int, ...], ...] \
            = tuple(tuple(int(v) for v in row) for row in entries)
        self._validate()
        self._inverse: ExactMatrix = exact_inverse(self._entries)

    def _validate(self) -> None:
        """Validates the entries.

        Raises:
            InvalidParameterError: When the entries are not a Cartan matrix.
        """
        n = self._family.rank
        if len(self._entries) != n or any(len(x) != n for x in self._entries):
            raise InvalidParameterError(
                F"{self._family} needs a {n} x {n} matrix")
        for i in range(n):
            if self._entries[i][i] != 2:
                raise InvalidParameterError(
                    F"diagonal entry {i + 1} of {self._family} is not 2")
            for j in range(n):
                if i == j:
                    continue
                if self._entries[i][j] not in (0, -1, -2, -3):
                    raise InvalidParameterError(
                        F"entry ({i + 1}, {j + 1}) of {self._family} is not"
                        F" in {{0, -1, -2, -3}}")
                if (self._entries[i][j] == 0) != (self._entries[j][i] == 0):
                    raise InvalidParameterError(
                        F"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1})"
                        F" of {self._family} break the zero pattern")
        if any(x <= 0 for x in leading_minors(self._entries)):
            raise InvalidParameterError(
                F"the matrix of {self._family} is not positive definite")

    @property
    def family(self) -> LieFamily:
        """The Lie algebra."""
        return self._family

    @property
    def rank(self) -> int:
        """The rank."""
        return self._family.rank

    @property
    def entries(self) -> Tuple[Tuple[int, ...], ...]:
        """The integer entries a_ij."""
        return self._entries

    @property
    def inverse(self) -> ExactMatrix:
        """The exact inverse a^ij."""
        return self._inverse

    def as_array(self) -> np.ndarray:
        """Returns the entries as a float array.

        Returns:
            The entries as a float array.
        """
        return np.array(self._entries, dtype=float)

    def leading_minors(self) -> List[Fraction]:
        """Returns the exact leading principal minors.

        Returns:
            The minors of orders 1 to n.
        """
        return leading_minors(self._entries)

    def edges(self) -> List[Tuple[int, int]]:
        """Returns the edges of the Dynkin diagram, as index pairs i < j.

        Returns:
            The edges of the Dynkin diagram.
        """
        n = self.rank
        return [(i, j) for i in range(n) for j in range(i + 1, n)
                if self._entries[i][j] != 0]

    def __repr__(self) -> str:
        return F"CartanMatrix({self._family}, {self._entries})"


def _simply_laced(rank: int, edges: Sequence[Tuple[int, int]]) \
        -> List[List[int]]:
    """Returns the Cartan matrix of a simply-laced Dynkin diagram.

    Args:
        rank: The number of nodes.
        edges: The edges, as pairs of one-based node numbers.

    Returns:
        The integer matrix.
    """
    a = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    for i, j in edges:
        a[i - 1][j - 1] = -1
        a[j - 1][i - 1] = -1
    return a


def _chain(rank: int) -> List[Tuple[int, int]]:
    return [(i, i + 1) for i in range(1, rank)]


def build_cartan(family: LieFamily) -> CartanMatrix:
    """Builds the Cartan matrix of a simple Lie algebra.  B, C, F and G follow
    the matrices printed in the uniqueness note; D and E follow the Bourbaki
    numbering of the Dynkin diagrams.

    Args:
        family: The Lie algebra.

    Returns:
        The Cartan matrix with its exact inverse.
    """
    n = family.rank
    letter = family.family
    if letter == "A":
        a = _simply_laced(n, _chain(n))
    elif letter == "B":
        a = _simply_laced(n, _chain(n))
        a[n - 2][n - 1] = -2
    elif letter == "C":
        a = _simply_laced(n, _chain(n))
        a[n - 1][n - 2] = -2
    elif letter == "D":
        a = _simply_laced(n, _chain(n - 1) + [(n - 2, n)])
    elif letter == "E":
        edges = [(1, 3), (3, 4), (4, 5), (2, 4)] \
            + [(i, i + 1) for i in range(5, n)]
        a = _simply_laced(n, edges)
    elif letter == "F":
        a = [[2, -1, 0, 0], [-1, 2, -2, 0], [0, -1, 2, -1], [0, 0, -1, 2]]
    else:
        a = [[2, -1], [-3, 2]]
    return CartanMatrix(family, a)


class SymmetricDecomposition:
    """The decomposition A = D A^s of a Cartan matrix, with D positive
    diagonal and A^s symmetric.

    Args:
        cartan: The Cartan matrix.
        d: The diagonal entries of D.
        a_s: The symmetric matrix A^s.
    """

    def __init__(self, cartan: CartanMatrix, d: Sequence[Fraction],
                 a_s: ExactMatrix):
        self._cartan = cartan
        self._d: Tuple[Fraction, ...] = tuple(Fraction(x) for x in d)
        self._a_s: ExactMatrix = _freeze(a_s)
        self._a_s_inverse: Optional[ExactMatrix] = None

    @property
    def cartan(self) -> CartanMatrix:
        """The Cartan matrix."""
        return self._cartan

    @property
    def family(self) -> LieFamily:
        """The Lie algebra."""
        return self._cartan.family

    @property
    def rank(self) -> int:
        """The rank."""
        return self._cartan.rank

    @property
    def d(self) -> Tuple[Fraction, ...]:
        """The diagonal entries d_i of D."""
        return self._d

    @property
    def a_s(self) -> ExactMatrix:
        """The symmetric matrix A^s."""
        return self._a_s

    @property
    def a_s_inverse(self) -> ExactMatrix:
        """The exact inverse of A^s."""
        if self._a_s_inverse is None:
            self._a_s_inverse = exact_inverse(self._a_s)
        return self._a_s_inverse

    def d_array(self) -> np.ndarray:
        """Returns d as a float array.

        Returns:
            d as a float array.
        """
        return np.array([float(x) for x in self._d])

    def a_s_array(self) -> np.ndarray:
        """Returns A^s as a float array.

        Returns:
            A^s as a float array.
        """
        return np.array([[float(x) for x in row] for row in self._a_s])

    def a_s_inverse_array(self) -> np.ndarray:
        """Returns the inverse of A^s as a float array.

        Returns:
            The inverse of A^s as a float array.
        """
        return np.array([[float(x) for x in row]
                         for row in self.a_s_inverse])

    def scaled_parameters(self, lam: Sequence[float]) -> np.ndarray:
        """Returns the scaled parameters lambda_i^s = d_i lambda_i.

        Args:
            lam: The parameters lambda_i.

        Returns:
            The scaled parameters.
        """
        return self.d_array() * np.asarray(lam, dtype=float)

    def is_exact(self) -> bool:
        """Returns whether D A^s = A holds exactly and A^s is symmetric.

        Returns:
            True if the decomposition is exact, or False otherwise.
        """
        n = self.rank
        for i in range(n):
            for j in range(n):
                if self._d[i] * self._a_s[i][j] \
                        != self._cartan.entries[i][j]:
                    return False
                if self._a_s[i][j] != self._a_s[j][i]:
                    return False
        return True


def symmetric_decomposition(cartan: CartanMatrix) -> SymmetricDecomposition:
    """Decomposes a Cartan matrix as A = D A^s.  The entries of D are
    propagated along the Dynkin diagram with d_j = d_i a_ji / a_ij and then
    scaled so that the smallest is 1.

    Args:
        cartan: The Cartan matrix.

    Returns:
        The symmetric decomposition.

    Raises:
        CertificateError: When the exact check of the decomposition fails.
    """
    n = cartan.rank
    a = cartan.entries
    d: List[Optional[Fraction]] = [None] * n
    d[0] = Fraction(1)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in range(n):
            if j != i and a[i][j] != 0 and d[j] is None:
                d[j] = d[i] * Fraction(a[j][i], a[i][j])
                queue.append(j)
    smallest = min(d)
    d = [x / smallest for x in d]
    a_s = [[Fraction(a[i][j]) / d[i] for j in range(n)] for i in range(n)]
    decomposition = SymmetricDecomposition(cartan, d, a_s)
    if not decomposition.is_exact():
        raise CertificateError(
            F"the decomposition of {cartan.family} is not exact",
            rank=n)
    return decomposition


class SpectrumReport:
    """The spectrum of A^s.

    Args:
        family: The Lie algebra.
        eigenvalues: The eigenvalues.
        method: The method that computed them.
    """

    def __init__(self, family: LieFamily, eigenvalues: Sequence[float],
                 method: str):
        self.family = family
        self.eigenvalues: Tuple[float, ...] \
            = tuple(sorted(float(x) for x in eigenvalues))
        self.method = method

    @property
    def rho(self) -> float:
        """The spectral radius."""
        return max(abs(x) for x in self.eigenvalues)

    def as_dict(self) -> Dict[str, object]:
        return {"family": self.family.family, "rank": self.family.rank,
                "rho": self.rho, "eigenvalues": list(self.eigenvalues),
                "method": self.method}


def _closed_form_eigenvalues(family: LieFamily) -> List[float]:
    """Returns the eigenvalues 4 sin^2(m pi/2h) of a simply-laced Cartan
    matrix, where m runs over the exponents and h is the Coxeter number.

    Args:
        family: A simply-laced Lie algebra.

    Returns:
        The eigenvalues.
    """
    n = family.rank
    if family.family == "A":
        h = n + 1
        exponents = list(range(1, n + 1))
    elif family.family == "D":
        h = 2 * n - 2
        exponents = list(range(1, 2 * n - 2, 2)) + [n - 1]
    else:
        h = _E_COXETER[n]
        exponents = list(_E_EXPONENTS[n])
    return [4 * math.sin(m * math.pi / (2 * h)) ** 2 for m in exponents]


def _dense_eigenvalues(decomposition: SymmetricDecomposition) -> List[float]:
    """Returns the eigenvalues of A^s by the dense symmetric eigensolver,
    with the residual check.

    Args:
        decomposition: The symmetric decomposition.

    Returns:
        The eigenvalues.

    Raises:
        EigenSolverError: When the eigensolver fails or the residual check
            fails.
    """
    a_s = decomposition.a_s_array()
    try:
        values, vectors = linalg.eigh(a_s)
    except linalg.LinAlgError as e:
        raise EigenSolverError(
            F"eigensolver failed on {decomposition.family}: {e}") from e
    for k in range(len(values)):
        v = vectors[:, k]
        residual = np.linalg.norm(a_s @ v - values[k] * v)
        if residual > EIGEN_RESIDUAL_TOLERANCE * np.linalg.norm(v):
            raise EigenSolverError(
                F"eigenpair {k + 1} of {decomposition.family} has residual"
                F" {residual:.3e}")
    return list(values)


def trailing_minors(family: str, rank: int, lam: Number) -> List[Number]:
    """Returns the trailing principal minors X_0 = 1, X_1, ..., X_n of
    lambda E_n - A^s for the tridiagonal families.  X_1 and X_2 are the
    determinants of the trailing 1 x 1 and 2 x 2 blocks; the rest follow
    the constant-coefficient recursion of the family:

    - A: X_k = (lambda - 2) X_{k-1} - X_{k-2}
    - B: X_k = (lambda - 1) X_{k-1} - 1/4 X_{k-2}
    - C: X_k = (lambda - 2) X_{k-1} - X_{k-2}

    The arithmetic is exact when lambda is a Fraction.

    Args:
        family: The family letter, A, B or C.
        rank: The rank n.
        lam: The evaluation point lambda.

    Returns:
        The minors X_0 to X_n.

    Raises:
        InvalidParameterError: When the family is not tridiagonal or the rank
            is invalid.
    """
    family = family.upper()
    if family not in "ABC" or len(family) != 1:
        raise InvalidParameterError(
            F"no characteristic recursion for family {family!r}")
    if not LieFamily.is_valid(family, rank):
        raise InvalidParameterError(F"{family}{rank} is not a simple Lie"
                                    F" algebra")
    if family == "B":
        x1 = lam - 2
        x2 = (lam - 1) * (lam - 2) - 1
        diagonal, coupling = lam - 1, Fraction(1, 4)
    elif family == "C":
        x1 = lam - 1
        x2 = (lam - 2) * (lam - 1) - 1
        diagonal, coupling = lam - 2, 1
    else:
        x1 = lam - 2
        x2 = (lam - 2) ** 2 - 1
        diagonal, coupling = lam - 2, 1
    minors: List[Number] = [1, x1]
    if rank >= 2:
        minors.append(x2)
    for _ in range(3, rank + 1):
        minors.append(diagonal * minors[-1] - coupling * minors[-2])
    if not isinstance(lam, Fraction):
        return [float(x) for x in minors]
    return minors


def char_recursion(family: str, rank: int, lam: Number) -> Number:
    """Returns det(lambda E_n - A^s) by the characteristic recursion.

    Args:
        family: The family letter, A, B or C.
        rank: The rank n.
        lam: The evaluation point lambda.

    Returns:
        X_n.
    """
    return trailing_minors(family, rank, lam)[-1]


def recursion_root(family: str, lam: float) -> float:
    """Returns the root a of the recursion factorization
    X_n - a X_{n-1} = (lambda - c - a)(X_{n-1} - a X_{n-2}).

    Args:
        family: B (lambda >= 2) or C (lambda >= 4).
        lam: The evaluation point lambda.

    Returns:
        The root a.

    Raises:
        InvalidParameterError: When lambda is outside the range where the
            root is real.
    """
    family = family.upper()
    if family == "B":
        if lam < 2:
            raise InvalidParameterError("the B root needs lambda >= 2")
        return (lam - 1 - math.sqrt((lam - 1) ** 2 - 1)) / 2
    if family == "C":
        if lam < 4:
            raise InvalidParameterError("the C root needs lambda >= 4")
        return (lam - 2 - math.sqrt(lam * lam - 4 * lam)) / 2
    raise InvalidParameterError(F"no recursion root for family {family!r}")


def sturm_count(family: str, rank: int, lam: float) -> int:
    """Returns the number of eigenvalues of A^s greater than lambda, as the
    number of sign changes of the trailing minors X_0, ..., X_n.

    Args:
        family: The family letter, A, B or C.
        rank: The rank.
        lam: The evaluation point.

    Returns:
        The number of eigenvalues greater than lambda.
    """
    changes = 0
    previous = 1.0
    for x in trailing_minors(family, rank, lam)[1:]:
        sign = x if x != 0 else -previous
        if (sign < 0) != (previous < 0):
            changes = changes + 1
        previous = sign
    return changes


def _recursion_eigenvalues(family: LieFamily) -> List[float]:
    """Returns all the eigenvalues of a tridiagonal A^s by bisection on the
    Sturm count.  All eigenvalues lie in [0, 4] by Gershgorin.

    Args:
        family: An A, B or C algebra.

    Returns:
        The eigenvalues in increasing order.
    """
    values = []
    n = family.rank
    for k in range(n):
        # The (k+1)-th smallest eigenvalue is the smallest lambda that
        # leaves at most n - k - 1 eigenvalues above it.
        low, high = 0.0, 4.0 + 1e-9
        while high - low > 1e-15 * max(1.0, high):
            middle = (low + high) / 2
            if middle in (low, high):
                break
            if sturm_count(family.family, n, middle) > n - k - 1:
                low = middle
            else:
                high = middle
        values.append((low + high) / 2)
    return values


def spectral_radius(decomposition: SymmetricDecomposition,
                    method: Optional[str] = None) -> SpectrumReport:
    """Computes the spectrum and the spectral radius of A^s.

    Args:
        decomposition: The symmetric decomposition.
        method: closed_form (A, D, E only), dense_eig, or recursion_bound
            (A, B, C only).  The default is closed_form for the simply-laced
            families and dense_eig otherwise.

    Returns:
        The spectrum report.

    Raises:
        InvalidParameterError: When the method does not apply to the family.
        EigenSolverError: When the eigensolver fails.
    """
    family = decomposition.family
    if method is None:
        method = CLOSED_FORM if family.is_symmetric else DENSE_EIG
    if method == CLOSED_FORM:
        if not family.is_symmetric:
            raise InvalidParameterError(
                F"no closed form spectrum for {family}")
        values = _closed_form_eigenvalues(family)
    elif method == DENSE_EIG:
        values = _dense_eigenvalues(decomposition)
    elif method == RECURSION_BOUND:
        if family.family not in "ABC":
            raise InvalidParameterError(
                F"no characteristic recursion for {family}")
        values = _recursion_eigenvalues(family)
    else:
        raise InvalidParameterError(F"unknown spectrum method {method!r}")
    report = SpectrumReport(family, values, method)
    if min(report.eigenvalues) <= 0:
        raise CertificateError(F"A^s of {family} is not positive definite",
                               rank=family.rank)
    logger.debug("rho(%s^s) = %r by %s", family, report.rho, method)
    return report


def similarity_radii(decomposition: SymmetricDecomposition) \
        -> Tuple[float, float]:
    """Returns rho(A) from the eigenvalues of the non-symmetric A and rho of
    its symmetric similar matrix D^{1/2} A^s D^{1/2}.

    Args:
        decomposition: The symmetric decomposition.

    Returns:
        The two spectral radii, which agree.
    """
    a = decomposition.cartan.as_array()
    rho_a = float(np.max(np.abs(np.linalg.eigvals(a))))
    root = np.sqrt(decomposition.d_array())
    similar = root[:, None] * decomposition.a_s_array() * root[None, :]
    rho_similar = float(np.max(np.abs(linalg.eigvalsh(similar))))
    return rho_a, rho_similar


class ThresholdReport:
    """The uniqueness thresholds of a Lie algebra.

    Args:
        family: The Lie algebra.
        rho: The spectral radius of A^s.
        d: The diagonal entries of D.
    """
    SAFE_BOUND = 2 * math.pi

    def __init__(self, family: LieFamily, rho: float,
                 d: Sequence[Fraction]):
        self.family = family
        self.rho = rho
        self.d: Tuple[Fraction, ...] = tuple(d)
        self.lambda_s_max = 8 * math.pi / rho
        self.lambda_max: Tuple[float, ...] \
            = tuple(self.lambda_s_max / float(x) for x in self.d)
        self.safe_bound = self.SAFE_BOUND

    def at_fraction(self, s: float) -> List[float]:
        """Returns the parameters at a fraction of the thresholds.

        Args:
            s: The fraction.

        Returns:
            The parameters s lambda_max.
        """
        return [s * x for x in self.lambda_max]

    def contains(self, lam: Sequence[float], slack: float = 1e-12) -> bool:
        """Returns whether parameters lie in the uniqueness box.

        Args:
            lam: The parameters lambda_i.
            slack: The relative slack.

        Returns:
            True if every lambda_i is within its threshold.
        """
        return all(x <= m * (1 + slack) for x, m in zip(lam, self.lambda_max))

    def as_dict(self) -> Dict[str, object]:
        return {"family": self.family.family, "rank": self.family.rank,
                "rho": self.rho, "lambda_s_max": self.lambda_s_max,
                "lambda_max": list(self.lambda_max),
                "d": [str(x) for x in self.d],
                "safe_bound": self.safe_bound}


def uniqueness_thresholds(family: LieFamily) -> ThresholdReport:
    """Returns the uniqueness thresholds lambda_i^s <= 8 pi/rho(A^s).

    Args:
        family: The Lie algebra.

    Returns:
        The threshold report.
    """
    decomposition = symmetric_decomposition(build_cartan(family))
    return ThresholdReport(family, spectral_radius(decomposition).rho,
                           decomposition.d)


class RadiusBoundsReport:
    """The verified radius bounds of a family.

    Args:
        family: The family letter.

    Attributes:
        rows: The (rank, rho, method) triples.
        recursion_signs: The exact sign checks (rank, upper, lower) of the B
            and C families: X_n(3) > 0 and X_n(2) < 0 for B, X_n(4) >= 0
            and an eigenvalue above 2 by the exact Sturm count for C.
    """

    def __init__(self, family: str):
        self.family = family
        self.rows: List[Tuple[int, float, str]] = []
        self.recursion_signs: List[Tuple[int, bool, bool]] = []

    def as_dicts(self) -> List[Dict[str, object]]:
        return [{"family": self.family, "rank": rank, "rho": rho,
                 "method": method} for rank, rho, method in self.rows]


def verify_radius_bounds(family: str, max_rank: int) -> RadiusBoundsReport:
    """Verifies 2 <= rho(A^s) <= 4 for every rank of a family up to a
    maximum rank, and the sharper family bounds 2 < rho(B_n^s) < 3 and
    2 < rho(C_n^s) <= 4.  For B and C the signs of the characteristic
    recursion are checked exactly as well.

    Args:
        family: The family letter.
        max_rank: The maximum rank.

    Returns:
        The report.

    Raises:
        InvalidParameterError: When the maximum rank is below 2.
        CertificateError: When a bound is violated, with the offending rank.
    """
    family = family.upper()
    if max_rank < 2:
        raise InvalidParameterError("the maximum rank must be at least 2")
    report = RadiusBoundsReport(family)
    previous: Optional[float] = None
    for rank in LieFamily.valid_ranks(family, max_rank):
        decomposition = symmetric_decomposition(
            build_cartan(LieFamily(family, rank)))
        spectrum = spectral_radius(decomposition)
        rho = spectrum.rho
        report.rows.append((rank, rho, spectrum.method))
        if not 2 - 1e-12 <= rho <= 4:
            raise CertificateError(
                F"rho({family}{rank}^s) = {rho!r} is outside [2, 4]",
                rank=rank)
        if family == "B" and not 2 < rho < 3:
            raise CertificateError(
                F"rho(B{rank}^s) = {rho!r} is outside (2, 3)", rank=rank)
        if family == "C" and not 2 < rho <= 4:
            raise CertificateError(
                F"rho(C{rank}^s) = {rho!r} is outside (2, 4]", rank=rank)
        if family == "A" and previous is not None and rho <= previous:
            raise CertificateError(
                F"rho(A{rank}) does not increase with the rank", rank=rank)
        if family in "BC":
            upper = Fraction(3) if family == "B" else Fraction(4)
            above = char_recursion(family, rank, upper)
            upper_ok = above > 0 if family == "B" else above >= 0
            if family == "B":
                lower_ok = char_recursion(family, rank, Fraction(2)) < 0
            else:
                lower_ok = sturm_count(family, rank, Fraction(2)) > 0
            report.recursion_signs.append((rank, upper_ok, lower_ok))
            if not upper_ok or not lower_ok:
                raise CertificateError(
                    F"the characteristic recursion of {family}{rank}^s has"
                    F" the wrong sign", rank=rank)
        previous = rho
    logger.info("verified the radius bounds of %s up to rank %d",
                family, max_rank)
    return report
