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

"""The finite-difference discretization of the unit square, with the
discrete Green's functions, the singular weights and the quadrature.

The interior nodes are numbered row by row: the node (i, j) at
((i + 1)h, (j + 1)h) has the index j N + i.

"""
import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from lab_core.utils import atomic_write, columns_text
from .utils import InvalidParameterError, SolverError, EigenSolverError

logger = logging.getLogger(__name__)

MIN_NODES = 7
POISSON_TOLERANCE = 1e-10
UNIT_SQUARE = "unit_square"


class DomainGrid:
    """The uniform grid of interior nodes of the unit square.

    Args:
        n: The number of interior nodes per axis.

    Raises:
        InvalidParameterError: When there are fewer than 7 nodes per axis.
    """

    def __init__(self, n: int):
        if isinstance(n, bool) or int(n) != n or n < MIN_NODES:
            raise InvalidParameterError(
                F"the grid needs at least {MIN_NODES} interior nodes per"
                F" axis (N = {n!r})")
        self.domain = UNIT_SQUARE
        self._n = int(n)
        self._h = 1.0 / (self._n + 1)
        axis = (np.arange(self._n) + 1) * self._h
        x, y = np.meshgrid(axis, axis)
        self._x = x.ravel()
        self._y = y.ravel()
        self._laplacian: Optional[sparse.csc_matrix] = None
        self._factor = None

    @property
    def n(self) -> int:
        """The number of interior nodes per axis."""
        return self._n

    @property
    def h(self) -> float:
        """The spacing."""
        return self._h

    @property
    def size(self) -> int:
        """The number of interior nodes."""
        return self._n * self._n

    @property
    def x(self) -> np.ndarray:
        """The x coordinates of the interior nodes."""
        return self._x

    @property
    def y(self) -> np.ndarray:
        """The y coordinates of the interior nodes."""
        return self._y

    @property
    def laplacian(self) -> sparse.csc_matrix:
        """The 5-point matrix of -Delta_h with the Dirichlet boundary."""
        if self._laplacian is None:
            t = sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1],
                             shape=(self._n, self._n))
            eye = sparse.identity(self._n)
            self._laplacian = ((sparse.kron(eye, t) + sparse.kron(t, eye))
                               / self._h ** 2).tocsc()
        return self._laplacian

    def boundary_adjacent(self) -> np.ndarray:
        """Returns the number of boundary neighbors of each interior node.

        Returns:
            0 for the inner nodes, 1 along the edges and 2 at the corners.
        """
        count = np.zeros((self._n, self._n))
        count[0, :] += 1
        count[-1, :] += 1
        count[:, 0] += 1
        count[:, -1] += 1
        return count.ravel()

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solves -Delta_h u = rhs with the cached sparse LU factorization.

        Args:
            rhs: One right-hand side, or one per column.

        Returns:
            The solution.

        Raises:
            SolverError: When the factorization breaks down.
        """
        if self._factor is None:
            try:
                self._factor = sparse_linalg.splu(self.laplacian)
            except RuntimeError as e:
                raise SolverError(
                    F"the Laplacian factorization failed: {e}") from e
        return self._factor.solve(np.asarray(rhs, dtype=float))

    def node_index(self, x: float, y: float) -> int:
        """Returns the index of the interior node nearest to a point.

        Args:
            x: The x coordinate.
            y: The y coordinate.

        Returns:
            The node index.

        Raises:
            InvalidParameterError: When the point is not strictly inside the
                square, or is nearer to the boundary than to every interior
                node.
        """
        if not (0 < x < 1 and 0 < y < 1):
            raise InvalidParameterError(
                F"the point ({x!r}, {y!r}) is not inside the unit square")
        i = int(round(x / self._h)) - 1
        j = int(round(y / self._h)) - 1
        if not (0 <= i < self._n and 0 <= j < self._n):
            raise InvalidParameterError(
                F"the point ({x!r}, {y!r}) snaps to the boundary")
        return j * self._n + i

    def node_point(self, index: int) -> Tuple[float, float]:
        """Returns the coordinates of an interior node.

        Args:
            index: The node index.

        Returns:
            The coordinates (x, y).
        """
        return float(self._x[index]), float(self._y[index])

    def __repr__(self) -> str:
        return F"DomainGrid(N={self._n})"


def build_grid(n: int) -> DomainGrid:
    """Builds the uniform interior grid of the unit square.

    Args:
        n: The number of interior nodes per axis, at least 7.

    Returns:
        The grid.
    """
    return DomainGrid(n)


class GridField:
    """A field on the interior nodes, with its boundary value.  The values
    are read-only once the field is built.

    Args:
        grid: The grid.
        values: The values at the interior nodes.
        boundary_constant: The value on the boundary.

    Raises:
        InvalidParameterError: When the values do not match the grid or are
            not finite.
    """

    def __init__(self, grid: DomainGrid, values: Union[np.ndarray, float],
                 boundary_constant: float = 0.0):
        try:
            values = np.array(np.broadcast_to(
                np.asarray(values, dtype=float), (grid.size,)))
        except ValueError as e:
            raise InvalidParameterError(
                F"the field does not match the grid: {e}") from e
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("the field has non-finite values")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.boundary_constant = float(boundary_constant)

    def __add__(self, other: "GridField") -> "GridField":
        return GridField(self.grid, self.values + other.values,
                         self.boundary_constant + other.boundary_constant)

    def __sub__(self, other: "GridField") -> "GridField":
        return GridField(self.grid, self.values - other.values,
                         self.boundary_constant - other.boundary_constant)

    def scaled(self, factor: float) -> "GridField":
        """Returns the field multiplied by a factor.

        Args:
            factor: The factor.

        Returns:
            The scaled field.
        """
        return GridField(self.grid, factor * self.values,
                         factor * self.boundary_constant)

    def sup_norm(self) -> float:
        """Returns the maximum absolute value, the boundary included.

        Returns:
            The sup norm.
        """
        return max(float(np.max(np.abs(self.values))),
                   abs(self.boundary_constant))


class SingularSource:
    """A singular source of a weight, snapped to a grid node.

    Args:
        grid: The grid.
        x: The x coordinate of the singular point.
        y: The y coordinate of the singular point.
        alpha: The strength, positive.

    Raises:
        InvalidParameterError: When alpha is not positive or the point is
            not inside the square.
    """

    def __init__(self, grid: DomainGrid, x: float, y: float, alpha: float):
        if not alpha > 0 or not math.isfinite(alpha):
            raise InvalidParameterError(
                F"the strength of a singular source must be positive"
                F" (alpha = {alpha!r})")
        self.node = grid.node_index(x, y)
        self.point = grid.node_point(self.node)
        self.alpha = float(alpha)

    def as_dict(self) -> dict:
        return {"x": self.point[0], "y": self.point[1], "alpha": self.alpha}


class WeightField:
    """The weight h = e^sigma of a component.

    Args:
        f: The continuous part of sigma.
        sources: The singular sources.
        values: The weight values at the interior nodes.
    """

    def __init__(self, f: GridField, sources: Sequence[SingularSource],
                 values: np.ndarray):
        self.f = f
        self.sources: Tuple[SingularSource, ...] = tuple(sources)
        self.h_values = GridField(f.grid, values)

    @property
    def grid(self) -> DomainGrid:
        """The grid."""
        return self.f.grid

    @property
    def values(self) -> np.ndarray:
        """The weight values at the interior nodes."""
        return self.h_values.values

    def source_nodes(self) -> List[int]:
        """Returns the nodes of the singular sources.

        Returns:
            The node indices.
        """
        return [x.node for x in self.sources]


def laplacian_apply(grid: DomainGrid, field: GridField) -> GridField:
    """Applies -Delta_h to a field with the zero boundary value.

    Args:
        grid: The grid.
        field: The field.

    Returns:
        -Delta_h of the field.
    """
    return GridField(grid, grid.laplacian @ field.values)


def poisson_solve(grid: DomainGrid, rhs: GridField) -> GridField:
    """Solves -Delta_h u = rhs with u = 0 on the boundary.

    Args:
        grid: The grid.
        rhs: The right-hand side.

    Returns:
        The solution.

    Raises:
        SolverError: When the solution misses the residual tolerance.
    """
    u = grid.solve(rhs.values)
    scale = float(np.max(np.abs(rhs.values)))
    residual = float(np.max(np.abs(grid.laplacian @ u - rhs.values)))
    if residual > POISSON_TOLERANCE * scale:
        raise SolverError(F"the Poisson solve missed the tolerance"
                          F" (residual = {residual:.3e})", last_iterate=u)
    return GridField(grid, u)


def unit_mass(grid: DomainGrid, node: int) -> np.ndarray:
    """Returns the discrete delta at a node, 1/h^2 there and 0 elsewhere.

    Args:
        grid: The grid.
        node: The node index.

    Returns:
        The discrete delta.
    """
    delta = np.zeros(grid.size)
    delta[node] = 1.0 / grid.h ** 2
    return delta


def greens_function(grid: DomainGrid, node: int) -> GridField:
    """Returns the discrete Green's function with the pole at a node.

    Args:
        grid: The grid.
        node: The node index of the pole.

    Returns:
        The solution G of -Delta_h G = delta, with G = 0 on the boundary.

    Raises:
        InvalidParameterError: When the node is not an interior node.
    """
    if isinstance(node, bool) or not 0 <= node < grid.size:
        raise InvalidParameterError(F"{node!r} is not an interior node")
    return poisson_solve(grid, GridField(grid, unit_mass(grid, node)))


def greens_functions(grid: DomainGrid, nodes: Sequence[int]) \
        -> List[GridField]:
    """Returns the discrete Green's functions of several poles, in one
    factorized solve with one column per pole.

    Args:
        grid: The grid.
        nodes: The node indices of the poles.

    Returns:
        The Green's functions, in the order of the nodes.
    """
    if len(nodes) == 0:
        return []
    for node in nodes:
        if not 0 <= node < grid.size:
            raise InvalidParameterError(F"{node!r} is not an interior node")
    deltas = np.column_stack([unit_mass(grid, x) for x in nodes])
    solutions = grid.solve(deltas).reshape(grid.size, len(nodes))
    return [GridField(grid, solutions[:, k]) for k in range(len(nodes))]


def _sinh_ratio(a: float, b: float, c: float) -> float:
    """Returns sinh(a) sinh(b)/sinh(c) for 0 <= a + b <= c without
    overflow."""
    return math.exp(a + b - c) * -math.expm1(-2 * a) * -math.expm1(-2 * b) \
        / (2 * -math.expm1(-2 * c))


def greens_function_reference(x: float, y: float, px: float, py: float,
                              terms: int = 400) -> float:
    """Returns the Green's function of the unit square by its sine series,
    the series running along the axis where the two points are farther
    apart.

    Args:
        x: The x coordinate of the evaluation point.
        y: The y coordinate of the evaluation point.
        px: The x coordinate of the pole.
        py: The y coordinate of the pole.
        terms: The number of terms.

    Returns:
        G((x, y), (px, py)).
    """
    if abs(y - py) < abs(x - px):
        x, y, px, py = y, x, py, px
    low, high = min(y, py), max(y, py)
    total = 0.0
    for m in range(1, terms + 1):
        k = m * math.pi
        total += 2 * math.sin(k * x) * math.sin(k * px) \
            * _sinh_ratio(k * low, k * (1 - high), k) / k
    return total


def zero_f(grid: DomainGrid) -> GridField:
    """Returns the preset f = 0.

    Args:
        grid: The grid.

    Returns:
        The zero field.
    """
    return GridField(grid, 0.0)


def quadratic_f(grid: DomainGrid, coefficient: float,
                center: Tuple[float, float] = (0.5, 0.5)) -> GridField:
    """Returns the preset f = c |x - x0|^2, subharmonic for c >= 0.

    Args:
        grid: The grid.
        coefficient: The coefficient c.
        center: The center x0.

    Returns:
        The quadratic field.
    """
    return GridField(grid, coefficient * ((grid.x - center[0]) ** 2
                                          + (grid.y - center[1]) ** 2))


def assemble_weight(grid: DomainGrid, f: GridField,
                    sources: Sequence[SingularSource]) -> WeightField:
    """Assembles the weight h = exp(f - 4 pi sum alpha_j G(., p_j)), with h
    set to its limit 0 at the source nodes.

    Args:
        grid: The grid.
        f: The continuous part f.  Its subharmonicity is not checked.
        sources: The singular sources.

    Returns:
        The weight.

    Raises:
        InvalidParameterError: When a source strength is not positive.
    """
    for source in sources:
        if not source.alpha > 0:
            raise InvalidParameterError(
                F"the strength of a singular source must be positive"
                F" (alpha = {source.alpha!r})")
    sigma = np.array(f.values)
    green = greens_functions(grid, [x.node for x in sources])
    for source, g in zip(sources, green):
        sigma -= 4 * math.pi * source.alpha * g.values
    values = np.exp(sigma)
    for source in sources:
        values[source.node] = 0.0
    return WeightField(f, sources, values)


def integrate(grid: DomainGrid, field: Union[GridField, np.ndarray]) \
        -> float:
    """Integrates a field over the square by sum h^2 value.

    Args:
        grid: The grid.
        field: The field, or its interior values.

    Returns:
        The integral.
    """
    values = field.values if isinstance(field, GridField) else field
    return float(grid.h ** 2 * np.sum(values))


def gradient_form(grid: DomainGrid, phi: Union[GridField, np.ndarray],
                  psi: Union[GridField, np.ndarray]) -> float:
    """Returns the discrete integral of grad phi . grad psi, as
    h^2 phi^T (-Delta_h) psi.

    Args:
        grid: The grid.
        phi: The first field.
        psi: The second field.

    Returns:
        The discrete gradient form.
    """
    phi = phi.values if isinstance(phi, GridField) else phi
    psi = psi.values if isinstance(psi, GridField) else psi
    return float(grid.h ** 2 * (phi @ (grid.laplacian @ psi)))


def dirichlet_eigenvalues(grid: DomainGrid, k: int = 1) -> np.ndarray:
    """Returns the smallest Dirichlet eigenvalues of -Delta_h, by
    shift-invert about 0.

    Args:
        grid: The grid.
        k: The number of eigenvalues.

    Returns:
        The eigenvalues in increasing order.

    Raises:
        EigenSolverError: When the eigensolver does not converge.
    """
    v0 = np.ones(grid.size)
    try:
        values = sparse_linalg.eigsh(grid.laplacian, k=k, sigma=0.0,
                                     which="LM", v0=v0,
                                     return_eigenvectors=False)
    except sparse_linalg.ArpackNoConvergence as e:
        raise EigenSolverError(
            F"the Dirichlet eigenvalues did not converge: {e}") from e
    return np.sort(values)


def dirichlet_eigenvalues_exact(grid: DomainGrid, k: int = 1) -> np.ndarray:
    """Returns the smallest Dirichlet eigenvalues of -Delta_h by the closed
    form 4/h^2 (sin^2(i pi h/2) + sin^2(j pi h/2)).

    Args:
        grid: The grid.
        k: The number of eigenvalues.

    Returns:
        The eigenvalues in increasing order.
    """
    s = (4 / grid.h ** 2) \
        * np.sin(np.arange(1, grid.n + 1) * math.pi * grid.h / 2) ** 2
    return np.sort(np.add.outer(s, s).ravel())[:k]


def write_field_cache(path: Union[str, Path], grid: DomainGrid,
                      field: GridField, **header) -> Path:
    """Writes a field to a cache file: a JSON header line with N and the
    given entries, and then the node values as little-endian 64-bit floats.

    Args:
        path: The cache path.
        grid: The grid.
        field: The field.
        **header: The other header entries.

    Returns:
        The cache path.
    """
    header = json.dumps({**header, "N": grid.n}, sort_keys=True)
    return atomic_write(path, header.encode("utf-8") + b"\n"
                        + field.values.astype("<f8").tobytes())


def write_green_cache(path: Union[str, Path], grid: DomainGrid,
                      source: SingularSource, green: GridField) -> Path:
    """Writes a Green's function to the cache file, with the header
    {N, p, alpha}.

    Args:
        path: The cache path.
        grid: The grid.
        source: The source at the pole.
        green: The Green's function.

    Returns:
        The cache path.
    """
    return write_field_cache(path, grid, green, p=list(source.point),
                             alpha=source.alpha)


def read_field_cache(path: Union[str, Path]) -> Tuple[dict, np.ndarray]:
    """Reads a cache file of a field.

    Args:
        path: The cache path.

    Returns:
        The header and the node values.

    Raises:
        InvalidParameterError: When the file is not a cache file of a
            matching size.
    """
    data = Path(path).read_bytes()
    end = data.find(b"\n")
    if end < 0:
        raise InvalidParameterError(F"{path} has no cache header")
    try:
        header = json.loads(data[:end].decode("utf-8"))
        n = int(header["N"])
    except (ValueError, KeyError, TypeError) as e:
        raise InvalidParameterError(
            F"{path} has a bad cache header: {e}") from e
    values = np.frombuffer(data[end + 1:], dtype="<f8")
    if values.size != n * n:
        raise InvalidParameterError(
            F"{path} holds {values.size} values instead of {n * n}")
    return header, values.astype(float)


def xyz_rows(grid: DomainGrid, field: GridField) \
        -> Iterable[Sequence[float]]:
    """Yields the (x, y, value) rows of a field, the boundary included, with
    an empty row between the scan lines.

    Args:
        grid: The grid.
        field: The field.

    Returns:
        The rows.
    """
    interior = field.values.reshape(grid.n, grid.n)
    full = np.full((grid.n + 2, grid.n + 2), field.boundary_constant)
    full[1:-1, 1:-1] = interior
    for j in range(grid.n + 2):
        for i in range(grid.n + 2):
            yield i * grid.h, j * grid.h, full[j, i]
        yield ()


def write_xyz(path: Union[str, Path], grid: DomainGrid, field: GridField,
              title: str = None) -> Path:
    """Writes a field as XYZ triplets for the surface plots.

    Args:
        path: The target path.
        grid: The grid.
        field: The field.
        title: The comment line, if any.

    Returns:
        The target path.
    """
    return atomic_write(path, columns_text(xyz_rows(grid, field), title))
