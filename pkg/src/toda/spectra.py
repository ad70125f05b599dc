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

"""The linearized eigenproblems of the Toda system and the non-degeneracy
certificate of its solutions.

Every problem here is a symmetric pencil K x = sigma B x with K positive
definite and B positive semi-definite, as B vanishes where the density
does.  It is solved as B x = theta K x for the largest theta, with
sigma = 1/theta.

"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from .cartan import SymmetricDecomposition, spectral_radius
from .discretization import DomainGrid, GridField, integrate
from .solver import TodaState
from .utils import CertificateError, EigenSolverError, \
    InvalidParameterError, get_setting

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"
REPORTED = "REPORTED"
MASS_TOLERANCE = 1e-10
MARGIN_TOLERANCE = 1e-8
CONSTRAINT_TOLERANCE = 1e-8
GAP_TOLERANCE = 1e-9
PENCIL_TOLERANCE = 1e-8
STEP_ONE_BOUND = 4 * math.pi
STEP_TWO_BOUND = 8 * math.pi
AUTO = "auto"
DENSE = "dense"
ITERATIVE = "iterative"

Operator = Union[np.ndarray, sparse.spmatrix, sparse_linalg.LinearOperator]


class DensityField:
    """The density V = lambda h e^u / int h e^u of a component.

    Args:
        grid: The grid.
        values: The density values.
        lam: The parameter lambda.
    """

    def __init__(self, grid: DomainGrid, values: np.ndarray, lam: float):
        self.V = GridField(grid, values)
        self.lam = float(lam)

    @property
    def grid(self) -> DomainGrid:
        """The grid."""
        return self.V.grid

    @property
    def values(self) -> np.ndarray:
        """The density values."""
        return self.V.values

    @property
    def is_active(self) -> bool:
        """Whether the density carries mass."""
        return self.lam > 0 and bool(np.any(self.V.values > 0))

    def scaled(self, factor: float) -> "DensityField":
        """Returns the density multiplied by a factor, as V^s = d V.

        Args:
            factor: The factor.

        Returns:
            The scaled density.
        """
        return DensityField(self.grid, factor * self.values,
                            factor * self.lam)


def assemble_densities(state: TodaState) -> List[DensityField]:
    """Assembles the densities V_i of a state.

    Args:
        state: The converged state.

    Returns:
        The densities, with int V_i = lambda_i.

    Raises:
        CertificateError: When a mass is not positive or a density misses
            its mass.
    """
    _, _, nonlinear = state.problem.densities(state.v)
    densities = []
    for i in range(state.problem.n):
        density = DensityField(state.grid, nonlinear[i], state.lam[i])
        mass = integrate(state.grid, density.V)
        if abs(mass - density.lam) > MASS_TOLERANCE * max(density.lam, 1.0):
            raise CertificateError(
                F"the density of component {i + 1} has the mass {mass!r}"
                F" instead of {density.lam!r}")
        densities.append(density)
    return densities


def _use_dense(grid: DomainGrid, method: str) -> bool:
    if method == AUTO:
        return grid.n <= get_setting("DENSE_EIGEN_LIMIT")
    if method not in (DENSE, ITERATIVE):
        raise InvalidParameterError(F"unknown eigen method {method!r}")
    return method == DENSE


def _to_dense(operator: Operator, size: int) -> np.ndarray:
    if isinstance(operator, np.ndarray):
        return operator
    if sparse.issparse(operator):
        return operator.toarray()
    return operator @ np.eye(size)


def _largest_pencil(b: Operator, k: sparse.spmatrix, count: int,
                    dense: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Returns the largest eigenvalues theta of B x = theta K x.

    Args:
        b: The symmetric positive semi-definite B.
        k: The sparse positive definite K.
        count: The number of eigenvalues.
        dense: Whether to use the dense solver.

    Returns:
        The eigenvalues in decreasing order and their K-orthonormal
        eigenvectors as columns.

    Raises:
        EigenSolverError: When the eigensolver fails or its result misses the
            residual check.
    """
    size = k.shape[0]
    if dense:
        try:
            values, vectors = linalg.eigh(
                _to_dense(b, size), k.toarray(),
                subset_by_index=[size - count, size - 1])
        except linalg.LinAlgError as e:
            raise EigenSolverError(F"the dense eigensolver failed: {e}") \
                from e
    else:
        try:
            factor = sparse_linalg.splu(sparse.csc_matrix(k))
        except RuntimeError as e:
            raise EigenSolverError(
                F"the stiffness factorization failed: {e}") from e
        k_inverse = sparse_linalg.LinearOperator(
            (size, size), matvec=factor.solve, dtype=float)
        b_operator = sparse_linalg.aslinearoperator(b)
        # A constant start lies in the kernel of the projected mass.
        start = np.random.default_rng(0).standard_normal(size)
        try:
            values, vectors = sparse_linalg.eigsh(
                b_operator, k=count, M=k, Minv=k_inverse, which="LA",
                v0=start)
        except sparse_linalg.ArpackNoConvergence as e:
            raise EigenSolverError(F"ARPACK did not converge: {e}") from e
        except sparse_linalg.ArpackError as e:
            raise EigenSolverError(F"ARPACK failed: {e}") from e
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    for i in range(count):
        x = vectors[:, i]
        bx = b @ x
        kx = k @ x
        residual = np.max(np.abs(bx - values[i] * kx))
        scale = np.max(np.abs(bx)) + abs(values[i]) * np.max(np.abs(kx))
        if residual > PENCIL_TOLERANCE * max(scale, np.finfo(float).tiny):
            raise EigenSolverError(
                F"eigenpair {i + 1} misses the residual check"
                F" ({residual:.3e})")
    return values, vectors


def _sigma(theta: float) -> float:
    return math.inf if theta <= 0 else 1.0 / theta


def _normalize(phi: np.ndarray, weight: np.ndarray, h: float) -> np.ndarray:
    mass = h ** 2 * float(np.sum(weight * phi ** 2))
    if mass <= 0:
        return phi
    phi = phi / math.sqrt(mass)
    index = int(np.argmax(np.abs(phi)))
    return phi if phi[index] >= 0 else -phi


def scalar_quotient(grid: DomainGrid, density: DensityField, rho: float,
                    phi: np.ndarray) -> float:
    """Returns the quotient (int |grad phi|^2 - rho int V phi^2)/int V phi^2
    of a function with the zero boundary value.

    Args:
        grid: The grid.
        density: The density V.
        rho: The spectral radius.
        phi: The function.

    Returns:
        The quotient.
    """
    stiffness = grid.h ** 2 * float(phi @ (grid.laplacian @ phi))
    mass = grid.h ** 2 * float(np.sum(density.values * phi ** 2))
    return (stiffness - rho * mass) / mass


class ScalarEigen:
    """An eigenvalue of a scalar linearized problem with its eigenfunction.

    Args:
        value: The eigenvalue.
        eigenfunction: The eigenfunction, normalized to int V phi^2 = 1.
        boundary_constant: The boundary value of the eigenfunction.
        constraint_residual: |int V phi|, for the constrained problem.
    """

    def __init__(self, value: float, eigenfunction: Optional[GridField],
                 boundary_constant: float = 0.0,
                 constraint_residual: float = 0.0):
        self.value = value
        self.eigenfunction = eigenfunction
        self.boundary_constant = boundary_constant
        self.constraint_residual = constraint_residual


def _require_active(density: DensityField, rho: float) -> None:
    if not density.is_active:
        raise InvalidParameterError("the density vanishes identically")
    if not rho > 0:
        raise InvalidParameterError(F"rho must be positive: {rho!r}")


def scalar_eigen_dirichlet(density: DensityField, rho: float,
                           method: str = AUTO) -> ScalarEigen:
    """Returns the first eigenvalue of -Delta phi - rho V phi = mu V phi with
    phi = 0 on the boundary.

    Args:
        density: The density V, not identically zero.
        rho: The spectral radius.
        method: auto, dense or iterative.

    Returns:
        mu_1 with its eigenfunction.

    Raises:
        InvalidParameterError: When V vanishes identically.
        EigenSolverError: When the eigensolver fails.
    """
    _require_active(density, rho)
    grid = density.grid
    k = (grid.h ** 2 * grid.laplacian).tocsc()
    b = sparse.diags(grid.h ** 2 * density.values)
    theta, vectors = _largest_pencil(b, k, 1,
                                     _use_dense(grid, method))
    phi = _normalize(vectors[:, 0], density.values, grid.h)
    return ScalarEigen(_sigma(theta[0]) - rho, GridField(grid, phi))


class _ProjectedMass(sparse_linalg.LinearOperator):
    """The mass diag(b) - b b^T/lambda of the functions phi = psi + c with
    the constant c fixed by int V phi = 0."""

    def __init__(self, b: np.ndarray):
        super().__init__(dtype=float, shape=(b.size, b.size))
        self._b = b
        self._total = float(np.sum(b))

    def _matvec(self, x):
        x = np.asarray(x).ravel()
        return self._b * x - self._b * (self._b @ x) / self._total

    def _matmat(self, x):
        return self._b[:, None] * x \
            - np.outer(self._b, self._b @ x) / self._total

    def _adjoint(self):
        return self


def _constrained_function(grid: DomainGrid, density: DensityField,
                          psi: np.ndarray) -> Tuple[np.ndarray, float]:
    """Returns the function phi = psi + c and c, with int V phi = 0."""
    weight = grid.h ** 2 * density.values
    c = -float(weight @ psi) / float(np.sum(weight))
    return psi + c, c


def scalar_eigen_constrained(density: DensityField, rho: float,
                             method: str = AUTO) -> ScalarEigen:
    """Returns the first eigenvalue of -Delta phi - rho V phi = mu V phi with
    phi equal to a free constant c on the boundary and int V phi = 0.  The
    constant is eliminated by the constraint, phi = psi + c with
    c = -int V psi/int V.

    Args:
        density: The density V, not identically zero.
        rho: The spectral radius.
        method: auto, dense or iterative.

    Returns:
        mu_2 with its eigenfunction, its boundary constant and its
        constraint residual.

    Raises:
        InvalidParameterError: When V vanishes identically.
        EigenSolverError: When the eigensolver fails.
        CertificateError: When the eigenfunction misses the constraint.
    """
    _require_active(density, rho)
    grid = density.grid
    k = (grid.h ** 2 * grid.laplacian).tocsc()
    b = _ProjectedMass(grid.h ** 2 * density.values)
    theta, vectors = _largest_pencil(b, k, 1,
                                     _use_dense(grid, method))
    phi, c = _constrained_function(grid, density, vectors[:, 0])
    scale = math.sqrt(grid.h ** 2 * float(np.sum(density.values * phi ** 2)))
    if scale > 0:
        phi, c = phi / scale, c / scale
    residual = abs(integrate(grid, density.values * phi))
    limit = CONSTRAINT_TOLERANCE * density.lam \
        * max(float(np.max(np.abs(phi))), abs(c))
    if residual > limit:
        raise CertificateError(
            F"the constrained eigenfunction misses its constraint"
            F" ({residual:.3e})")
    return ScalarEigen(_sigma(theta[0]) - rho,
                       GridField(grid, phi, boundary_constant=c),
                       boundary_constant=c, constraint_residual=residual)


def scalar_eigen_free_boundary(density: DensityField, rho: float,
                               method: str = AUTO) -> ScalarEigen:
    """Returns the minimum of (int |grad phi|^2 - rho int V phi^2)/
    int V phi^2 over phi = psi + c with a free boundary constant c and no
    integral constraint.  Its space contains that of mu_2, so it is never
    above mu_2.  The constants are admissible and the gradient term is
    nonnegative, so the minimum is identically -rho, attained by the
    constants.

    Args:
        density: The density V, not identically zero.
        rho: The spectral radius.
        method: auto, dense or iterative.

    Returns:
        The minimum with its minimizer.
    """
    _require_active(density, rho)
    grid = density.grid
    size = grid.size
    b = grid.h ** 2 * density.values
    # The unknowns are (psi, c); the mass is int V (psi + c)^2.
    mass = sparse.bmat([[sparse.diags(b), sparse.csc_matrix(b[:, None])],
                        [sparse.csr_matrix(b[None, :]),
                         sparse.csr_matrix([[float(np.sum(b))]])]],
                       format="csc")
    stiffness = sparse.bmat([[grid.h ** 2 * grid.laplacian, None],
                             [None, sparse.csr_matrix((1, 1))]],
                            format="csc")
    # The stiffness is singular along the constants; K + B is not.
    theta, vectors = _largest_pencil(mass, (stiffness + mass).tocsc(), 1,
                                     _use_dense(grid, method))
    psi, c = vectors[:size, 0], float(vectors[size, 0])
    return ScalarEigen(_sigma(theta[0]) - 1 - rho,
                       GridField(grid, psi + c, boundary_constant=c),
                       boundary_constant=c)


class CoupledEigen:
    """The minimum of the coupled quadratic form with its minimizer.

    Args:
        value: The minimum.
        eigenfunctions: The components of the minimizer.
        active: The indices of the components that carry mass.
    """

    def __init__(self, value: float,
                 eigenfunctions: Optional[List[GridField]],
                 active: List[int]):
        self.value = value
        self.eigenfunctions = eigenfunctions
        self.active = active


DIRICHLET = "dirichlet"
CONSTANT = "constant"


def coupled_form_min(densities: Sequence[DensityField],
                     decomposition: SymmetricDecomposition,
                     boundary: str = DIRICHLET,
                     method: str = AUTO) -> CoupledEigen:
    """Returns the minimum of
    Q(phi) = sum (a^s)^ij int grad phi_i . grad phi_j - sum int V_i phi_i^2
    against B(phi) = sum int V_i phi_i^2.  The densities are those of the
    symmetric system, V_i^s = d_i V_i.

    Args:
        densities: The densities V_i^s.
        decomposition: The symmetric decomposition.
        boundary: "dirichlet" for phi_i = 0 on the boundary, or "constant"
            for phi_i equal to a free constant c_i on the boundary with
            int V_i phi_i = 0.
        method: auto, dense or iterative.

    Returns:
        The minimum, +inf when every density vanishes.  The components with
        vanishing density are reported as inactive.
    """
    if boundary not in (DIRICHLET, CONSTANT):
        raise InvalidParameterError(F"unknown boundary {boundary!r}")
    n = decomposition.rank
    if len(densities) != n:
        raise InvalidParameterError(
            F"{decomposition.family} needs {n} densities")
    grid = densities[0].grid
    size = grid.size
    active = [i for i in range(n) if densities[i].is_active]
    if len(active) == 0:
        return CoupledEigen(math.inf, None, active)
    inactive = [i for i in range(n) if i not in active]
    if len(inactive) > 0:
        logger.info("components %s carry no mass",
                    [i + 1 for i in inactive])
    k = sparse.kron(sparse.csr_matrix(decomposition.a_s_inverse_array()),
                    grid.h ** 2 * grid.laplacian, format="csc")
    if boundary == DIRICHLET:
        b: Operator = sparse.diags(np.concatenate(
            [grid.h ** 2 * x.values for x in densities]))
    else:
        masses = [_ProjectedMass(grid.h ** 2 * x.values) if i in active
                  else sparse_linalg.aslinearoperator(
                      sparse.csr_matrix((size, size)))
                  for i, x in enumerate(densities)]
        b = _BlockDiagonal(masses)
    theta, vectors = _largest_pencil(b, k, 1, _use_dense(grid, method))
    x = vectors[:, 0]
    fields = []
    for i in range(n):
        phi = x[i * size:(i + 1) * size]
        c = 0.0
        if boundary == CONSTANT and i in active:
            phi, c = _constrained_function(grid, densities[i], phi)
        fields.append(GridField(grid, phi, boundary_constant=c))
    return CoupledEigen(_sigma(theta[0]) - 1, fields, active)


class _BlockDiagonal(sparse_linalg.LinearOperator):
    """A block-diagonal operator of square blocks of equal size."""

    def __init__(self, blocks: Sequence[sparse_linalg.LinearOperator]):
        size = blocks[0].shape[0]
        total = size * len(blocks)
        super().__init__(dtype=float, shape=(total, total))
        self._blocks = blocks
        self._size = size

    def _matvec(self, x):
        x = np.asarray(x).ravel()
        return np.concatenate(
            [block @ x[i * self._size:(i + 1) * self._size]
             for i, block in enumerate(self._blocks)])

    def _adjoint(self):
        return self


def quadratic_form_gap(grid: DomainGrid, phi: Sequence[GridField],
                       decomposition: SymmetricDecomposition,
                       rho: float) -> float:
    """Returns sum (a^s)^ij int grad phi_i . grad phi_j
    - (1/rho) sum int |grad phi_i|^2, nonnegative since the smallest
    eigenvalue of the inverse of A^s is 1/rho.

    Args:
        grid: The grid.
        phi: The components, with the zero boundary value.
        decomposition: The symmetric decomposition.
        rho: The spectral radius of A^s.

    Returns:
        The gap.
    """
    values = np.vstack([x.values for x in phi])
    gradients = grid.h ** 2 * values @ (grid.laplacian @ values.T)
    inverse = decomposition.a_s_inverse_array()
    return float(np.sum(inverse * gradients)) \
        - float(np.trace(gradients)) / rho


class SubsolutionCheck:
    """The subsolution margins -Delta u_i - rho V_i^s of a state.

    Args:
        margins: The margins, one field per component.
        row_sum_margins: The margins -Delta u_i - 2 V_i.
        bounds: rho lambda_i^s per component.
        mass_errors: |rho int V_i - rho lambda_i| per component.
    """

    def __init__(self, margins: List[GridField],
                 row_sum_margins: List[GridField], bounds: List[float],
                 mass_errors: List[float]):
        self.margins = margins
        self.row_sum_margins = row_sum_margins
        self.bounds = bounds
        self.mass_errors = mass_errors

    @property
    def max_margin(self) -> float:
        """The largest margin."""
        return max(float(np.max(x.values)) for x in self.margins)

    @property
    def max_row_sum_margin(self) -> float:
        """The largest row-sum margin."""
        return max(float(np.max(x.values)) for x in self.row_sum_margins)

    @property
    def passed(self) -> bool:
        """Whether the state is a discrete subsolution."""
        return self.max_margin <= MARGIN_TOLERANCE \
            and self.max_row_sum_margin <= MARGIN_TOLERANCE \
            and all(x <= STEP_TWO_BOUND * (1 + 1e-12) for x in self.bounds) \
            and all(x <= MASS_TOLERANCE * max(1.0, b)
                    for x, b in zip(self.mass_errors, self.bounds))


def subsolution_check(state: TodaState, rho: float) -> SubsolutionCheck:
    """Checks that the components of a state are discrete subsolutions of
    -Delta u_i - rho K_i e^{u_i} = 0, with K_i e^{u_i} = V_i^s.

    Args:
        state: The converged state.
        rho: The spectral radius of A^s, at least 2.

    Returns:
        The check.

    Raises:
        InvalidParameterError: When rho is below 2.
    """
    if rho < 2 - 1e-12:
        raise InvalidParameterError(F"rho must be at least 2: {rho!r}")
    grid = state.grid
    d = state.problem.d
    densities = assemble_densities(state)
    lu = (grid.laplacian @ state.u.T).T
    margins = []
    row_sums = []
    bounds = []
    errors = []
    for i, density in enumerate(densities):
        margins.append(GridField(grid, lu[i] - rho * d[i] * density.values))
        row_sums.append(GridField(grid, lu[i] - 2 * density.values))
        bounds.append(rho * d[i] * density.lam)
        errors.append(abs(rho * integrate(grid, density.V)
                          - rho * density.lam))
    return SubsolutionCheck(margins, row_sums, bounds, errors)


class LemmaReport:
    """The first two eigenvalues of the linearized Liouville problem at a
    subsolution.

    Args:
        nu1: The first eigenvalue.
        nu2: The second eigenvalue.
        mass: int K e^v.
    """

    def __init__(self, nu1: float, nu2: float, mass: float):
        self.nu1 = nu1
        self.nu2 = nu2
        self.mass = mass

    @property
    def nu1_asserted(self) -> bool:
        """Whether the hypothesis of the positivity of nu_1 holds."""
        return self.mass <= STEP_ONE_BOUND

    @property
    def nu2_asserted(self) -> bool:
        """Whether the hypothesis of the positivity of nu_2 holds."""
        return self.mass <= STEP_TWO_BOUND

    @property
    def nu1_status(self) -> str:
        """The status of nu_1."""
        if not self.nu1_asserted:
            return REPORTED
        return positivity_status(self.nu1)

    @property
    def nu2_status(self) -> str:
        """The status of nu_2."""
        if not self.nu2_asserted:
            return REPORTED
        return positivity_status(self.nu2)


def lemma_certificate(k: Union[GridField, np.ndarray, float], v: GridField,
                      method: str = AUTO) -> LemmaReport:
    """Returns the two smallest eigenvalues of
    -Delta phi - K e^v phi = nu K e^v phi with phi = 0 on the boundary.

    Args:
        k: The coefficient K.
        v: A discrete subsolution of -Delta v - K e^v = 0.
        method: auto, dense or iterative.

    Returns:
        The report.

    Raises:
        InvalidParameterError: When v is not a subsolution.
    """
    grid = v.grid
    if isinstance(k, GridField):
        k = k.values
    weight = np.broadcast_to(np.asarray(k, dtype=float), (grid.size,)) \
        * np.exp(v.values)
    margin = float(np.max(grid.laplacian @ v.values - weight))
    if margin > MARGIN_TOLERANCE:
        raise InvalidParameterError(
            F"v is not a subsolution (margin {margin:.3e})")
    mass = integrate(grid, weight)
    if not np.any(weight > 0):
        return LemmaReport(math.inf, math.inf, mass)
    stiffness = (grid.h ** 2 * grid.laplacian).tocsc()
    theta, _ = _largest_pencil(sparse.diags(grid.h ** 2 * weight),
                               stiffness, 2, _use_dense(grid, method))
    return LemmaReport(_sigma(theta[0]) - 1, _sigma(theta[1]) - 1, mass)


def positivity_status(value: float) -> str:
    """Returns the status of a positivity check.  Values within the
    positivity margin of zero are inconclusive.

    Args:
        value: The value that should be positive.

    Returns:
        PASS, FAIL or INCONCLUSIVE.
    """
    margin = get_setting("POSITIVITY_MARGIN")
    if abs(value) < margin:
        return INCONCLUSIVE
    return PASS if value > 0 else FAIL


class Check:
    """A check of the certificate.

    Args:
        name: The check name.
        value: The checked value.
        status: PASS, FAIL, INCONCLUSIVE or REPORTED.
        component: The one-based component, if any.
    """

    def __init__(self, name: str, value: float, status: str,
                 component: Optional[int] = None):
        self.name = name
        self.value = value
        self.status = status
        self.component = component

    @property
    def gates(self) -> bool:
        """Whether the check gates the certificate."""
        return self.status != REPORTED

    def as_dict(self) -> Dict[str, object]:
        return {"name": self.name, "value": self.value,
                "status": self.status, "component": self.component}


class EigenReport:
    """The non-degeneracy certificate of a state.

    Attributes:
        rho: The spectral radius of A^s.
        coupled_min: The coupled minimum on the Dirichlet block space.
        coupled_min_constant: The coupled minimum on the constant-boundary
            block space with the integral constraints.
        mu1: The first Dirichlet eigenvalues per component.
        mu2: The constrained eigenvalues per component.
        nu1: The first Lemma eigenvalues per component.
        nu2: The second Lemma eigenvalues per component.
        constraint_residuals: |int V_i Phi_i| per component.
        boundary_constants: The boundary constants of the constrained
            eigenfunctions.
        subsolution: The subsolution check.
        form_gap: The quadratic form gap on the coupled minimizer.
        checks: The checks.
    """

    def __init__(self, rho: float):
        self.rho = rho
        self.coupled_min = math.inf
        self.coupled_min_constant = math.inf
        self.coupled_eigenfunctions: Optional[List[GridField]] = None
        self.mu1: List[float] = []
        self.mu2: List[float] = []
        self.nu1: List[float] = []
        self.nu2: List[float] = []
        self.constraint_residuals: List[float] = []
        self.boundary_constants: List[float] = []
        self.eigenfunctions: List[Optional[GridField]] = []
        self.subsolution: Optional[SubsolutionCheck] = None
        self.form_gap = 0.0
        self.checks: List[Check] = []

    @property
    def passed(self) -> bool:
        """Whether every gating check passes."""
        return all(x.status == PASS for x in self.checks if x.gates)

    @property
    def certificate(self) -> bool:
        """Whether the state is certified non-degenerate."""
        return self.passed

    def failures(self) -> List[Check]:
        """Returns the gating checks that do not pass.

        Returns:
            The failing checks.
        """
        return [x for x in self.checks if x.gates and x.status != PASS]

    @property
    def margins_max(self) -> float:
        """The largest subsolution margin."""
        return self.subsolution.max_margin

    def add(self, name: str, value: float, status: str,
            component: Optional[int] = None) -> None:
        self.checks.append(Check(name, value, status, component))

    def as_dict(self) -> Dict[str, object]:
        return {"rho": self.rho,
                "coupled_min": self.coupled_min,
                "coupled_min_constant_boundary": self.coupled_min_constant,
                "mu1": self.mu1, "mu2": self.mu2,
                "nu1": self.nu1, "nu2": self.nu2,
                "constraint_residuals": self.constraint_residuals,
                "boundary_constants": self.boundary_constants,
                "margins_max": self.margins_max,
                "form_gap": self.form_gap,
                "checks": [x.as_dict() for x in self.checks],
                "pass": self.passed}


def _scalar_problems(density: DensityField, rho: float, method: str) \
        -> Tuple[ScalarEigen, ScalarEigen]:
    return (scalar_eigen_dirichlet(density, rho, method),
            scalar_eigen_constrained(density, rho, method))


def nondegeneracy_certificate(state: TodaState,
                              decomposition: Optional[SymmetricDecomposition]
                              = None, method: str = AUTO) -> EigenReport:
    """Certifies a state non-degenerate.  The first Dirichlet eigenvalues
    and the Dirichlet coupled minimum gate only where rho lambda_i^s is at
    most 4 pi; the constrained eigenvalues and the constrained coupled
    minimum gate everywhere.

    Args:
        state: The converged state.
        decomposition: The symmetric decomposition, by default that of the
            state.
        method: auto, dense or iterative.

    Returns:
        The report.  A failing check names its component.
    """
    if decomposition is None:
        decomposition = state.problem.decomposition
    rho = spectral_radius(decomposition).rho
    report = EigenReport(rho)
    grid = state.grid
    d = decomposition.d_array()
    densities = [x.scaled(d[i])
                 for i, x in enumerate(assemble_densities(state))]

    report.subsolution = subsolution_check(state, rho)
    report.add("subsolution_margin", report.subsolution.max_margin,
               PASS if report.subsolution.passed else FAIL)

    step_one = [rho * x.lam <= STEP_ONE_BOUND * (1 + 1e-12)
                for x in densities]
    active = [i for i, x in enumerate(densities) if x.is_active]
    with ThreadPoolExecutor(max_workers=get_setting("WORKERS")) as executor:
        scalars = dict(zip(active, executor.map(
            lambda i: _scalar_problems(densities[i], rho, method), active)))
    for i, density in enumerate(densities):
        if i not in scalars:
            report.mu1.append(math.inf)
            report.mu2.append(math.inf)
            report.nu1.append(math.inf)
            report.nu2.append(math.inf)
            report.constraint_residuals.append(0.0)
            report.boundary_constants.append(0.0)
            report.eigenfunctions.append(None)
            report.add("mu1", math.inf, PASS, i + 1)
            report.add("mu2", math.inf, PASS, i + 1)
            continue
        mu1, mu2 = scalars[i]
        report.mu1.append(mu1.value)
        report.mu2.append(mu2.value)
        report.constraint_residuals.append(mu2.constraint_residual)
        report.boundary_constants.append(mu2.boundary_constant)
        report.eigenfunctions.append(mu2.eigenfunction)
        report.add("mu1", mu1.value, positivity_status(mu1.value)
                   if step_one[i] else REPORTED, i + 1)
        report.add("mu2", mu2.value, positivity_status(mu2.value), i + 1)
        try:
            lemma = _lemma_at_state(state, i, rho, density, method)
        except InvalidParameterError as e:
            logger.warning("component %d is not a subsolution: %s", i + 1, e)
            lemma = LemmaReport(math.nan, math.nan, rho * density.lam)
        report.nu1.append(lemma.nu1)
        report.nu2.append(lemma.nu2)

    coupled = coupled_form_min(densities, decomposition, DIRICHLET, method)
    report.coupled_min = coupled.value
    report.coupled_eigenfunctions = coupled.eigenfunctions
    report.add("coupled_min", coupled.value,
               positivity_status(coupled.value) if all(step_one)
               else REPORTED)
    constant = coupled_form_min(densities, decomposition, CONSTANT, method)
    report.coupled_min_constant = constant.value
    report.add("coupled_min_constant_boundary", constant.value,
               positivity_status(constant.value))
    if coupled.eigenfunctions is not None:
        report.form_gap = quadratic_form_gap(grid, coupled.eigenfunctions,
                                             decomposition, rho)
        report.add("quadratic_form_gap", report.form_gap,
                   PASS if report.form_gap >= -GAP_TOLERANCE else FAIL)
        bound = min(report.mu1[i] for i in active) / rho
        report.add("coupled_lower_bound", coupled.value - bound,
                   PASS if coupled.value >= bound - 1e-8 * max(1.0,
                                                               abs(bound))
                   else FAIL)
    for check in report.checks:
        if check.status == INCONCLUSIVE:
            logger.warning("%s of component %s is inconclusive: %r",
                           check.name, check.component, check.value)
    logger.info("certificate at %s: %s", list(state.lam),
                PASS if report.passed else FAIL)
    return report


def _lemma_at_state(state: TodaState, i: int, rho: float,
                    density: DensityField, method: str) -> LemmaReport:
    """Applies the Lemma eigenproblem to the component u_i of a state, a
    subsolution of -Delta u - rho K_i e^u = 0."""
    grid = state.grid
    u = GridField(grid, state.u[i])
    coefficient = rho * density.values * np.exp(-state.u[i])
    return lemma_certificate(coefficient, u, method)
