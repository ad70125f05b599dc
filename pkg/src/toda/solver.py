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

"""The solver of the singular mean-field Toda system

    -Delta u_i = sum_j a_ij lambda_j h_j e^{u_j} / int h_j e^{u_j}.

The system is solved in the variables v_i = u_i/d_i of the symmetric
decomposition A = D A^s, where it reads -Delta v = A^s N with
N_j = lambda_j h_j e^{d_j v_j} / int h_j e^{d_j v_j}.

"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .cartan import CartanMatrix, SymmetricDecomposition, \
    symmetric_decomposition, uniqueness_thresholds
from .discretization import DomainGrid, GridField, WeightField, \
    assemble_weight, zero_f
from .utils import CertificateError, InvalidParameterError, SolverError, \
    get_setting

logger = logging.getLogger(__name__)

ARMIJO = 1e-4


class TodaProblem:
    """The discrete Toda system at fixed parameters, in the v-variables.

    Args:
        grid: The grid.
        cartan: The Cartan matrix.
        lam: The parameters lambda_i >= 0.
        weights: The weights h_i.

    Raises:
        InvalidParameterError: When the sizes do not match or a parameter is
            negative.
    """

    def __init__(self, grid: DomainGrid, cartan: CartanMatrix,
                 lam: Sequence[float], weights: Sequence[WeightField],
                 decomposition: Optional[SymmetricDecomposition] = None):
        n = cartan.rank
        lam = np.array(lam, dtype=float)
        if lam.shape != (n,):
            raise InvalidParameterError(
                F"{cartan.family} needs {n} parameters, not {lam.size}")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise InvalidParameterError(
                F"the parameters must be finite and nonnegative: {lam}")
        if len(weights) != n:
            raise InvalidParameterError(
                F"{cartan.family} needs {n} weights, not {len(weights)}")
        if any(x.grid is not grid for x in weights):
            raise InvalidParameterError("the weights are on another grid")
        self.grid = grid
        self.cartan = cartan
        self.decomposition = decomposition if decomposition is not None \
            else symmetric_decomposition(cartan)
        self.lam = lam
        self.weights: Tuple[WeightField, ...] = tuple(weights)
        self.n = n
        self.d = self.decomposition.d_array()
        self.a_s = self.decomposition.a_s_array()
        self.a_s_inverse = self.decomposition.a_s_inverse_array()
        self._h = np.vstack([x.values for x in weights])

    def with_parameters(self, lam: Sequence[float]) -> "TodaProblem":
        """Returns the same problem at other parameters.

        Args:
            lam: The parameters.

        Returns:
            The problem.
        """
        return TodaProblem(self.grid, self.cartan, lam, self.weights,
                           self.decomposition)

    def densities(self, v: np.ndarray) \
            -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns the weighted exponentials, the masses and the normalized
        nonlinearities at a state.

        Args:
            v: The state, one row per component.

        Returns:
            g_j = h_j e^{d_j v_j}, m_j = int g_j and
            N_j = lambda_j g_j/m_j.

        Raises:
            CertificateError: When a mass is not positive.
        """
        with np.errstate(over="ignore"):
            g = self._h * np.exp(self.d[:, None] * v)
        m = self.grid.h ** 2 * np.sum(g, axis=1)
        if not np.all(m > 0):
            raise CertificateError(F"non-positive mass {m}")
        return g, m, self.lam[:, None] * g / m[:, None]

    def residual_v(self, v: np.ndarray) -> np.ndarray:
        """Returns the residual -Delta_h v - A^s N of the v-system.

        Args:
            v: The state, one row per component.

        Returns:
            The residual, one row per component.
        """
        _, _, nonlinear = self.densities(v)
        return (self.grid.laplacian @ v.T).T - self.a_s @ nonlinear

    def residual_u(self, v: np.ndarray) -> np.ndarray:
        """Returns the residual of the u-system at v, which is D times the
        residual of the v-system.

        Args:
            v: The state, one row per component.

        Returns:
            The residual -Delta_h u_i - sum_j a_ij N_j.
        """
        return self.d[:, None] * self.residual_v(v)

    def residual_norm(self, v: np.ndarray) -> float:
        """Returns the sup norm of the u-system residual, or infinity when
        the state overflows.

        Args:
            v: The state.

        Returns:
            The sup norm.
        """
        try:
            r = self.residual_u(v)
        except CertificateError:
            return math.inf
        if not np.all(np.isfinite(r)):
            return math.inf
        return float(np.max(np.abs(r)))

    def _jacobian_parts(self, v: np.ndarray) \
            -> Tuple[sparse.csc_matrix, np.ndarray, np.ndarray]:
        """Returns the exact Jacobian of the v-residual as S + P Q^T, with S
        sparse and P, Q of one column per component.

        Args:
            v: The state.

        Returns:
            S, P and Q.
        """
        g, m, nonlinear = self.densities(v)
        size = self.grid.size
        coupling = self.a_s * self.d[None, :]
        blocks = [[None] * self.n for _ in range(self.n)]
        for i in range(self.n):
            for j in range(self.n):
                block = sparse.diags(-coupling[i, j] * nonlinear[j])
                if i == j:
                    block = self.grid.laplacian + block
                blocks[i][j] = block
        s = sparse.bmat(blocks, format="csc")
        p = np.zeros((self.n * size, self.n))
        q = np.zeros((self.n * size, self.n))
        for j in range(self.n):
            for i in range(self.n):
                p[i * size:(i + 1) * size, j] \
                    = coupling[i, j] * nonlinear[j]
            q[j * size:(j + 1) * size, j] = self.grid.h ** 2 * g[j] / m[j]
        return s, p, q

    def jacobian_apply(self, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Applies the Jacobian of the v-residual to a direction.

        Args:
            v: The state.
            w: The direction, one row per component.

        Returns:
            The directional derivative, one row per component.
        """
        s, p, q = self._jacobian_parts(v)
        x = w.ravel()
        return (s @ x + p @ (q.T @ x)).reshape(self.n, self.grid.size)

    def newton_direction(self, v: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Solves J dv = -r by the Sherman-Morrison-Woodbury formula on the
        sparse LU factorization of S.

        Args:
            v: The state.
            r: The v-residual at the state.

        Returns:
            The Newton direction, one row per component.

        Raises:
            SolverError: When the linear system is singular.
        """
        s, p, q = self._jacobian_parts(v)
        try:
            factor = sparse_linalg.splu(s)
        except RuntimeError as e:
            raise SolverError(F"the Jacobian is singular: {e}",
                              last_iterate=v) from e
        b = -r.ravel()
        y = factor.solve(b)
        z = factor.solve(p)
        capacitance = np.eye(self.n) + q.T @ z
        try:
            correction = np.linalg.solve(capacitance, q.T @ y)
        except np.linalg.LinAlgError as e:
            raise SolverError(F"the Jacobian is singular: {e}",
                              last_iterate=v) from e
        dv = y - z @ correction
        if not np.all(np.isfinite(dv)):
            raise SolverError("the Newton direction is not finite",
                              last_iterate=v)
        return dv.reshape(self.n, self.grid.size)

    def energy_v(self, v: np.ndarray) -> float:
        """Returns the energy
        J(v) = 1/2 sum (a^s)^ij int grad v_i . grad v_j
        - sum (lambda_i/d_i) log int h_i e^{d_i v_i}.

        Args:
            v: The state.

        Returns:
            The energy.
        """
        _, m, _ = self.densities(v)
        lv = (self.grid.laplacian @ v.T).T
        quadratic = 0.5 * self.grid.h ** 2 \
            * float(np.sum(v * (self.a_s_inverse @ lv)))
        return quadratic - float(np.sum(self.lam / self.d * np.log(m)))

    def energy_gradient_v(self, v: np.ndarray, w: np.ndarray) -> float:
        """Returns the directional derivative dJ(v)[w].

        Args:
            v: The state.
            w: The direction.

        Returns:
            The directional derivative.
        """
        _, _, nonlinear = self.densities(v)
        lv = (self.grid.laplacian @ v.T).T
        return self.grid.h ** 2 \
            * float(np.sum(w * (self.a_s_inverse @ lv - nonlinear)))


class TodaState:
    """A converged state of the Toda system.

    Args:
        problem: The problem.
        v: The state in the v-variables, one row per component.
        iterations: The number of Newton steps.
    """

    def __init__(self, problem: TodaProblem, v: np.ndarray,
                 iterations: int = 0):
        self.problem = problem
        self.v = np.array(v, dtype=float)
        self.v.flags.writeable = False
        self.iterations = iterations
        _, self._masses, _ = problem.densities(self.v)
        self.residual_norm = problem.residual_norm(self.v)

    @property
    def grid(self) -> DomainGrid:
        """The grid."""
        return self.problem.grid

    @property
    def lam(self) -> np.ndarray:
        """The parameters lambda_i."""
        return self.problem.lam

    @property
    def weights(self) -> Tuple[WeightField, ...]:
        """The weights h_i."""
        return self.problem.weights

    @property
    def u(self) -> np.ndarray:
        """The solution u_i = d_i v_i, one row per component."""
        return self.problem.d[:, None] * self.v

    @property
    def masses(self) -> np.ndarray:
        """The masses m_i = int h_i e^{u_i}."""
        return self._masses

    def u_fields(self) -> List[GridField]:
        """Returns the components u_i as fields.

        Returns:
            The components.
        """
        return [GridField(self.grid, x) for x in self.u]


def residual(state: TodaState, cartan: Optional[CartanMatrix] = None) \
        -> List[GridField]:
    """Returns the residual -Delta_h u_i - sum_j a_ij lambda_j h_j e^{u_j}/m_j
    of a state.

    Args:
        state: The state.
        cartan: The Cartan matrix, by default that of the state.

    Returns:
        The residual, one field per component.

    Raises:
        InvalidParameterError: When the Cartan matrix does not match the
            state.
        CertificateError: When a mass is not positive.
    """
    problem = state.problem
    a = problem.cartan.as_array() if cartan is None else cartan.as_array()
    if a.shape != (problem.n, problem.n):
        raise InvalidParameterError("the Cartan matrix does not match the"
                                    " state")
    _, _, nonlinear = problem.densities(state.v)
    lu = (problem.grid.laplacian @ state.u.T).T
    return [GridField(problem.grid, x) for x in lu - a @ nonlinear]


def _as_v(problem: TodaProblem,
          init: Union[None, TodaState, np.ndarray]) -> np.ndarray:
    if init is None:
        return np.zeros((problem.n, problem.grid.size))
    if isinstance(init, TodaState):
        return np.array(init.v)
    u = np.asarray(init, dtype=float)
    if u.shape != (problem.n, problem.grid.size):
        raise InvalidParameterError(
            F"the initial state has the shape {u.shape}")
    return u / problem.d[:, None]


class Deflation:
    """The deflation operator M(v) = prod (||v - v_k||^-p + shift), with the
    h-weighted L2 norm.

    Args:
        grid: The grid.
        known: The known states, in the v-variables.
        power: The power p.
        shift: The shift.
    """

    def __init__(self, grid: DomainGrid, known: Sequence[np.ndarray],
                 power: float, shift: float):
        self._weight = grid.h ** 2
        self._known = [np.asarray(x) for x in known]
        self._power = power
        self._shift = shift

    def value(self, v: np.ndarray) -> float:
        """Returns M(v).

        Args:
            v: The state.

        Returns:
            M(v).
        """
        result = 1.0
        for known in self._known:
            distance = math.sqrt(self._weight * np.sum((v - known) ** 2))
            if distance == 0:
                return math.inf
            result *= distance ** -self._power + self._shift
        return result

    def log_gradient(self, v: np.ndarray) -> np.ndarray:
        """Returns the gradient of log M at v.

        Args:
            v: The state.

        Returns:
            The gradient of log M.
        """
        gradient = np.zeros_like(v)
        for known in self._known:
            e = v - known
            square = self._weight * np.sum(e ** 2)
            factor = square ** (-self._power / 2) + self._shift
            gradient -= self._power * square ** (-self._power / 2 - 1) \
                * self._weight * e / factor
        return gradient

    def step_factor(self, v: np.ndarray, dv: np.ndarray) -> float:
        """Returns the factor that turns a Newton step of the residual into
        a Newton step of the deflated residual.

        Args:
            v: The state.
            dv: The Newton step of the residual.

        Returns:
            1/(1 - grad(log M) . dv).
        """
        return 1.0 / (1.0 - float(np.sum(self.log_gradient(v) * dv)))


def _newton(problem: TodaProblem, v: np.ndarray,
            deflation: Optional[Deflation] = None) -> TodaState:
    """Runs the damped Newton iteration with Armijo backtracking.

    Args:
        problem: The problem.
        v: The initial state.
        deflation: The deflation operator, if any.

    Returns:
        The converged state.

    Raises:
        SolverError: When the iteration does not converge.
    """
    tolerance = get_setting("RESIDUAL_TOLERANCE")
    state_tolerance = get_setting("STATE_TOLERANCE")
    max_iterations = get_setting("MAX_NEWTON_ITERATIONS")
    damping_floor = get_setting("DAMPING_FLOOR")

    def merit(x: np.ndarray) -> float:
        norm = problem.residual_norm(x)
        if deflation is not None and math.isfinite(norm):
            return norm * deflation.value(x)
        return norm

    norm = problem.residual_norm(v)
    if not math.isfinite(norm):
        raise SolverError("the initial state overflows", last_iterate=v)
    for iteration in range(max_iterations):
        if norm <= tolerance:
            return TodaState(problem, v, iteration)
        dv = problem.newton_direction(v, problem.residual_v(v))
        if deflation is not None:
            factor = deflation.step_factor(v, dv)
            if not math.isfinite(factor):
                raise SolverError("the deflated step is not finite",
                                  last_iterate=v)
            dv = factor * dv
        current = merit(v)
        damping = 1.0
        while True:
            trial = v + damping * dv
            if merit(trial) <= (1 - ARMIJO * damping) * current:
                break
            damping /= 2
            if damping < damping_floor:
                raise SolverError(
                    F"the line search failed at iteration {iteration + 1}"
                    F" (residual = {norm:.3e})", last_iterate=v)
        v = trial
        previous, norm = norm, problem.residual_norm(v)
        logger.debug("Newton iteration %d: residual %.3e, damping %g",
                     iteration + 1, norm, damping)
        if norm > tolerance and norm >= previous \
                and damping * np.max(np.abs(dv)) <= state_tolerance:
            raise SolverError(
                F"Newton stagnated at iteration {iteration + 1}"
                F" (residual = {norm:.3e})", last_iterate=v)
    if norm <= tolerance:
        return TodaState(problem, v, max_iterations)
    raise SolverError(F"Newton did not converge in {max_iterations}"
                      F" iterations (residual = {norm:.3e})",
                      last_iterate=v)


def newton_solve(grid: DomainGrid, cartan: CartanMatrix,
                 lam: Sequence[float], weights: Sequence[WeightField],
                 init: Union[None, TodaState, np.ndarray] = None) -> TodaState:
    """Solves the Toda system by damped Newton.

    Args:
        grid: The grid.
        cartan: The Cartan matrix.
        lam: The parameters lambda_i >= 0.
        weights: The weights h_i.
        init: The initial state, as a state or as the u-values, by default
            the trivial state.

    Returns:
        The converged state, with the sup norm of its residual at most the
        residual tolerance.

    Raises:
        SolverError: When Newton does not converge; the error carries the
            last iterate.
    """
    problem = TodaProblem(grid, cartan, lam, weights)
    return _newton(problem, _as_v(problem, init))


def default_weights(grid: DomainGrid, rank: int) -> List[WeightField]:
    """Returns the weights h = 1 for every component.

    Args:
        grid: The grid.
        rank: The number of components.

    Returns:
        The weights.
    """
    weight = assemble_weight(grid, zero_f(grid), [])
    return [weight] * rank


class ContinuationStep:
    """A step of the continuation.

    Args:
        t: The continuation parameter.
        iterations: The Newton steps.
        residual_norm: The residual of the converged state.
    """

    def __init__(self, t: float, iterations: int, residual_norm: float):
        self.t = t
        self.iterations = iterations
        self.residual_norm = residual_norm


class ContinuationBranch:
    """The branch traced from the trivial solution toward a target.

    Args:
        lambda_target: The target parameters.

    Attributes:
        states: The converged states in increasing t.
        steps: The step log.
        failed: Whether the continuation stopped before t = 1.
        failure: The diagnostic of the failure, if any.
    """

    def __init__(self, lambda_target: Sequence[float]):
        self.lambda_target = np.array(lambda_target, dtype=float)
        self.states: List[TodaState] = []
        self.steps: List[ContinuationStep] = []
        self.failed = False
        self.failure: Optional[str] = None

    @property
    def t_values(self) -> List[float]:
        """The continuation parameters of the states."""
        return [x.t for x in self.steps]

    @property
    def final(self) -> TodaState:
        """The last converged state."""
        return self.states[-1]

    def add(self, t: float, state: TodaState) -> None:
        self.states.append(state)
        self.steps.append(ContinuationStep(t, state.iterations,
                                           state.residual_norm))


def continuation(grid: DomainGrid, cartan: CartanMatrix,
                 lambda_target: Sequence[float], steps: int,
                 weights: Optional[Sequence[WeightField]] = None) \
        -> ContinuationBranch:
    """Traces the branch t lambda_target, t from 0 to 1, from the trivial
    solution, with the previous state as the predictor and the step halved
    on Newton failure.

    Args:
        grid: The grid.
        cartan: The Cartan matrix.
        lambda_target: The target parameters.
        steps: The number of initial steps.
        weights: The weights, h = 1 by default.

    Returns:
        The branch.  When the step falls below the minimum, the partial
        branch is returned with its failure marked.
    """
    if steps < 1:
        raise InvalidParameterError(F"steps must be positive: {steps!r}")
    if weights is None:
        weights = default_weights(grid, cartan.rank)
    problem = TodaProblem(grid, cartan, lambda_target, weights)
    thresholds = uniqueness_thresholds(cartan.family)
    if not thresholds.contains(problem.lam):
        logger.warning("the target %s is outside the uniqueness box %s",
                       list(problem.lam), list(thresholds.lambda_max))
    min_step = get_setting("MIN_CONTINUATION_STEP")
    branch = ContinuationBranch(problem.lam)
    trivial = problem.with_parameters(0.0 * problem.lam)
    branch.add(0.0, _newton(trivial, np.zeros((cartan.rank, grid.size))))
    if not np.any(problem.lam):
        return branch
    initial_step = 1.0 / steps
    step = initial_step
    t = 0.0
    while t < 1.0:
        t_next = 1.0 if t + step > 1.0 - 1e-12 else t + step
        try:
            state = _newton(problem.with_parameters(t_next * problem.lam),
                            np.array(branch.final.v))
        except SolverError as e:
            step /= 2
            logger.info("continuation step halved to %g at t = %g: %s",
                        step, t, e)
            if step < min_step:
                branch.failed = True
                branch.failure = F"the step fell below {min_step} at" \
                                 F" t = {t!r}: {e}"
                logger.warning("continuation stopped: %s", branch.failure)
                return branch
            continue
        branch.add(t_next, state)
        logger.debug("continuation reached t = %g in %d iterations",
                     t_next, state.iterations)
        t = t_next
        step = min(2 * step, initial_step)
    return branch


def smooth_start(grid: DomainGrid, rank: int, rng: np.random.Generator,
                 amplitude: float = 2.0, modes: int = 3) -> np.ndarray:
    """Returns a random smooth initial state, as a sum of low sine modes.

    Args:
        grid: The grid.
        rank: The number of components.
        rng: The random generator.
        amplitude: The amplitude.
        modes: The number of modes per axis.

    Returns:
        The u-values, one row per component.
    """
    fields = np.zeros((rank, grid.size))
    for i in range(rank):
        for k in range(1, modes + 1):
            for l in range(1, modes + 1):
                fields[i] += amplitude * rng.standard_normal() / (k * l) \
                    * np.sin(k * math.pi * grid.x) \
                    * np.sin(l * math.pi * grid.y)
    return fields


def deflated_search(grid: DomainGrid, cartan: CartanMatrix,
                    lam: Sequence[float], weights: Sequence[WeightField],
                    known: Sequence[TodaState], starts: int = 20,
                    seed: int = 0) -> List[TodaState]:
    """Searches for solutions other than the known ones, by Newton on the
    deflated residual from random smooth starts.  The starts run in a
    thread pool and are merged in start order.

    Args:
        grid: The grid.
        cartan: The Cartan matrix.
        lam: The parameters.
        weights: The weights.
        known: The known solutions at the same parameters.
        starts: The number of random starts.
        seed: The seed of the random starts.

    Returns:
        The distinct new solutions; empty when none is found.
    """
    problem = TodaProblem(grid, cartan, lam, weights)
    deflation = Deflation(grid, [x.v for x in known],
                          get_setting("DEFLATION_POWER"),
                          get_setting("DEFLATION_SHIFT"))
    generators = [np.random.default_rng(x)
                  for x in np.random.SeedSequence(seed).spawn(starts)]

    def run(k: int) -> Optional[TodaState]:
        init = _as_v(problem, smooth_start(grid, problem.n, generators[k]))
        try:
            return _newton(problem, init,
                           deflation if len(known) > 0 else None)
        except (SolverError, CertificateError) as e:
            logger.debug("deflation start %d failed: %s", k, e)
            return None

    with ThreadPoolExecutor(max_workers=get_setting("WORKERS")) as executor:
        results = list(executor.map(run, range(starts)))
    distance = get_setting("DISTINCT_DISTANCE")
    found: List[TodaState] = []
    for state in results:
        if state is None:
            continue
        if all(np.max(np.abs(state.u - x.u)) > distance
               for x in list(known) + found):
            found.append(state)
    logger.info("deflated search at %s: %d new solutions from %d starts",
                list(problem.lam), len(found), starts)
    return found


def energy(state: TodaState, cartan: Optional[CartanMatrix] = None) -> float:
    """Returns the energy of a state,
    J = 1/2 sum (a^s)^ij int grad v_i . grad v_j
    - sum (lambda_i/d_i) log int h_i e^{u_i}, with u_i = d_i v_i.  For the
    symmetric families it is the usual mean-field energy in u.

    Args:
        state: The state.
        cartan: The Cartan matrix, by default that of the state.

    Returns:
        The energy.

    Raises:
        CertificateError: When a mass is not positive.
    """
    problem = state.problem
    if cartan is not None and cartan.entries != problem.cartan.entries:
        problem = TodaProblem(problem.grid, cartan, problem.lam,
                              problem.weights)
    return problem.energy_v(state.v)


def energy_gradient(state: TodaState, direction: np.ndarray) -> float:
    """Returns the derivative of the energy along a direction of the
    v-variables.

    Args:
        state: The state.
        direction: The direction, one row per component.

    Returns:
        dJ(v)[direction].
    """
    return state.problem.energy_gradient_v(state.v, direction)
