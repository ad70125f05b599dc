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

"""The test cases of the Toda system solver.

"""
import math
import os
import unittest

import numpy as np

from toda.cartan import LieFamily, build_cartan, uniqueness_thresholds
from toda.discretization import SingularSource, assemble_weight, build_grid, \
    integrate, zero_f
from toda.solver import Deflation, TodaProblem, TodaState, continuation, \
    default_weights, deflated_search, energy, energy_gradient, \
    newton_solve, residual, smooth_start
from toda.utils import InvalidParameterError, SolverError

SLOW = os.environ.get("TODA_SLOW_TESTS") == "1"


def problem_of(family, rank, lam, n=15, weights=None):
    """Returns a Toda problem.

    Args:
        family: The family letter.
        rank: The rank.
        lam: The parameters.
        n: The interior nodes per axis.
        weights: The weights, h = 1 by default.

    Returns:
        The problem.
    """
    grid = build_grid(n)
    if weights is None:
        weights = default_weights(grid, rank)
    return TodaProblem(grid, build_cartan(LieFamily(family, rank)), lam,
                       weights)


class ProblemTestCase(unittest.TestCase):
    """Tests the discrete Toda problem."""

    def test_preconditions(self):
        """Tests the rejected parameters."""
        with self.assertRaises(InvalidParameterError):
            problem_of("A", 2, [1.0])
        with self.assertRaises(InvalidParameterError):
            problem_of("A", 2, [1.0, -1.0])
        with self.assertRaises(InvalidParameterError):
            problem_of("A", 2, [1.0, math.inf])
        grid = build_grid(7)
        with self.assertRaises(InvalidParameterError):
            TodaProblem(grid, build_cartan(LieFamily("A", 2)), [1.0, 1.0],
                        default_weights(build_grid(9), 2))

    def test_jacobian(self):
        """Tests the Jacobian against the finite differences of the
        residual."""
        for family, rank, lam in [("A", 2, [3.0, 5.0]), ("G", 2, [4.0, 1.5]),
                                  ("B", 3, [2.0, 3.0, 4.0])]:
            with self.subTest(family=family, rank=rank):
                problem = problem_of(family, rank, lam, n=15)
                rng = np.random.default_rng(7)
                v = smooth_start(problem.grid, rank, rng) \
                    / problem.d[:, None]
                w = rng.standard_normal(v.shape)
                epsilon = 1e-6
                difference = (problem.residual_v(v + epsilon * w)
                              - problem.residual_v(v - epsilon * w)) \
                    / (2 * epsilon)
                applied = problem.jacobian_apply(v, w)
                self.assertLessEqual(
                    np.linalg.norm(applied - difference)
                    / np.linalg.norm(applied), 1e-6)

    def test_newton_direction(self):
        """Tests that the Newton direction solves the Jacobian system."""
        problem = problem_of("C", 3, [2.0, 2.0, 1.0])
        rng = np.random.default_rng(3)
        v = smooth_start(problem.grid, 3, rng, amplitude=0.5)
        r = problem.residual_v(v)
        dv = problem.newton_direction(v, r)
        np.testing.assert_allclose(problem.jacobian_apply(v, dv), -r,
                                   atol=1e-8 * np.max(np.abs(r)))


class NewtonTestCase(unittest.TestCase):
    """Tests the damped Newton solve."""

    def test_trivial(self):
        """Tests that lambda = 0 gives u = 0 exactly."""
        grid = build_grid(15)
        state = newton_solve(grid, build_cartan(LieFamily("G", 2)),
                             [0.0, 0.0], default_weights(grid, 2))
        self.assertEqual(state.iterations, 0)
        self.assertTrue(np.all(state.u == 0.0))
        self.assertEqual(state.residual_norm, 0.0)

    def test_symmetry(self):
        """Tests that equal parameters of A2 give equal components."""
        grid = build_grid(15)
        state = newton_solve(grid, build_cartan(LieFamily("A", 2)),
                             [6.0, 6.0], default_weights(grid, 2))
        self.assertLessEqual(state.residual_norm, 1e-9)
        np.testing.assert_allclose(state.u[0], state.u[1], atol=1e-8)
        self.assertTrue(np.any(state.u[0] != 0.0))

    def test_residual(self):
        """Tests the residual of a converged state."""
        grid = build_grid(15)
        cartan = build_cartan(LieFamily("B", 2))
        state = newton_solve(grid, cartan, [3.0, 5.0],
                             default_weights(grid, 2))
        fields = residual(state)
        self.assertLessEqual(max(x.sup_norm() for x in fields), 1e-9)
        self.assertLessEqual(max(x.sup_norm() for x in residual(
            state, cartan)), 1e-9)
        with self.assertRaises(InvalidParameterError):
            residual(state, build_cartan(LieFamily("A", 3)))

    def test_init(self):
        """Tests starting from a converged state."""
        grid = build_grid(15)
        cartan = build_cartan(LieFamily("A", 2))
        weights = default_weights(grid, 2)
        state = newton_solve(grid, cartan, [5.0, 3.0], weights)
        again = newton_solve(grid, cartan, [5.0, 3.0], weights, state.u)
        self.assertEqual(again.iterations, 0)
        with self.assertRaises(InvalidParameterError):
            newton_solve(grid, cartan, [5.0, 3.0], weights,
                         np.zeros((3, grid.size)))

    def test_failure(self):
        """Tests the failure with the last iterate."""
        grid = build_grid(15)
        start = np.full((1, grid.size), 800.0)
        with self.assertRaises(SolverError) as context:
            newton_solve(grid, build_cartan(LieFamily("A", 1)), [4.0],
                         default_weights(grid, 1), start)
        self.assertIsNotNone(context.exception.last_iterate)

    def test_singular_weight(self):
        """Tests a solve with a singular source and the mass identity."""
        grid = build_grid(15)
        source = SingularSource(grid, 0.5, 0.5, 1.0)
        weight = assemble_weight(grid, zero_f(grid), [source])
        state = newton_solve(grid, build_cartan(LieFamily("A", 1)), [6.0],
                             [weight])
        self.assertLessEqual(state.residual_norm, 1e-9)
        g = weight.values * np.exp(state.u[0])
        self.assertAlmostEqual(
            integrate(grid, 2 * 6.0 * g / state.masses[0]), 12.0,
            delta=1e-10)


class ContinuationTestCase(unittest.TestCase):
    """Tests the continuation from the trivial solution."""

    def test_zero_target(self):
        """Tests the zero target."""
        grid = build_grid(15)
        branch = continuation(grid, build_cartan(LieFamily("A", 2)),
                              [0.0, 0.0], 5)
        self.assertEqual(len(branch.states), 1)
        self.assertEqual(branch.t_values, [0.0])
        self.assertFalse(branch.failed)

    def test_near_threshold(self):
        """Tests the continuation to 0.99 of the thresholds."""
        n = 31 if SLOW else 15
        for family, rank in [("A", 2), ("G", 2)]:
            with self.subTest(family=family):
                lie = LieFamily(family, rank)
                target = uniqueness_thresholds(lie).at_fraction(0.99)
                branch = continuation(build_grid(n), build_cartan(lie),
                                      target, 10)
                self.assertFalse(branch.failed)
                self.assertEqual(branch.t_values[-1], 1.0)
                self.assertTrue(all(a < b for a, b in
                                    zip(branch.t_values,
                                        branch.t_values[1:])))
                self.assertTrue(all(x.residual_norm <= 1e-9
                                    for x in branch.states))
                np.testing.assert_allclose(branch.final.lam, target)

    def test_steps(self):
        """Tests the rejected number of steps."""
        with self.assertRaises(InvalidParameterError):
            continuation(build_grid(7), build_cartan(LieFamily("A", 1)),
                         [1.0], 0)


class DeflationTestCase(unittest.TestCase):
    """Tests the deflated search for other solutions."""

    def test_operator(self):
        """Tests the deflation operator and its log gradient."""
        grid = build_grid(7)
        rng = np.random.default_rng(11)
        known = rng.standard_normal((2, grid.size))
        deflation = Deflation(grid, [known], 2, 1.0)
        v = known + rng.standard_normal(known.shape)
        w = rng.standard_normal(known.shape)
        epsilon = 1e-6
        difference = (math.log(deflation.value(v + epsilon * w))
                      - math.log(deflation.value(v - epsilon * w))) \
            / (2 * epsilon)
        self.assertAlmostEqual(
            float(np.sum(deflation.log_gradient(v) * w)) / difference, 1.0,
            delta=1e-5)
        self.assertEqual(deflation.value(known), math.inf)

    def test_uniqueness_evidence(self):
        """Tests that no second solution is found below the thresholds."""
        n = 31 if SLOW else 15
        for family, rank in [("A", 2), ("G", 2)]:
            with self.subTest(family=family):
                lie = LieFamily(family, rank)
                grid = build_grid(n)
                cartan = build_cartan(lie)
                weights = default_weights(grid, rank)
                target = uniqueness_thresholds(lie).at_fraction(0.9)
                known = continuation(grid, cartan, target, 10).final
                found = deflated_search(grid, cartan, target, weights,
                                        [known], starts=20, seed=0)
                self.assertEqual(found, [])

    def test_trivial(self):
        """Tests that lambda = 0 only rediscovers the trivial solution."""
        grid = build_grid(7)
        cartan = build_cartan(LieFamily("A", 2))
        weights = default_weights(grid, 2)
        found = deflated_search(grid, cartan, [0.0, 0.0], weights, [],
                                starts=4, seed=1)
        self.assertEqual(len(found), 1)
        self.assertLessEqual(float(np.max(np.abs(found[0].u))), 1e-8)


class EnergyTestCase(unittest.TestCase):
    """Tests the energy."""

    def test_trivial(self):
        """Tests the energy of u = 0."""
        grid = build_grid(15)
        cartan = build_cartan(LieFamily("G", 2))
        problem = TodaProblem(grid, cartan, [2.0, 1.0],
                              default_weights(grid, 2))
        state = TodaState(problem, np.zeros((2, grid.size)))
        m = (15 / 16) ** 2
        self.assertAlmostEqual(energy(state), -(2.0 + 1.0 / 3) * math.log(m),
                               delta=1e-12)
        self.assertAlmostEqual(energy(state, cartan), energy(state))

    def test_gradient(self):
        """Tests the energy derivative against the finite differences."""
        for family, rank, lam in [("A", 2, [3.0, 5.0]),
                                  ("C", 3, [2.0, 1.0, 3.0])]:
            with self.subTest(family=family):
                problem = problem_of(family, rank, lam)
                rng = np.random.default_rng(5)
                v = smooth_start(problem.grid, rank, rng)
                w = smooth_start(problem.grid, rank, rng)
                state = TodaState(problem, v)
                epsilon = 1e-5
                difference = (problem.energy_v(v + epsilon * w)
                              - problem.energy_v(v - epsilon * w)) \
                    / (2 * epsilon)
                self.assertAlmostEqual(
                    energy_gradient(state, w) / difference, 1.0,
                    delta=1e-5)

    def test_critical_point(self):
        """Tests that a solution is a critical point of the energy."""
        grid = build_grid(15)
        state = newton_solve(grid, build_cartan(LieFamily("B", 2)),
                             [4.0, 2.0], default_weights(grid, 2))
        w = smooth_start(grid, 2, np.random.default_rng(2))
        self.assertAlmostEqual(energy_gradient(state, w), 0.0, delta=1e-7)

    def test_descent_along_continuation(self):
        """Tests that the Newton iterate at each continuation step has no
        more energy than its predictor in the coercive range, and is a
        local minimum."""
        grid = build_grid(15)
        for family, rank in [("A", 2), ("G", 2)]:
            with self.subTest(family=family):
                lie = LieFamily(family, rank)
                target = uniqueness_thresholds(lie).at_fraction(0.9)
                self.assertTrue(all(x < 4 * math.pi for x in target))
                branch = continuation(grid, build_cartan(lie), target, 5)
                self.assertFalse(branch.failed)
                for before, after in zip(branch.states,
                                         branch.states[1:]):
                    problem = after.problem
                    self.assertLessEqual(problem.energy_v(after.v),
                                         problem.energy_v(before.v) + 1e-12)
                rng = np.random.default_rng(3)
                final = branch.final
                for _ in range(5):
                    w = smooth_start(grid, rank, rng)
                    self.assertGreaterEqual(
                        final.problem.energy_v(final.v + 1e-2 * w),
                        energy(final) - 1e-12)


if __name__ == "__main__":
    unittest.main()
