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

"""The test cases of the linearized eigenproblems and the non-degeneracy
certificate.

"""
import math
import os
import unittest

import numpy as np

from toda.cartan import LieFamily, build_cartan, spectral_radius, \
    symmetric_decomposition, uniqueness_thresholds
from toda.discretization import GridField, SingularSource, \
    assemble_weight, build_grid, dirichlet_eigenvalues_exact, integrate, \
    zero_f
from toda.solver import TodaProblem, TodaState, continuation, \
    default_weights, deflated_search, newton_solve, smooth_start
from toda.spectra import CONSTANT, DENSE, DIRICHLET, FAIL, INCONCLUSIVE, \
    ITERATIVE, PASS, REPORTED, DensityField, assemble_densities, \
    coupled_form_min, lemma_certificate, nondegeneracy_certificate, \
    positivity_status, quadratic_form_gap, scalar_eigen_constrained, \
    scalar_eigen_dirichlet, scalar_eigen_free_boundary, scalar_quotient, \
    subsolution_check
from toda.utils import InvalidParameterError

SLOW = os.environ.get("TODA_SLOW_TESTS") == "1"


def solved(family, rank, lam, n=15):
    """Returns a converged state with h = 1.

    Args:
        family: The family letter.
        rank: The rank.
        lam: The parameters.
        n: The interior nodes per axis.

    Returns:
        The state.
    """
    grid = build_grid(n)
    return newton_solve(grid, build_cartan(LieFamily(family, rank)), lam,
                        default_weights(grid, rank))


def bump(grid, lam):
    """Returns a positive density of a given mass.

    Args:
        grid: The grid.
        lam: The mass.

    Returns:
        The density.
    """
    values = 1.0 + np.sin(math.pi * grid.x) * np.sin(math.pi * grid.y)
    return DensityField(grid, lam * values / integrate(grid, values), lam)


class LemmaTestCase(unittest.TestCase):
    """Tests the eigenvalues of the linearized Liouville problem."""

    def test_constant_coefficient(self):
        """Tests nu = lambda_h/K - 1 at v = 0 with a constant K."""
        grid = build_grid(15)
        first, second = dirichlet_eigenvalues_exact(grid, 2)
        for k in [0.1, 1.0, 5.0]:
            with self.subTest(k=k):
                report = lemma_certificate(k, GridField(grid, 0.0))
                self.assertAlmostEqual(report.nu1, first / k - 1,
                                       delta=0.01 * abs(first / k - 1))
                self.assertAlmostEqual(report.nu2, second / k - 1,
                                       delta=0.01 * abs(second / k - 1))
                self.assertAlmostEqual(report.mass, k * (15 / 16) ** 2)
                self.assertEqual(report.nu1_status, PASS)

    def test_iterative(self):
        """Tests that the iterative solver agrees with the dense one."""
        grid = build_grid(15)
        dense = lemma_certificate(2.0, GridField(grid, 0.0), DENSE)
        iterative = lemma_certificate(2.0, GridField(grid, 0.0), ITERATIVE)
        self.assertAlmostEqual(dense.nu1, iterative.nu1,
                               delta=1e-8 * abs(dense.nu1))
        self.assertAlmostEqual(dense.nu2, iterative.nu2,
                               delta=1e-8 * abs(dense.nu2))

    def test_hypotheses(self):
        """Tests the reported eigenvalues above the mass bounds."""
        grid = build_grid(15)
        report = lemma_certificate(20.0, GridField(grid, 0.0))
        self.assertFalse(report.nu1_asserted)
        self.assertTrue(report.nu2_asserted)
        self.assertEqual(report.nu1_status, REPORTED)
        report = lemma_certificate(40.0, GridField(grid, 0.0))
        self.assertEqual(report.nu2_status, REPORTED)

    def test_not_subsolution(self):
        """Tests the rejected non-subsolution."""
        grid = build_grid(15)
        v = GridField(grid, np.sin(math.pi * grid.x)
                      * np.sin(math.pi * grid.y))
        with self.assertRaises(InvalidParameterError):
            lemma_certificate(0.0, v)


class ScalarEigenTestCase(unittest.TestCase):
    """Tests the scalar linearized eigenproblems."""

    def test_constant_density(self):
        """Tests mu_1 = lambda_h/V - rho with a constant density."""
        grid = build_grid(15)
        lam = 2.0
        value = lam / integrate(grid, np.ones(grid.size))
        density = DensityField(grid, np.full(grid.size, value), lam)
        first = dirichlet_eigenvalues_exact(grid)[0]
        mu1 = scalar_eigen_dirichlet(density, 3.0)
        self.assertAlmostEqual(mu1.value, first / value - 3.0,
                               delta=1e-8 * first / value)

    def test_constraint(self):
        """Tests the integral constraint and the free-boundary minimum."""
        grid = build_grid(15)
        density = bump(grid, 3.0)
        mu2 = scalar_eigen_constrained(density, 2.0)
        self.assertLessEqual(mu2.constraint_residual, 1e-8)
        self.assertEqual(mu2.eigenfunction.boundary_constant,
                         mu2.boundary_constant)
        self.assertAlmostEqual(
            integrate(grid, density.values * mu2.eigenfunction.values),
            0.0, delta=1e-8)
        free = scalar_eigen_free_boundary(density, 2.0)
        self.assertAlmostEqual(free.value, -2.0, delta=1e-8)
        self.assertLess(free.value, mu2.value)

    def test_methods(self):
        """Tests that the iterative solvers agree with the dense ones."""
        for n in [15, 31]:
            grid = build_grid(n)
            density = bump(grid, 4.0)
            for solve in [scalar_eigen_dirichlet, scalar_eigen_constrained,
                          scalar_eigen_free_boundary]:
                with self.subTest(n=n, solve=solve.__name__):
                    dense = solve(density, 2.0, DENSE).value
                    iterative = solve(density, 2.0, ITERATIVE).value
                    self.assertAlmostEqual(dense, iterative, delta=1e-8)

    def test_uniform_density(self):
        """Tests the iterative constrained problem with a constant density,
        whose projected mass vanishes on the constant vectors."""
        for n in [15, 31, 63]:
            with self.subTest(n=n):
                grid = build_grid(n)
                density = DensityField(grid, np.full(grid.size, 4.0),
                                       4.0 * integrate(grid,
                                                       np.ones(grid.size)))
                iterative = scalar_eigen_constrained(density, 2.0, ITERATIVE)
                self.assertLessEqual(iterative.constraint_residual, 1e-8)
                self.assertGreater(iterative.value, 0)
                if n <= 31:
                    dense = scalar_eigen_constrained(density, 2.0, DENSE)
                    self.assertAlmostEqual(dense.value, iterative.value,
                                           delta=1e-8)

    def test_variational(self):
        """Tests that mu_1 is the minimum of the Rayleigh quotient over the
        functions with the zero boundary value."""
        grid = build_grid(15)
        density = bump(grid, 3.0)
        mu1 = scalar_eigen_dirichlet(density, 2.0)
        self.assertAlmostEqual(
            scalar_quotient(grid, density, 2.0, mu1.eigenfunction.values),
            mu1.value, delta=1e-8 * max(1.0, abs(mu1.value)))
        rng = np.random.default_rng(17)
        quotients = []
        for k in range(200):
            if k % 2 == 0:
                phi = rng.standard_normal(grid.size)
            else:
                phi = smooth_start(grid, 1, rng)[0]
            quotients.append(scalar_quotient(grid, density, 2.0, phi))
        self.assertGreaterEqual(min(quotients), mu1.value - 1e-10)

    def test_rho_monotone(self):
        """Tests that mu_1 strictly decreases in rho at a fixed density."""
        grid = build_grid(15)
        density = bump(grid, 2.0)
        rhos = [1.0, 2.0, 2.5, 3.0, 4.0]
        values = [scalar_eigen_dirichlet(density, x).value for x in rhos]
        for k in range(1, len(rhos)):
            self.assertLess(values[k], values[k - 1])
            self.assertAlmostEqual(values[k - 1] - values[k],
                                   rhos[k] - rhos[k - 1], delta=1e-8)

    def test_vanishing(self):
        """Tests the rejected vanishing density."""
        grid = build_grid(7)
        density = DensityField(grid, np.zeros(grid.size), 0.0)
        self.assertFalse(density.is_active)
        with self.assertRaises(InvalidParameterError):
            scalar_eigen_dirichlet(density, 2.0)
        with self.assertRaises(InvalidParameterError):
            scalar_eigen_dirichlet(bump(grid, 1.0), 0.0)
        with self.assertRaises(InvalidParameterError):
            scalar_eigen_dirichlet(bump(grid, 1.0), 2.0, "lanczos")


class DensityTestCase(unittest.TestCase):
    """Tests the densities of a state."""

    def test_masses(self):
        """Tests that the densities carry the parameters as masses."""
        state = solved("B", 2, [3.0, 5.0])
        densities = assemble_densities(state)
        self.assertEqual(len(densities), 2)
        for density, lam in zip(densities, [3.0, 5.0]):
            self.assertAlmostEqual(integrate(state.grid, density.V), lam,
                                   delta=1e-10 * lam)
            self.assertTrue(np.all(density.values >= 0))

    def test_subsolution(self):
        """Tests the subsolution margins of a state."""
        for family, rank, lam in [("A", 2, [4.0, 2.0]),
                                  ("G", 2, [5.0, 1.0])]:
            with self.subTest(family=family):
                state = solved(family, rank, lam)
                rho = spectral_radius(state.problem.decomposition).rho
                check = subsolution_check(state, rho)
                self.assertLessEqual(check.max_margin, 1e-8)
                self.assertLessEqual(check.max_row_sum_margin, 1e-8)
                self.assertTrue(check.passed)
        with self.assertRaises(InvalidParameterError):
            subsolution_check(state, 1.5)


class CoupledEigenTestCase(unittest.TestCase):
    """Tests the coupled quadratic form."""

    def test_form_gap(self):
        """Tests that the quadratic form gap is nonnegative."""
        grid = build_grid(15)
        decomposition = symmetric_decomposition(
            build_cartan(LieFamily("C", 3)))
        rng = np.random.default_rng(13)
        phi = [GridField(grid, rng.standard_normal(grid.size))
               for _ in range(3)]
        rho = spectral_radius(decomposition).rho
        self.assertGreaterEqual(
            quadratic_form_gap(grid, phi, decomposition, rho), -1e-9)

    def test_inactive(self):
        """Tests the components without mass."""
        grid = build_grid(7)
        decomposition = symmetric_decomposition(
            build_cartan(LieFamily("A", 2)))
        empty = DensityField(grid, np.zeros(grid.size), 0.0)
        result = coupled_form_min([empty, empty], decomposition)
        self.assertEqual(result.value, math.inf)
        self.assertIsNone(result.eigenfunctions)
        result = coupled_form_min([bump(grid, 2.0), empty], decomposition,
                                  CONSTANT)
        self.assertEqual(result.active, [0])
        self.assertTrue(math.isfinite(result.value))
        with self.assertRaises(InvalidParameterError):
            coupled_form_min([empty, empty], decomposition, "periodic")
        with self.assertRaises(InvalidParameterError):
            coupled_form_min([empty], decomposition, DIRICHLET)

    def test_methods(self):
        """Tests that the iterative solver agrees with the dense one."""
        decomposition = symmetric_decomposition(
            build_cartan(LieFamily("B", 2)))
        for n in [15, 31]:
            grid = build_grid(n)
            densities = [bump(grid, 2.0), bump(grid, 6.0)]
            for boundary in [DIRICHLET, CONSTANT]:
                with self.subTest(n=n, boundary=boundary):
                    dense = coupled_form_min(densities, decomposition,
                                             boundary, DENSE).value
                    iterative = coupled_form_min(densities, decomposition,
                                                 boundary, ITERATIVE).value
                    self.assertAlmostEqual(dense, iterative, delta=1e-8)


class CertificateTestCase(unittest.TestCase):
    """Tests the non-degeneracy certificate."""

    def test_pass(self):
        """Tests a certified state below the thresholds."""
        state = solved("A", 2, [2.0, 2.0])
        report = nondegeneracy_certificate(state)
        self.assertAlmostEqual(report.rho, 3.0, delta=1e-12)
        self.assertTrue(report.certificate)
        self.assertEqual(report.failures(), [])
        self.assertGreater(report.coupled_min, 0)
        self.assertGreater(report.coupled_min_constant, 0)
        for mu1, mu2 in zip(report.mu1, report.mu2):
            self.assertGreater(mu1, 0)
            self.assertGreater(mu2, 0)
        for residual in report.constraint_residuals:
            self.assertLessEqual(residual, 1e-8)
        self.assertGreaterEqual(report.form_gap, -1e-9)
        names = {x.name: x.status for x in report.checks
                 if x.component is None}
        self.assertEqual(names["coupled_lower_bound"], PASS)
        self.assertEqual(names["coupled_min"], PASS)
        data = report.as_dict()
        self.assertTrue(data["pass"])
        self.assertEqual(len(data["mu2"]), 2)

    def test_small_parameters(self):
        """Tests the coupled minimum at small parameters."""
        state = solved("G", 2, [1e-3, 1e-3])
        report = nondegeneracy_certificate(state)
        self.assertGreater(report.coupled_min, 10)
        self.assertTrue(report.certificate)

    def test_trivial(self):
        """Tests the certificate of the trivial solution."""
        grid = build_grid(7)
        cartan = build_cartan(LieFamily("B", 3))
        problem = TodaProblem(grid, cartan, [0.0, 0.0, 0.0],
                              default_weights(grid, 3))
        report = nondegeneracy_certificate(
            TodaState(problem, np.zeros((3, grid.size))))
        self.assertTrue(report.certificate)
        self.assertEqual(report.mu1, [math.inf] * 3)
        self.assertEqual(report.coupled_min, math.inf)

    def test_reported(self):
        """Tests that mu_1 is reported above the first mass bound."""
        state = solved("A", 1, [7.0])
        report = nondegeneracy_certificate(state)
        statuses = {x.name: x.status for x in report.checks}
        self.assertEqual(statuses["mu1"], REPORTED)
        self.assertEqual(statuses["coupled_min"], REPORTED)
        self.assertEqual(statuses["mu2"], PASS)
        self.assertTrue(report.certificate)

    def test_iterative_branch(self):
        """Tests the iterative certificate along a continuation branch on
        the default grid against the dense one."""
        grid = build_grid(31)
        lie = LieFamily("A", 2)
        target = uniqueness_thresholds(lie).at_fraction(0.5)
        branch = continuation(grid, build_cartan(lie), target, 3)
        self.assertFalse(branch.failed)
        for state in branch.states[1:]:
            iterative = nondegeneracy_certificate(state, method=ITERATIVE)
            self.assertTrue(iterative.certificate,
                            [x.as_dict() for x in iterative.failures()])
        dense = nondegeneracy_certificate(branch.final, method=DENSE)
        for a, b in [(dense.coupled_min, iterative.coupled_min),
                     (dense.coupled_min_constant,
                      iterative.coupled_min_constant)] \
                + list(zip(dense.mu1, iterative.mu1)) \
                + list(zip(dense.mu2, iterative.mu2)):
            self.assertAlmostEqual(a, b, delta=1e-8)

    def test_positivity_status(self):
        """Tests the status of a positivity check."""
        self.assertEqual(positivity_status(1.0), PASS)
        self.assertEqual(positivity_status(-1.0), FAIL)
        self.assertEqual(positivity_status(1e-12), INCONCLUSIVE)
        self.assertEqual(positivity_status(math.inf), PASS)


@unittest.skipUnless(SLOW, "set TODA_SLOW_TESTS=1 to run")
class ThresholdConsistencyTestCase(unittest.TestCase):
    """Tests on the 63x63 grid that the states up to 0.99 of the uniqueness
    thresholds are certified and have no second solution, with h = 1 and
    with a singular source of strength 1 at the center."""

    def test_below_thresholds(self):
        """Tests the certificates and the deflated search."""
        grid = build_grid(63)
        center = SingularSource(grid, 0.5, 0.5, 1.0)
        for family, rank in [("A", 2), ("B", 2), ("G", 2), ("A", 3)]:
            lie = LieFamily(family, rank)
            cartan = build_cartan(lie)
            thresholds = uniqueness_thresholds(lie)
            target = thresholds.at_fraction(0.99)
            configurations = {
                "regular": default_weights(grid, rank),
                "singular": [assemble_weight(grid, zero_f(grid), [center])
                             for _ in range(rank)]}
            for name, weights in configurations.items():
                with self.subTest(algebra=str(lie), weights=name):
                    branch = continuation(grid, cartan, target, 10, weights)
                    self.assertFalse(branch.failed, branch.failure)
                    self.assertEqual(branch.t_values[-1], 1.0)
                    for state in branch.states[1:]:
                        report = nondegeneracy_certificate(state)
                        self.assertTrue(
                            report.certificate,
                            [x.as_dict() for x in report.failures()])
                        self.assertLessEqual(report.margins_max, 1e-8)
                        self.assertGreater(report.coupled_min, 0)
                        for lam in state.lam * np.array(
                                [float(x) for x in thresholds.d]):
                            self.assertLessEqual(report.rho * lam,
                                                 8 * math.pi * (1 + 1e-12))
                    found = deflated_search(grid, cartan, target, weights,
                                            [branch.final], starts=20,
                                            seed=0)
                    self.assertEqual(found, [])


if __name__ == "__main__":
    unittest.main()
