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

"""The test cases of the discretization of the unit square.

"""
import math
import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from toda.discretization import GridField, SingularSource, assemble_weight, \
    build_grid, dirichlet_eigenvalues, dirichlet_eigenvalues_exact, \
    gradient_form, greens_function, greens_function_reference, \
    greens_functions, integrate, laplacian_apply, poisson_solve, \
    quadratic_f, read_field_cache, write_field_cache, write_green_cache, \
    xyz_rows, zero_f
from toda.utils import InvalidParameterError

SLOW = os.environ.get("TODA_SLOW_TESTS") == "1"


def sine_mode(grid, i=1, j=1):
    """Returns the sine mode sin(i pi x) sin(j pi y) on a grid.

    Args:
        grid: The grid.
        i: The x frequency.
        j: The y frequency.

    Returns:
        The sine mode.
    """
    return GridField(grid, np.sin(i * math.pi * grid.x)
                     * np.sin(j * math.pi * grid.y))


class GridTestCase(unittest.TestCase):
    """Tests the grid and the fields."""

    def test_grid(self):
        """Tests the grid geometry."""
        grid = build_grid(7)
        self.assertEqual(grid.size, 49)
        self.assertAlmostEqual(grid.h, 0.125)
        self.assertEqual(grid.node_index(0.5, 0.5), 24)
        self.assertEqual(grid.node_point(24), (0.5, 0.5))
        self.assertEqual(grid.node_index(0.13, 0.24), 7)
        self.assertEqual(grid.boundary_adjacent()[0], 2)
        self.assertEqual(grid.boundary_adjacent()[24], 0)
        with self.assertRaises(InvalidParameterError):
            build_grid(6)
        with self.assertRaises(InvalidParameterError):
            grid.node_index(0.0, 0.5)
        with self.assertRaises(InvalidParameterError):
            grid.node_index(0.99, 0.5)

    def test_field(self):
        """Tests the field values."""
        grid = build_grid(7)
        field = GridField(grid, 2.0, boundary_constant=-3.0)
        self.assertEqual(field.values.shape, (49,))
        self.assertEqual(field.sup_norm(), 3.0)
        self.assertEqual((field + field).boundary_constant, -6.0)
        self.assertEqual((field - field).sup_norm(), 0.0)
        self.assertEqual(field.scaled(0.5).values[0], 1.0)
        with self.assertRaises(ValueError):
            field.values[0] = 1.0
        with self.assertRaises(InvalidParameterError):
            GridField(grid, np.zeros(48))
        with self.assertRaises(InvalidParameterError):
            GridField(grid, math.nan)


class PoissonTestCase(unittest.TestCase):
    """Tests the Poisson solves and the Green's functions."""

    def test_sine_mode(self):
        """Tests that a sine mode is an eigenfunction of -Delta_h."""
        grid = build_grid(31)
        phi = sine_mode(grid)
        expected = 8 / grid.h ** 2 * math.sin(math.pi * grid.h / 2) ** 2
        np.testing.assert_allclose(laplacian_apply(grid, phi).values,
                                   expected * phi.values, atol=1e-9)
        u = poisson_solve(grid, phi)
        np.testing.assert_allclose(u.values, phi.values / expected,
                                   atol=1e-12)

    def test_green_symmetry(self):
        """Tests that the discrete Green's function is symmetric with unit
        mass."""
        grid = build_grid(31)
        p = grid.node_index(0.25, 0.5)
        q = grid.node_index(0.75, 0.375)
        g_p, g_q = greens_functions(grid, [p, q])
        self.assertAlmostEqual(g_p.values[q], g_q.values[p], delta=1e-9)
        self.assertAlmostEqual(
            integrate(grid, laplacian_apply(grid, g_p)), 1.0, delta=1e-12)
        np.testing.assert_allclose(greens_function(grid, p).values,
                                   g_p.values, atol=1e-12)
        self.assertTrue(np.all(g_p.values > 0))
        with self.assertRaises(InvalidParameterError):
            greens_function(grid, grid.size)

    def test_green_reference(self):
        """Tests the discrete Green's function against the sine series of
        the continuous one away from the pole."""
        grid = build_grid(63)
        pole = grid.node_index(0.5, 0.5)
        green = greens_function(grid, pole)
        px, py = grid.node_point(pole)
        distance = np.hypot(grid.x - px, grid.y - py)
        nodes = np.nonzero((distance >= 0.1) & (distance <= 0.2))[0]
        for node in nodes[::7]:
            x, y = grid.node_point(node)
            with self.subTest(x=x, y=y):
                reference = greens_function_reference(x, y, px, py)
                self.assertAlmostEqual(green.values[node] / reference, 1.0,
                                       delta=0.05)

    def test_reference_log(self):
        """Tests the logarithmic singularity of the sine series."""
        near = greens_function_reference(0.5, 0.51, 0.5, 0.5, terms=20000)
        nearer = greens_function_reference(0.5, 0.501, 0.5, 0.5,
                                           terms=20000)
        self.assertAlmostEqual(nearer - near, math.log(10) / (2 * math.pi),
                               delta=1e-3)


class QuadratureTestCase(unittest.TestCase):
    """Tests the quadrature."""

    def test_integrate(self):
        """Tests the integrals of the constant and of a sine mode."""
        grid = build_grid(31)
        self.assertAlmostEqual(integrate(grid, GridField(grid, 1.0)),
                               (31 / 32) ** 2, delta=1e-12)
        self.assertAlmostEqual(
            integrate(grid, sine_mode(grid)) / (4 / math.pi ** 2), 1.0,
            delta=1e-2)

    def test_gradient_form(self):
        """Tests the discrete gradient form on a sine mode."""
        grid = build_grid(31)
        phi = sine_mode(grid)
        eigenvalue = 8 / grid.h ** 2 * math.sin(math.pi * grid.h / 2) ** 2
        self.assertAlmostEqual(
            gradient_form(grid, phi, phi)
            / (eigenvalue * integrate(grid, phi.values ** 2)), 1.0,
            delta=1e-12)
        self.assertAlmostEqual(
            gradient_form(grid, phi, sine_mode(grid, 2, 1)), 0.0,
            delta=1e-10)


class DirichletEigenvalueTestCase(unittest.TestCase):
    """Tests the Dirichlet eigenvalues of -Delta_h."""

    def test_closed_form(self):
        """Tests the eigensolver against the closed form."""
        grid = build_grid(15)
        np.testing.assert_allclose(dirichlet_eigenvalues(grid, 4),
                                   dirichlet_eigenvalues_exact(grid, 4),
                                   rtol=1e-10)
        self.assertAlmostEqual(
            dirichlet_eigenvalues_exact(grid)[0],
            8 / grid.h ** 2 * math.sin(math.pi * grid.h / 2) ** 2,
            delta=1e-10)

    def test_convergence_order(self):
        """Tests the second order convergence to 2 pi^2."""
        errors = [abs(dirichlet_eigenvalues(build_grid(n))[0]
                      - 2 * math.pi ** 2) for n in (15, 31, 63)]
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreaterEqual(math.log2(coarse / fine), 1.9)


class WeightTestCase(unittest.TestCase):
    """Tests the weights."""

    def test_no_source(self):
        """Tests the weights without singular sources."""
        grid = build_grid(15)
        weight = assemble_weight(grid, zero_f(grid), [])
        np.testing.assert_array_equal(weight.values, np.ones(grid.size))
        f = quadratic_f(grid, 2.0, (0.25, 0.75))
        weight = assemble_weight(grid, f, [])
        np.testing.assert_allclose(weight.values, np.exp(f.values))
        self.assertEqual(weight.source_nodes(), [])

    def test_singular_source(self):
        """Tests the vanishing of the weight at a singular source."""
        grid = build_grid(15)
        source = SingularSource(grid, 0.5, 0.5, 1.0)
        weight = assemble_weight(grid, zero_f(grid), [source])
        self.assertEqual(weight.values[source.node], 0.0)
        self.assertTrue(np.all(weight.values <= 1.0))
        neighbor = source.node + 1
        far = grid.node_index(0.0625, 0.0625)
        self.assertLess(weight.values[neighbor], weight.values[far])
        self.assertEqual(weight.source_nodes(), [source.node])

    def test_bad_source(self):
        """Tests the rejected sources."""
        grid = build_grid(15)
        with self.assertRaises(InvalidParameterError):
            SingularSource(grid, 0.5, 0.5, -1.0)
        with self.assertRaises(InvalidParameterError):
            SingularSource(grid, 0.5, 0.5, 0.0)
        with self.assertRaises(InvalidParameterError):
            SingularSource(grid, 1.5, 0.5, 1.0)


class CacheTestCase(unittest.TestCase):
    """Tests the field caches and the XYZ exports."""

    def test_green_cache(self):
        """Tests writing and reading a Green's function cache."""
        grid = build_grid(7)
        source = SingularSource(grid, 0.25, 0.5, 0.5)
        green = greens_function(grid, source.node)
        with tempfile.TemporaryDirectory() as temp:
            path = write_green_cache(Path(temp) / "green.bin", grid, source,
                                     green)
            header, values = read_field_cache(path)
            self.assertEqual(header, {"N": 7, "p": [0.25, 0.5],
                                      "alpha": 0.5})
            np.testing.assert_array_equal(values, green.values)
            data = path.read_bytes()
            self.assertEqual(len(data) - data.index(b"\n") - 1, 49 * 8)

    def test_bad_cache(self):
        """Tests the rejected cache files."""
        grid = build_grid(7)
        with tempfile.TemporaryDirectory() as temp:
            path = Path(temp) / "field.bin"
            write_field_cache(path, grid, GridField(grid, 1.0))
            path.write_bytes(path.read_bytes()[:-8])
            with self.assertRaises(InvalidParameterError):
                read_field_cache(path)
            path.write_bytes(b"no header")
            with self.assertRaises(InvalidParameterError):
                read_field_cache(path)

    def test_xyz(self):
        """Tests the XYZ rows with the boundary."""
        grid = build_grid(7)
        rows = list(xyz_rows(grid, GridField(grid, 1.0, 0.5)))
        self.assertEqual(len(rows), 9 * 9 + 9)
        self.assertEqual(rows[0], (0.0, 0.0, 0.5))
        self.assertEqual(rows[9], ())
        self.assertEqual(rows[11], (0.125, 0.125, 1.0))


if __name__ == "__main__":
    unittest.main()
