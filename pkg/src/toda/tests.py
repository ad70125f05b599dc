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

"""The test cases of the experiment configuration of the Toda laboratory.

"""
import json
import math
import tempfile
from pathlib import Path

from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .forms import CERTIFY, SOLVE, SWEEP, THRESHOLDS, ExperimentConfig
from .utils import CERTIFICATE_ERROR, CONFIG_ERROR, SOLVER_ERROR, \
    CertificateError, EigenSolverError, InvalidParameterError, \
    SolverError, command_error, exit_code
from .validators import validate_point, validate_sources, \
    validate_sweep_values


class ExperimentConfigTestCase(SimpleTestCase):
    """Tests the validation of the experiment configurations."""

    def assertInvalid(self, data, message):
        """Asserts that a configuration is rejected.

        Args:
            data: The configuration data.
            message: A part of the expected message.
        """
        with self.assertRaises(ValidationError) as context:
            ExperimentConfig.parse(data)
        self.assertIn(message, " ".join(context.exception.messages))

    def test_defaults(self):
        """Tests the defaults of a minimal configuration."""
        config = ExperimentConfig.parse(
            {"family": "a", "rank": 2, "lambda": [1, 2.5]})
        self.assertEqual(config.family, "A")
        self.assertEqual(config.rank, 2)
        self.assertEqual(config.n, 31)
        self.assertEqual(config.mode, SOLVE)
        self.assertEqual(config.sources, [])
        self.assertEqual(config.f_center, [0.5, 0.5])
        self.assertEqual(config.parameters(), [1.0, 2.5])
        self.assertIsNone(config.output_dir)

    def test_threshold_fraction(self):
        """Tests the parameters as a fraction of the thresholds."""
        config = ExperimentConfig.parse(
            {"family": "A", "rank": 2, "threshold_fraction": 0.5})
        for x in config.parameters():
            self.assertAlmostEqual(x, 0.5 * 8 * math.pi / 3, delta=1e-12)
        self.assertEqual(config.parameters(0.0), [0.0, 0.0])
        ExperimentConfig.parse(
            {"family": "A", "rank": 2, "threshold_fraction": 1.2})
        self.assertInvalid(
            {"family": "A", "rank": 2, "threshold_fraction": 1.3},
            "between 0 and 1.2")
        self.assertInvalid(
            {"family": "A", "rank": 2, "threshold_fraction": -0.1},
            "between 0 and 1.2")

    def test_unknown_key(self):
        """Tests the rejected unknown keys."""
        self.assertInvalid(
            {"family": "A", "rank": 2, "lambda": [1, 1], "lamda": [1, 1]},
            "Unknown configuration keys: lamda")

    def test_family_rank(self):
        """Tests the rejected Lie algebras."""
        self.assertInvalid({"family": "G", "rank": 3, "lambda": [1, 1, 1]},
                           "G3 is not a simple Lie algebra")
        self.assertInvalid({"family": "D", "rank": 2, "lambda": [1, 1]},
                           "D2 is not a simple Lie algebra")
        self.assertInvalid({"family": "H", "rank": 2, "lambda": [1, 1]},
                           "does not exist")
        self.assertInvalid({"family": "A", "rank": 0, "lambda": []},
                           "rank must be positive")
        self.assertInvalid({"rank": 2, "lambda": [1, 1]},
                           "fill in the Lie family")

    def test_parameters(self):
        """Tests the rejected parameters."""
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1]},
                           "There must be 2 parameters")
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1, -1]},
                           "must not be negative")
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1, "x"]},
                           "must be a number")
        self.assertInvalid({"family": "A", "rank": 2},
                           "lambda or the threshold fraction")
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1, 1],
                            "threshold_fraction": 0.5}, "not both")
        config = ExperimentConfig.parse(
            {"family": "E", "rank": 6, "mode": THRESHOLDS})
        self.assertIsNone(config.lam)

    def test_sources(self):
        """Tests the singular sources."""
        source = {"component": 1, "x": 0.25, "y": 0.5, "alpha": 0.5}
        config = ExperimentConfig.parse(
            {"family": "A", "rank": 2, "lambda": [1, 1],
             "sources": [source]})
        self.assertEqual(config.sources, [source])
        self.assertInvalid(
            {"family": "A", "rank": 2, "lambda": [1, 1],
             "sources": [dict(source, alpha=-1)]},
            "strength of a source must be positive")
        self.assertInvalid(
            {"family": "A", "rank": 2, "lambda": [1, 1],
             "sources": [dict(source, component=3)]},
            "exceeds the rank")
        self.assertInvalid(
            {"family": "A", "rank": 2, "lambda": [1, 1],
             "sources": [dict(source, x=1.0)]},
            "inside the unit square")

    def test_source_snapping(self):
        """Tests the sources that snap to the boundary of the grid."""
        source = {"component": 1, "x": 0.03, "y": 0.5, "alpha": 1.0}
        self.assertInvalid(
            {"family": "A", "rank": 2, "lambda": [1, 1], "n": 7,
             "sources": [source]},
            "nearer to the boundary than to every node")
        config = ExperimentConfig.parse(
            {"family": "A", "rank": 2, "lambda": [1, 1],
             "sources": [source]})
        self.assertEqual(config.n, 31)
        self.assertEqual(config.sources, [source])

    def test_modes(self):
        """Tests the run modes."""
        self.assertInvalid({"family": "A", "rank": 2, "mode": SWEEP},
                           "sweep values")
        config = ExperimentConfig.parse(
            {"family": "A", "rank": 2, "mode": SWEEP,
             "sweep_values": [0.5, 1.0]})
        self.assertEqual(config.sweep_values, [0.5, 1.0])
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1, 1],
                            "mode": "optimize"}, "run mode does not exist")
        self.assertInvalid({"family": "A", "rank": 2, "lambda": [1, 1],
                            "n": 5}, "at least 7 nodes")

    def test_round_trip(self):
        """Tests that parsing the serialized configuration gives an equal
        configuration."""
        config = ExperimentConfig.parse(
            {"family": "B", "rank": 3, "n": 15, "threshold_fraction": 0.9,
             "f_preset": "quadratic", "f_coefficient": 2.0,
             "f_center": [0.25, 0.75],
             "sources": [{"component": 3, "x": 0.5, "y": 0.5,
                          "alpha": 1.5}],
             "mode": CERTIFY, "seed": 7, "output_dir": "out"})
        self.assertEqual(ExperimentConfig.parse(config.to_dict()), config)
        self.assertEqual(ExperimentConfig.parse(
            json.loads(json.dumps(config.to_dict()))), config)
        other = config.replace(mode=SOLVE, seed=None)
        self.assertEqual(other.mode, SOLVE)
        self.assertEqual(other.seed, 0)
        self.assertEqual(config.mode, CERTIFY)
        self.assertNotEqual(other, config)

    def test_load(self):
        """Tests loading the configuration files."""
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "config.json"
            path.write_text(json.dumps(
                {"family": "G", "rank": 2, "lambda": [1, 2]}),
                encoding="utf-8")
            self.assertEqual(ExperimentConfig.load(path).parameters(),
                             [1.0, 2.0])
            path.write_text("{\"family\": ", encoding="utf-8")
            with self.assertRaises(ValidationError):
                ExperimentConfig.load(path)
            with self.assertRaises(ValidationError):
                ExperimentConfig.load(Path(directory) / "missing.json")
        with self.assertRaises(ValidationError):
            ExperimentConfig.parse([1, 2])


class ValidatorTestCase(SimpleTestCase):
    """Tests the validators of the configuration values."""

    def test_point(self):
        """Tests the points."""
        validate_point([0.5, 0.5])
        for point in [[0, 0.5], [0.5], [0.5, "0.5"], [0.5, math.nan], 1]:
            with self.subTest(point=point):
                with self.assertRaises(ValidationError):
                    validate_point(point)

    def test_sources(self):
        """Tests the source lists."""
        validate_sources([])
        with self.assertRaises(ValidationError):
            validate_sources({"component": 1})
        with self.assertRaises(ValidationError):
            validate_sources([{"component": 1, "x": 0.5, "y": 0.5}])
        with self.assertRaises(ValidationError):
            validate_sources([{"component": True, "x": 0.5, "y": 0.5,
                               "alpha": 1}])

    def test_sweep_values(self):
        """Tests the sweep values."""
        validate_sweep_values([0.1, 1.2])
        for values in [[], [0.5, 1.5], ["0.5"], 0.5]:
            with self.subTest(values=values):
                with self.assertRaises(ValidationError):
                    validate_sweep_values(values)


class ExitCodeTestCase(SimpleTestCase):
    """Tests the exit codes of the errors."""

    def test_exit_code(self):
        """Tests the exit codes."""
        self.assertEqual(exit_code(ValidationError("bad")), CONFIG_ERROR)
        self.assertEqual(exit_code(InvalidParameterError("bad")),
                         CONFIG_ERROR)
        self.assertEqual(exit_code(SolverError("bad")), SOLVER_ERROR)
        self.assertEqual(exit_code(EigenSolverError("bad")), SOLVER_ERROR)
        self.assertEqual(exit_code(CertificateError("bad", 2)),
                         CERTIFICATE_ERROR)

    def test_command_error(self):
        """Tests the command errors."""
        error = command_error(ValidationError(["first", "second"]))
        self.assertEqual(str(error), "first; second")
        self.assertEqual(error.returncode, CONFIG_ERROR)
        error = command_error(CertificateError("mu2 of component 2", 2))
        self.assertEqual(str(error), "mu2 of component 2")
        self.assertEqual(error.returncode, CERTIFICATE_ERROR)
