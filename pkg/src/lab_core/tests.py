# The core application of the Toda laboratory.
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

"""The test cases of the core application.

"""
import json
import math
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from .utils import format_number, to_json


class ToJsonTestCase(SimpleTestCase):
    """Tests the to_json() utility."""

    def test_non_finite(self):
        """Tests that the infinite and the NaN floats become null."""
        def reject(constant):
            raise ValueError(F"{constant} is not valid JSON")

        text = to_json({"coupled_min": math.inf, "mu1": [1.5, -math.inf],
                        "nu": np.array([math.nan, 2.0]),
                        "rho": np.float64(math.inf), "pass": True})
        self.assertNotIn("Infinity", text)
        self.assertNotIn("NaN", text)
        self.assertEqual(json.loads(text, parse_constant=reject),
                         {"coupled_min": None, "mu1": [1.5, None],
                          "nu": [None, 2.0], "rho": None, "pass": True})

    def test_values(self):
        """Tests the NumPy scalars, the fractions and the key order."""
        text = to_json({"b": np.int64(3), "a": Fraction(1, 3),
                        "c": (np.float64(0.1), np.bool_(True))})
        self.assertEqual(json.loads(text),
                         {"a": "1/3", "b": 3, "c": [0.1, True]})
        self.assertLess(text.index("\"a\""), text.index("\"b\""))
        self.assertTrue(text.endswith("\n"))


class FormatNumberTestCase(SimpleTestCase):
    """Tests the format_number() utility."""

    def test_format(self):
        """Tests the 17 significant digits and the other values."""
        self.assertEqual(format_number(0.1), "0.10000000000000001")
        self.assertEqual(float(format_number(math.pi)), math.pi)
        self.assertEqual(format_number(np.int32(7)), "7")
        self.assertEqual(format_number(True), "1")
        self.assertEqual(format_number(Fraction(2, 3)), "2/3")
        self.assertEqual(format_number(None), "")
