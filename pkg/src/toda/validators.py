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

"""The validators of the experiment configurations.

"""
import math
from numbers import Real
from typing import Any

from django.core.exceptions import ValidationError
from django.utils.translation import gettext as _

from .cartan import FAMILIES

MAX_THRESHOLD_FRACTION = 1.2
SOURCE_KEYS = {"component", "x", "y", "alpha"}


def _is_number(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool) \
        and math.isfinite(value)


def validate_family(value: str) -> None:
    """Validates a Lie family letter.

    Args:
        value: The family letter.

    Raises:
        ValidationError: When the validation fails.
    """
    if len(value) != 1 or value.upper() not in FAMILIES:
        raise ValidationError(_("This Lie family does not exist."),
                              code="unknown_family")


def validate_threshold_fraction(value: float) -> None:
    """Validates a fraction of the uniqueness thresholds.

    Args:
        value: The fraction.

    Raises:
        ValidationError: When the validation fails.
    """
    if not 0 <= value <= MAX_THRESHOLD_FRACTION:
        raise ValidationError(
            _("The threshold fraction must be between 0 and %(max)s."),
            code="fraction_range",
            params={"max": MAX_THRESHOLD_FRACTION})


def validate_lambda(value: Any) -> None:
    """Validates a parameter vector.

    Args:
        value: The parameters.

    Raises:
        ValidationError: When the validation fails.
    """
    if not isinstance(value, list) or len(value) == 0:
        raise ValidationError(_("Please fill in the parameters as a list."),
                              code="not_list")
    for x in value:
        if not _is_number(x):
            raise ValidationError(_("Every parameter must be a number."),
                                  code="not_number")
        if x < 0:
            raise ValidationError(_("The parameters must not be negative."),
                                  code="negative")


def validate_point(value: Any) -> None:
    """Validates a point strictly inside the unit square.

    Args:
        value: The point, as a list [x, y].

    Raises:
        ValidationError: When the validation fails.
    """
    if not isinstance(value, list) or len(value) != 2 \
            or not all(_is_number(x) for x in value):
        raise ValidationError(_("A point must be a list of two numbers."),
                              code="not_point")
    if not all(0 < x < 1 for x in value):
        raise ValidationError(
            _("The point must be strictly inside the unit square."),
            code="outside")


def validate_sources(value: Any) -> None:
    """Validates the singular sources.

    Args:
        value: The sources, as a list of {component, x, y, alpha}.

    Raises:
        ValidationError: When the validation fails.
    """
    if not isinstance(value, list):
        raise ValidationError(_("The sources must be a list."),
                              code="not_list")
    for source in value:
        if not isinstance(source, dict) or set(source.keys()) != SOURCE_KEYS:
            raise ValidationError(
                _("A source must have exactly the keys component, x, y and"
                  " alpha."), code="source_keys")
        if isinstance(source["component"], bool) \
                or not isinstance(source["component"], int) \
                or source["component"] < 1:
            raise ValidationError(
                _("The component of a source must be a positive integer."),
                code="source_component")
        validate_point([source["x"], source["y"]])
        if not _is_number(source["alpha"]) or source["alpha"] <= 0:
            raise ValidationError(
                _("The strength of a source must be positive."),
                code="alpha_positive")


def validate_sweep_values(value: Any) -> None:
    """Validates the threshold fractions of a sweep.

    Args:
        value: The fractions.

    Raises:
        ValidationError: When the validation fails.
    """
    if not isinstance(value, list) or len(value) == 0:
        raise ValidationError(_("The sweep values must be a list."),
                              code="not_list")
    for x in value:
        if not _is_number(x):
            raise ValidationError(_("Every sweep value must be a number."),
                                  code="not_number")
        validate_threshold_fraction(x)
