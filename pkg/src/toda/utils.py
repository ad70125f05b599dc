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

"""The utilities of the Toda laboratory.

"""
import os
from pathlib import Path
from typing import Any, Dict, Optional

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured, ValidationError
from django.core.management import CommandError

OUTPUT_DIR = "toda-output"
RESIDUAL_TOLERANCE = 1e-9
STATE_TOLERANCE = 1e-8
MAX_NEWTON_ITERATIONS = 50
DAMPING_FLOOR = 2.0 ** -12
MIN_CONTINUATION_STEP = 1e-4
DEFLATION_POWER = 2
DEFLATION_SHIFT = 1.0
DISTINCT_DISTANCE = 1e-3
POSITIVITY_MARGIN = 1e-10
DENSE_EIGEN_LIMIT = 15
WORKERS = 4

_DEFAULTS: Dict[str, Any] = {
    "OUTPUT_DIR": OUTPUT_DIR,
    "RESIDUAL_TOLERANCE": RESIDUAL_TOLERANCE,
    "STATE_TOLERANCE": STATE_TOLERANCE,
    "MAX_NEWTON_ITERATIONS": MAX_NEWTON_ITERATIONS,
    "DAMPING_FLOOR": DAMPING_FLOOR,
    "MIN_CONTINUATION_STEP": MIN_CONTINUATION_STEP,
    "DEFLATION_POWER": DEFLATION_POWER,
    "DEFLATION_SHIFT": DEFLATION_SHIFT,
    "DISTINCT_DISTANCE": DISTINCT_DISTANCE,
    "POSITIVITY_MARGIN": POSITIVITY_MARGIN,
    "DENSE_EIGEN_LIMIT": DENSE_EIGEN_LIMIT,
    "WORKERS": WORKERS,
}


def get_setting(name: str) -> Any:
    """Returns a setting of the Toda laboratory.  The settings are read from
    the TODA_LAB dictionary of the Django settings, and fall back to the
    defaults of this module.

    Args:
        name: The setting name.

    Returns:
        The setting value.

    Raises:
        KeyError: When the setting is unknown.
    """
    if name not in _DEFAULTS:
        raise KeyError(name)
    try:
        lab = getattr(settings, "TODA_LAB", {})
    except ImproperlyConfigured:
        lab = {}
    return lab.get(name, _DEFAULTS[name])


def get_output_dir(requested: Optional[str] = None) -> Path:
    """Returns the output directory.  The TODA_OUTPUT_DIR environment
    variable overrides both the requested directory and the settings.

    Args:
        requested: The directory requested by the experiment, if any.

    Returns:
        The output directory.
    """
    if "TODA_OUTPUT_DIR" in os.environ:
        return Path(os.environ["TODA_OUTPUT_DIR"])
    if requested is not None and requested != "":
        return Path(requested)
    return Path(get_setting("OUTPUT_DIR"))


class TodaLabError(Exception):
    """The base of the errors raised by the Toda laboratory."""


class InvalidParameterError(TodaLabError, ValueError):
    """Raised when a parameter violates a precondition."""


class SolverError(TodaLabError):
    """Raised when a linear or nonlinear solve fails.

    Args:
        message: The diagnostic.
        last_iterate: The last iterate of the failed solve, if any.

    Attributes:
        last_iterate: The last iterate of the failed solve, if any.
    """

    def __init__(self, message: str, last_iterate: Any = None):
        super().__init__(message)
        self.last_iterate = last_iterate


class EigenSolverError(TodaLabError):
    """Raised when an eigensolver fails to converge or its result fails the
    residual check."""


class CertificateError(TodaLabError):
    """Raised when a certified bound is violated.

    Args:
        message: The diagnostic.
        rank: The offending rank, if any.

    Attributes:
        rank: The offending rank, if any.
    """

    def __init__(self, message: str, rank: Optional[int] = None):
        super().__init__(message)
        self.rank = rank


CONFIG_ERROR = 2
SOLVER_ERROR = 3
CERTIFICATE_ERROR = 4


def exit_code(error: Exception) -> int:
    """Returns the exit code of an error: 2 for a configuration error, 3 for
    a solver failure and 4 for a certificate failure.

    Args:
        error: The error.

    Returns:
        The exit code.
    """
    if isinstance(error, (SolverError, EigenSolverError)):
        return SOLVER_ERROR
    if isinstance(error, CertificateError):
        return CERTIFICATE_ERROR
    return CONFIG_ERROR


def command_error(error: Exception) -> CommandError:
    """Returns the command error that reports an error.

    Args:
        error: A validation error or an error of the laboratory.

    Returns:
        The command error, with the exit code of the error.
    """
    if isinstance(error, ValidationError):
        message = "; ".join(error.messages)
    else:
        message = str(error)
    return CommandError(message, returncode=exit_code(error))
