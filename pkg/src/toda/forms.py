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

"""The forms of the Toda laboratory.

"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from django import forms
from django.core.exceptions import ValidationError
from django.utils.translation import gettext as _

from .cartan import LieFamily, uniqueness_thresholds
from .discretization import build_grid
from .utils import InvalidParameterError
from .validators import validate_family, validate_lambda, validate_point, \
    validate_sources, validate_sweep_values, validate_threshold_fraction

THRESHOLDS = "thresholds"
SOLVE = "solve"
CONTINUATION = "continuation"
CERTIFY = "certify"
SWEEP = "sweep"
DEFLATE = "deflate"
MODES = [THRESHOLDS, SOLVE, CONTINUATION, CERTIFY, SWEEP, DEFLATE]
ZERO = "zero"
QUADRATIC = "quadratic"


class ExperimentConfigForm(forms.Form):
    """The form of an experiment configuration.  The data is the parsed
    JSON of the configuration file, so the values arrive as numbers and
    lists instead of strings.
    """
    family = forms.CharField(
        max_length=1,
        error_messages={
            "required": _("Please fill in the Lie family."),
            "max_length": _("The Lie family is a single letter."),
        },
        validators=[validate_family])
    rank = forms.IntegerField(
        min_value=1,
        error_messages={
            "required": _("Please fill in the rank."),
            "invalid": _("The rank must be an integer."),
            "min_value": _("The rank must be positive."),
        })
    n = forms.IntegerField(
        required=False,
        min_value=7,
        max_value=511,
        error_messages={
            "invalid": _("The grid size must be an integer."),
            "min_value": _("The grid needs at least 7 nodes per axis."),
            "max_value": _("The grid is too large (max. 511 nodes per"
                           " axis)."),
        })
    f_preset = forms.ChoiceField(
        required=False,
        choices=[(ZERO, ZERO), (QUADRATIC, QUADRATIC)],
        error_messages={
            "invalid_choice": _("The f preset must be zero or quadratic."),
        })
    f_coefficient = forms.FloatField(
        required=False,
        min_value=0,
        error_messages={
            "invalid": _("Please fill in a number."),
            "min_value": _("The f coefficient must not be negative."),
        })
    f_center = forms.JSONField(
        required=False,
        validators=[validate_point])
    sources = forms.JSONField(
        required=False,
        validators=[validate_sources])
    threshold_fraction = forms.FloatField(
        required=False,
        error_messages={
            "invalid": _("Please fill in a number."),
        },
        validators=[validate_threshold_fraction])
    mode = forms.ChoiceField(
        required=False,
        choices=[(x, x) for x in MODES],
        error_messages={
            "invalid_choice": _("This run mode does not exist."),
        })
    continuation_steps = forms.IntegerField(
        required=False,
        min_value=1,
        error_messages={
            "invalid": _("The continuation steps must be an integer."),
            "min_value": _("There must be at least one continuation step."),
        })
    deflation_starts = forms.IntegerField(
        required=False,
        min_value=1,
        error_messages={
            "invalid": _("The deflation starts must be an integer."),
            "min_value": _("There must be at least one deflation start."),
        })
    sweep_values = forms.JSONField(
        required=False,
        validators=[validate_sweep_values])
    output_dir = forms.CharField(
        required=False,
        max_length=1024,
        error_messages={
            "max_length": _("The output directory is too long."),
        })
    seed = forms.IntegerField(
        required=False,
        min_value=0,
        error_messages={
            "invalid": _("The seed must be an integer."),
            "min_value": _("The seed must not be negative."),
        })

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # "lambda" is not a valid attribute name.
        self.fields["lambda"] = forms.JSONField(
            required=False, validators=[validate_lambda])

    def clean(self):
        """Validates the form globally.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        errors = []
        validators = [self._validate_keys,
                      self._validate_family_rank,
                      self._validate_parameters,
                      self._validate_sources,
                      self._validate_sweep]
        for validator in validators:
            try:
                validator()
            except forms.ValidationError as e:
                errors.append(e)
        if errors:
            raise forms.ValidationError(errors)
        return self.cleaned_data

    def _validate_keys(self) -> None:
        """Validates that there is no unknown key.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        unknown = sorted(x for x in self.data.keys() if x not in self.fields)
        if unknown:
            raise forms.ValidationError(
                _("Unknown configuration keys: %(keys)s."),
                code="unknown_key", params={"keys": ", ".join(unknown)})

    def _validate_family_rank(self) -> None:
        """Validates that the family and the rank name a simple Lie algebra.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        if "family" not in self.cleaned_data \
                or "rank" not in self.cleaned_data:
            return
        if not LieFamily.is_valid(self.cleaned_data["family"].upper(),
                                  self.cleaned_data["rank"]):
            raise forms.ValidationError(
                _("%(family)s%(rank)s is not a simple Lie algebra."),
                code="invalid_rank",
                params={"family": self.cleaned_data["family"].upper(),
                        "rank": self.cleaned_data["rank"]})

    def _validate_parameters(self) -> None:
        """Validates the parameters against the rank and the run mode.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        if "lambda" in self.errors or "threshold_fraction" in self.errors:
            return
        mode = self.cleaned_data.get("mode") or SOLVE
        lam = self.cleaned_data.get("lambda")
        fraction = self.cleaned_data.get("threshold_fraction")
        if lam is not None and fraction is not None:
            raise forms.ValidationError(
                _("Please fill in either lambda or the threshold fraction,"
                  " not both."), code="both_parameters")
        if mode in (THRESHOLDS, SWEEP):
            return
        if lam is None and fraction is None:
            raise forms.ValidationError(
                _("Please fill in lambda or the threshold fraction."),
                code="no_parameters")
        rank = self.cleaned_data.get("rank")
        if lam is not None and rank is not None and len(lam) != rank:
            raise forms.ValidationError(
                _("There must be %(rank)s parameters."),
                code="lambda_length", params={"rank": rank})

    def _validate_sources(self) -> None:
        """Validates that the sources belong to existing components and snap
        to interior nodes of the grid.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        sources = self.cleaned_data.get("sources")
        rank = self.cleaned_data.get("rank")
        if not sources or rank is None:
            return
        for source in sources:
            if source["component"] > rank:
                raise forms.ValidationError(
                    _("The component of a source exceeds the rank."),
                    code="source_component")
        if "n" in self.errors:
            return
        grid = build_grid(self.cleaned_data.get("n")
                          or ExperimentConfig.DEFAULTS["n"])
        for source in sources:
            try:
                grid.node_index(source["x"], source["y"])
            except InvalidParameterError as e:
                raise forms.ValidationError(
                    _("The source at (%(x)s, %(y)s) is nearer to the"
                      " boundary than to every node of the grid."),
                    code="source_boundary",
                    params={"x": source["x"], "y": source["y"]}) from e

    def _validate_sweep(self) -> None:
        """Validates that a sweep has its values.

        Raises:
            forms.ValidationError: When the validation fails.
        """
        if self.cleaned_data.get("mode") == SWEEP \
                and not self.cleaned_data.get("sweep_values") \
                and "sweep_values" not in self.errors:
            raise forms.ValidationError(
                _("Please fill in the sweep values."),
                code="no_sweep_values")


class ExperimentConfig:
    """A validated experiment configuration.

    Args:
        data: The cleaned data of the configuration form.
    """
    DEFAULTS: Dict[str, Any] = {
        "n": 31,
        "f_preset": ZERO,
        "f_coefficient": 0.0,
        "f_center": [0.5, 0.5],
        "sources": [],
        "mode": SOLVE,
        "continuation_steps": 10,
        "deflation_starts": 20,
        "seed": 0,
    }

    def __init__(self, data: Dict[str, Any]):
        def pick(key: str) -> Any:
            value = data.get(key)
            if value is None or value == "" or value == []:
                return self.DEFAULTS.get(key)
            return value

        self.family: str = data["family"].upper()
        self.rank: int = int(data["rank"])
        self.n: int = int(pick("n"))
        self.f_preset: str = pick("f_preset")
        self.f_coefficient: float = float(pick("f_coefficient"))
        self.f_center: List[float] = [float(x) for x in pick("f_center")]
        self.sources: List[Dict[str, Any]] \
            = [{"component": int(x["component"]), "x": float(x["x"]),
                "y": float(x["y"]), "alpha": float(x["alpha"])}
               for x in pick("sources")]
        self.lam: Optional[List[float]] \
            = None if data.get("lambda") is None \
            else [float(x) for x in data["lambda"]]
        self.threshold_fraction: Optional[float] \
            = None if data.get("threshold_fraction") is None \
            else float(data["threshold_fraction"])
        self.mode: str = pick("mode")
        self.continuation_steps: int = int(pick("continuation_steps"))
        self.deflation_starts: int = int(pick("deflation_starts"))
        self.sweep_values: Optional[List[float]] \
            = None if not data.get("sweep_values") \
            else [float(x) for x in data["sweep_values"]]
        self.output_dir: Optional[str] = data.get("output_dir") or None
        self.seed: int = int(pick("seed"))

    @classmethod
    def parse(cls, data: Any) -> "ExperimentConfig":
        """Validates and parses the data of a configuration.

        Args:
            data: The parsed JSON of the configuration.

        Returns:
            The configuration.

        Raises:
            ValidationError: When the validation fails.
        """
        if not isinstance(data, dict):
            raise ValidationError(_("The configuration must be an object."),
                                  code="not_object")
        form = ExperimentConfigForm(data)
        if not form.is_valid():
            errors = []
            for name, field_errors in form.errors.as_data().items():
                if name == "__all__":
                    errors.extend(field_errors)
                else:
                    errors.extend(_with_field(name, field_errors))
            raise ValidationError(errors)
        return cls(form.cleaned_data)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """Loads a configuration file.

        Args:
            path: The path of the UTF-8 JSON file.

        Returns:
            The configuration.

        Raises:
            ValidationError: When the file cannot be read or the validation
                fails.
        """
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ValidationError(
                _("Cannot read the configuration %(path)s: %(error)s"),
                code="unreadable", params={"path": path, "error": e})
        except ValueError as e:
            raise ValidationError(
                _("The configuration %(path)s is not valid JSON: %(error)s"),
                code="not_json", params={"path": path, "error": e})
        return cls.parse(data)

    @property
    def lie_family(self) -> LieFamily:
        """The Lie algebra."""
        return LieFamily(self.family, self.rank)

    def parameters(self, fraction: Optional[float] = None) -> List[float]:
        """Returns the parameters lambda_i, given directly or as a fraction
        of the uniqueness thresholds.

        Args:
            fraction: The fraction to use instead of the configured one.

        Returns:
            The parameters.
        """
        if fraction is None:
            if self.lam is not None:
                return list(self.lam)
            fraction = self.threshold_fraction
        return uniqueness_thresholds(self.lie_family).at_fraction(fraction)

    def to_dict(self) -> Dict[str, Any]:
        """Serializes the configuration.  Parsing the result gives an equal
        configuration.

        Returns:
            The configuration data.
        """
        data = {"family": self.family, "rank": self.rank, "n": self.n,
                "f_preset": self.f_preset,
                "f_coefficient": self.f_coefficient,
                "f_center": list(self.f_center),
                "sources": [dict(x) for x in self.sources],
                "mode": self.mode,
                "continuation_steps": self.continuation_steps,
                "deflation_starts": self.deflation_starts,
                "seed": self.seed}
        if self.lam is not None:
            data["lambda"] = list(self.lam)
        if self.threshold_fraction is not None:
            data["threshold_fraction"] = self.threshold_fraction
        if self.sweep_values is not None:
            data["sweep_values"] = list(self.sweep_values)
        if self.output_dir is not None:
            data["output_dir"] = self.output_dir
        return data

    def replace(self, **kwargs) -> "ExperimentConfig":
        """Returns a validated copy with some keys replaced.

        Args:
            **kwargs: The keys to replace; None removes a key.

        Returns:
            The new configuration.
        """
        data = self.to_dict()
        for key, value in kwargs.items():
            if value is None:
                data.pop(key, None)
            else:
                data[key] = value
        return ExperimentConfig.parse(data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return F"ExperimentConfig({self.to_dict()!r})"


def _with_field(name: str, errors: List[ValidationError]) \
        -> List[ValidationError]:
    """Prefixes the messages of the errors of a field with its name."""
    return [ValidationError(F"{name}: {' '.join(e.messages)}", code=e.code)
            for e in errors]
