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

"""The command to sweep the threshold fraction.

"""
from django.core.exceptions import ValidationError
from django.core.management import BaseCommand, CommandParser

from toda.forms import SWEEP, ExperimentConfig
from toda.runner import run
from toda.utils import TodaLabError, command_error


class Command(BaseCommand):
    """Sweeps the threshold fraction."""
    help = ("Continues the Toda system to a sequence of fractions of the"
            " uniqueness thresholds and certifies each final state.")

    def add_arguments(self, parser: CommandParser) -> None:
        """Adds command line arguments to the parser.

        Args:
            parser (CommandParser): The command line argument parser.
        """
        parser.add_argument("config", help="The experiment file")
        parser.add_argument("--values", type=float, nargs="+",
                            help="The threshold fractions, by default those"
                                 " of the experiment")
        parser.add_argument("--output-dir", help="The output directory")

    def handle(self, *args, **options):
        """Runs the command.

        Args:
            *args (list[str]): The command line arguments.
            **options (dict[str,str]): The command line switches.
        """
        try:
            config = ExperimentConfig.load(options["config"])
            changes = {"mode": SWEEP}
            if options["values"] is not None:
                changes["sweep_values"] = options["values"]
            config = config.replace(**changes)
            manifest = run(config, options["output_dir"])
        except (ValidationError, TodaLabError) as e:
            raise command_error(e) from e
        stage = manifest.stages[-1]
        self.stdout.write(F"{stage['passed']} of {stage['points']} sweep"
                          F" points passed; wrote {manifest.output_dir}.")
