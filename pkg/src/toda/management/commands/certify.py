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

"""The command to certify a stored solution non-degenerate.

"""
from django.core.exceptions import ValidationError
from django.core.management import BaseCommand, CommandParser

from lab_core.utils import format_number
from toda.runner import certify_run
from toda.utils import TodaLabError, command_error


class Command(BaseCommand):
    """Certifies a stored solution non-degenerate."""
    help = ("Reloads the final state of a solve from its manifest, and"
            " certifies it non-degenerate by the weighted eigenvalue"
            " problems.")

    def add_arguments(self, parser: CommandParser) -> None:
        """Adds command line arguments to the parser.

        Args:
            parser (CommandParser): The command line argument parser.
        """
        parser.add_argument("manifest", help="The manifest of the solve")
        parser.add_argument("--output-dir",
                            help="The output directory, by default that of"
                                 " the solve")

    def handle(self, *args, **options):
        """Runs the command.

        Args:
            *args (list[str]): The command line arguments.
            **options (dict[str,str]): The command line switches.
        """
        try:
            manifest = certify_run(options["manifest"], options["output_dir"])
        except (ValidationError, TodaLabError) as e:
            raise command_error(e) from e
        stage = manifest.stages[-1]
        self.stdout.write(F"Certified {stage['passed']} of {stage['points']}"
                          F" states (residual"
                          F" {format_number(manifest.stages[0]['residual'])}"
                          F").")
