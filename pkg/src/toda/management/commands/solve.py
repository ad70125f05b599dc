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

"""The command to solve the Toda system.

"""
from typing import Any, Dict

from django.core.exceptions import ValidationError
from django.core.management import BaseCommand, CommandParser

from toda.forms import CONTINUATION, DEFLATE, SOLVE, ExperimentConfig
from toda.runner import run
from toda.utils import TodaLabError, command_error


class Command(BaseCommand):
    """Solves the Toda system."""
    help = ("Solves the Toda system by Newton, by continuation from the"
            " trivial solution, or with a deflated search for other"
            " solutions.")

    def add_arguments(self, parser: CommandParser) -> None:
        """Adds command line arguments to the parser.

        Args:
            parser (CommandParser): The command line argument parser.
        """
        parser.add_argument("--config", "-c",
                            help="The experiment file with the weights")
        parser.add_argument("--family", help="The family, A to G")
        parser.add_argument("--rank", type=int, help="The rank")
        parser.add_argument("--n", type=int,
                            help="The interior nodes per side")
        parser.add_argument("--lambda", dest="lam", type=float, nargs="+",
                            help="The parameters lambda_i")
        parser.add_argument("--at-threshold", type=float, metavar="S",
                            help="Use s times the uniqueness thresholds")
        parser.add_argument("--continuation", type=int, metavar="STEPS",
                            help="Continue from the trivial solution in"
                                 " this many steps")
        parser.add_argument("--deflate", type=int, metavar="STARTS",
                            help="Search for other solutions from this many"
                                 " random starts")
        parser.add_argument("--seed", type=int,
                            help="The seed of the random starts")
        parser.add_argument("--output-dir", help="The output directory")

    def handle(self, *args, **options):
        """Runs the command.

        Args:
            *args (list[str]): The command line arguments.
            **options (dict[str,str]): The command line switches.
        """
        try:
            config = ExperimentConfig.parse(self._config_data(options))
            manifest = run(config, options["output_dir"])
        except (ValidationError, TodaLabError) as e:
            raise command_error(e) from e
        for stage in manifest.stages:
            self.stdout.write(", ".join(F"{key}: {value}"
                                        for key, value in stage.items()))
        self.stdout.write(F"Wrote {len(manifest.inventory)} files to"
                          F" {manifest.output_dir}.")

    @staticmethod
    def _config_data(options: Dict[str, Any]) -> Dict[str, Any]:
        """Returns the configuration data from the experiment file and the
        command line switches, the switches taking precedence.

        Args:
            options: The command line switches.

        Returns:
            The configuration data.
        """
        data = {} if options["config"] is None \
            else ExperimentConfig.load(options["config"]).to_dict()
        for key in ["family", "rank", "n", "seed"]:
            if options[key] is not None:
                data[key] = options[key]
        if options["lam"] is not None:
            data.pop("threshold_fraction", None)
            data["lambda"] = options["lam"]
        if options["at_threshold"] is not None:
            data.pop("lambda", None)
            data["threshold_fraction"] = options["at_threshold"]
        data.setdefault("mode", SOLVE)
        if options["continuation"] is not None:
            data["mode"] = CONTINUATION
            data["continuation_steps"] = options["continuation"]
        if options["deflate"] is not None:
            data["mode"] = DEFLATE
            data["deflation_starts"] = options["deflate"]
        return data
