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

"""The command to precompute the Green's functions of the singular sources
and the weights of an experiment.

"""
from django.core.exceptions import ValidationError
from django.core.management import BaseCommand, CommandParser

from toda.discretization import SingularSource, build_grid, \
    greens_functions, write_green_cache, write_xyz
from toda.forms import ExperimentConfig
from toda.runner import RunManifest, weights_from_config
from toda.utils import TodaLabError, command_error, get_output_dir


class Command(BaseCommand):
    """Precomputes the Green's functions and the weights of an experiment."""
    help = ("Precomputes and caches the Green's functions of the singular"
            " sources and the weights of an experiment.")

    def add_arguments(self, parser: CommandParser) -> None:
        """Adds command line arguments to the parser.

        Args:
            parser (CommandParser): The command line argument parser.
        """
        parser.add_argument("config", help="The experiment file")
        parser.add_argument("--output-dir", help="The output directory")

    def handle(self, *args, **options):
        """Runs the command.

        Args:
            *args (list[str]): The command line arguments.
            **options (dict[str,str]): The command line switches.
        """
        try:
            config = ExperimentConfig.load(options["config"])
            output_dir = get_output_dir(options["output_dir"]
                                        or config.output_dir)
            grid = build_grid(config.n)
            sources = [SingularSource(grid, x["x"], x["y"], x["alpha"])
                       for x in config.sources]
            manifest = RunManifest(output_dir, config, "domain-manifest.json")
            greens = greens_functions(grid, [x.node for x in sources])
            for k, (source, green) in enumerate(zip(sources, greens)):
                manifest.add_file(write_green_cache(
                    output_dir / F"green_{k + 1}.bin", grid, source, green))
            for i, weight in enumerate(weights_from_config(grid, config)):
                manifest.add_file(write_xyz(
                    output_dir / F"h_{i + 1}.xyz", grid, weight.h_values,
                    F"h_{i + 1} of {config.lie_family}"))
            manifest.add_stage("domain", n=config.n, sources=len(sources))
            manifest.write()
        except (ValidationError, TodaLabError) as e:
            raise command_error(e) from e
        self.stdout.write(F"Cached {len(sources)} Green's functions on the"
                          F" {config.n}x{config.n} grid in {output_dir}.")
