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

"""The command to tabulate the spectral data and the uniqueness thresholds
of the Cartan matrices.

"""
from pathlib import Path
from typing import Any, Dict, List

from django.core.management import BaseCommand, CommandParser

from lab_core.utils import text_table, to_json, write_json
from toda.cartan import CLOSED_FORM, DENSE_EIG, FAMILIES, RECURSION_BOUND, \
    LieFamily, build_cartan, spectral_radius, symmetric_decomposition, \
    uniqueness_thresholds, verify_radius_bounds
from toda.runner import THRESHOLD_HEADINGS, threshold_rows
from toda.utils import InvalidParameterError, TodaLabError, command_error


class Command(BaseCommand):
    """Tabulates the spectral data and the uniqueness thresholds of the
    Cartan matrices."""
    help = ("Tabulates the spectral radius, the spectrum and the uniqueness"
            " thresholds of the Cartan matrices of a family.")

    def add_arguments(self, parser: CommandParser) -> None:
        """Adds command line arguments to the parser.

        Args:
            parser (CommandParser): The command line argument parser.
        """
        parser.add_argument("family",
                            choices=list(FAMILIES + FAMILIES.lower()),
                            help="The family, A to G")
        parser.add_argument("rank", nargs="?", type=int,
                            help="The rank, or every valid rank by default")
        parser.add_argument("--max-rank", type=int, default=10,
                            help="The maximum rank (default 10)")
        parser.add_argument("--thresholds", action="store_true",
                            help="Include the uniqueness thresholds")
        parser.add_argument("--spectrum", action="store_true",
                            help="Include the spectrum")
        parser.add_argument("--method",
                            choices=[CLOSED_FORM, DENSE_EIG, RECURSION_BOUND],
                            help="The method of the spectrum")
        parser.add_argument("--verify-bounds", type=int, metavar="MAX_RANK",
                            help="Verify the spectral radius bounds up to a"
                                 " rank")
        parser.add_argument("--table", action="store_true",
                            help="Print an aligned text table as well")
        parser.add_argument("--output", "-o",
                            help="The JSON file, or the standard output by"
                                 " default")

    def handle(self, *args, **options):
        """Runs the command.

        Args:
            *args (list[str]): The command line arguments.
            **options (dict[str,str]): The command line switches.
        """
        family = options["family"].upper()
        try:
            if options["verify_bounds"] is not None:
                report = verify_radius_bounds(family, options["verify_bounds"])
                self._emit(report.as_dicts(), options["output"])
                self.stdout.write(F"The radius bounds of {family} hold up to"
                                  F" rank {options['verify_bounds']}.")
                return
            ranks = self._ranks(family, options)
            records = [self._record(LieFamily(family, x), options)
                       for x in ranks]
            self._emit(records, options["output"])
            if options["table"]:
                rows = [x for x in threshold_rows(
                    family, max(ranks), options["method"]) if x[1] in ranks]
                self.stdout.write(text_table(THRESHOLD_HEADINGS, rows),
                                  ending="")
        except TodaLabError as e:
            raise command_error(e) from e

    @staticmethod
    def _ranks(family: str, options: Dict[str, Any]) -> List[int]:
        if options["rank"] is not None:
            if not LieFamily.is_valid(family, options["rank"]):
                raise InvalidParameterError(
                    F"{family}{options['rank']} is not a valid algebra")
            return [options["rank"]]
        return LieFamily.valid_ranks(family, options["max_rank"])

    @staticmethod
    def _record(lie: LieFamily, options: Dict[str, Any]) -> Dict[str, Any]:
        decomposition = symmetric_decomposition(build_cartan(lie))
        spectrum = spectral_radius(decomposition, options["method"])
        record = {"family": lie.family, "rank": lie.rank,
                  "rho": spectrum.rho}
        everything = not options["thresholds"] and not options["spectrum"]
        if everything or options["spectrum"]:
            record["eigenvalues"] = list(spectrum.eigenvalues)
            record["method"] = spectrum.method
        if everything or options["thresholds"]:
            thresholds = uniqueness_thresholds(lie)
            record["lambda_s_max"] = thresholds.lambda_s_max
            record["lambda_max"] = list(thresholds.lambda_max)
            record["d"] = [str(x) for x in decomposition.d]
        return record

    def _emit(self, records: List[Dict[str, Any]], output: str) -> None:
        if output is None:
            self.stdout.write(to_json(records), ending="")
        else:
            write_json(Path(output), records)
