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

"""The runner of the experiments: the run modes, the parameter sweep and
the run manifest.

"""
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from lab_core.utils import atomic_write, columns_text, csv_text, \
    sha256_file, text_table, to_json, write_json
from . import VERSION
from .cartan import LieFamily, build_cartan, spectral_radius, \
    symmetric_decomposition, uniqueness_thresholds
from .discretization import DomainGrid, SingularSource, WeightField, \
    assemble_weight, build_grid, quadratic_f, read_field_cache, \
    write_field_cache, write_xyz, zero_f
from .forms import CERTIFY, CONTINUATION, DEFLATE, QUADRATIC, SOLVE, SWEEP, \
    THRESHOLDS, ExperimentConfig
from .solver import ContinuationBranch, TodaState, continuation, \
    deflated_search, energy, newton_solve
from .spectra import EigenReport, nondegeneracy_certificate
from .utils import CertificateError, EigenSolverError, SolverError, \
    InvalidParameterError, TodaLabError, get_output_dir, get_setting

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


class RunManifest:
    """The manifest of a run: the configuration echo, the version, the stage
    summaries and the inventory of the output files with their checksums.
    It holds no timings, so reruns give identical bytes.

    Args:
        output_dir: The output directory.
        config: The configuration.
        name: The file name of the manifest.
    """

    def __init__(self, output_dir: Union[str, Path],
                 config: ExperimentConfig, name: str = MANIFEST):
        self.output_dir = Path(output_dir)
        self.config = config
        self.name = name
        self.version = VERSION
        self.stages: List[Dict[str, Any]] = []
        self.inventory: List[Dict[str, Any]] = []
        self.partial = False
        self.failure: Optional[str] = None
        self.data: Dict[str, Any] = {}

    @property
    def path(self) -> Path:
        """The path of the manifest file."""
        return self.output_dir / self.name

    def add_stage(self, name: str, **summary) -> None:
        """Records the summary of a stage.

        Args:
            name: The stage name.
            **summary: The summary.
        """
        self.stages.append({"stage": name, **summary})

    def write_file(self, name: str, content: Union[str, bytes]) -> Path:
        """Writes an output file atomically and adds it to the inventory.

        Args:
            name: The file name, relative to the output directory.
            content: The content.

        Returns:
            The file path.
        """
        return self.add_file(atomic_write(self.output_dir / name, content))

    def add_file(self, path: Union[str, Path]) -> Path:
        """Adds a written file to the inventory.

        Args:
            path: The file path.

        Returns:
            The file path.
        """
        path = Path(path)
        name = path.relative_to(self.output_dir).as_posix()
        self.inventory = [x for x in self.inventory if x["path"] != name]
        self.inventory.append({"path": name, "sha256": sha256_file(path),
                               "bytes": path.stat().st_size})
        return path

    def as_dict(self) -> Dict[str, Any]:
        return {"version": self.version,
                "config": self.config.to_dict(),
                "stages": self.stages,
                "inventory": sorted(self.inventory,
                                    key=lambda x: x["path"]),
                "partial": self.partial,
                "failure": self.failure,
                **self.data}

    def write(self) -> Path:
        """Writes the manifest atomically.

        Returns:
            The manifest path.
        """
        return write_json(self.path, self.as_dict())


def weights_from_config(grid: DomainGrid, config: ExperimentConfig) \
        -> List[WeightField]:
    """Builds the weights of the components from the f preset and the
    singular sources of a configuration.

    Args:
        grid: The grid.
        config: The configuration.

    Returns:
        The weights, one per component.
    """
    if config.f_preset == QUADRATIC:
        f = quadratic_f(grid, config.f_coefficient, tuple(config.f_center))
    else:
        f = zero_f(grid)
    weights = []
    for i in range(config.rank):
        sources = [SingularSource(grid, x["x"], x["y"], x["alpha"])
                   for x in config.sources if x["component"] == i + 1]
        weights.append(assemble_weight(grid, f, sources))
    return weights


def threshold_rows(family: str, max_rank: int,
                   method: Optional[str] = None) -> List[List[Any]]:
    """Returns the rows of the threshold table of a family.

    Args:
        family: The family letter.
        max_rank: The maximum rank.
        method: The spectrum method, by default that of the family.

    Returns:
        The rows (algebra, rank, rho, method, lambda_s_max, lambda_max, d).
    """
    rows = []
    for rank in LieFamily.valid_ranks(family, max_rank):
        lie = LieFamily(family, rank)
        decomposition = symmetric_decomposition(build_cartan(lie))
        spectrum = spectral_radius(decomposition, method)
        thresholds = uniqueness_thresholds(lie)
        rows.append([str(lie), rank, spectrum.rho, spectrum.method,
                     thresholds.lambda_s_max,
                     " ".join(F"{x:.17g}" for x in thresholds.lambda_max),
                     " ".join(str(x) for x in decomposition.d)])
    return rows


THRESHOLD_HEADINGS = ["algebra", "rank", "rho", "method", "lambda_s_max",
                      "lambda_max", "d"]


def threshold_table(families: Sequence[str], max_rank: int,
                    method: Optional[str] = None) -> str:
    """Returns the aligned text table of the uniqueness thresholds.

    Args:
        families: The family letters.
        max_rank: The maximum rank.
        method: The spectrum method.

    Returns:
        The table text.
    """
    rows = []
    for family in families:
        rows.extend(threshold_rows(family, max_rank, method))
    return text_table(THRESHOLD_HEADINGS, rows)


def _state_headings(rank: int) -> List[str]:
    return ["t"] + [F"lambda_{i + 1}" for i in range(rank)] \
        + ["residual", "iterations"] \
        + [F"mass_{i + 1}" for i in range(rank)] \
        + ["energy", "certificate"]


def _state_row(t: float, state: TodaState,
               report: Optional[EigenReport]) -> List[Any]:
    certificate = "" if report is None \
        else ("PASS" if report.passed else "FAIL")
    return [t] + list(state.lam) + [state.residual_norm, state.iterations] \
        + list(state.masses) + [energy(state), certificate]


class Runner:
    """Runs an experiment.

    Args:
        config: The validated configuration.
        output_dir: The output directory, by default that of the
            configuration or the settings.
    """

    def __init__(self, config: ExperimentConfig,
                 output_dir: Union[str, Path, None] = None):
        self.config = config
        self.output_dir = get_output_dir(
            config.output_dir if output_dir is None else str(output_dir))
        self.manifest = RunManifest(self.output_dir, config)
        self._grid: Optional[DomainGrid] = None
        self._weights: Optional[List[WeightField]] = None

    @property
    def grid(self) -> DomainGrid:
        """The grid."""
        if self._grid is None:
            self._grid = build_grid(self.config.n)
        return self._grid

    @property
    def weights(self) -> List[WeightField]:
        """The weights of the components."""
        if self._weights is None:
            self._weights = weights_from_config(self.grid, self.config)
        return self._weights

    def run(self) -> RunManifest:
        """Runs the configured mode and writes the manifest.  On failure the
        manifest is written with the outputs so far marked partial, and the
        error is raised again.

        Returns:
            The manifest.

        Raises:
            TodaLabError: When a stage fails.
        """
        modes = {THRESHOLDS: self._run_thresholds,
                 SOLVE: self._run_solve,
                 CONTINUATION: self._run_continuation,
                 CERTIFY: self._run_certify,
                 DEFLATE: self._run_deflate,
                 SWEEP: self._run_sweep}
        start = time.perf_counter()
        try:
            modes[self.config.mode]()
        except TodaLabError as e:
            self.manifest.partial = True
            self.manifest.failure = str(e)
            self.manifest.write()
            raise
        finally:
            logger.info("%s run of %s took %.3f s", self.config.mode,
                        self.config.lie_family,
                        time.perf_counter() - start)
        self.manifest.write()
        return self.manifest

    def _run_thresholds(self) -> None:
        rows = threshold_rows(self.config.family, self.config.rank)
        self.manifest.write_file("thresholds.csv",
                                 csv_text(THRESHOLD_HEADINGS, rows))
        self.manifest.write_file("thresholds.txt",
                                 text_table(THRESHOLD_HEADINGS, rows))
        self.manifest.add_stage(THRESHOLDS, rows=len(rows))

    def _target(self) -> List[float]:
        return self.config.parameters()

    def _run_solve(self) -> None:
        lam = self._target()
        thresholds = uniqueness_thresholds(self.config.lie_family)
        if not thresholds.contains(lam):
            logger.warning("%s is outside the uniqueness box %s", lam,
                           list(thresholds.lambda_max))
        state = newton_solve(self.grid, build_cartan(self.config.lie_family),
                             lam, self.weights)
        self.manifest.add_stage(SOLVE, iterations=state.iterations,
                                residual=state.residual_norm)
        self._write_states([(1.0, state, None)])
        self._write_fields(state)

    def _branch(self) -> ContinuationBranch:
        branch = continuation(self.grid,
                              build_cartan(self.config.lie_family),
                              self._target(), self.config.continuation_steps,
                              self.weights)
        self.manifest.add_stage(
            CONTINUATION, points=len(branch.states),
            t=branch.t_values,
            iterations=[x.iterations for x in branch.steps],
            failed=branch.failed)
        return branch

    def _run_continuation(self) -> None:
        branch = self._branch()
        self._write_states([(x.t, s, None)
                            for x, s in zip(branch.steps, branch.states)])
        self._write_fields(branch.final)
        if branch.failed:
            raise SolverError(branch.failure, last_iterate=branch.final.v)

    def _run_certify(self) -> None:
        branch = self._branch()
        reports = [nondegeneracy_certificate(x) for x in branch.states]
        self._write_states([(x.t, s, r) for x, s, r
                            in zip(branch.steps, branch.states, reports)])
        self._write_fields(branch.final)
        self._write_certificates(branch.t_values, reports)
        if branch.failed:
            raise SolverError(branch.failure, last_iterate=branch.final.v)
        self._raise_on_failure(reports)

    def _run_deflate(self) -> None:
        branch = self._branch()
        if branch.failed:
            raise SolverError(branch.failure, last_iterate=branch.final.v)
        final = branch.final
        found = deflated_search(self.grid, final.problem.cartan,
                                list(final.lam), self.weights, [final],
                                self.config.deflation_starts,
                                self.config.seed)
        self.manifest.add_stage(DEFLATE, starts=self.config.deflation_starts,
                                found=len(found))
        self.manifest.write_file("deflation.json", to_json({
            "lambda": list(final.lam),
            "starts": self.config.deflation_starts,
            "seed": self.config.seed,
            "found": [{"distance": float(np.max(np.abs(x.u - final.u))),
                       "residual": x.residual_norm,
                       "energy": energy(x)} for x in found]}))
        self._write_states([(1.0, final, None)]
                           + [(1.0, x, None) for x in found])
        self._write_fields(final)
        for k, state in enumerate(found):
            self._write_fields(state, F"deflated_{k + 1}_")

    def _run_sweep(self) -> None:
        rows = sweep(self.config, self.config.sweep_values, self.grid,
                     self.weights)
        headings = sweep_headings(self.config.rank)
        self.manifest.write_file("sweep.csv", csv_text(headings, rows))
        self.manifest.write_file("sweep.dat", sweep_curves(
            self.config.rank, rows))
        self.manifest.add_stage(SWEEP, points=len(rows),
                                passed=sum(1 for x in rows
                                           if x[-2] == "PASS"))

    def _write_states(self, states: List[Any]) -> None:
        rank = self.config.rank
        rows = [_state_row(t, s, r) for t, s, r in states]
        self.manifest.write_file("states.csv",
                                 csv_text(_state_headings(rank), rows))

    def _write_fields(self, state: TodaState, prefix: str = "") -> None:
        for i, u in enumerate(state.u_fields()):
            name = F"{prefix}u_{i + 1}"
            self.manifest.add_file(write_field_cache(
                self.output_dir / F"{name}.bin", self.grid, u,
                component=i + 1, lam=float(state.lam[i])))
            self.manifest.add_file(write_xyz(
                self.output_dir / F"{name}.xyz", self.grid, u,
                F"{name} of {self.config.lie_family}"))
        if prefix == "":
            self.manifest.data["fields"] = [
                F"u_{i + 1}.bin" for i in range(state.problem.n)]

    def _write_certificates(self, t_values: List[float],
                            reports: List[EigenReport]) -> None:
        self.manifest.write_file("certificates.json", to_json([
            {"t": t, **x.as_dict()} for t, x in zip(t_values, reports)]))
        self.manifest.write_file("eigenvalues.csv", csv_text(
            eigen_headings(self.config.rank),
            [eigen_row(t, x) for t, x in zip(t_values, reports)]))
        self.manifest.add_stage(CERTIFY, points=len(reports),
                                passed=sum(1 for x in reports if x.passed))

    @staticmethod
    def _raise_on_failure(reports: List[EigenReport]) -> None:
        for report in reports:
            failures = report.failures()
            if failures:
                first = failures[0]
                raise CertificateError(
                    F"{first.name} is {first.status} ({first.value!r})",
                    rank=first.component)


def eigen_headings(rank: int) -> List[str]:
    return ["t", "coupled_min", "coupled_min_constant_boundary"] \
        + [F"mu1_{i + 1}" for i in range(rank)] \
        + [F"mu2_{i + 1}" for i in range(rank)] \
        + [F"nu1_{i + 1}" for i in range(rank)] \
        + [F"nu2_{i + 1}" for i in range(rank)] \
        + ["margins_max", "pass"]


def eigen_row(t: float, report: EigenReport) -> List[Any]:
    return [t, report.coupled_min, report.coupled_min_constant] \
        + report.mu1 + report.mu2 + report.nu1 + report.nu2 \
        + [report.margins_max, "PASS" if report.passed else "FAIL"]


def sweep_headings(rank: int) -> List[str]:
    return ["s"] + [F"lambda_{i + 1}" for i in range(rank)] \
        + ["residual", "coupled_min", "coupled_min_constant_boundary"] \
        + [F"mu1_{i + 1}" for i in range(rank)] \
        + [F"mu2_{i + 1}" for i in range(rank)] \
        + ["pass", "error"]


def sweep_curves(rank: int, rows: List[List[Any]]) -> str:
    """Returns the eigenvalue-versus-s curves of a sweep as plain columns.

    Args:
        rank: The rank.
        rows: The sweep rows.

    Returns:
        The text, one line per s value.
    """
    headings = sweep_headings(rank)
    columns = [0] + list(range(rank + 2, 3 * rank + 4))
    return columns_text(([x[i] for i in columns] for x in rows),
                        " ".join(headings[i] for i in columns))


def sweep_point(config: ExperimentConfig, s: float, grid: DomainGrid,
                weights: Sequence[WeightField]) -> List[Any]:
    """Runs one point of a sweep: the continuation to s times the uniqueness
    thresholds and the certificate of the final state.  A failure is
    recorded in the row.

    Args:
        config: The configuration.
        s: The threshold fraction.
        grid: The grid.
        weights: The weights.

    Returns:
        The row.
    """
    rank = config.rank
    lam = config.parameters(s)
    if s > 1:
        logger.warning("sweep point s = %r is past the uniqueness threshold",
                       s)
    blank = [math.nan] * (2 * rank + 2)
    try:
        branch = continuation(grid, build_cartan(config.lie_family), lam,
                              config.continuation_steps, weights)
        if branch.failed:
            return [s] + lam + [branch.final.residual_norm] + blank \
                + ["FAIL", branch.failure]
        report = nondegeneracy_certificate(branch.final)
    except (SolverError, EigenSolverError, CertificateError) as e:
        logger.warning("sweep point s = %r failed: %s", s, e)
        return [s] + lam + [math.nan] + blank + ["FAIL", str(e)]
    return [s] + lam + [branch.final.residual_norm, report.coupled_min,
                        report.coupled_min_constant] \
        + report.mu1 + report.mu2 \
        + ["PASS" if report.passed else "FAIL", ""]


def sweep(config: ExperimentConfig, values: Sequence[float],
          grid: Optional[DomainGrid] = None,
          weights: Optional[Sequence[WeightField]] = None) \
        -> List[List[Any]]:
    """Sweeps the threshold fraction.  The points run in a worker pool and
    the rows are merged in the order of the values.

    Args:
        config: The configuration.
        values: The threshold fractions.
        grid: The grid, built from the configuration by default.
        weights: The weights, built from the configuration by default.

    Returns:
        One row per value.
    """
    if grid is None:
        grid = build_grid(config.n)
    if weights is None:
        weights = weights_from_config(grid, config)
    with ThreadPoolExecutor(max_workers=get_setting("WORKERS")) as executor:
        return list(executor.map(
            lambda s: sweep_point(config, s, grid, weights), values))


def run(config: ExperimentConfig,
        output_dir: Union[str, Path, None] = None) -> RunManifest:
    """Runs an experiment.

    Args:
        config: The validated configuration.
        output_dir: The output directory, if not that of the configuration.

    Returns:
        The manifest.
    """
    return Runner(config, output_dir).run()


def load_state(manifest_path: Union[str, Path]) \
        -> Tuple[ExperimentConfig, TodaState]:
    """Loads the final state of a run from its manifest, and polishes it by
    Newton on a freshly assembled problem.

    Args:
        manifest_path: The path of the manifest of the run.

    Returns:
        The configuration and the state.

    Raises:
        InvalidParameterError: When the run stored no fields or the fields
            are on another grid.
        SolverError: When the stored fields do not solve the system.
    """
    manifest_path = Path(manifest_path)
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise InvalidParameterError(
            F"{manifest_path} is not a readable manifest: {e}") from e
    if "fields" not in data:
        raise InvalidParameterError(F"{manifest_path} stores no fields")
    config = ExperimentConfig.parse(data["config"])
    grid = build_grid(config.n)
    fields = []
    for name in data["fields"]:
        header, values = read_field_cache(manifest_path.parent / name)
        if header["N"] != config.n:
            raise InvalidParameterError(F"{name} is on another grid")
        fields.append(values)
    state = newton_solve(grid, build_cartan(config.lie_family),
                         config.parameters(),
                         weights_from_config(grid, config),
                         np.vstack(fields))
    logger.info("reloaded %s with residual %.3e after %d iterations",
                manifest_path, state.residual_norm, state.iterations)
    return config, state


def certify_run(manifest_path: Union[str, Path],
                output_dir: Union[str, Path, None] = None) -> RunManifest:
    """Certifies the final state of a stored run.

    Args:
        manifest_path: The path of the manifest of the run.
        output_dir: The output directory, by default that of the run.

    Returns:
        The manifest of the certification.

    Raises:
        CertificateError: When the certificate fails.
    """
    config, state = load_state(manifest_path)
    if output_dir is None:
        output_dir = Path(manifest_path).parent
    runner = Runner(config.replace(mode=CERTIFY), output_dir)
    runner.manifest = RunManifest(runner.output_dir, runner.config,
                                  "certificate-manifest.json")
    report = nondegeneracy_certificate(state)
    runner.manifest.add_stage("reload", iterations=state.iterations,
                              residual=state.residual_norm)
    runner._write_certificates([1.0], [report])
    runner.manifest.write()
    runner._raise_on_failure([report])
    return runner.manifest
