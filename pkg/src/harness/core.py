"""
Rate harness: coupled fine/coarse simulations on shared Brownian paths,
strong-error estimates per step count and fitted convergence rates.
"""
import dataclasses
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..data.models import (
    AcceptanceResult, ExperimentSpec, NormKind, RatePoint, RateReport,
    SchemeComparison, SchemeKind, SensitivityReport, SensitivityRow, level_of,
)
from ..errors import ArgumentError, ResourceError
from ..memory.context import RunMemory
from ..tools.brownian import coarsen, generate_batch, path_blocks
from ..tools.catalog import ProblemCatalog
from ..tools.em_scheme import deviation_stats, simulate
from ..tools.parallel import map_blocks
from .regression import fit_log_model, fit_power_law
from .theory import theory_rate

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-12
NORM_LABELS = {
    NormKind.TERMINAL_STOPPING: "stopping-time family max of E|Y_tau|",
    NormKind.SUP: "E sup_t |Y_t|",
    NormKind.SUP_P: "E sup_t |Y_t|^p",
}


def experiment_key(spec: ExperimentSpec) -> str:
    return f"{spec.problem.name}/{spec.scheme.value}/{spec.norm.value}/p={spec.p_exponent:g}"


def _norm_columns(spec: ExperimentSpec, sample) -> np.ndarray:
    """Per-path values of the error functional, shape (paths, columns)."""
    if spec.norm == NormKind.TERMINAL_STOPPING:
        return sample.tau_abs
    return sample.sup_p[:, None]


def _rate_block(task) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sums and sums of squares over one block of paths, shape
    (reference levels, len(n_list), columns).
    """
    spec, ref_levels, indices = task
    p = spec.problem
    finest = max(ref_levels)
    w = generate_batch(p.dim_d, finest, p.horizon_T, spec.master_seed, indices)
    exponent = spec.p_exponent if spec.norm == NormKind.SUP_P else 1.0

    coarse_paths = [simulate(p, spec.scheme, n, coarsen(w, level_of(n))) for n in spec.n_list]
    sums, squares = [], []
    for level in ref_levels:
        reference = simulate(p, spec.scheme, 2 ** level, coarsen(w, level))
        per_n = [
            _norm_columns(spec, deviation_stats(reference, coarse, exponent, spec.taus))
            for coarse in coarse_paths
        ]
        values = np.stack(per_n, axis=1)  # (paths, n, columns)
        sums.append(values.sum(axis=0))
        squares.append((values ** 2).sum(axis=0))
    return np.stack(sums), np.stack(squares)


class RateHarness:
    """
    Orchestrates rate experiments.

    Paths are split into fixed blocks before dispatch and reduced in block
    order, so the worker count never changes a report. Every report is
    kept in memory for later comparison.
    """

    def __init__(
        self,
        catalog: Optional[ProblemCatalog] = None,
        memory: Optional[RunMemory] = None,
    ):
        """Initialize with dependencies; injectable for tests."""
        self.catalog = catalog or ProblemCatalog()
        self.memory = memory or RunMemory()

    def spec_for(self, problem: str, **overrides) -> ExperimentSpec:
        """ExperimentSpec for a catalog problem."""
        return ExperimentSpec(problem=self.catalog.get_problem(problem), **overrides)

    def _moments(self, spec: ExperimentSpec, ref_levels: Sequence[int], workers: int):
        work = spec.work * 2 ** (max(ref_levels) - spec.ref_level_L)
        if work > spec.budget:
            raise ResourceError(
                f"paths * 2^L * d = {work:.3g} exceeds the budget {spec.budget:.3g}"
            )
        tasks = [(spec, tuple(ref_levels), block) for block in path_blocks(spec.paths, spec.block_size)]
        logger.info(
            "%s: %d paths in %d blocks, reference level(s) %s",
            experiment_key(spec), spec.paths, len(tasks), list(ref_levels),
        )
        results = map_blocks(_rate_block, tasks, workers)
        total = np.sum(np.stack([r[0] for r in results]), axis=0)
        total_sq = np.sum(np.stack([r[1] for r in results]), axis=0)
        mean = total / spec.paths
        variance = np.maximum(total_sq / spec.paths - mean ** 2, 0.0) * spec.paths / (spec.paths - 1)
        return mean, np.sqrt(variance / spec.paths)

    def _report(self, spec: ExperimentSpec, ref_level: int, mean: np.ndarray, error: np.ndarray) -> RateReport:
        """Build, fit and judge one report from (n, columns) moments."""
        best = np.argmax(mean, axis=1)
        rows = np.arange(len(spec.n_list))
        per_n = [
            RatePoint(n=n, error=float(mean[i, best[i]]), std_error=float(error[i, best[i]]))
            for i, n in zip(rows, spec.n_list)
        ]
        report = RateReport(
            problem=spec.problem.name, scheme=spec.scheme, norm=spec.norm,
            p_exponent=spec.p_exponent, paths=spec.paths, ref_level_L=ref_level,
            per_n=per_n, label=NORM_LABELS[spec.norm],
            tau_labels=[tau.label for tau in spec.taus],
        )
        theory = theory_rate(spec.norm, spec.problem.meta.holder_alpha, spec.problem.dim_d, spec.p_exponent)
        report.theory_kind = theory.kind
        report.theory_slope = theory.slope
        report.theory_note = theory.source

        errors = [point.error for point in per_n]
        if max(errors) < EXACT_TOLERANCE:
            report.exact = True
            report.label += " (exact scheme, rate undefined)"
            logger.info("%s: all errors vanish; degenerate exact case", spec.problem.name)
        elif min(errors) <= 0:
            logger.warning("%s: some errors are zero; no rate fit", spec.problem.name)
        else:
            fit = fit_power_law(spec.n_list, errors)
            report.fitted_slope = fit.slope
            report.intercept = fit.intercept
            report.slope_ci = fit.slope_ci
            report.dropped_n = fit.dropped_n
            if theory.kind == "log":
                report.log_model_fit = fit_log_model(spec.n_list, errors, theory.gamma)
        if any(point.std_error == 0 for point in per_n) and not report.exact:
            logger.warning("%s: zero standard error at some n", spec.problem.name)

        if spec.slope_band is not None:
            report.acceptance = _judge(report.fitted_slope, spec.slope_band)
        return report

    def run(self, spec: ExperimentSpec, workers: int = 1) -> RateReport:
        """Estimate the error for every n in spec.n_list against the reference grid."""
        key = experiment_key(spec)
        self.memory.store_run_context(key, {
            "paths": spec.paths, "ref_level_L": spec.ref_level_L,
            "master_seed": spec.master_seed, "n_list": list(spec.n_list),
        })
        mean, error = self._moments(spec, [spec.ref_level_L], workers)
        report = self._report(spec, spec.ref_level_L, mean[0], error[0])
        self.memory.store_report(key, report)
        logger.info("%s: slope %s (theory %s)", key, report.fitted_slope, report.theory_slope)
        return report

    def compare_schemes(
        self,
        spec: ExperimentSpec,
        schemes: Sequence[SchemeKind] = tuple(SchemeKind),
        workers: int = 1,
    ) -> SchemeComparison:
        """Run every scheme on the same Brownian paths (same seed and blocks)."""
        if not schemes:
            raise ArgumentError("schemes must not be empty")
        reports: Dict[str, RateReport] = {}
        for scheme in schemes:
            reports[scheme.value] = self.run(dataclasses.replace(spec, scheme=scheme), workers)

        columns = [[point.error for point in r.per_n] for r in reports.values()]
        identical = all(column == columns[0] for column in columns)
        intervals = [r.slope_ci for r in reports.values()]
        if any(ci is None for ci in intervals):
            consistent = identical
        else:
            consistent = all(
                a[0] <= b[1] and b[0] <= a[1] for a in intervals for b in intervals
            )
        return SchemeComparison(reports=reports, slopes_consistent=consistent, identical=identical)

    def reference_sensitivity(self, spec: ExperimentSpec, extra_levels: int = 2, workers: int = 1) -> SensitivityReport:
        """
        Errors against the configured reference and against one `extra_levels`
        finer, on the same paths. n <= 2^(L-4) should move by less than one
        standard error.
        """
        if extra_levels < 1:
            raise ArgumentError("extra_levels must be positive")
        refined = spec.ref_level_L + extra_levels
        key = experiment_key(spec)
        mean, error = self._moments(spec, [spec.ref_level_L, refined], workers)
        base = self._report(spec, spec.ref_level_L, mean[0], error[0])
        finer = self._report(spec, refined, mean[1], error[1])
        self.memory.store_report(key, base)
        self.memory.store_report(key, finer)

        limit = 2 ** (spec.ref_level_L - 4)
        rows = [
            SensitivityRow(n, before, after, se, abs(after - before) < se or abs(after - before) < EXACT_TOLERANCE)
            for n, before, after, se in self.memory.compare_last(key)
            if n <= limit
        ]
        return SensitivityReport(spec.problem.name, spec.ref_level_L, refined, rows)


def _judge(slope: Optional[float], band) -> AcceptanceResult:
    lower, upper = band
    if slope is None or not math.isfinite(slope):
        return AcceptanceResult(lower, upper, False, "no fitted slope")
    if lower is not None and slope < lower:
        return AcceptanceResult(lower, upper, False, f"slope {slope:.4f} below {lower}")
    if upper is not None and slope > upper:
        return AcceptanceResult(lower, upper, False, f"slope {slope:.4f} above {upper}")
    return AcceptanceResult(lower, upper, True, "")

