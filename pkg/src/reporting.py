"""
Output writers: versioned CSV tables, JSON documents and the text
summaries printed by the CLI.
"""
import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .data.models import (
    AssumptionReport, ConditionReport, ConvergenceReport, DensityCheckReport,
    DiscontinuityProfile, EnvelopeCalibration, MomentEstimate, PropertyReport,
    RateReport, SchemeComparison, SensitivityReport,
)

SCHEMA = "irregular-sde v1"
RULE = "=" * 80
THIN_RULE = "-" * 80

Row = Sequence[object]


@dataclass
class Table:
    kind: str
    header: List[str]
    rows: List[Row]


@dataclass
class RunOutcome:
    """What a subcommand produced: the main table, JSON payload and summary."""
    table: Table
    payload: object
    summary: str
    passed: bool = True
    extra_tables: Dict[str, Table] = field(default_factory=dict)


# --- serialization -----------------------------------------------------------

def to_jsonable(obj):
    """Dataclasses, enums and numpy values as plain JSON types; non-finite floats become null."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        data = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for name in ("violations", "total_violations", "passed"):
            attr = getattr(type(obj), name, None)
            if isinstance(attr, property):
                data[name] = to_jsonable(getattr(obj, name))
        return data
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_csv(path: Path, table: Table):
    """Header comment with the schema version, a header row, then rows in order."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(f"# {SCHEMA} {table.kind}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_cell(value) for value in row])


def write_json(path: Path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(to_jsonable(payload), handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")


# --- tables ------------------------------------------------------------------

def rate_table(report: RateReport) -> Table:
    return Table("rate-report", ["n", "error", "stderr"],
                 [(point.n, point.error, point.std_error) for point in report.per_n])


def schemes_table(comparison: SchemeComparison) -> Table:
    rows = [
        (scheme, point.n, point.error, point.std_error)
        for scheme, report in comparison.reports.items()
        for point in report.per_n
    ]
    return Table("schemes-report", ["scheme", "n", "error", "stderr"], rows)


def sensitivity_table(report: SensitivityReport) -> Table:
    rows = [(r.n, r.error, r.refined_error, r.std_error, r.stable) for r in report.rows]
    return Table("reference-sensitivity", ["n", "error", "refined_error", "stderr", "stable"], rows)


def density_table(report: DensityCheckReport) -> Table:
    """One row per bin: multi-index, lower and upper edge per coordinate, count."""
    edges = report.edges
    shape = tuple(len(e) - 1 for e in edges)
    header = ["bin"]
    for axis in range(len(edges)):
        header += [f"low_{axis + 1}", f"high_{axis + 1}"]
    header.append("count")
    rows = []
    for flat, count in enumerate(report.counts):
        index = np.unravel_index(flat, shape)
        row: List[object] = [":".join(str(int(i)) for i in index)]
        for axis, i in enumerate(index):
            row += [edges[axis][i], edges[axis][i + 1]]
        row.append(count)
        rows.append(row)
    return Table("density-histogram", header, rows)


def jump_table(profile: DiscontinuityProfile) -> Table:
    rows = [
        (n, e.value, e.std_error, scaled)
        for n, e, scaled in zip(profile.n_list, profile.estimates, profile.scaled)
    ]
    return Table("jump-integral", ["n", "integral", "stderr", "sqrt_n_integral"], rows)


def increments_table(n_list: Sequence[int], estimates: Sequence[MomentEstimate]) -> Table:
    rows = [(n, e.value, e.std_error, e.time) for n, e in zip(n_list, estimates)]
    return Table("increment-moments", ["n", "moment", "stderr", "argmax_time"], rows)


def property_table(reports: Sequence[Tuple[Tuple[float, float], PropertyReport]]) -> Table:
    rows = [
        (delta, eps, name, report.violations[name], report.max_violation[name])
        for (delta, eps), report in reports
        for name in report.violations
    ]
    return Table("yw-properties", ["delta", "eps", "property", "violations", "max_violation"], rows)


def yw_samples_table(rows: List[Row]) -> Table:
    return Table("yw-samples", ["delta", "eps", "z", "psi", "phi_prime", "phi_double_prime"], rows)


def conditions_table(report: ConditionReport) -> Table:
    rows: List[Row] = []
    ratios = list(report.a1_decay_ratios) + [None]
    for N, value, ratio in zip(report.N_list, report.a1_integrals, ratios):
        rows.append(("l1_gap", N, "", "", value, ratio))
    for sample in report.a3_samples:
        shift = ";".join(repr(a) for a in sample.shift)
        rows.append(("gradient", sample.N, shift, sample.u, sample.integral, sample.ratio))
    return Table("mollify-conditions", ["check", "N", "shift", "u", "value", "ratio"], rows)


def convergence_table(report: ConvergenceReport, kind: str) -> Table:
    oracle = report.oracle or [None] * len(report.N_list)
    rows = [
        (N, value, error, exact)
        for N, value, error, exact in zip(report.N_list, report.estimates, report.std_errors, oracle)
    ]
    if report.limit is not None:
        rows.append(("base", report.limit, report.limit_std_error, None))
    return Table(kind, ["N", "estimate", "stderr", "oracle"], rows)


def komatsu_table(x: np.ndarray, tail: np.ndarray, bound: np.ndarray) -> Table:
    rows = list(zip(x.tolist(), tail.tolist(), bound.tolist(), (tail - bound).tolist()))
    return Table("komatsu", ["x", "tail", "bound", "slack"], rows)


def verify_table(report: AssumptionReport) -> Table:
    rows = [
        (name, report.checked.get(name, True), report.violations.get(name, 0), report.worst.get(name, 0.0))
        for name in report.checked
    ]
    return Table("assumptions", ["check", "checked", "violations", "worst"], rows)


# --- text summaries ----------------------------------------------------------

def _fmt(value: Optional[float], spec: str = "+.4f") -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "n/a"
    return format(value, spec)


def _banner(title: str) -> List[str]:
    return [RULE, title, RULE, ""]


def _section(title: str) -> List[str]:
    return [THIN_RULE, title, THIN_RULE]


def format_rate(report: RateReport) -> str:
    output = _banner(f"Strong error rate: {report.problem}")
    output.append(f"Scheme: {report.scheme.value}   Norm: {report.label}")
    if report.tau_labels and report.norm.value == "terminal_stopping":
        output.append(f"Stopping times: {', '.join(report.tau_labels)}")
    output.append(f"Paths: {report.paths}   Reference: 2^{report.ref_level_L}")
    output.append("")
    output.extend(_section("ERRORS"))
    output.append(f"{'n':>8} {'error':>14} {'stderr':>12}")
    for point in report.per_n:
        output.append(f"{point.n:>8} {point.error:>14.6e} {point.std_error:>12.3e}")
    output.append("")
    output.extend(_section("RATE"))
    if report.exact:
        output.append("All errors vanish: the scheme is exact for this problem.")
    else:
        ci = report.slope_ci
        ci_text = f" [{_fmt(ci[0])}, {_fmt(ci[1])}]" if ci else ""
        output.append(f"Fitted slope: {_fmt(report.fitted_slope)}{ci_text}")
        if report.dropped_n is not None:
            output.append(f"  (n = {report.dropped_n} dropped as a transient)")
    if report.theory_kind == "log" and report.log_model_fit is not None:
        fit = report.log_model_fit
        output.append(
            f"Log model: error ~ {fit.a:.4g} (log n)^-{fit.gamma:g}, residual rms {fit.residual_rms:.3g}"
        )
    else:
        output.append(f"Theory slope: {_fmt(report.theory_slope)}")
    if report.theory_note:
        output.append(f"  ({report.theory_note})")
    if report.acceptance is not None:
        verdict = "PASS" if report.acceptance.passed else f"FAIL ({report.acceptance.reason})"
        output.append(f"Acceptance [{report.acceptance.lower}, {report.acceptance.upper}]: {verdict}")
    output.append("")
    output.append(RULE)
    return "\n".join(output)


def format_schemes(comparison: SchemeComparison) -> str:
    output = _banner("Scheme comparison on shared Brownian paths")
    for scheme, report in comparison.reports.items():
        ci = report.slope_ci
        ci_text = f" [{_fmt(ci[0])}, {_fmt(ci[1])}]" if ci else ""
        output.append(f"{scheme:<10} slope {_fmt(report.fitted_slope)}{ci_text}")
    output.append("")
    output.append(f"Identical columns: {comparison.identical}")
    output.append(f"Slopes consistent: {comparison.slopes_consistent}")
    output.append(RULE)
    return "\n".join(output)


def format_sensitivity(report: SensitivityReport) -> str:
    output = _section(f"REFERENCE 2^{report.ref_level_L} vs 2^{report.refined_level_L}")
    for row in report.rows:
        output.append(
            f"n={row.n:<6} {row.error:.6e} -> {row.refined_error:.6e} (se {row.std_error:.2e}) "
            f"{'stable' if row.stable else 'MOVED'}"
        )
    output.append(f"Passed: {report.passed}")
    return "\n".join(output)


def format_density(report: DensityCheckReport, calibration: Optional[EnvelopeCalibration] = None) -> str:
    output = _banner(f"Gaussian envelope check: {report.problem}")
    output.append(f"t = {report.t:g} (n = {report.n_steps}), paths = {report.paths}")
    if calibration is not None:
        output.append(
            f"Calibrated on {calibration.paths} paths: C = {calibration.C:.4g} "
            f"(raw {calibration.raw_C:.4g} x {calibration.margin:g}), c = {calibration.c:.4g}"
        )
    output.append(f"Envelope: C = {report.C:.4g}, c = {report.c:.4g}")
    output.append(f"Band: {report.band_z:.3g} standard errors per bin, simultaneous over {len(report.counts)} bins")
    output.append(f"Upper violations: {report.upper_violations}")
    output.append(f"Lower violations: {report.lower_violations} of {report.lower_eligible_bins} eligible bins")
    output.append(f"Required C at this c: upper {report.required_C_upper:.4g}, lower {report.required_C_lower:.4g}")
    output.append(
        f"Best fits: upper C = {report.fitted_C_upper:.4g} at c = {report.fitted_c_upper:.4g}; "
        f"lower C = {report.fitted_C_lower:.4g} at c = {report.fitted_c_lower:.4g}"
    )
    output.append(RULE)
    return "\n".join(output)


def format_jump(profile: DiscontinuityProfile) -> str:
    output = _banner(f"Discontinuity integral: {profile.problem} (q = {profile.q:g})")
    output.append(f"{'n':>8} {'integral':>14} {'stderr':>12} {'sqrt(n) x':>12}")
    for n, e, scaled in zip(profile.n_list, profile.estimates, profile.scaled):
        output.append(f"{n:>8} {e.value:>14.6e} {e.std_error:>12.3e} {scaled:>12.5f}")
    output.append("")
    output.append(f"max/min of sqrt(n)-scaled values: {_fmt(profile.spread, '.4f')}")
    if profile.ratio_64_256 is not None:
        output.append(f"integral(64) / integral(256): {profile.ratio_64_256:.4f}")
    output.append(RULE)
    return "\n".join(output)


def format_increments(problem: str, q: float, n_list, estimates: Sequence[MomentEstimate], horizon: float) -> str:
    output = _banner(f"Increment moments: {problem} (q = {q:g})")
    output.append(f"{'n':>8} {'moment':>14} {'stderr':>12} {'n^(q/2) x':>12}")
    for n, e in zip(n_list, estimates):
        output.append(f"{n:>8} {e.value:>14.6e} {e.std_error:>12.3e} {e.value * n ** (q / 2):>12.5f}")
    output.append(RULE)
    return "\n".join(output)


def format_properties(title: str, reports: Sequence[PropertyReport]) -> str:
    output = _banner(title)
    for report in reports:
        output.append(f"{report.name}: {report.total_violations} violations on {report.points} points")
        for name, count in report.violations.items():
            output.append(f"  {name}: {count} (max excess {report.max_violation[name]:.3g})")
        for name, value in report.extras.items():
            output.append(f"  {name}: {value:.6g}")
    output.append(RULE)
    return "\n".join(output)


def format_conditions(report: ConditionReport, extras: Sequence[ConvergenceReport] = ()) -> str:
    output = _banner(f"Mollifier class conditions: {report.base}")
    output.extend(_section("L1 GAP ON |x| <= L"))
    for N, value in zip(report.N_list, report.a1_integrals):
        output.append(f"N={N:<6} {value:.6e}")
    ratios = ", ".join(_fmt(r, ".3f") for r in report.a1_decay_ratios)
    output.append(f"Ratios per step: {ratios}   monotone: {report.a1_monotone}")
    output.extend(_section("SUP BOUND"))
    output.append(f"sup |g_N| = {report.a2_sup:.6g} <= {report.a2_bound:g}: {report.a2_ok}")
    output.extend(_section("WEIGHTED GRADIENT"))
    output.append(f"Smallest K over {len(report.a3_samples)} samples: {report.a3_K:.6g}")
    for conv in extras:
        output.extend(_section(f"MONTE CARLO ON {conv.problem} (n = {conv.n_steps}, kappa = {conv.kappa:g})"))
        oracle = conv.oracle or [None] * len(conv.N_list)
        for N, value, error, exact in zip(conv.N_list, conv.estimates, conv.std_errors, oracle):
            suffix = f"  exact {exact:.6e}" if exact is not None else ""
            output.append(f"N={N:<6} {value:.6e} (se {error:.2e}){suffix}")
        if conv.limit is not None:
            output.append(f"base   {conv.limit:.6e} (se {conv.limit_std_error:.2e})")
    output.append(RULE)
    return "\n".join(output)


def format_assumptions(report: AssumptionReport) -> str:
    output = _banner(f"Assumption spot checks: {report.problem}")
    output.append(f"Samples: {report.samples}, seed: {report.seed}")
    for name, checked in report.checked.items():
        if not checked:
            output.append(f"  {name}: not claimed")
            continue
        output.append(
            f"  {name}: {report.violations.get(name, 0)} violations (worst excess {report.worst.get(name, 0.0):.3g})"
        )
    output.append(RULE)
    return "\n".join(output)
