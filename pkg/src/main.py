"""
Main entry point for the irregular-drift SDE experiments.
Every experiment is a subcommand driven by an INI configuration and flags.
"""
import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.special import ndtr

# Handle imports for both package and script execution
if __name__ == "__main__":
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src import __version__
from src.config import (
    SUBCOMMANDS, RunConfig, build_config, parse_config, serialize_config,
    stopping_times, with_overrides,
)
from src.data.bases import build_base
from src.data.models import ExperimentSpec, NormKind, SchemeKind, SdeProblem
from src.errors import ArgumentError, SimulationError
from src.harness.core import RateHarness
from src.reporting import (
    RunOutcome, Table, conditions_table, convergence_table, density_table,
    format_assumptions, format_conditions, format_density, format_increments, format_jump,
    format_properties, format_rate, format_schemes, format_sensitivity, increments_table,
    jump_table, komatsu_table, property_table, rate_table, schemes_table, sensitivity_table, verify_table,
    write_csv, write_json, yw_samples_table,
)
from src.tools import diagnostics, mollifier, yamada_watanabe
from src.tools.assumptions import verify_assumptions
from src.tools.catalog import ProblemCatalog
from src.tools.em_scheme import increment_moment

logger = logging.getLogger("src.main")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_OK, EXIT_ACCEPTANCE, EXIT_USAGE = 0, 1, 2


def _experiment_spec(cfg: RunConfig, problem: SdeProblem, params) -> ExperimentSpec:
    band = None
    if params.slope_lower is not None or params.slope_upper is not None:
        band = (params.slope_lower, params.slope_upper)
    return ExperimentSpec(
        problem=problem,
        scheme=SchemeKind(params.scheme),
        n_list=tuple(params.n_list),
        ref_level_L=params.ref_level,
        p_exponent=params.p,
        norm=NormKind(params.norm),
        taus=stopping_times(params),
        paths=params.paths,
        master_seed=cfg.seed,
        block_size=params.block_size,
        budget=params.budget,
        slope_band=band,
    )


def _rate(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.rate
    harness = RateHarness()
    spec = _experiment_spec(cfg, problem, params)
    report = harness.run(spec, cfg.workers)
    outcome = RunOutcome(
        table=rate_table(report), payload=report, summary=format_rate(report),
        passed=report.acceptance is None or report.acceptance.passed,
    )
    if params.sensitivity_levels:
        sensitivity = harness.reference_sensitivity(spec, params.sensitivity_levels, cfg.workers)
        outcome.extra_tables["rate_sensitivity"] = sensitivity_table(sensitivity)
        outcome.payload = {"report": report, "sensitivity": sensitivity}
        outcome.summary += "\n" + format_sensitivity(sensitivity)
    return outcome


def _schemes(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.schemes
    spec = _experiment_spec(cfg, problem, params)
    comparison = RateHarness().compare_schemes(spec, [SchemeKind(s) for s in params.schemes], cfg.workers)
    passed = all(r.acceptance is None or r.acceptance.passed for r in comparison.reports.values())
    return RunOutcome(schemes_table(comparison), comparison, format_schemes(comparison), passed)


def _density(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.density
    C, c, calibration, seed = params.C, params.c, None, cfg.seed
    if params.calibrate:
        calibration = diagnostics.calibrate_envelope(
            problem, params.n, params.t_index, params.calibration_paths, cfg.seed,
            margin=params.margin, ci_z=params.ci_z, workers=cfg.workers,
        )
        C, c, seed = calibration.C, calibration.c, (cfg.seed + 1) % 2 ** 64
    report = diagnostics.density_check(
        problem, params.n, params.t_index, params.paths, seed, C, c,
        ci_z=params.ci_z, workers=cfg.workers,
    )
    payload = {"report": report, "calibration": calibration}
    return RunOutcome(density_table(report), payload, format_density(report, calibration))


def _jump_integral(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.jump_integral
    profile = diagnostics.discontinuity_profile(
        problem, params.n_list, params.q, params.paths, cfg.seed, params.block_size, cfg.workers,
    )
    return RunOutcome(jump_table(profile), profile, format_jump(profile))


def _increments(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.increments
    estimates = [
        increment_moment(problem, n, params.q, params.paths, cfg.seed, params.block_size, cfg.workers)
        for n in params.n_list
    ]
    payload = {"problem": problem.name, "q": params.q, "n_list": params.n_list, "estimates": estimates}
    summary = format_increments(problem.name, params.q, params.n_list, estimates, problem.horizon_T)
    return RunOutcome(increments_table(params.n_list, estimates), payload, summary)


def _yw(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.yw
    grid = yamada_watanabe.default_grid(params.grid_points)
    results, samples = [], []
    for delta, eps in zip(params.deltas, params.eps):
        function = yamada_watanabe.build(delta, eps)
        results.append(((delta, eps), yamada_watanabe.check_properties(function, grid, seed=cfg.seed)))
        if params.samples:
            samples.extend((delta, eps) + row for row in yamada_watanabe.sample_table(function))
    outcome = RunOutcome(
        property_table(results), [report for _, report in results],
        format_properties("Yamada-Watanabe properties", [report for _, report in results]),
    )
    if params.samples:
        outcome.extra_tables["yw_samples"] = yw_samples_table(samples)
    return outcome


def _mollify(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.mollify
    base = build_base(params.base)
    seq = mollifier.mollify(base, base.dim_d, base.bound)
    conditions = mollifier.check_A_conditions(seq, params.L, params.N_list, params.a_list, params.u_list)
    outcome = RunOutcome(conditions_table(conditions), {"conditions": conditions}, "")
    extras = []
    if params.convergence:
        report = mollifier.mollifier_convergence(
            seq, problem, params.n, params.kappa, params.N_list, params.paths, cfg.seed, workers=cfg.workers,
        )
        outcome.extra_tables["mollify_convergence"] = convergence_table(report, "mollify-convergence")
        outcome.payload["convergence"] = report
        extras.append(report)
    if params.jump_limit:
        report = mollifier.mollified_jump_limit(
            seq, problem, params.n, params.N_list, params.paths, cfg.seed, workers=cfg.workers,
        )
        outcome.extra_tables["mollify_jump_limit"] = convergence_table(report, "mollify-jump-limit")
        outcome.payload["jump_limit"] = report
        extras.append(report)
    outcome.summary = format_conditions(conditions, extras)
    return outcome


def _komatsu(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    params = cfg.komatsu
    x = np.concatenate([[0.0], np.logspace(-4.0, math.log10(params.x_max), params.points - 1)])
    report = diagnostics.komatsu_check(x)
    tail = ndtr(-x)
    table = komatsu_table(x, tail, diagnostics.komatsu_bound(x))
    return RunOutcome(table, report, format_properties("Komatsu tail bound", [report]))


def _verify(cfg: RunConfig, problem: SdeProblem) -> RunOutcome:
    report = verify_assumptions(problem, cfg.verify.samples, cfg.seed)
    return RunOutcome(verify_table(report), report, format_assumptions(report))


HANDLERS: Dict[str, Callable[[RunConfig, SdeProblem], RunOutcome]] = {
    "rate": _rate,
    "schemes": _schemes,
    "density": _density,
    "jump-integral": _jump_integral,
    "increments": _increments,
    "yw": _yw,
    "mollify": _mollify,
    "komatsu": _komatsu,
    "verify": _verify,
}


def _write_outputs(cfg: RunConfig, outcome: RunOutcome, out: Path) -> List[str]:
    stem = cfg.subcommand.replace("-", "_")
    written = []
    tables: Dict[str, Table] = {stem: outcome.table}
    tables.update(outcome.extra_tables)
    if cfg.format in ("csv", "both"):
        for name, table in tables.items():
            write_csv(out / f"{name}.csv", table)
            written.append(f"{name}.csv")
    if cfg.format in ("json", "both"):
        write_json(out / f"{stem}.json", outcome.payload)
        written.append(f"{stem}.json")
    return written


def execute(cfg: RunConfig, stream=None) -> int:
    """
    Run the configured subcommand, write its files plus metadata.json and
    print the summary. Returns 0, 1 (acceptance band violated) or 2.
    """
    stream = stream or sys.stdout
    started = time.perf_counter()
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error("Cannot use output directory %s: %s", out, exc)
        return EXIT_USAGE

    try:
        problem = ProblemCatalog().get_problem(cfg.problem)
        outcome = HANDLERS[cfg.subcommand](cfg, problem)
    except ArgumentError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except SimulationError as exc:
        logger.error("%s failed: %s", cfg.subcommand, exc)
        return EXIT_USAGE

    status = EXIT_OK if outcome.passed else EXIT_ACCEPTANCE
    try:
        written = _write_outputs(cfg, outcome, out)
        write_json(out / "metadata.json", {
            "config": cfg.model_dump(mode="json"),
            "config_document": serialize_config(cfg),
            "seed": cfg.seed,
            "version": __version__,
            "wall_time_seconds": time.perf_counter() - started,
            "exit_status": status,
            "files": written,
        })
    except OSError as exc:
        logger.error("Cannot write results to %s: %s", out, exc)
        return EXIT_USAGE

    print(outcome.summary, file=stream)
    if status == EXIT_ACCEPTANCE:
        logger.warning("acceptance band violated")
    return status


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Strong-rate experiments for SDEs with irregular drift.",
    )
    parser.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS,
                        help="experiment to run (overrides [run] subcommand)")
    parser.add_argument("--config", help="INI configuration document")
    parser.add_argument("--seed", type=int, help="master seed (u64)")
    parser.add_argument("--workers", type=int, help="worker processes; never changes results")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json", "both"))
    parser.add_argument("--problem", help="preset name, e.g. sign_drift or holder_diffusion(0.25)")
    parser.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--list-problems", action="store_true", help="list presets and exit")
    return parser


def _usage(parser: argparse.ArgumentParser) -> str:
    lines = [parser.format_usage().rstrip(), "", "Examples:",
             "  python -m src.main rate --problem sign_drift --seed 42",
             "  python -m src.main --config experiments/rate.ini --workers 4",
             "  python -m src.main komatsu --format csv",
             "", "Available problems:"]
    lines.extend(f"  {name}" for name in ProblemCatalog().list_problems())
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)

    if args.list_problems:
        for name in ProblemCatalog().list_problems():
            print(name)
        return EXIT_OK

    try:
        if args.config:
            cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        elif args.subcommand:
            cfg = build_config({"subcommand": args.subcommand})
        else:
            print(_usage(parser), file=sys.stderr)
            return EXIT_USAGE
        cfg = with_overrides(
            cfg, subcommand=args.subcommand, seed=args.seed, workers=args.workers,
            output_dir=args.out, format=args.format, problem=args.problem,
        )
        return execute(cfg)
    except (ArgumentError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception("Unexpected error")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
