"""Command-line front end.

Subcommands::

    seqfrac solve <config> [--output P] [--report P] [--kernel K] [--fail-on-violation]
    seqfrac verify [--seed S]
    seqfrac positivity <config> [--tau T] [--samples M] [--fail-on-violation]
    seqfrac compare <config> [--kernel K] [--report P]

Exit status: 0 success, 1 invalid configuration (or a failed identity for
``verify``), 2 numerical failure, 3 positivity violation with
``--fail-on-violation``.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from seqfrac.config import Checks, ConfigError, Outputs, RunConfig, read_config
from seqfrac.errors import NonFiniteStateError, SeriesOverflowError, TruncationNotConvergedError
from seqfrac.oracle import DEFAULT_SEED, run_identity_suite
from seqfrac.positivity import (
    check_trajectory_positivity,
    local_positivity_criterion,
    nonneg_rhs_positivity_check,
)
from seqfrac.solver import (
    Trajectory,
    compare_solvers,
    reconstruct_y,
    solve_linear_series,
    solve_recursive,
    solve_semilinear_series,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VIOLATION = 0, 1, 2, 3
NUMERIC_ERRORS = (NonFiniteStateError, SeriesOverflowError, TruncationNotConvergedError)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text with header ``n,t,x_1..x_dim[,y_1..y_dim]``; ``t = n h + a``."""
    d = traj.dim
    cols = ["n", "t"] + [f"x_{i + 1}" for i in range(d)]
    if traj.aux is not None:
        cols += [f"y_{i + 1}" for i in range(d)]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    times = traj.times
    for n in range(traj.states.shape[0]):
        row = [str(n), _fmt(times[n])] + [_fmt(v) for v in traj.states[n]]
        if traj.aux is not None:
            row += [_fmt(v) for v in traj.aux[n]]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _solve(cfg: RunConfig) -> Trajectory:
    if cfg.solver == "linear-series":
        return solve_linear_series(cfg.to_spec())
    if cfg.solver == "semilinear-series":
        return solve_semilinear_series(cfg.semilinear_spec(), cfg.series_options())
    return solve_recursive(cfg.to_spec())


def _positivity_section(cfg: RunConfig, traj: Trajectory | None) -> tuple[dict, bool]:
    opts = cfg.positivity
    section = {
        "local": local_positivity_criterion(cfg.A, cfg.orders, cfg.h, strict=opts.strict)
    }
    if traj is not None:
        section["trajectory"] = check_trajectory_positivity(traj, opts.tolerance, opts.tau)
    spec = cfg.semilinear_spec()
    if np.all(spec.rhs.gamma >= 0):
        horizon = cfg.N if opts.tau is None else min(opts.tau, cfg.N)
        section["sampled"] = nonneg_rhs_positivity_check(
            spec, opts.samples, horizon, opts.tolerance, seed=cfg.seed
        )
    violated = not all(r.ok for r in section.values())
    return {k: r.to_dict() for k, r in section.items()}, violated


def _discrepancy_section(cfg: RunConfig) -> dict:
    if cfg.gamma_is_zero() and cfg.solver != "semilinear-series":
        spec = replace(cfg, solver="linear-series").to_spec()
    else:
        spec = cfg.semilinear_spec()
    rep = compare_solvers(spec, cfg.series_options())
    return {
        "solver": rep.solver,
        "threshold": rep.threshold,
        "max_error": rep.max_error,
        "flagged_steps": rep.flagged,
        "errors": [float(e) for e in rep.errors],
        "ok": rep.ok,
    }


def _write(text: str, path: str | None, base: Path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    if not target.is_absolute():
        target = base / target
    target.write_text(text)


def run(
    cfg: RunConfig,
    fail_on_violation: bool = False,
    solve: bool = True,
    write_trajectory: bool = True,
) -> int:
    """Execute a validated configuration and write its outputs.

    The trajectory goes to stdout when no path is configured.
    """
    base = Path(cfg.base_dir)
    report: dict = {
        "config": cfg.to_dict(),
        "solver": {"name": cfg.solver, "kernel": cfg.kernel, "N": cfg.N, "dim": cfg.dim},
    }
    status = EXIT_OK
    traj = None
    try:
        if solve:
            traj = _solve(cfg)
            if cfg.checks.reconstruct_y:
                traj = reconstruct_y(cfg.semilinear_spec(), traj)
        if cfg.checks.compare_solvers:
            report["discrepancy"] = _discrepancy_section(cfg)
    except NUMERIC_ERRORS as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NonFiniteStateError):
            report["error"]["step"] = exc.step
        status = EXIT_NUMERIC
        traj = None
    if cfg.checks.positivity and status == EXIT_OK:
        report["positivity"], violated = _positivity_section(cfg, traj)
        if violated and fail_on_violation:
            status = EXIT_VIOLATION
    if cfg.checks.identities:
        results = run_identity_suite(seed=cfg.seed)
        report["identities"] = [r.to_dict() for r in results]
    report["exit_status"] = status

    if traj is not None and write_trajectory:
        _write(trajectory_csv(traj), cfg.outputs.trajectory, base)
    if cfg.outputs.report is not None:
        _write(json.dumps(report, indent=2, sort_keys=True) + "\n", cfg.outputs.report, base)
    if status == EXIT_NUMERIC:
        print(f"numerical failure: {report['error']['message']}", file=sys.stderr)
    return status


def identity_table(results) -> str:
    lines = [f"{'identity':<18} {'tolerance':>10} {'max_rel_err':>12} {'checked':>8}  result"]
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{r.identity_name:<18} {r.tolerance:>10.1e} {r.max_rel_error:>12.3e} {r.checked:>8}  {verdict}"
        )
    return "\n".join(lines) + "\n"


def verify_suite(seed: int = DEFAULT_SEED, perturbation: float = 0.0, report: str | None = None) -> int:
    """Run every identity verifier; exit 0 iff all pass."""
    results = run_identity_suite(seed=seed, perturbation=perturbation)
    sys.stdout.write(identity_table(results))
    failed = [r.identity_name for r in results if not r.passed]
    if report is not None:
        doc = {"seed": seed, "identities": [r.to_dict() for r in results]}
        Path(report).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


# --------------------------------------------------------------------------
# argument handling


def _load(path: str) -> RunConfig | int:
    try:
        return read_config(path)
    except ConfigError as exc:
        for key, reason in exc.problems:
            print(f"config error: {key}: {reason}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _cwd_path(p: str | None) -> str | None:
    # command-line paths are relative to the working directory, not the config
    return None if p is None or p == "-" else str(Path(p).resolve())


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    outputs = cfg.outputs
    if getattr(args, "output", None) is not None:
        outputs = replace(outputs, trajectory=_cwd_path(args.output) or "-")
    if getattr(args, "report", None) is not None:
        outputs = replace(outputs, report=_cwd_path(args.report) or "-")
    kernel = args.kernel if getattr(args, "kernel", None) else cfg.kernel
    return replace(cfg, outputs=outputs, kernel=kernel)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqfrac", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trajectory=True):
        p.add_argument("config", help="JSON run configuration")
        if trajectory:
            p.add_argument("--output", help="trajectory CSV path ('-' for stdout)")
        p.add_argument("--report", help="report JSON path ('-' for stdout)")
        p.add_argument("--kernel", choices=("corrected", "literal"))
        p.add_argument("--fail-on-violation", action="store_true")

    common(sub.add_parser("solve", help="solve and write the trajectory"))
    pos = sub.add_parser("positivity", help="positivity checks only")
    common(pos, trajectory=False)
    pos.add_argument("--tau", type=int)
    pos.add_argument("--samples", type=int)
    common(sub.add_parser("compare", help="recursion against series solver"), trajectory=False)

    ver = sub.add_parser("verify", help="run the identity suite")
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--report", help="write results as JSON")
    ver.add_argument("--perturb-kernel", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return verify_suite(args.seed, args.perturb_kernel, args.report)

    cfg = _load(args.config)
    if isinstance(cfg, int):
        return cfg
    cfg = _apply_flags(cfg, args)
    if args.command == "solve":
        return run(cfg, args.fail_on_violation)

    if args.command == "positivity":
        opts = cfg.positivity
        if args.tau is not None:
            if args.tau < 1:
                print("config error: --tau: must be positive", file=sys.stderr)
                return EXIT_CONFIG
            opts = replace(opts, tau=args.tau)
        if args.samples is not None:
            if args.samples < 1:
                print("config error: --samples: must be positive", file=sys.stderr)
                return EXIT_CONFIG
            opts = replace(opts, samples=args.samples)
        checks = Checks(positivity=True)
        cfg = replace(cfg, positivity=opts, checks=checks)
    else:  # compare
        cfg = replace(cfg, checks=Checks(compare_solvers=True))
    if cfg.outputs.report is None:
        cfg = replace(cfg, outputs=Outputs(report="-"))
    else:
        cfg = replace(cfg, outputs=Outputs(report=cfg.outputs.report))
    return run(
        cfg, args.fail_on_violation, solve=args.command == "positivity", write_trajectory=False
    )


if __name__ == "__main__":
    sys.exit(main())
